"""Trajectory batches shared by every optimizer."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator

import numpy as np

from research_rl.core.exceptions import ContractError
from research_rl.policy.rollout import Trajectory
from research_rl.rewards.scoring import RewardBreakdown


@dataclass(frozen=True, eq=False)
class ScoredTrajectory:
    trajectory: Trajectory
    reward: RewardBreakdown

    @property
    def total(self) -> float:
        return self.reward.total


@dataclass(frozen=True, eq=False)
class TrajectoryGroup:
    """``G`` trajectories sampled for the same question."""
    question_id: int
    members: tuple[ScoredTrajectory, ...]

    def __post_init__(self) -> None:
        if not self.members:
            raise ContractError(f"Group for question {self.question_id} is empty")
        for member in self.members:
            if member.trajectory.question_id != self.question_id:
                raise ContractError(
                    f"Trajectory of question {member.trajectory.question_id} "
                    f"placed in group {self.question_id}"
                )

    @property
    def rewards(self) -> np.ndarray:
        return np.array([m.total for m in self.members], dtype=np.float64)

    def __len__(self) -> int:
        return len(self.members)


@dataclass(frozen=True, eq=False)
class TrajectoryBatch:
    groups: tuple[TrajectoryGroup, ...]

    def __post_init__(self) -> None:
        if not self.groups:
            raise ContractError("Batch is empty")
        sizes = {len(g) for g in self.groups}
        if len(sizes) != 1:
            raise ContractError(f"Every group must have the same size, got {sorted(sizes)}")

    @property
    def group_size(self) -> int:
        return len(self.groups[0])

    def members(self) -> Iterator[ScoredTrajectory]:
        """All trajectories in fixed (group, member) order."""
        for group in self.groups:
            yield from group.members

    @property
    def total_steps(self) -> int:
        return sum(len(m.trajectory) for m in self.members())

    @property
    def mean_reward(self) -> float:
        return float(np.mean([m.total for m in self.members()]))

    def stacked_states(self) -> tuple[np.ndarray, np.ndarray]:
        """Features and masks of every decision point, in member order."""
        feats = [m.trajectory.features for m in self.members() if len(m.trajectory)]
        masks = [m.trajectory.masks for m in self.members() if len(m.trajectory)]
        return np.concatenate(feats), np.concatenate(masks)
