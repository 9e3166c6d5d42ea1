"""Advantage estimators: generalized advantage estimation and group-relative scores."""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from research_rl.core.exceptions import ContractError
from research_rl.core.types import AdvantageMethod


@dataclass(frozen=True, eq=False)
class AdvantageEstimate:
    values: np.ndarray
    method: AdvantageMethod

    def __post_init__(self) -> None:
        if not np.all(np.isfinite(self.values)):
            raise ContractError("Advantages must be finite")

    def __len__(self) -> int:
        return len(self.values)


def gae(
    rewards: Sequence[float],
    values: Sequence[float],
    gamma: float,
    lam: float,
) -> AdvantageEstimate:
    """Backward recursion ``A_t = delta_t + gamma * lam * A_{t+1}`` with ``V_T = 0``."""
    r = np.asarray(rewards, dtype=np.float64)
    v = np.asarray(values, dtype=np.float64)
    if r.shape != v.shape or r.ndim != 1 or len(r) == 0:
        raise ContractError(f"rewards and values must be equal non-empty 1-D, got {r.shape} and {v.shape}")
    adv = np.zeros_like(r)
    running = 0.0
    for t in range(len(r) - 1, -1, -1):
        next_value = v[t + 1] if t + 1 < len(r) else 0.0
        delta = r[t] + gamma * next_value - v[t]
        running = delta + gamma * lam * running
        adv[t] = running
    return AdvantageEstimate(adv, AdvantageMethod.GAE)


def rewards_to_go(rewards: Sequence[float], gamma: float) -> np.ndarray:
    r = np.asarray(rewards, dtype=np.float64)
    out = np.zeros_like(r)
    running = 0.0
    for t in range(len(r) - 1, -1, -1):
        running = r[t] + gamma * running
        out[t] = running
    return out


def terminal_rewards(length: int, reward: float) -> np.ndarray:
    """Per-step rewards of an episode scored only at its end."""
    r = np.zeros(length, dtype=np.float64)
    if length:
        r[-1] = reward
    return r


def grpo_advantage(group_rewards: Sequence[float], std_epsilon: float) -> np.ndarray:
    """``(r - mean) / (std + eps)`` with population std; equal rewards give exact zeros."""
    r = np.asarray(group_rewards, dtype=np.float64)
    if len(r) < 2:
        raise ContractError(f"Group advantage needs at least 2 rewards, got {len(r)}")
    centred = r - r.mean()
    if np.all(r == r[0]):
        return np.zeros_like(r)
    return centred / (r.std() + std_epsilon)


def baseline_advantage(group_rewards: Sequence[float], use_group_baseline: bool) -> tuple[np.ndarray, float]:
    """Return ``(R - b, b)`` where ``b`` is the group mean or 0."""
    r = np.asarray(group_rewards, dtype=np.float64)
    b = float(r.mean()) if use_group_baseline else 0.0
    return r - b, b
