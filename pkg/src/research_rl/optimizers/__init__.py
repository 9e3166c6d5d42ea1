"""REINFORCE, PPO and GRPO over a shared trajectory-batch interface."""
from research_rl.optimizers.advantages import AdvantageEstimate, gae, grpo_advantage
from research_rl.optimizers.batch import ScoredTrajectory, TrajectoryBatch, TrajectoryGroup
from research_rl.optimizers.updates import (
    UpdateDiagnostics,
    apply_update,
    grpo_update,
    kl_penalty,
    ppo_update,
    reinforce_update,
)

__all__ = [
    "AdvantageEstimate",
    "ScoredTrajectory",
    "TrajectoryBatch",
    "TrajectoryGroup",
    "UpdateDiagnostics",
    "apply_update",
    "gae",
    "grpo_advantage",
    "grpo_update",
    "kl_penalty",
    "ppo_update",
    "reinforce_update",
]
