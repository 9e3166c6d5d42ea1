"""Outcome rewards and their per-term decomposition."""
from research_rl.rewards.scoring import (
    RewardBreakdown,
    exact_match,
    f1_plus,
    normalize_answer,
    reward_breakdown,
    token_f1,
)

__all__ = [
    "RewardBreakdown",
    "exact_match",
    "f1_plus",
    "normalize_answer",
    "reward_breakdown",
    "token_f1",
]
