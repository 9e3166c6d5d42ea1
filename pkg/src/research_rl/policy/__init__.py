"""Linear softmax macro-action policy, its features and rollouts."""
from research_rl.policy.actions import Abstain, ActionSpace, EmitAnswer, EmitSearch, EmitThink, MacroAction
from research_rl.policy.features import FEATURE_DIM, features
from research_rl.policy.linear import (
    PolicyParams,
    action_distribution,
    grad_log_prob,
    log_prob,
    value,
    value_gradient,
)
from research_rl.policy.rollout import Trajectory, enumerate_trajectories, rollout

__all__ = [
    "FEATURE_DIM",
    "Abstain",
    "ActionSpace",
    "EmitAnswer",
    "EmitSearch",
    "EmitThink",
    "MacroAction",
    "PolicyParams",
    "Trajectory",
    "action_distribution",
    "enumerate_trajectories",
    "features",
    "grad_log_prob",
    "log_prob",
    "rollout",
    "value",
    "value_gradient",
]
