"""Shared type definitions for the research RL lab."""
from __future__ import annotations

from enum import StrEnum


class GrammarMode(StrEnum):
    """Instruction template family governing the tag grammar."""
    FAST = "fast"
    SLOW = "slow"


class Severity(StrEnum):
    """How badly a protocol violation breaks a trajectory."""
    WARNING = "warning"
    FATAL = "fatal"


class ViolationKind(StrEnum):
    """Canonical names for protocol defects found by the parser and the environment."""
    UNCLOSED_TAG = "unclosed_tag"
    STRAY_CLOSE_TAG = "stray_close_tag"
    UNKNOWN_TAG = "unknown_tag"
    THINK_IN_FAST_MODE = "think_in_fast_mode"
    MISSING_THINK = "missing_think"
    INJECTED_BY_POLICY = "injected_by_policy"
    EXTRA_ACTION = "extra_action"
    NO_ACTION = "no_action"


class RewardKind(StrEnum):
    """Outcome reward families."""
    EM = "em"
    F1 = "f1"
    F1_PLUS = "f1_plus"


class Algorithm(StrEnum):
    """Policy optimization algorithms sharing the TrajectoryBatch interface."""
    REINFORCE = "reinforce"
    PPO = "ppo"
    GRPO = "grpo"


class AdvantageMethod(StrEnum):
    """How per-step advantages were estimated."""
    MC_BASELINE = "mc_baseline"
    GAE = "gae"
    GROUP_RELATIVE = "group_relative"


class WorldKind(StrEnum):
    """Question worlds the runner knows how to build."""
    SYNTHETIC = "synthetic"
    ABSTENTION = "abstention"
    BANDIT = "bandit"


class QueryTemplate(StrEnum):
    """Search query templates available to EmitSearch actions."""
    VERBATIM = "verbatim"
    KEYWORDS = "keywords"
    BRIDGE = "bridge"
