"""Tag grammar of research rollouts."""
from research_rl.protocol.tags import (
    INVALID_ACTION_FEEDBACK,
    Answer,
    Freeform,
    Information,
    ParsedTrajectory,
    ProtocolStats,
    Search,
    Segment,
    Think,
    Violation,
    count_tokens,
    instruction_prompt,
    invalid_action_feedback,
    parse,
    render,
    stats,
)

__all__ = [
    "INVALID_ACTION_FEEDBACK",
    "Answer",
    "Freeform",
    "Information",
    "ParsedTrajectory",
    "ProtocolStats",
    "Search",
    "Segment",
    "Think",
    "Violation",
    "count_tokens",
    "instruction_prompt",
    "invalid_action_feedback",
    "parse",
    "render",
    "stats",
]
