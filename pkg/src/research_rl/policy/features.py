"""State features of the linear policy and its value head."""
from __future__ import annotations

import numpy as np

from research_rl.environment.episode import EpisodeState
from research_rl.environment.retriever import tokenize
from research_rl.policy.actions import ActionSpace

FEATURE_SCHEMA_VERSION = 1
FEATURE_NAMES: tuple[str, ...] = (
    "bias",
    "turns_used",
    "searches",
    "gold_overlap",
    "best_hit_score",
    "multi_hop",
    "hops_outstanding",
    "candidate_fill",
    "last_invalid",
    "think_count",
)
FEATURE_DIM = len(FEATURE_NAMES)
FEATURE_CAP = 10.0


def gold_overlap(state: EpisodeState) -> bool:
    """Whether any normalised gold token occurs in the retrieved passages."""
    if not state.retrieved:
        return False
    gold_tokens = {t for g in state.question.gold_answers for t in tokenize(g)}
    return any(t in gold_tokens for doc in state.retrieved for t in tokenize(doc.text))


def features(state: EpisodeState, space: ActionSpace) -> np.ndarray:
    """phi(state), every entry within [0, 10]."""
    slots = space.settings.candidate_slots
    fill = len(space.candidates(state)) / slots if slots else 0.0
    best = state.last_hits.best_score if state.last_hits is not None else 0.0
    think = state.stats.think_count if state.history else 0
    phi = np.array(
        [
            1.0,
            state.turns_used,
            state.search_count,
            float(gold_overlap(state)),
            best,
            float(state.question.hops > 1),
            max(state.question.hops - state.search_count, 0),
            fill,
            float(state.last_invalid),
            think,
        ],
        dtype=np.float64,
    )
    return np.minimum(phi, FEATURE_CAP)
