"""
Outcome rewards: Exact Match, token F1 and the F1 variant with omission penalties.

Every reward kind goes through ``reward_breakdown`` so the per-term decomposition is
always available; EM and F1 simply fix both penalties at zero.
"""
from __future__ import annotations

import re
import string
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

from research_rl.core.exceptions import ContractError
from research_rl.core.settings import RewardSpec
from research_rl.core.types import RewardKind
from research_rl.protocol.tags import ProtocolStats

_ARTICLES = re.compile(r"\b(a|an|the)\b")
_PUNCT = str.maketrans("", "", string.punctuation)


def normalize_answer(text: str) -> list[str]:
    """Lowercase, strip punctuation, drop articles, split on whitespace."""
    return _ARTICLES.sub(" ", text.lower().translate(_PUNCT)).split()


def _require_golds(golds: Sequence[str]) -> None:
    if not golds:
        raise ContractError("At least one gold answer is required")


def exact_match(prediction: str, golds: Sequence[str]) -> int:
    _require_golds(golds)
    pred = normalize_answer(prediction)
    return int(any(pred == normalize_answer(g) for g in golds))


def _f1_tokens(pred: list[str], gold: list[str]) -> float:
    if pred == gold:
        return 1.0
    if not pred or not gold:
        return 0.0
    overlap = sum((Counter(pred) & Counter(gold)).values())
    if overlap == 0:
        return 0.0
    precision = overlap / len(pred)
    recall = overlap / len(gold)
    return 2 * precision * recall / (precision + recall)


def token_f1(prediction: str, golds: Sequence[str]) -> float:
    """Multiset token F1 against the best-matching gold."""
    _require_golds(golds)
    pred = normalize_answer(prediction)
    return max(_f1_tokens(pred, normalize_answer(g)) for g in golds)


@dataclass(frozen=True, slots=True)
class RewardBreakdown:
    outcome: float
    search_penalty: float
    answer_penalty: float
    total: float

    def to_dict(self) -> dict[str, float]:
        return {
            "outcome": self.outcome,
            "search_penalty": self.search_penalty,
            "answer_penalty": self.answer_penalty,
            "total": self.total,
        }


def outcome_score(prediction: str | None, golds: Sequence[str], kind: RewardKind) -> float:
    """EM or F1 of the acted-upon answer; 0 when the episode produced none."""
    _require_golds(golds)
    if prediction is None:
        return 0.0
    if kind == RewardKind.EM:
        return float(exact_match(prediction, golds))
    return token_f1(prediction, golds)


def reward_breakdown(
    prediction: str | None,
    golds: Sequence[str],
    stats: ProtocolStats,
    spec: RewardSpec,
) -> RewardBreakdown:
    """Score one finished episode under ``spec`` (penalties count once per episode)."""
    outcome = outcome_score(prediction, golds, spec.kind)
    if spec.kind == RewardKind.F1_PLUS:
        search_penalty = spec.alpha if stats.search_count == 0 else 0.0
        answer_penalty = spec.beta if stats.answer_count == 0 else 0.0
    else:
        search_penalty = answer_penalty = 0.0
    return RewardBreakdown(
        outcome=outcome,
        search_penalty=search_penalty,
        answer_penalty=answer_penalty,
        total=outcome - search_penalty - answer_penalty,
    )


def f1_plus(
    prediction: str | None,
    golds: Sequence[str],
    stats: ProtocolStats,
    spec: RewardSpec,
) -> RewardBreakdown:
    """F1 outcome minus ``alpha`` without a search and ``beta`` without an answer."""
    if spec.kind != RewardKind.F1_PLUS:
        raise ContractError(f"f1_plus needs a reward spec of kind f1_plus, got {spec.kind}")
    return reward_breakdown(prediction, golds, stats, spec)
