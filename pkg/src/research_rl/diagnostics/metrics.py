"""Per-step evaluation metrics with the answer-rate decomposition."""
from __future__ import annotations

import json
from dataclasses import asdict, dataclass
from pathlib import Path
from typing import Any, Iterable, Sequence

import numpy as np

from research_rl.core.exceptions import ArtifactIOError, ContractError
from research_rl.core.protocols import EpisodeOutcome
from research_rl.core.settings import RewardSpec
from research_rl.protocol.tags import count_tokens
from research_rl.rewards.scoring import exact_match, reward_breakdown


@dataclass(frozen=True, slots=True)
class StepMetrics:
    """
    Evaluation summary at one training step.

    ``overall_accuracy == answered_only_accuracy * answer_rate``; when nothing was
    answered ``answered_only_accuracy`` is 0 and ``no_answered`` is set.

    Answer lengths are whitespace tokens of the acted-upon answers only;
    ``p90_answer_tokens`` is the smallest length covering 90% of them.
    """
    step: int
    mean_reward: float
    overall_accuracy: float
    answered_only_accuracy: float
    answer_rate: float
    mean_response_tokens: float
    mean_think_count: float
    mean_search_count: float
    mean_answer_tokens: float = 0.0
    p90_answer_tokens: float = 0.0
    no_answered: bool = False

    def to_record(self) -> dict[str, Any]:
        return asdict(self)

    @classmethod
    def from_record(cls, record: dict[str, Any]) -> StepMetrics:
        return cls(**record)


def step_metrics(
    outcomes: Sequence[EpisodeOutcome],
    reward_spec: RewardSpec,
    *,
    step: int = 0,
) -> StepMetrics:
    if not outcomes:
        raise ContractError("step_metrics needs at least one trajectory")
    n = len(outcomes)
    total_reward = 0.0
    correct = answered = answered_correct = 0
    response = think = search = 0
    answer_lengths: list[int] = []
    for o in outcomes:
        total_reward += reward_breakdown(o.prediction, o.golds, o.stats, reward_spec).total
        em = exact_match(o.prediction, o.golds) if o.prediction is not None else 0
        correct += em
        if o.stats.answer_count >= 1:
            answered += 1
            answered_correct += em
            answer_lengths.append(count_tokens(o.prediction or ""))
        response += o.stats.response_tokens
        think += o.stats.think_count
        search += o.stats.search_count
    return StepMetrics(
        step=step,
        mean_reward=total_reward / n,
        overall_accuracy=correct / n,
        answered_only_accuracy=answered_correct / answered if answered else 0.0,
        answer_rate=answered / n,
        mean_response_tokens=response / n,
        mean_think_count=think / n,
        mean_search_count=search / n,
        mean_answer_tokens=sum(answer_lengths) / answered if answered else 0.0,
        p90_answer_tokens=(
            float(np.percentile(answer_lengths, 90, method="inverted_cdf")) if answered else 0.0
        ),
        no_answered=answered == 0,
    )


def write_metrics(records: Iterable[StepMetrics], path: Path | str, *, append: bool = False) -> None:
    """Write one JSON object per line."""
    try:
        with open(path, "a" if append else "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record.to_record()) + "\n")
    except OSError as exc:
        raise ArtifactIOError(f"Cannot write metrics {path}: {exc}") from exc


def read_metrics(path: Path | str) -> list[StepMetrics]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return [StepMetrics.from_record(json.loads(line)) for line in f if line.strip()]
    except OSError as exc:
        raise ArtifactIOError(f"Cannot read metrics {path}: {exc}") from exc
