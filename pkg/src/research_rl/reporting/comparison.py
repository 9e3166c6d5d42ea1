"""Cross-run comparison utilities.

Provides:
- Run summaries loaded from ``summary.json`` files
- Leaderboard ranking by evaluation accuracy
"""
from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Sequence

from research_rl.core.exceptions import ArtifactIOError
from research_rl.simulation.experiment import SUMMARY_FILE

logger = logging.getLogger(__name__)


@dataclass
class RunScore:
    """Headline numbers of one finished run."""
    name: str
    run_dir: str
    grammar: str
    reward_kind: str
    algorithm: str
    overall_accuracy: float = 0.0
    answer_rate: float = 0.0
    mean_search_count: float = 0.0
    collapses: int = 0
    extra: dict[str, Any] = field(default_factory=dict)

    @property
    def rank_key(self) -> tuple[float, float, int]:
        """Higher accuracy first, then higher answer rate, then fewer collapses."""
        return (self.overall_accuracy, self.answer_rate, -self.collapses)

    @classmethod
    def from_summary(cls, summary: dict[str, Any], run_dir: str = "") -> RunScore:
        known = {"name", "grammar", "reward_kind", "algorithm", "overall_accuracy",
                 "answer_rate", "mean_search_count", "collapse_events"}
        return cls(
            name=summary.get("name", Path(run_dir).name),
            run_dir=run_dir,
            grammar=summary.get("grammar", "?"),
            reward_kind=summary.get("reward_kind", "?"),
            algorithm=summary.get("algorithm", "?"),
            overall_accuracy=float(summary.get("overall_accuracy", 0.0)),
            answer_rate=float(summary.get("answer_rate", 0.0)),
            mean_search_count=float(summary.get("mean_search_count", 0.0)),
            collapses=len(summary.get("collapse_events", [])),
            extra={k: v for k, v in summary.items() if k not in known},
        )


def load_summary(run_dir: str | Path) -> dict[str, Any]:
    path = Path(run_dir) / SUMMARY_FILE
    try:
        with open(path, "r", encoding="utf-8") as f:
            return json.load(f)
    except OSError as exc:
        raise ArtifactIOError(f"Cannot read run summary {path}: {exc}") from exc


def build_leaderboard(scores: Sequence[RunScore]) -> list[RunScore]:
    """Rank runs best first; ties keep input order."""
    return sorted(scores, key=lambda s: s.rank_key, reverse=True)


def compare_runs(run_dirs: Sequence[str | Path]) -> list[RunScore]:
    """Load every run directory holding a summary and rank them.

    Directories without ``summary.json`` (unfinished or aborted runs) are skipped
    with a warning.
    """
    scores: list[RunScore] = []
    for run_dir in run_dirs:
        run_dir = Path(run_dir)
        if not (run_dir / SUMMARY_FILE).exists():
            logger.warning("Skipping %s: no %s", run_dir, SUMMARY_FILE)
            continue
        scores.append(RunScore.from_summary(load_summary(run_dir), str(run_dir)))
    return build_leaderboard(scores)


def format_leaderboard(board: Sequence[RunScore]) -> str:
    """Format a leaderboard as a text table."""
    lines = [
        f"{'Rank':<6}{'Run':<24}{'Setup':<28}{'Acc':>8}{'Answer%':>10}{'Search':>8}{'Coll':>6}",
        "-" * 90,
    ]
    for i, s in enumerate(board, 1):
        setup = f"{s.grammar}/{s.reward_kind}/{s.algorithm}"
        lines.append(
            f"{i:<6}{s.name[:23]:<24}{setup[:27]:<28}{s.overall_accuracy:>8.3f}"
            f"{s.answer_rate:>10.1%}{s.mean_search_count:>8.2f}{s.collapses:>6d}"
        )
    return "\n".join(lines)
