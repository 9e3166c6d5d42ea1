"""Post-hoc training-dynamics analysis of a finished run directory."""
from __future__ import annotations

import json
import logging
from pathlib import Path
from typing import Any

from research_rl.core.exceptions import ArtifactIOError, ContractError
from research_rl.diagnostics.collapse import collapse_events
from research_rl.diagnostics.correlation import SampleRecord, windowed_think_reward_correlation
from research_rl.diagnostics.metrics import read_metrics
from research_rl.simulation.experiment import SAMPLES_FILE

logger = logging.getLogger(__name__)


def read_samples(path: Path | str) -> list[SampleRecord]:
    """Per-rollout (step, think_count, reward) records of ``samples.jsonl``."""
    try:
        with open(path, "r", encoding="utf-8") as f:
            rows = [json.loads(line) for line in f if line.strip()]
    except OSError as exc:
        raise ArtifactIOError(f"Cannot read samples {path}: {exc}") from exc
    return [SampleRecord(int(r["step"]), float(r["think_count"]), float(r["reward"])) for r in rows]


def analyze_run(
    metrics_path: Path | str,
    *,
    collapse_window: int = 50,
    drop_threshold: float = 0.5,
    k: int = 100,
    bins: int = 10,
    samples_path: Path | str | None = None,
) -> dict[str, Any]:
    """
    Detect collapses on the evaluation reward series and correlate think count with
    training reward in the ``k`` steps before the first one.

    Without a collapse the window ends after the last recorded training step.
    """
    records = read_metrics(metrics_path)
    if not records:
        raise ContractError(f"{metrics_path} holds no metrics records")
    events = collapse_events(
        [r.mean_reward for r in records],
        collapse_window,
        drop_threshold,
        steps=[r.step for r in records],
    )
    samples_path = Path(samples_path) if samples_path else Path(metrics_path).with_name(SAMPLES_FILE)
    samples = read_samples(samples_path) if samples_path.exists() else []
    if not samples:
        logger.warning("No training samples at %s; correlation is undefined", samples_path)

    if events:
        anchor = events[0].detected_step
    else:
        anchor = (max(s.step for s in samples) + 1) if samples else records[-1].step
    report = windowed_think_reward_correlation(samples, anchor, k=k, bins=bins)
    logger.info(
        "%d collapse event(s); think/reward rho over steps [%d, %d) = %s",
        len(events), report.window[0], report.window[1],
        "undefined" if report.undefined else f"{report.rho:.4f}",
    )
    return {
        "metrics": str(metrics_path),
        "collapse_events": [e.to_dict() for e in events],
        "anchor_step": anchor,
        "anchored_on_collapse": bool(events),
        "correlation": report.to_dict(),
    }
