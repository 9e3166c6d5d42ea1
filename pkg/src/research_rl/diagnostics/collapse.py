"""
Causal collapse detection on a score series.

A collapse fires at the first point whose score falls below
``(1 - drop_threshold) * trailing_max``, where ``trailing_max`` is the maximum over the
preceding ``window`` steps and must be positive.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from research_rl.core.exceptions import ContractError


@dataclass(frozen=True, slots=True)
class CollapseEvent:
    detected_step: int
    trailing_max: float
    drop_fraction: float

    def to_dict(self) -> dict[str, float]:
        return {
            "detected_step": self.detected_step,
            "trailing_max": self.trailing_max,
            "drop_fraction": self.drop_fraction,
        }


def _trailing_max(scores: Sequence[float], steps: Sequence[int], t: int, window: int) -> float | None:
    lo = steps[t] - window
    peak = None
    j = t - 1
    while j >= 0 and steps[j] >= lo:
        peak = scores[j] if peak is None else max(peak, scores[j])
        j -= 1
    return peak


def collapse_events(
    scores: Sequence[float],
    window: int = 50,
    drop_threshold: float = 0.5,
    *,
    steps: Sequence[int] | None = None,
) -> list[CollapseEvent]:
    """
    Every collapse in order. An event stays open (no new event can fire) until the
    score climbs back to its firing threshold.

    ``steps`` gives the training step of each score (default: positions); the trailing
    window covers steps ``[step - window, step)``.
    """
    if not scores:
        raise ContractError("Collapse detection needs a non-empty series")
    if steps is None:
        steps = list(range(len(scores)))
    if len(steps) != len(scores):
        raise ContractError("steps and scores must have equal length")

    events: list[CollapseEvent] = []
    open_threshold: float | None = None
    for t in range(1, len(scores)):
        if open_threshold is not None:
            if scores[t] >= open_threshold:
                open_threshold = None
            continue
        peak = _trailing_max(scores, steps, t, window)
        if peak is None or peak <= 0.0:
            continue
        threshold = (1.0 - drop_threshold) * peak
        if scores[t] < threshold:
            events.append(CollapseEvent(int(steps[t]), float(peak), float(1.0 - scores[t] / peak)))
            open_threshold = threshold
    return events


def detect_collapse(
    scores: Sequence[float],
    window: int = 50,
    drop_threshold: float = 0.5,
    *,
    steps: Sequence[int] | None = None,
) -> CollapseEvent | None:
    """First collapse event, or ``None``."""
    events = collapse_events(scores, window, drop_threshold, steps=steps)
    return events[0] if events else None
