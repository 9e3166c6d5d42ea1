"""
Think-count / reward correlation before a collapse.

Samples inside the window are correlated raw (Pearson) and also summarised by
equal-frequency bins of think count with the mean reward per bin.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any, Sequence

import numpy as np

from research_rl.core.exceptions import ContractError


def pearson(x: Sequence[float], y: Sequence[float]) -> float:
    """Pearson's rho after dropping NaN pairs; NaN when undefined (constant series)."""
    xa = np.asarray(x, dtype=np.float64)
    ya = np.asarray(y, dtype=np.float64)
    if xa.shape != ya.shape or xa.ndim != 1:
        raise ContractError(f"pearson needs equal-length series, got {xa.shape} and {ya.shape}")
    keep = ~(np.isnan(xa) | np.isnan(ya))
    xa, ya = xa[keep], ya[keep]
    if len(xa) < 2:
        return math.nan
    dx = xa - xa.mean()
    dy = ya - ya.mean()
    denom = math.sqrt(float(dx @ dx) * float(dy @ dy))
    if denom == 0.0:
        return math.nan
    return float(np.clip(float(dx @ dy) / denom, -1.0, 1.0))


@dataclass(frozen=True, slots=True)
class QuantileBin:
    """Inclusive think-count range of one equal-frequency bin and its mean reward."""
    low: float
    high: float
    count: int
    mean_reward: float


@dataclass(frozen=True, slots=True)
class SampleRecord:
    step: int
    think_count: float
    reward: float


@dataclass(frozen=True)
class CorrelationReport:
    rho: float
    undefined: bool
    window: tuple[int, int]
    sample_count: int
    bins: tuple[QuantileBin, ...] = field(default=())

    def to_dict(self) -> dict[str, Any]:
        return {
            "rho": None if self.undefined else self.rho,
            "undefined": self.undefined,
            "window": list(self.window),
            "sample_count": self.sample_count,
            "bins": [
                {"low": b.low, "high": b.high, "count": b.count, "mean_reward": b.mean_reward}
                for b in self.bins
            ],
        }


def quantile_bins(think: Sequence[float], reward: Sequence[float], m: int = 10) -> tuple[QuantileBin, ...]:
    """Equal-frequency bins (sizes differ by at most 1); tied values may straddle bins."""
    t = np.asarray(think, dtype=np.float64)
    r = np.asarray(reward, dtype=np.float64)
    if len(t) == 0:
        return ()
    order = np.argsort(t, kind="stable")
    out = []
    for chunk in np.array_split(order, min(m, len(t))):
        values = t[chunk]
        out.append(QuantileBin(float(values.min()), float(values.max()), len(chunk), float(r[chunk].mean())))
    return tuple(out)


def windowed_think_reward_correlation(
    history: Sequence[SampleRecord],
    collapse_step: int,
    k: int = 100,
    bins: int = 10,
) -> CorrelationReport:
    """Correlate think count with reward over steps ``[collapse_step - k, collapse_step)``."""
    if k < 1 or bins < 1:
        raise ContractError(f"k and bins must be >= 1, got k={k} bins={bins}")
    start = collapse_step - k
    window = [s for s in history if start <= s.step < collapse_step]
    think = [s.think_count for s in window]
    reward = [s.reward for s in window]
    if len(set(think)) < 2:
        return CorrelationReport(math.nan, True, (start, collapse_step), len(window), quantile_bins(think, reward, bins))
    rho = pearson(think, reward)
    return CorrelationReport(
        rho=rho,
        undefined=math.isnan(rho),
        window=(start, collapse_step),
        sample_count=len(window),
        bins=quantile_bins(think, reward, bins),
    )
