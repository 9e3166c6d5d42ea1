"""Tests for evaluation metrics, Pearson/binning correlation and collapse detection."""
from __future__ import annotations

import math
import random
from dataclasses import dataclass

import numpy as np
import pytest

from research_rl.core.exceptions import ContractError
from research_rl.core.settings import RewardSpec
from research_rl.core.types import RewardKind
from research_rl.diagnostics import (
    SampleRecord,
    collapse_events,
    detect_collapse,
    pearson,
    quantile_bins,
    read_metrics,
    step_metrics,
    windowed_think_reward_correlation,
    write_metrics,
)
from research_rl.protocol.tags import ProtocolStats

EM = RewardSpec(kind=RewardKind.EM)


@dataclass(frozen=True)
class Outcome:
    prediction: str | None
    golds: tuple[str, ...]
    stats: ProtocolStats


def _answered(prediction: str, gold: str = "1939", think: int = 0) -> Outcome:
    return Outcome(prediction, (gold,), ProtocolStats(think_count=think, search_count=1, answer_count=1,
                                                      response_tokens=3))


def _abstained() -> Outcome:
    return Outcome(None, ("1939",), ProtocolStats(search_count=2, response_tokens=5))


def _compensated_pearson(x: list[float], y: list[float]) -> float:
    n = len(x)
    mx, my = math.fsum(x) / n, math.fsum(y) / n
    sxy = math.fsum((a - mx) * (b - my) for a, b in zip(x, y))
    sxx = math.fsum((a - mx) ** 2 for a in x)
    syy = math.fsum((b - my) ** 2 for b in y)
    return sxy / math.sqrt(sxx * syy)


# ---------------------------------------------------------------------------
# step_metrics
# ---------------------------------------------------------------------------

def test_answer_rate_decomposition_example():
    outcomes = [_answered("1939")] * 6 + [_answered("1941")] * 2 + [_abstained()] * 2
    m = step_metrics(outcomes, EM, step=40)
    assert m.step == 40
    assert m.answer_rate == 0.8
    assert m.answered_only_accuracy == 0.75
    assert m.overall_accuracy == 0.6
    assert m.mean_reward == 0.6
    assert m.mean_search_count == pytest.approx(1.2)
    assert not m.no_answered


def test_all_abstain():
    m = step_metrics([_abstained()] * 4, EM)
    assert m.answer_rate == 0.0
    assert m.overall_accuracy == 0.0
    assert m.answered_only_accuracy == 0.0
    assert m.no_answered


def test_decomposition_identity_on_random_fixtures():
    rng = random.Random(0)
    for _ in range(300):
        outcomes = []
        for _ in range(rng.randint(1, 20)):
            roll = rng.random()
            if roll < 0.3:
                outcomes.append(_abstained())
            else:
                outcomes.append(_answered(rng.choice(["1939", "1941", "the 1939"]), think=rng.randint(0, 3)))
        m = step_metrics(outcomes, RewardSpec(kind=RewardKind.F1_PLUS))
        assert abs(m.overall_accuracy - m.answered_only_accuracy * m.answer_rate) < 1e-9
        answered = [o for o in outcomes if o.prediction is not None]
        assert m.answer_rate == len(answered) / len(outcomes)


def test_answer_length_statistics_cover_answered_episodes_only():
    lengths = [1, 2, 2, 3, 3, 3, 4, 5, 6, 10]
    outcomes = [_answered(" ".join(["w"] * n)) for n in lengths] + [_abstained()] * 2
    m = step_metrics(outcomes, EM)
    assert m.mean_answer_tokens == pytest.approx(3.9)
    assert m.p90_answer_tokens == 6.0


def test_answer_length_statistics_single_and_none():
    m = step_metrics([_answered("12 December 1991"), _abstained()], EM)
    assert m.mean_answer_tokens == 3.0
    assert m.p90_answer_tokens == 3.0
    m = step_metrics([_abstained()] * 3, EM)
    assert m.mean_answer_tokens == 0.0
    assert m.p90_answer_tokens == 0.0


def test_step_metrics_needs_outcomes():
    with pytest.raises(ContractError):
        step_metrics([], EM)


def test_metrics_jsonl_round_trip(tmp_path):
    records = [
        step_metrics([_answered("1939"), _abstained()], EM, step=0),
        step_metrics([_answered("1941"), _answered("1939", think=2)], EM, step=20),
    ]
    path = tmp_path / "metrics.jsonl"
    write_metrics(records[:1], path)
    write_metrics(records[1:], path, append=True)
    assert read_metrics(path) == records
    assert len(path.read_text(encoding="utf-8").splitlines()) == 2


# ---------------------------------------------------------------------------
# pearson
# ---------------------------------------------------------------------------

def test_pearson_affine_examples():
    x = [0.0, 1.0, 2.0, 5.0, 7.5]
    assert pearson(x, [2 * v + 3 for v in x]) == pytest.approx(1.0, abs=1e-15)
    assert pearson(x, [-v for v in x]) == pytest.approx(-1.0, abs=1e-15)


def test_pearson_matches_compensated_oracle():
    rng = np.random.default_rng(1)
    x = rng.normal(size=10_000)
    y = 0.3 * x + rng.normal(size=10_000)
    assert pearson(x, y) == pytest.approx(_compensated_pearson(list(x), list(y)), abs=1e-12)


def test_pearson_symmetry_and_affine_invariance():
    rng = np.random.default_rng(2)
    for _ in range(200):
        x = rng.normal(size=50)
        y = rng.normal(size=50) + x
        rho = pearson(x, y)
        assert abs(rho) <= 1 + 1e-12
        assert pearson(y, x) == pytest.approx(rho, abs=1e-12)
        assert pearson(3.5 * x - 2.0, 0.25 * y + 9.0) == pytest.approx(rho, abs=1e-12)


def test_pearson_drops_nan_pairs_and_flags_constants():
    assert pearson([1.0, math.nan, 2.0, 3.0], [1.0, 5.0, 2.0, 3.0]) == pytest.approx(1.0)
    assert math.isnan(pearson([1.0, 1.0, 1.0], [1.0, 2.0, 3.0]))
    with pytest.raises(ContractError):
        pearson([1.0, 2.0], [1.0])


# ---------------------------------------------------------------------------
# Quantile bins and windowed correlation
# ---------------------------------------------------------------------------

@pytest.mark.parametrize("n", [10_000, 10_007])
def test_equal_frequency_bin_sizes(n: int):
    rng = np.random.default_rng(3)
    think = rng.integers(0, 6, n).astype(float)
    bins = quantile_bins(think, rng.random(n), 10)
    assert len(bins) == 10
    assert all(999 <= b.count <= 1001 for b in bins)
    assert sum(b.count for b in bins) == n
    assert all(a.high <= b.low for a, b in zip(bins, bins[1:]))


def test_reward_equal_to_think_count():
    history = [SampleRecord(step=s // 10, think_count=float(s), reward=float(s)) for s in range(1000)]
    report = windowed_think_reward_correlation(history, collapse_step=100, k=100)
    assert report.rho == pytest.approx(1.0)
    assert report.sample_count == 1000
    assert report.window == (0, 100)
    means = [b.mean_reward for b in report.bins]
    assert all(a < b for a, b in zip(means, means[1:]))


def test_independent_reward_is_uncorrelated():
    rng = np.random.default_rng(4)
    history = [
        SampleRecord(step=int(i % 100), think_count=float(rng.integers(0, 10)), reward=float(rng.random()))
        for i in range(10_000)
    ]
    report = windowed_think_reward_correlation(history, collapse_step=100, k=100)
    assert report.sample_count == 10_000
    assert abs(report.rho) < 0.05


def test_window_excludes_samples_outside_range():
    history = [SampleRecord(step, float(step % 3), 1.0) for step in range(300)]
    report = windowed_think_reward_correlation(history, collapse_step=250, k=100)
    assert report.sample_count == 100
    assert report.window == (150, 250)


def test_single_think_value_is_undefined():
    history = [SampleRecord(step, 2.0, float(step % 2)) for step in range(50)]
    report = windowed_think_reward_correlation(history, collapse_step=50, k=100)
    assert report.undefined
    assert report.to_dict()["rho"] is None
    assert sum(b.count for b in report.bins) == 50


def test_correlation_rejects_bad_window():
    with pytest.raises(ContractError):
        windowed_think_reward_correlation([], collapse_step=10, k=0)


# ---------------------------------------------------------------------------
# Collapse detection
# ---------------------------------------------------------------------------

def test_increasing_series_never_collapses():
    assert detect_collapse([i / 100 for i in range(200)]) is None


def test_plateau_drop_fires_at_first_low_step():
    event = detect_collapse([0.4] * 10 + [0.1] * 5)
    assert event is not None
    assert event.detected_step == 10
    assert event.trailing_max == 0.4
    assert event.drop_fraction == pytest.approx(0.75)
    assert event.drop_fraction >= 0.5


def test_zero_series_never_collapses():
    assert detect_collapse([0.0] * 100) is None


def test_events_reopen_only_after_recovery():
    events = collapse_events([1.0, 1.0, 0.2, 0.2, 1.0, 1.0, 0.1])
    assert [e.detected_step for e in events] == [2, 6]


def test_window_uses_step_numbers():
    scores = [1.0, 0.1, 0.1]
    assert detect_collapse(scores, window=10, steps=[0, 20, 40]) is None
    assert detect_collapse(scores, window=20, steps=[0, 20, 40]).detected_step == 20


def test_detection_is_causal():
    rng = random.Random(5)
    series = [rng.random() for _ in range(300)]
    for event in collapse_events(series, window=20):
        prefix = series[: event.detected_step + 1]
        assert collapse_events(prefix, window=20)[-1] == event


def test_collapse_needs_scores():
    with pytest.raises(ContractError):
        detect_collapse([])
