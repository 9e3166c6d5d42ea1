"""Property-based tests using Hypothesis.

Invariants that must hold for all inputs, not just specific examples.
"""
from __future__ import annotations

import math

import numpy as np
import pytest
from hypothesis import assume, given, settings
from hypothesis import strategies as st

from research_rl.core.settings import RewardSpec
from research_rl.core.types import GrammarMode, RewardKind
from research_rl.diagnostics.correlation import pearson
from research_rl.optimizers.advantages import gae, grpo_advantage, rewards_to_go
from research_rl.protocol.tags import (
    Answer,
    Freeform,
    Information,
    ProtocolStats,
    Search,
    Think,
    count_tokens,
    is_well_formed,
    parse,
    render,
    stats,
)
from research_rl.rewards.scoring import exact_match, reward_breakdown, token_f1

_text = st.text(alphabet=st.characters(blacklist_categories=("Cs",)), max_size=30)
_passage = st.text(alphabet=st.characters(blacklist_categories=("Cs",), blacklist_characters="\n"), max_size=15)

_segment = st.one_of(
    _text.map(Think),
    _text.map(Search),
    _text.map(Answer),
    st.lists(_passage, max_size=3).map(lambda ps: Information(tuple(ps))),
    _text.filter(bool).map(Freeform),
)

_answers = st.text(alphabet="abc ABC.,!-the", max_size=12)
_stats = st.builds(
    ProtocolStats,
    think_count=st.integers(0, 5),
    search_count=st.integers(0, 5),
    answer_count=st.integers(0, 3),
)
_penalty = st.floats(min_value=0.0, max_value=1.0, allow_nan=False)
_finite = st.floats(min_value=-1e3, max_value=1e3, allow_nan=False, allow_infinity=False)


# ---------------------------------------------------------------------------
# Tag protocol
# ---------------------------------------------------------------------------

@given(segments=st.lists(_segment, max_size=8))
def test_render_then_parse_reproduces_well_formed_segments(segments):
    assume(is_well_formed(segments))
    assert parse(render(segments)).segments == tuple(segments)


@given(text=_text)
@settings(max_examples=200)
def test_parse_never_raises_and_counts_are_mode_independent(text):
    fast = parse(text, GrammarMode.FAST)
    slow = parse(text, GrammarMode.SLOW)
    assert fast.segments == slow.segments
    assert stats(fast) == stats(slow)


@given(a=_text, b=_text)
def test_count_tokens_is_additive_over_whitespace_joins(a, b):
    assert count_tokens(a + " " + b) == count_tokens(a) + count_tokens(b)


# ---------------------------------------------------------------------------
# Rewards
# ---------------------------------------------------------------------------

@given(prediction=_answers, golds=st.lists(_answers, min_size=1, max_size=3))
def test_token_f1_bounded_and_implied_by_exact_match(prediction, golds):
    f1 = token_f1(prediction, golds)
    assert 0.0 <= f1 <= 1.0
    if exact_match(prediction, golds):
        assert f1 == 1.0


@given(
    prediction=st.one_of(st.none(), _answers),
    golds=st.lists(_answers, min_size=1, max_size=3),
    protocol=_stats,
    alpha=_penalty,
    beta=_penalty,
)
def test_f1_plus_total_is_outcome_minus_penalties(prediction, golds, protocol, alpha, beta):
    spec = RewardSpec(kind=RewardKind.F1_PLUS, alpha=alpha, beta=beta)
    reward = reward_breakdown(prediction, golds, protocol, spec)
    assert reward.total == reward.outcome - reward.search_penalty - reward.answer_penalty
    assert -(alpha + beta) <= reward.total <= 1.0
    assert reward.search_penalty == (alpha if protocol.search_count == 0 else 0.0)
    assert reward.answer_penalty == (beta if protocol.answer_count == 0 else 0.0)


@given(
    prediction=_answers,
    golds=st.lists(_answers, min_size=1, max_size=3),
    alpha=_penalty,
    beta=st.floats(min_value=1e-6, max_value=1.0, allow_nan=False),
)
def test_searching_and_answering_dominates_abstaining(prediction, golds, alpha, beta):
    spec = RewardSpec(kind=RewardKind.F1_PLUS, alpha=alpha, beta=beta)
    acted = reward_breakdown(prediction, golds, ProtocolStats(search_count=1, answer_count=1), spec)
    abstained = reward_breakdown(None, golds, ProtocolStats(search_count=1), spec)
    assert acted.total > abstained.total


@pytest.mark.parametrize("kind", [RewardKind.EM, RewardKind.F1])
@given(prediction=st.one_of(st.none(), _answers), protocol=_stats)
def test_plain_rewards_carry_no_penalties(kind, prediction, protocol):
    reward = reward_breakdown(prediction, ["abc"], protocol, RewardSpec(kind=kind))
    assert reward.search_penalty == reward.answer_penalty == 0.0
    assert 0.0 <= reward.total <= 1.0


# ---------------------------------------------------------------------------
# Advantages and correlation
# ---------------------------------------------------------------------------

@given(rewards=st.lists(_finite, min_size=2, max_size=16))
def test_group_advantages_sum_to_zero(rewards):
    r = np.array(rewards)
    adv = grpo_advantage(r, 1e-8)
    scale = max(1.0, float(np.abs(r).max()))
    assert abs(float(adv.sum())) * (float(r.std()) + 1e-8) <= 1e-12 * scale * len(r)
    assert float(np.abs(adv).max()) <= math.sqrt(len(rewards))


@given(rewards=st.lists(_finite, min_size=1, max_size=12))
def test_gae_with_zero_values_and_unit_lambda_is_reward_to_go(rewards):
    r = np.array(rewards)
    np.testing.assert_allclose(gae(r, np.zeros(len(r)), 1.0, 1.0).values, rewards_to_go(r, 1.0), atol=1e-9)


@given(pairs=st.lists(st.tuples(_finite, _finite), min_size=2, max_size=40))
def test_pearson_is_bounded_and_symmetric(pairs):
    x = [p[0] for p in pairs]
    y = [p[1] for p in pairs]
    rho = pearson(x, y)
    if math.isnan(rho):
        assert math.isnan(pearson(y, x))
        return
    assert -1.0 <= rho <= 1.0
    assert rho == pytest.approx(pearson(y, x), abs=1e-12)
