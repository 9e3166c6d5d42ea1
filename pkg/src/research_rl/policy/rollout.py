"""
Sampling episodes from the linear policy.

A rollout threads an ``EpisodeState`` through the environment, drawing one macro-action
per turn by inverse-CDF sampling from the masked softmax. The seed fully determines the
draws, so identical (params, seed, world) give a byte-identical trajectory.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from research_rl.core.types import GrammarMode
from research_rl.environment.episode import EpisodeState, ResearchEnvironment
from research_rl.environment.world import QuestionSpec
from research_rl.policy.actions import ActionSpace
from research_rl.policy.features import features
from research_rl.policy.linear import PolicyParams, masked_log_softmax
from research_rl.protocol.tags import ProtocolStats

SeedLike = int | np.random.SeedSequence | np.random.Generator


@dataclass(frozen=True, eq=False)
class Trajectory:
    """One finished episode with everything an optimizer needs to replay its decisions."""
    question_id: int
    question: QuestionSpec
    features: np.ndarray
    masks: np.ndarray
    actions: tuple[int, ...]
    log_probs: tuple[float, ...]
    emitted: tuple[str, ...]
    injected: tuple[str, ...]
    final_state: EpisodeState
    stats: ProtocolStats
    text: str

    @property
    def prediction(self) -> str | None:
        return self.final_state.answer

    @property
    def golds(self) -> tuple[str, ...]:
        return self.question.gold_answers

    def __len__(self) -> int:
        return len(self.actions)


def _build(
    question_id: int,
    question: QuestionSpec,
    final: EpisodeState,
    phis: list[np.ndarray],
    masks: list[np.ndarray],
    actions: list[int],
    logps: list[float],
    emitted: list[str],
    injected: list[str],
) -> Trajectory:
    return Trajectory(
        question_id=question_id,
        question=question,
        features=np.array(phis, dtype=np.float64).reshape(len(phis), -1),
        masks=np.array(masks, dtype=bool).reshape(len(masks), -1),
        actions=tuple(actions),
        log_probs=tuple(logps),
        emitted=tuple(emitted),
        injected=tuple(injected),
        final_state=final,
        stats=final.stats,
        text=final.render(),
    )


def sample_action(logp: np.ndarray, mask: np.ndarray, rng: np.random.Generator) -> int:
    """Inverse-CDF draw; the final unmasked action absorbs rounding slack."""
    cdf = np.cumsum(np.exp(logp))
    index = int(np.searchsorted(cdf, rng.random(), side="right"))
    if index >= len(cdf):
        index = int(np.flatnonzero(mask)[-1])
    return index


def rollout(
    params: PolicyParams,
    env: ResearchEnvironment,
    question: QuestionSpec,
    seed: SeedLike,
    mode: GrammarMode,
    space: ActionSpace,
    *,
    question_id: int = 0,
    greedy: bool = False,
) -> Trajectory:
    """Run one episode to termination (at most ``max_turns`` decisions)."""
    rng = seed if isinstance(seed, np.random.Generator) else np.random.default_rng(seed)
    state = env.reset(question, question_id)
    phis: list[np.ndarray] = []
    masks: list[np.ndarray] = []
    actions: list[int] = []
    logps: list[float] = []
    emitted: list[str] = []
    injected: list[str] = []

    while not state.terminal:
        phi = features(state, space)
        mask = space.mask(state)
        logp = masked_log_softmax(params.weights @ phi, mask)
        action = int(np.argmax(logp)) if greedy else sample_action(logp, mask, rng)
        text = space.render(action, state, mode)
        result = env.step(state, text, mode)

        phis.append(phi)
        masks.append(mask)
        actions.append(action)
        logps.append(float(logp[action]))
        emitted.append(text)
        injected.append(result.injected)
        state = result.state

    return _build(question_id, question, state, phis, masks, actions, logps, emitted, injected)


def enumerate_trajectories(
    params: PolicyParams,
    env: ResearchEnvironment,
    question: QuestionSpec,
    mode: GrammarMode,
    space: ActionSpace,
    *,
    question_id: int = 0,
) -> list[tuple[float, Trajectory]]:
    """Every reachable trajectory with its exact probability under ``params``."""
    out: list[tuple[float, Trajectory]] = []

    def walk(state: EpisodeState, prob: float, phis, masks, actions, logps, emitted, injected) -> None:
        if state.terminal:
            out.append((prob, _build(question_id, question, state, phis, masks, actions, logps, emitted, injected)))
            return
        phi = features(state, space)
        mask = space.mask(state)
        logp = masked_log_softmax(params.weights @ phi, mask)
        for action in np.flatnonzero(mask):
            a = int(action)
            text = space.render(a, state, mode)
            result = env.step(state, text, mode)
            walk(
                result.state,
                prob * float(np.exp(logp[a])),
                phis + [phi],
                masks + [mask],
                actions + [a],
                logps + [float(logp[a])],
                emitted + [text],
                injected + [result.injected],
            )

    walk(env.reset(question, question_id), 1.0, [], [], [], [], [], [])
    return out


def exact_expectation(
    params: PolicyParams,
    env: ResearchEnvironment,
    question: QuestionSpec,
    mode: GrammarMode,
    space: ActionSpace,
    fn: Callable[[Trajectory], float],
) -> float:
    """``E[fn(trajectory)]`` by exhaustive enumeration."""
    return float(sum(p * fn(t) for p, t in enumerate_trajectories(params, env, question, mode, space)))
