"""
Question worlds used by experiments.

``synthetic`` worlds come from the fact-table generator with a held-out evaluation
split. ``abstention`` is a fixed ten-question world small enough to solve exactly, and
``bandit`` is a single one-turn question whose two answer actions earn 1 and 0.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass
from typing import Callable

from research_rl.core.settings import ActionSpaceSettings, EnvConfig, RewardSpec, WorldSettings
from research_rl.core.types import GrammarMode, QueryTemplate, WorldKind
from research_rl.environment.episode import EpisodeState, ResearchEnvironment
from research_rl.environment.world import Document, QuestionSpec, build_synthetic_world
from research_rl.policy.actions import ActionSpace
from research_rl.rewards.scoring import reward_breakdown

logger = logging.getLogger(__name__)

ABSTENTION_SEED = 11
ABSTENTION_ACTIONS = ActionSpaceSettings(
    think_templates=0,
    query_templates=(QueryTemplate.VERBATIM,),
    candidate_slots=1,
    best_guess=True,
    abstain=True,
)
ABSTENTION_ENV = EnvConfig(max_turns=3)

BANDIT_ACTIONS = ActionSpaceSettings(
    think_templates=0,
    query_templates=(),
    candidate_slots=2,
    best_guess=False,
    abstain=False,
)
BANDIT_ENV = EnvConfig(max_turns=1)
BANDIT_QUESTION = QuestionSpec(
    question="Which chest holds the treasure, Amber or Cobalt?",
    gold_answers=("Amber",),
    hops=1,
    support_doc_ids=(0,),
)


@dataclass(frozen=True)
class World:
    kind: WorldKind
    corpus: tuple[Document, ...]
    train: tuple[QuestionSpec, ...]
    evaluation: tuple[QuestionSpec, ...]


def bandit_world() -> tuple[list[Document], QuestionSpec]:
    corpus = [Document(0, "Amber chest", "Amber chest holds the treasure.")]
    return corpus, BANDIT_QUESTION


def abstention_world(seed: int = ABSTENTION_SEED) -> tuple[list[Document], list[QuestionSpec], AbstentionMDP]:
    """Five entities with two facts each: ten documents and ten one-hop questions."""
    corpus, questions = build_synthetic_world(seed, 5, 10, 0.0, facts_per_entity=2)
    return corpus, questions, AbstentionMDP(corpus, questions)


def build_world(settings: WorldSettings) -> World:
    """Build the world named by ``settings.kind``; depends on world settings only."""
    if settings.kind == WorldKind.ABSTENTION:
        corpus, questions, _ = abstention_world()
        cut = len(questions) - settings.eval_questions
        return World(settings.kind, tuple(corpus), tuple(questions[:cut]), tuple(questions[cut:]))
    if settings.kind == WorldKind.BANDIT:
        corpus, question = bandit_world()
        return World(settings.kind, tuple(corpus), (question,), (question,))
    corpus, questions = build_synthetic_world(
        settings.seed,
        settings.n_entities,
        settings.n_questions + settings.eval_questions,
        settings.multi_hop_fraction,
        facts_per_entity=settings.facts_per_entity,
    )
    return World(
        settings.kind,
        tuple(corpus),
        tuple(questions[: settings.n_questions]),
        tuple(questions[settings.n_questions:]),
    )


Policy = Callable[[EpisodeState], int]


class AbstentionMDP:
    """
    Exact finite-horizon MDP over macro-actions.

    Transitions are deterministic (retrieval is a pure function), so backward induction
    over the episode tree gives exact values. Values are averaged over questions.
    """

    def __init__(
        self,
        corpus: list[Document],
        questions: list[QuestionSpec],
        env_config: EnvConfig = ABSTENTION_ENV,
        actions: ActionSpaceSettings = ABSTENTION_ACTIONS,
        mode: GrammarMode = GrammarMode.FAST,
    ):
        self.questions = list(questions)
        self.env = ResearchEnvironment(corpus, env_config)
        self.space = ActionSpace(actions)
        self.mode = mode

    def children(self, state: EpisodeState) -> list[tuple[int, EpisodeState]]:
        mask = self.space.mask(state)
        out = []
        for action in range(len(self.space)):
            if mask[action]:
                text = self.space.render(action, state, self.mode)
                out.append((action, self.env.step(state, text, self.mode).state))
        return out

    def terminal_reward(self, state: EpisodeState, spec: RewardSpec) -> float:
        return reward_breakdown(state.answer, state.question.gold_answers, state.stats, spec).total

    def _backup(self, state: EpisodeState, spec: RewardSpec, pick: Callable[[list[float]], float]) -> float:
        if state.terminal:
            return self.terminal_reward(state, spec)
        return pick([self._backup(nxt, spec, pick) for _, nxt in self.children(state)])

    def _mean(self, fn: Callable[[EpisodeState], float]) -> float:
        return sum(fn(self.env.reset(q, i)) for i, q in enumerate(self.questions)) / len(self.questions)

    def optimal_value(self, spec: RewardSpec) -> float:
        return self._mean(lambda s: self._backup(s, spec, max))

    def worst_value(self, spec: RewardSpec) -> float:
        return self._mean(lambda s: self._backup(s, spec, min))

    def best_action(self, state: EpisodeState, spec: RewardSpec) -> int:
        scored = [(self._backup(nxt, spec, max), -a, a) for a, nxt in self.children(state)]
        return max(scored)[2]

    def policy_value(self, policy: Policy, spec: RewardSpec) -> float:
        def run(state: EpisodeState) -> float:
            while not state.terminal:
                action = policy(state)
                text = self.space.render(action, state, self.mode)
                state = self.env.step(state, text, self.mode).state
            return self.terminal_reward(state, spec)

        return self._mean(run)

    def abstain_value(self, spec: RewardSpec) -> float:
        abstain = self.space.index("abstain")
        return self.policy_value(lambda _state: abstain, spec)

    def count_deterministic_policies(self, question_index: int = 0) -> int:
        """Product of available-action counts over every decision node of one episode tree."""
        def count(state: EpisodeState) -> int:
            if state.terminal:
                return 1
            kids = self.children(state)
            total = len(kids)
            for _, nxt in kids:
                total *= count(nxt)
            return total

        question = self.questions[question_index]
        return count(self.env.reset(question, question_index))
