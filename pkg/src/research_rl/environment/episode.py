"""
Multi-turn research episodes.

``ResearchEnvironment.step`` consumes one policy emission, acts on its FIRST Search or
Answer segment and returns a new ``EpisodeState`` together with the text the
environment injects in reply. States are immutable; a rollout threads them through.
"""
from __future__ import annotations

import logging
import re
from dataclasses import dataclass, field, replace
from typing import Sequence

from research_rl.core.exceptions import ContractError
from research_rl.core.protocols import Retriever
from research_rl.core.settings import EnvConfig
from research_rl.core.types import GrammarMode, Severity, ViolationKind
from research_rl.environment.retriever import RetrievalResult, TfidfIndex
from research_rl.environment.world import Document, QuestionSpec
from research_rl.protocol.tags import (
    INVALID_ACTION_FEEDBACK,
    RESERVED_TAGS,
    Answer,
    Freeform,
    Information,
    ParsedTrajectory,
    ProtocolStats,
    Search,
    Segment,
    Violation,
    count_tokens,
    parse,
    render,
    render_segment,
    segment_budget_tokens,
    stats,
)

logger = logging.getLogger(__name__)

_TOKEN_RE = re.compile(r"\S+")


def truncate_tokens(text: str, limit: int) -> str:
    """Keep ``text`` up to the end of its ``limit``-th whitespace token."""
    if limit <= 0:
        return ""
    end = None
    for i, match in enumerate(_TOKEN_RE.finditer(text)):
        if i == limit - 1:
            end = match.end()
            break
    return text if end is None else text[:end]


def format_passage(rank: int, doc: Document) -> str:
    """One passage as a single line of plain text; protocol tags in the corpus are blanked out."""
    text = f"Doc {rank}(Title: {doc.title}) {doc.text}"
    for tag in RESERVED_TAGS:
        text = text.replace(tag, " ")
    return " ".join(text.split())


def pack_passages(passages: Sequence[str], budget: int) -> tuple[str, ...]:
    """Keep whole passages while they fit ``budget`` tokens, then cut the last one."""
    kept: list[str] = []
    used = 0
    for passage in passages:
        size = count_tokens(passage)
        if used + size <= budget:
            kept.append(passage)
            used += size
            continue
        room = budget - used
        if room > 0:
            kept.append(truncate_tokens(passage, room))
        break
    return tuple(kept)


@dataclass(frozen=True, slots=True)
class EpisodeState:
    """Everything the environment and the policy know about one episode."""
    question: QuestionSpec
    budgets: EnvConfig
    question_id: int = 0
    history: tuple[Segment, ...] = ()
    turns_used: int = 0
    terminal: bool = False
    context_tokens: int = 0
    violations: tuple[Violation, ...] = ()
    last_hits: RetrievalResult | None = None
    retrieved: tuple[Document, ...] = field(default=())
    answer: str | None = None
    search_count: int = 0
    last_invalid: bool = False

    @property
    def trajectory(self) -> ParsedTrajectory:
        return ParsedTrajectory(self.history, self.violations)

    @property
    def stats(self) -> ProtocolStats:
        return stats(self.trajectory)

    def render(self) -> str:
        return render(self.history)


@dataclass(frozen=True, slots=True)
class StepResult:
    state: EpisodeState
    injected: str
    done: bool


class ResearchEnvironment:
    """Deterministic QA environment over a fixed corpus; shareable across rollouts."""

    def __init__(
        self,
        corpus: Sequence[Document],
        config: EnvConfig | None = None,
        retriever: Retriever | None = None,
    ):
        self.config = config or EnvConfig()
        self.index = TfidfIndex(corpus)
        self.corpus = self.index.corpus
        self.retriever: Retriever = retriever or self.index

    def reset(self, question: QuestionSpec, question_id: int = 0) -> EpisodeState:
        cost = count_tokens(question.question)
        if cost > self.config.max_context_tokens:
            raise ContractError(
                f"Question needs {cost} tokens, context budget is {self.config.max_context_tokens}"
            )
        return EpisodeState(
            question=question,
            budgets=self.config,
            question_id=question_id,
            context_tokens=cost,
        )

    def retrieve(self, query: str) -> RetrievalResult:
        return self.retriever.retrieve(query, self.config.k)

    def step(self, state: EpisodeState, emitted: str, mode: GrammarMode) -> StepResult:
        """Apply one emission. Raises ``ContractError`` on a terminal state."""
        if state.terminal:
            raise ContractError("Cannot step a terminal episode")
        cfg = state.budgets

        parsed = parse(truncate_tokens(emitted, cfg.max_response_tokens), mode, policy_emission=True)
        segments = parsed.segments
        offset = len(state.history)
        violations = [replace(v, index=v.index + offset) for v in parsed.violations]

        actions = parsed.action_indices()
        for extra in actions[1:]:
            violations.append(Violation(extra + offset, ViolationKind.EXTRA_ACTION, Severity.WARNING))
        if not actions:
            violations.append(Violation(offset + len(segments), ViolationKind.NO_ACTION, Severity.WARNING))

        turns = state.turns_used + 1
        emission_cost = sum(segment_budget_tokens(s) for s in segments)
        room = cfg.max_context_tokens - state.context_tokens - emission_cost
        if room < 0:
            logger.debug("Context exhausted at turn %d (question %d)", turns, state.question_id)
            nxt = replace(
                state,
                turns_used=turns,
                terminal=True,
                violations=state.violations + tuple(violations),
            )
            return StepResult(nxt, "", True)

        history = state.history + segments
        used = state.context_tokens + emission_cost
        updates: dict[str, object] = {"last_invalid": False}
        injected = ""
        terminal = False

        action = segments[actions[0]] if actions else None
        if isinstance(action, Answer):
            updates["answer"] = action.text
            terminal = True
        elif isinstance(action, Search):
            hits = self.retrieve(action.query)
            docs = tuple(self.corpus[i] for i in hits.doc_ids)
            updates.update(last_hits=hits, retrieved=docs, search_count=state.search_count + 1)
            if room < 2:
                terminal = True
            else:
                budget = min(cfg.max_info_tokens, room - 2)
                passages = pack_passages(
                    [format_passage(rank, doc) for rank, doc in enumerate(docs, 1)], budget
                )
                info = Information(passages)
                history += (info,)
                used += segment_budget_tokens(info)
                injected = render_segment(info)
        else:
            feedback = Freeform(INVALID_ACTION_FEEDBACK)
            updates["last_invalid"] = True
            cost = segment_budget_tokens(feedback)
            if cost > room:
                terminal = True
            else:
                history += (feedback,)
                used += cost
                injected = INVALID_ACTION_FEEDBACK

        if turns >= cfg.max_turns:
            terminal = True
        nxt = replace(
            state,
            history=history,
            turns_used=turns,
            terminal=terminal,
            context_tokens=used,
            violations=state.violations + tuple(violations),
            **updates,
        )
        return StepResult(nxt, injected, terminal)
