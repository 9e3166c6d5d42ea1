"""
Macro-action vocabulary.

The policy picks one macro-action per turn and the action renders to protocol text
under the active grammar mode. The vocabulary is fixed for a whole experiment:
think templates, search query templates, answer candidate slots, a best-guess answer
and an abstention.
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Union

import numpy as np

from research_rl.core.exceptions import ContractError
from research_rl.core.settings import ActionSpaceSettings
from research_rl.core.types import GrammarMode, QueryTemplate
from research_rl.environment.episode import EpisodeState
from research_rl.environment.retriever import tokenize
from research_rl.environment.world import Document

THINK_TEXTS: tuple[str, ...] = (
    "I should look for more information.",
    "Let me reconsider what I already know.",
)
ABSTAIN_TEXT = "I cannot answer this question."

QUESTION_STOPWORDS = frozenset({
    "what", "which", "who", "whom", "whose", "where", "when", "why", "how",
    "is", "are", "was", "were", "the", "a", "an", "of", "in", "on", "to", "or", "and",
})

_STRIP = string.punctuation


@dataclass(frozen=True, slots=True)
class EmitThink:
    template: int


@dataclass(frozen=True, slots=True)
class EmitSearch:
    template: QueryTemplate


@dataclass(frozen=True, slots=True)
class EmitAnswer:
    """Answer with candidate ``slot``; ``None`` is the best-guess slot."""
    slot: int | None


@dataclass(frozen=True, slots=True)
class Abstain:
    pass


MacroAction = Union[EmitThink, EmitSearch, EmitAnswer, Abstain]


def action_name(action: MacroAction) -> str:
    if isinstance(action, EmitThink):
        return f"think_{action.template}"
    if isinstance(action, EmitSearch):
        return f"search_{action.template.value}"
    if isinstance(action, EmitAnswer):
        return "answer_best_guess" if action.slot is None else f"answer_{action.slot}"
    return "abstain"


# ---------------------------------------------------------------------------
# Candidate extraction and query templates
# ---------------------------------------------------------------------------

def _clean(raw: str) -> str:
    return raw.strip(_STRIP)


def _is_candidate(token: str) -> bool:
    return bool(token) and (token[0].isupper() or token.isdigit())


def answer_candidates(state: EpisodeState, limit: int) -> list[str]:
    """Title-case / numeric tokens from the question, then from the retrieved passages."""
    out: list[str] = []
    seen: set[str] = set()
    sources = [state.question.question] + [doc.text for doc in state.retrieved]
    for text in sources:
        for raw in text.split():
            tok = _clean(raw)
            if not _is_candidate(tok) or tok.lower() in QUESTION_STOPWORDS or tok in seen:
                continue
            seen.add(tok)
            out.append(tok)
            if len(out) >= limit:
                return out
    return out


def question_keywords(question: str) -> list[str]:
    words = (_clean(w) for w in question.split())
    return [w for w in words if w and w.lower() not in QUESTION_STOPWORDS]


def best_guess(state: EpisodeState) -> str | None:
    """Last title-case or numeric token of the top-ranked passage."""
    if not state.retrieved:
        return None
    tokens = [_clean(w) for w in state.retrieved[0].text.split()]
    found = [t for t in tokens if _is_candidate(t)]
    return found[-1] if found else None


def anchor_document(state: EpisodeState) -> Document | None:
    """The retrieved passage whose title best covers the tail of the question."""
    if not state.retrieved:
        return None
    positions: dict[str, int] = {}
    for pos, tok in enumerate(tokenize(state.question.question)):
        positions[tok] = pos + 1
    best: tuple[int, int, int] | None = None
    chosen = None
    for rank, doc in enumerate(state.retrieved):
        matched = [positions[t] for t in tokenize(doc.title) if t in positions]
        key = (len(matched), sum(matched), -rank)
        if best is None or key > best:
            best, chosen = key, doc
    return chosen


def bridge_query(state: EpisodeState) -> str | None:
    """Bridge entity of the anchor passage plus question keywords it does not cover."""
    anchor = anchor_document(state)
    if anchor is None:
        return None
    found = [t for t in (_clean(w) for w in anchor.text.split()) if _is_candidate(t)]
    if not found:
        return None
    covered = set(tokenize(f"{anchor.title} {anchor.text}"))
    rest = [w for w in question_keywords(state.question.question) if w.lower() not in covered]
    return " ".join([found[-1], *rest])


def query_text(template: QueryTemplate, state: EpisodeState) -> str | None:
    if template == QueryTemplate.VERBATIM:
        return state.question.question
    if template == QueryTemplate.KEYWORDS:
        return " ".join(question_keywords(state.question.question)) or None
    return bridge_query(state)


# ---------------------------------------------------------------------------
# Action space
# ---------------------------------------------------------------------------

class ActionSpace:
    """An ordered, immutable macro-action vocabulary."""

    def __init__(self, settings: ActionSpaceSettings | None = None):
        self.settings = settings or ActionSpaceSettings()
        s = self.settings
        actions: list[MacroAction] = [EmitThink(t) for t in range(s.think_templates)]
        actions += [EmitSearch(t) for t in s.query_templates]
        actions += [EmitAnswer(i) for i in range(s.candidate_slots)]
        if s.best_guess:
            actions.append(EmitAnswer(None))
        if s.abstain:
            actions.append(Abstain())
        if not actions:
            raise ContractError("Action space is empty")
        self.actions: tuple[MacroAction, ...] = tuple(actions)
        self.names: tuple[str, ...] = tuple(action_name(a) for a in actions)

    def __len__(self) -> int:
        return len(self.actions)

    def __getitem__(self, index: int) -> MacroAction:
        return self.actions[index]

    def index(self, name: str) -> int:
        return self.names.index(name)

    def candidates(self, state: EpisodeState) -> list[str]:
        return answer_candidates(state, self.settings.candidate_slots)

    def mask(self, state: EpisodeState) -> np.ndarray:
        """Boolean availability of every action in ``state``."""
        n_cands = len(self.candidates(state))
        out = np.zeros(len(self.actions), dtype=bool)
        for i, action in enumerate(self.actions):
            if isinstance(action, EmitSearch):
                out[i] = query_text(action.template, state) is not None
            elif isinstance(action, EmitAnswer):
                out[i] = best_guess(state) is not None if action.slot is None else action.slot < n_cands
            else:
                out[i] = True
        return out

    def answer_text(self, action: EmitAnswer, state: EpisodeState) -> str:
        if action.slot is None:
            guess = best_guess(state)
            if guess is None:
                raise ContractError("Best-guess answer is unavailable before any retrieval")
            return guess
        cands = self.candidates(state)
        if action.slot >= len(cands):
            raise ContractError(f"Answer slot {action.slot} is masked ({len(cands)} candidates)")
        return cands[action.slot]

    def render(self, index: int, state: EpisodeState, mode: GrammarMode) -> str:
        """Protocol text emitted by action ``index`` in ``state``."""
        action = self.actions[index]
        slow = mode == GrammarMode.SLOW
        if isinstance(action, EmitThink):
            return f"<think>{THINK_TEXTS[action.template]}</think>"
        if isinstance(action, EmitSearch):
            query = query_text(action.template, state)
            if query is None:
                raise ContractError(f"Query template {action.template} is masked")
            prefix = f"<think>I need to search for {query}</think>" if slow else ""
            return f"{prefix}<search>{query}</search>"
        if isinstance(action, EmitAnswer):
            answer = self.answer_text(action, state)
            prefix = f"<think>The answer is {answer}.</think>" if slow else ""
            return f"{prefix}<answer>{answer}</answer>"
        return ABSTAIN_TEXT
