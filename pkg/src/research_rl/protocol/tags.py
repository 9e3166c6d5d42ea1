"""
Tag grammar for research rollouts.

A rollout is plain text in which the policy emits ``<think>``, ``<search>`` and
``<answer>`` regions and the environment injects ``<information>`` regions. This module
parses that text into segments, renders segments back to text, counts protocol
statistics and checks the Fast / Slow grammar rules.

The parser is a single forward scan. An open tag closes at the FIRST matching close
tag, so ``<think> <think>x</think> </think>`` yields one Think segment whose text holds
the inner opener, followed by Freeform text holding a stray closer.
"""
from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Final, Union

from research_rl.core.exceptions import TagRenderError
from research_rl.core.types import GrammarMode, Severity, ViolationKind

TAG_NAMES: Final[tuple[str, ...]] = ("think", "search", "information", "answer")
OPEN_TAGS: Final[dict[str, str]] = {name: f"<{name}>" for name in TAG_NAMES}
CLOSE_TAGS: Final[dict[str, str]] = {name: f"</{name}>" for name in TAG_NAMES}
RESERVED_TAGS: Final[tuple[str, ...]] = tuple(OPEN_TAGS.values()) + tuple(CLOSE_TAGS.values())

INVALID_ACTION_FEEDBACK: Final[str] = (
    "My previous action is invalid. If I want to search, I should put the query between "
    "<search> and </search>. If I want to give the final answer, I should put the answer "
    "between <answer> and </answer>. Let me try again.\n"
)

_KNOWN_TAG_RE = re.compile(r"<(/?)(think|search|information|answer)>")
_ANY_TAG_RE = re.compile(r"</?[A-Za-z_][\w-]*>")


# ---------------------------------------------------------------------------
# Segments
# ---------------------------------------------------------------------------

@dataclass(frozen=True, slots=True)
class Think:
    text: str


@dataclass(frozen=True, slots=True)
class Search:
    query: str


@dataclass(frozen=True, slots=True)
class Information:
    """Environment-injected passages, one per line of the rendered region."""
    passages: tuple[str, ...] = ()


@dataclass(frozen=True, slots=True)
class Answer:
    text: str


@dataclass(frozen=True, slots=True)
class Freeform:
    text: str


Segment = Union[Think, Search, Information, Answer, Freeform]

_POLICY_SEGMENTS = (Think, Search, Answer, Freeform)


@dataclass(frozen=True, slots=True)
class Violation:
    """A protocol defect attached to the segment at ``index``."""
    index: int
    kind: ViolationKind
    severity: Severity


@dataclass(frozen=True, slots=True)
class ParsedTrajectory:
    segments: tuple[Segment, ...] = ()
    violations: tuple[Violation, ...] = ()

    @property
    def is_valid(self) -> bool:
        return not any(v.severity == Severity.FATAL for v in self.violations)

    def action_indices(self) -> list[int]:
        """Indices of Search and Answer segments, in order."""
        return [i for i, s in enumerate(self.segments) if isinstance(s, (Search, Answer))]


@dataclass(frozen=True, slots=True)
class ProtocolStats:
    think_count: int = 0
    search_count: int = 0
    answer_count: int = 0
    reasoning_tokens: int = 0
    information_tokens: int = 0
    response_tokens: int = 0


# ---------------------------------------------------------------------------
# Tokens
# ---------------------------------------------------------------------------

def count_tokens(text: str) -> int:
    """Whitespace token count, the length unit used for every budget and counter."""
    return len(text.split())


def segment_content(segment: Segment) -> str:
    """Text between the delimiting tags (or the whole text for Freeform)."""
    if isinstance(segment, Think):
        return segment.text
    if isinstance(segment, Search):
        return segment.query
    if isinstance(segment, Information):
        return "\n".join(segment.passages)
    if isinstance(segment, Answer):
        return segment.text
    return segment.text


def segment_budget_tokens(segment: Segment) -> int:
    """Budget size of a segment: content tokens plus one per delimiting tag."""
    tags = 0 if isinstance(segment, Freeform) else 2
    return count_tokens(segment_content(segment)) + tags


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------

def _make_segment(name: str, content: str) -> Segment:
    if name == "think":
        return Think(content)
    if name == "search":
        return Search(content)
    if name == "answer":
        return Answer(content)
    return Information(tuple(content.split("\n")) if content else ())


def parse(
    text: str,
    mode: GrammarMode = GrammarMode.FAST,
    *,
    policy_emission: bool = False,
) -> ParsedTrajectory:
    """
    Split a rollout into segments. Never raises.

    Text outside known tags becomes Freeform. An unclosed tag turns the rest of the
    input into one Freeform segment with a fatal ``unclosed_tag`` violation. Occurrences
    of the canonical retry string are kept verbatim inside Freeform text.
    """
    segments: list[Segment] = []
    violations: list[Violation] = []
    n = len(text)
    pos = 0
    free_start = 0
    feedback_len = len(INVALID_ACTION_FEEDBACK)
    feedback_at = text.find(INVALID_ACTION_FEEDBACK)

    def flush(end: int) -> None:
        if end > free_start:
            segments.append(Freeform(text[free_start:end]))

    while pos < n:
        lt = text.find("<", pos)
        if lt == -1:
            break
        if feedback_at != -1 and feedback_at < lt:
            pos = feedback_at + feedback_len
            feedback_at = text.find(INVALID_ACTION_FEEDBACK, pos)
            continue

        known = _KNOWN_TAG_RE.match(text, lt)
        if known is None:
            unknown = _ANY_TAG_RE.match(text, lt)
            if unknown is not None:
                violations.append(Violation(len(segments), ViolationKind.UNKNOWN_TAG, Severity.WARNING))
                pos = unknown.end()
            else:
                pos = lt + 1
            continue

        if known.group(1):
            violations.append(Violation(len(segments), ViolationKind.STRAY_CLOSE_TAG, Severity.WARNING))
            pos = known.end()
            continue

        name = known.group(2)
        content_start = known.end()
        close_at = text.find(CLOSE_TAGS[name], content_start)
        if close_at == -1:
            violations.append(Violation(len(segments), ViolationKind.UNCLOSED_TAG, Severity.FATAL))
            segments.append(Freeform(text[free_start:]))
            free_start = pos = n
            break

        flush(lt)
        segments.append(_make_segment(name, text[content_start:close_at]))
        pos = free_start = close_at + len(CLOSE_TAGS[name])
        if feedback_at != -1 and feedback_at < pos:
            feedback_at = text.find(INVALID_ACTION_FEEDBACK, pos)

    flush(n)
    violations.extend(_grammar_violations(segments, mode, policy_emission))
    violations.sort(key=lambda v: v.index)
    return ParsedTrajectory(tuple(segments), tuple(violations))


def _grammar_violations(
    segments: list[Segment], mode: GrammarMode, policy_emission: bool
) -> list[Violation]:
    found: list[Violation] = []
    thought = False
    for i, seg in enumerate(segments):
        if isinstance(seg, Information):
            if policy_emission:
                found.append(Violation(i, ViolationKind.INJECTED_BY_POLICY, Severity.FATAL))
            thought = False
        elif isinstance(seg, Think):
            if mode == GrammarMode.FAST:
                found.append(Violation(i, ViolationKind.THINK_IN_FAST_MODE, Severity.WARNING))
            thought = True
        elif isinstance(seg, (Search, Answer)):
            if mode == GrammarMode.SLOW and not thought:
                found.append(Violation(i, ViolationKind.MISSING_THINK, Severity.FATAL))
            thought = False
    return found


# ---------------------------------------------------------------------------
# Rendering
# ---------------------------------------------------------------------------

def _check_renderable(text: str, *, allow_feedback: bool = False) -> None:
    checked = text.replace(INVALID_ACTION_FEEDBACK, "") if allow_feedback else text
    for tag in RESERVED_TAGS:
        if tag in checked:
            raise TagRenderError(f"Segment text contains reserved tag {tag!r}: {text[:60]!r}")


def render_segment(segment: Segment) -> str:
    if isinstance(segment, Freeform):
        _check_renderable(segment.text, allow_feedback=True)
        return segment.text
    if isinstance(segment, Information):
        if segment.passages == ("",):
            raise TagRenderError("A single empty passage cannot be told apart from no passages")
        if any("\n" in p for p in segment.passages):
            raise TagRenderError("Information passages must not contain newlines")
    content = segment_content(segment)
    _check_renderable(content)
    name = type(segment).__name__.lower()
    return f"{OPEN_TAGS[name]}{content}{CLOSE_TAGS[name]}"


def render(segments: list[Segment] | tuple[Segment, ...]) -> str:
    """Concatenate segments with canonical tags; inverse of ``parse`` on well-formed input."""
    return "".join(render_segment(s) for s in segments)


def is_well_formed(segments: list[Segment] | tuple[Segment, ...]) -> bool:
    """True when ``parse(render(segments)).segments`` reproduces ``segments`` exactly."""
    previous_free = False
    for seg in segments:
        try:
            render_segment(seg)
        except TagRenderError:
            return False
        if isinstance(seg, Freeform):
            if not seg.text or previous_free:
                return False
            previous_free = True
        else:
            previous_free = False
    return True


# ---------------------------------------------------------------------------
# Counters and fixed strings
# ---------------------------------------------------------------------------

def stats(trajectory: ParsedTrajectory) -> ProtocolStats:
    """Count tags and tokens. Identical under every grammar mode."""
    think = search = answer = 0
    reasoning = information = response = 0
    for seg in trajectory.segments:
        if isinstance(seg, Think):
            think += 1 + seg.text.count(OPEN_TAGS["think"])
            tokens = count_tokens(seg.text)
            reasoning += tokens
            response += tokens
        elif isinstance(seg, Search):
            search += 1
            response += count_tokens(seg.query)
        elif isinstance(seg, Answer):
            answer += 1
            response += count_tokens(seg.text)
        elif isinstance(seg, Information):
            information += count_tokens(segment_content(seg))
        else:
            # the retry string is injected by the environment, not emitted
            response += count_tokens(seg.text.replace(INVALID_ACTION_FEEDBACK, " "))
    return ProtocolStats(think, search, answer, reasoning, information, response)


def invalid_action_feedback() -> str:
    """The retry instruction injected after an emission with no valid action."""
    return INVALID_ACTION_FEEDBACK


_FAST_INSTRUCTION = (
    "Answer the question below. When you need outside knowledge, write a query as "
    "<search> query </search>; the top results come back between <information> and "
    "</information>. Search as often as you need and use the results directly. Once you "
    "know enough, write only the final answer as <answer> answer </answer>.\n"
)

_SLOW_INSTRUCTION = (
    "Answer the question below. Every time you receive new information, first reason "
    "between <think> and </think>. If that reasoning shows missing knowledge, write a "
    "query as <search> query </search>; the top results come back between <information> "
    "and </information>. Search as often as you need. When no more knowledge is needed, "
    "write only the final answer as <answer> answer </answer>.\n"
)


def instruction_prompt(question: str, mode: GrammarMode) -> str:
    """Instruction prompt opening a rollout under the given grammar mode."""
    body = _SLOW_INSTRUCTION if mode == GrammarMode.SLOW else _FAST_INSTRUCTION
    return f"{body}Question: {question}\n"
