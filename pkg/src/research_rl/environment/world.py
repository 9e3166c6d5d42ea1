"""
Synthetic fact worlds.

A world is an entity-relation fact table. Every fact becomes one document
("<subject> <relation> is <object>.") and questions are asked either about one fact
(1 hop) or about two chained facts (2 hops). Generation is driven by a single
``random.Random(seed)`` so the same parameters always give a byte-identical world.
"""
from __future__ import annotations

import json
import logging
import math
import random
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable

from research_rl.core.exceptions import ArtifactIOError, ConfigError

logger = logging.getLogger(__name__)

RELATIONS: tuple[str, ...] = (
    "capital", "founder", "rival", "mentor", "neighbor", "patron", "successor", "ally",
)
_SYLLABLES: tuple[str, ...] = (
    "ka", "lo", "mi", "ra", "te", "vo", "su", "ne", "di", "fa", "go", "pe", "zu", "ba", "ri", "ol",
)


@dataclass(frozen=True, slots=True)
class Document:
    id: int
    title: str
    text: str

    def to_dict(self) -> dict[str, object]:
        return {"id": self.id, "title": self.title, "text": self.text}


@dataclass(frozen=True, slots=True)
class QuestionSpec:
    """A question with its gold answers and the documents that support it."""
    question: str
    gold_answers: tuple[str, ...]
    hops: int
    support_doc_ids: tuple[int, ...]

    def to_dict(self) -> dict[str, object]:
        return {
            "question": self.question,
            "golds": list(self.gold_answers),
            "hops": self.hops,
            "support": list(self.support_doc_ids),
        }


@dataclass(frozen=True, slots=True)
class Fact:
    subject: str
    relation: str
    obj: str
    doc_id: int


def _entity_names(rng: random.Random, n: int) -> list[str]:
    names: list[str] = []
    seen: set[str] = set()
    while len(names) < n:
        parts = rng.choice((2, 3))
        name = "".join(rng.choice(_SYLLABLES) for _ in range(parts)).capitalize()
        if name not in seen:
            seen.add(name)
            names.append(name)
    return names


def fact_document(fact_id: int, subject: str, relation: str, obj: str) -> Document:
    return Document(id=fact_id, title=f"{subject} {relation}", text=f"{subject} {relation} is {obj}.")


def one_hop_question(subject: str, relation: str) -> str:
    return f"What is the {relation} of {subject}?"


def two_hop_question(subject: str, first: str, second: str) -> str:
    return f"What is the {second} of the {first} of {subject}?"


def build_synthetic_world(
    seed: int,
    n_entities: int,
    n_questions: int,
    multi_hop_fraction: float,
    *,
    facts_per_entity: int = 3,
) -> tuple[list[Document], list[QuestionSpec]]:
    """
    Generate a corpus and ``n_questions`` distinct questions.

    ``round(n_questions * multi_hop_fraction)`` (half rounded up) of the questions are
    2-hop. Raises ``ConfigError`` when the fact table cannot supply enough distinct
    questions of either kind.
    """
    violations = []
    if n_entities < 4:
        violations.append(f"n_entities: must be >= 4, got {n_entities}")
    if not 0.0 <= multi_hop_fraction <= 1.0:
        violations.append(f"multi_hop_fraction: must be in [0, 1], got {multi_hop_fraction}")
    if not 1 <= facts_per_entity <= len(RELATIONS):
        violations.append(f"facts_per_entity: must be in [1, {len(RELATIONS)}], got {facts_per_entity}")
    if violations:
        raise ConfigError("Invalid world parameters", violations)

    rng = random.Random(seed)
    names = _entity_names(rng, n_entities)

    facts: list[Fact] = []
    by_subject: dict[str, list[Fact]] = {}
    for subject in names:
        others = [e for e in names if e != subject]
        for relation in rng.sample(RELATIONS, facts_per_entity):
            fact = Fact(subject, relation, rng.choice(others), len(facts))
            facts.append(fact)
            by_subject.setdefault(subject, []).append(fact)

    corpus = [fact_document(f.doc_id, f.subject, f.relation, f.obj) for f in facts]

    one_hop = [
        QuestionSpec(one_hop_question(f.subject, f.relation), (f.obj,), 1, (f.doc_id,))
        for f in facts
    ]
    two_hop = [
        QuestionSpec(
            two_hop_question(first.subject, first.relation, second.relation),
            (second.obj,),
            2,
            (first.doc_id, second.doc_id),
        )
        for first in facts
        for second in by_subject[first.obj]
        if second.obj != first.subject
    ]

    n_multi = math.floor(n_questions * multi_hop_fraction + 0.5)
    n_single = n_questions - n_multi
    if n_multi > len(two_hop) or n_single > len(one_hop):
        raise ConfigError(
            f"World cannot yield {n_questions} distinct questions",
            [
                f"n_questions: needs {n_single} one-hop (have {len(one_hop)}) "
                f"and {n_multi} two-hop (have {len(two_hop)})"
            ],
        )

    questions = rng.sample(one_hop, n_single) + rng.sample(two_hop, n_multi)
    rng.shuffle(questions)
    logger.debug(
        "Built world seed=%d: %d documents, %d questions (%d multi-hop)",
        seed, len(corpus), len(questions), n_multi,
    )
    return corpus, questions


# ---------------------------------------------------------------------------
# JSON lines export / import
# ---------------------------------------------------------------------------

def _write_jsonl(path: Path, records: Iterable[dict[str, object]]) -> None:
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", encoding="utf-8") as f:
            for record in records:
                f.write(json.dumps(record) + "\n")
    except OSError as exc:
        raise ArtifactIOError(f"Cannot write {path}: {exc}") from exc


def _read_jsonl(path: Path) -> list[dict]:
    try:
        with open(path, "r", encoding="utf-8") as f:
            return [json.loads(line) for line in f if line.strip()]
    except OSError as exc:
        raise ArtifactIOError(f"Cannot read {path}: {exc}") from exc


def save_corpus(corpus: Iterable[Document], path: Path | str) -> None:
    _write_jsonl(Path(path), (d.to_dict() for d in corpus))


def load_corpus(path: Path | str) -> list[Document]:
    docs = [Document(int(r["id"]), str(r["title"]), str(r["text"])) for r in _read_jsonl(Path(path))]
    if [d.id for d in docs] != list(range(len(docs))):
        raise ConfigError(f"Corpus {path} ids must be dense 0..N-1 in order", ["id: not dense"])
    return docs


def save_questions(questions: Iterable[QuestionSpec], path: Path | str) -> None:
    _write_jsonl(Path(path), (q.to_dict() for q in questions))


def load_questions(path: Path | str) -> list[QuestionSpec]:
    return [
        QuestionSpec(
            question=str(r["question"]),
            gold_answers=tuple(str(g) for g in r["golds"]),
            hops=int(r["hops"]),
            support_doc_ids=tuple(int(i) for i in r["support"]),
        )
        for r in _read_jsonl(Path(path))
    ]
