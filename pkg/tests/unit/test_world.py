"""Tests for the synthetic fact-world generator and its JSONL export."""
from __future__ import annotations

import json
import re

import pytest

from research_rl.core.exceptions import ConfigError
from research_rl.core.settings import EnvConfig
from research_rl.core.types import GrammarMode
from research_rl.environment.episode import ResearchEnvironment
from research_rl.environment.world import (
    build_synthetic_world,
    load_corpus,
    load_questions,
    save_corpus,
    save_questions,
)
from research_rl.rewards.scoring import exact_match

_FACT_RE = re.compile(r"^(\w+) (\w+) is (\w+)\.$")
_TWO_HOP_RE = re.compile(r"^What is the (\w+) of the (\w+) of (\w+)\?$")
_ONE_HOP_RE = re.compile(r"^What is the (\w+) of (\w+)\?$")


def _fact_table(corpus) -> dict[tuple[str, str], tuple[str, int]]:
    table = {}
    for doc in corpus:
        subject, relation, obj = _FACT_RE.match(doc.text).groups()
        table[(subject, relation)] = (obj, doc.id)
    return table


# ---------------------------------------------------------------------------
# Generation
# ---------------------------------------------------------------------------

def test_same_seed_gives_identical_world(tmp_path):
    first = build_synthetic_world(7, 10, 20, 0.0)
    second = build_synthetic_world(7, 10, 20, 0.0)
    assert first == second

    save_corpus(first[0], tmp_path / "a.jsonl")
    save_corpus(second[0], tmp_path / "b.jsonl")
    assert (tmp_path / "a.jsonl").read_bytes() == (tmp_path / "b.jsonl").read_bytes()


def test_different_seeds_differ():
    assert build_synthetic_world(1, 10, 20, 0.3) != build_synthetic_world(2, 10, 20, 0.3)


@pytest.mark.parametrize("seed", [0, 1, 2, 3, 99])
def test_multi_hop_count(seed: int):
    _, questions = build_synthetic_world(seed, 4, 4, 0.5)
    assert sum(q.hops == 2 for q in questions) == 2
    assert len(questions) == 4


def test_documents_are_dense_and_non_empty(small_world):
    corpus, _ = small_world
    assert [d.id for d in corpus] == list(range(len(corpus)))
    assert all(d.title and d.text for d in corpus)
    assert len(corpus) == 10 * 3


def test_questions_are_distinct_and_supported(small_world):
    corpus, questions = small_world
    assert len({q.question for q in questions}) == len(questions) == 20
    for q in questions:
        assert q.hops == len(q.support_doc_ids)
        assert q.gold_answers
        assert any(g in corpus[i].text for g in q.gold_answers for i in q.support_doc_ids)


def test_two_hop_answers_follow_the_fact_chain():
    corpus, questions = build_synthetic_world(5, 12, 30, 0.6)
    table = _fact_table(corpus)
    two_hop = [q for q in questions if q.hops == 2]
    assert two_hop
    for q in two_hop:
        second, first, subject = _TWO_HOP_RE.match(q.question).groups()
        bridge, first_doc = table[(subject, first)]
        answer, second_doc = table[(bridge, second)]
        assert q.gold_answers == (answer,)
        assert q.support_doc_ids == (first_doc, second_doc)


def test_one_hop_answers_match_their_fact(small_world):
    corpus, questions = small_world
    table = _fact_table(corpus)
    for q in questions:
        if q.hops == 1:
            relation, subject = _ONE_HOP_RE.match(q.question).groups()
            assert table[(subject, relation)] == (q.gold_answers[0], q.support_doc_ids[0])


def test_every_question_is_answerable_through_search(small_world):
    """Searching the support titles in chain order surfaces each support doc, then the gold scores EM 1."""
    corpus, questions = small_world
    env = ResearchEnvironment(corpus, EnvConfig(max_turns=3))
    for qid, q in enumerate(questions):
        state = env.reset(q, qid)
        for doc_id in q.support_doc_ids:
            queries = [corpus[doc_id].title] + [d.title for d in corpus]
            query = next(t for t in queries if doc_id in env.retrieve(t).doc_ids)
            state = env.step(state, f"<search>{query}</search>", GrammarMode.FAST).state
            assert doc_id in state.last_hits.doc_ids
        result = env.step(state, f"<answer>{q.gold_answers[0]}</answer>", GrammarMode.FAST)
        assert result.done
        assert exact_match(result.state.answer, q.gold_answers) == 1


def test_facts_per_entity_controls_density():
    corpus, _ = build_synthetic_world(3, 5, 10, 0.0, facts_per_entity=2)
    assert len(corpus) == 10


# ---------------------------------------------------------------------------
# Parameter errors
# ---------------------------------------------------------------------------

@pytest.mark.parametrize(
    "args,field",
    [
        ((7, 3, 4, 0.5), "n_entities"),
        ((7, 10, 4, 1.5), "multi_hop_fraction"),
        ((7, 4, 100, 0.0), "n_questions"),
    ],
)
def test_bad_parameters_raise_config_error(args, field: str):
    with pytest.raises(ConfigError) as exc_info:
        build_synthetic_world(*args)
    assert any(v.startswith(field) for v in exc_info.value.violations)


def test_all_parameter_violations_reported_together():
    with pytest.raises(ConfigError) as exc_info:
        build_synthetic_world(7, 2, 4, -0.1, facts_per_entity=0)
    assert len(exc_info.value.violations) == 3


# ---------------------------------------------------------------------------
# JSON lines
# ---------------------------------------------------------------------------

def test_jsonl_export_import(tmp_path, small_world):
    corpus, questions = small_world
    save_corpus(corpus, tmp_path / "world" / "corpus.jsonl")
    save_questions(questions, tmp_path / "world" / "questions.jsonl")
    assert load_corpus(tmp_path / "world" / "corpus.jsonl") == corpus
    assert load_questions(tmp_path / "world" / "questions.jsonl") == questions


def test_question_record_field_names(tmp_path, small_world):
    _, questions = small_world
    path = tmp_path / "q.jsonl"
    save_questions(questions[:1], path)
    line = path.read_text(encoding="utf-8").splitlines()[0]
    assert list(json.loads(line)) == ["question", "golds", "hops", "support"]


def test_load_corpus_rejects_sparse_ids(tmp_path):
    path = tmp_path / "corpus.jsonl"
    path.write_text('{"id": 1, "title": "A", "text": "A is B."}\n', encoding="utf-8")
    with pytest.raises(ConfigError):
        load_corpus(path)


def test_load_missing_file_raises_os_error(tmp_path):
    with pytest.raises(OSError):
        load_corpus(tmp_path / "missing.jsonl")
