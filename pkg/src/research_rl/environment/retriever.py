"""
Lexical TF-IDF retriever over an in-memory corpus.

Documents are indexed on ``title + " " + text``. Scores are cosine similarities between
L2-normalised TF-IDF vectors (smoothed idf), so every score lies in [0, 1].
"""
from __future__ import annotations

import string
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from research_rl.core.exceptions import ContractError
from research_rl.environment.world import Document

_PUNCT = str.maketrans("", "", string.punctuation)


def tokenize(text: str) -> list[str]:
    """Lowercase whitespace tokens with punctuation stripped; empty tokens dropped."""
    out = []
    for raw in text.lower().split():
        tok = raw.translate(_PUNCT)
        if tok:
            out.append(tok)
    return out


@dataclass(frozen=True, slots=True)
class RetrievalResult:
    """Hits ordered by descending score, ties by ascending doc id."""
    hits: tuple[tuple[int, float], ...]
    k: int

    @property
    def doc_ids(self) -> tuple[int, ...]:
        return tuple(doc_id for doc_id, _ in self.hits)

    @property
    def best_score(self) -> float:
        return self.hits[0][1] if self.hits else 0.0


class TfidfIndex:
    """Immutable TF-IDF index; safe to share across concurrent episodes."""

    def __init__(self, corpus: Sequence[Document]):
        if not corpus:
            raise ContractError("Cannot index an empty corpus")
        self.corpus: tuple[Document, ...] = tuple(corpus)
        bags = [tokenize(f"{d.title} {d.text}") for d in self.corpus]

        vocab: dict[str, int] = {}
        for bag in bags:
            for tok in bag:
                vocab.setdefault(tok, len(vocab))
        self.vocabulary = vocab

        counts = np.zeros((len(bags), len(vocab)), dtype=np.float64)
        for row, bag in enumerate(bags):
            for tok in bag:
                counts[row, vocab[tok]] += 1.0

        n_docs = len(bags)
        df = np.count_nonzero(counts, axis=0)
        self.idf = np.log((1.0 + n_docs) / (1.0 + df)) + 1.0
        weights = counts * self.idf
        norms = np.linalg.norm(weights, axis=1, keepdims=True)
        norms[norms == 0.0] = 1.0
        self.matrix = weights / norms
        self.matrix.setflags(write=False)
        self.idf.setflags(write=False)

    def __len__(self) -> int:
        return len(self.corpus)

    def query_vector(self, query: str) -> np.ndarray | None:
        """Normalised query vector, or ``None`` when the query has no tokens."""
        tokens = tokenize(query)
        if not tokens:
            return None
        vec = np.zeros(len(self.vocabulary), dtype=np.float64)
        for tok in tokens:
            col = self.vocabulary.get(tok)
            if col is not None:
                vec[col] += 1.0
        vec *= self.idf
        norm = np.linalg.norm(vec)
        if norm > 0.0:
            vec /= norm
        return vec

    def scores(self, query: str) -> np.ndarray:
        vec = self.query_vector(query)
        if vec is None:
            return np.zeros(len(self.corpus))
        return np.clip(self.matrix @ vec, 0.0, None)

    def retrieve(self, query: str, k: int) -> RetrievalResult:
        """Top-``k`` documents for ``query``. An empty query yields no hits."""
        if k < 1:
            raise ContractError(f"k must be >= 1, got {k}")
        vec = self.query_vector(query)
        if vec is None:
            return RetrievalResult(hits=(), k=k)
        scores = np.clip(self.matrix @ vec, 0.0, None)
        ids = np.arange(len(scores))
        order = np.lexsort((ids, -scores))[:k]
        return RetrievalResult(hits=tuple((int(i), float(scores[i])) for i in order), k=k)

    def document(self, doc_id: int) -> Document:
        return self.corpus[doc_id]
