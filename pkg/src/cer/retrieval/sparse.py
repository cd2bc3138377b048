"""Lexical retrieval over an inverted index, scored with Okapi BM25.

Scoring, with k1=1.2 and b=0.75:

    idf(t)   = ln((N - df + 0.5) / (df + 0.5) + 1)
    score(d) = sum over query terms t of
               idf(t) * tf * (k1 + 1) / (tf + k1 * (1 - b + b * |d| / avgdl))

The +1 inside the log keeps idf positive, so a document scores 0 iff it
matches no query term; zero-score documents are never returned.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from ..corpus import Corpus, process_doc


class EmptyIndex(RuntimeError):
    """Search requested against an index with no documents."""


@dataclass
class SparseIndex:
    postings: dict[str, list[tuple[str, int]]] = field(default_factory=dict)
    doc_lengths: dict[str, int] = field(default_factory=dict)
    avg_doc_len: float = 0.0
    k1: float = 1.2
    b: float = 0.75

    @property
    def n_docs(self) -> int:
        return len(self.doc_lengths)

    def idf(self, token: str) -> float:
        df = len(self.postings.get(token, ()))
        return math.log((self.n_docs - df + 0.5) / (df + 0.5) + 1.0)


def build_sparse_index(
    corpus: Corpus | Iterable, k1: float = 1.2, b: float = 0.75
) -> SparseIndex:
    """Index preprocessed tokens of every doc's title + abstract."""
    index = SparseIndex(k1=k1, b=b)
    total = 0
    for doc in corpus:
        processed = process_doc(doc)
        if doc.doc_id in index.doc_lengths:
            raise ValueError(f"duplicate doc_id in corpus: {doc.doc_id}")
        counts: dict[str, int] = {}
        for tok in processed.tokens:
            counts[tok] = counts.get(tok, 0) + 1
        for tok, tf in counts.items():
            index.postings.setdefault(tok, []).append((doc.doc_id, tf))
        index.doc_lengths[doc.doc_id] = len(processed.tokens)
        total += len(processed.tokens)
    index.avg_doc_len = total / len(index.doc_lengths) if index.doc_lengths else 0.0
    return index


def sparse_search(
    index: SparseIndex, query_tokens: Sequence[str], k: int
) -> list[tuple[str, float]]:
    """BM25-ranked (doc_id, score), descending score, ties by ascending doc_id."""
    if index.n_docs == 0:
        raise EmptyIndex("sparse index contains no documents")
    if k < 1:
        raise ValueError("k must be >= 1")
    scores: dict[str, float] = {}
    avgdl = index.avg_doc_len or 1.0
    for token in query_tokens:
        postings = index.postings.get(token)
        if not postings:
            continue
        idf = index.idf(token)
        for doc_id, tf in postings:
            dl = index.doc_lengths[doc_id]
            denom = tf + index.k1 * (1.0 - index.b + index.b * dl / avgdl)
            scores[doc_id] = scores.get(doc_id, 0.0) + idf * tf * (index.k1 + 1.0) / denom
    ranked = sorted(
        ((doc_id, s) for doc_id, s in scores.items() if s > 0.0),
        key=lambda pair: (-pair[1], pair[0]),
    )
    return ranked[:k]
