"""Dense retrieval: cosine ranking over unit embedding vectors.

Two modes share one interface: exact_flat scans the whole matrix (the
ground truth the tests lean on), approx_hnsw routes through the navigable
small-world graph. Ties always break by ascending doc_id so rankings are
reproducible.
"""

from __future__ import annotations

from typing import Optional, Sequence

import numpy as np

from ..backends import unit_normalize
from .hnsw import HnswGraph

DEFAULT_HNSW_PARAMS = {"M": 16, "ef_construction": 200, "ef_search": 100}
NORM_TOLERANCE = 1e-6


class EmptyIndex(RuntimeError):
    """Search requested against an index with no documents."""


class DenseIndex:
    def __init__(
        self,
        dim: int,
        mode: str = "exact_flat",
        hnsw_params: Optional[dict] = None,
        seed: int = 0,
    ):
        if mode not in ("exact_flat", "approx_hnsw"):
            raise ValueError(f"unknown dense index mode: {mode}")
        self.dim = dim
        self.mode = mode
        self.hnsw_params = dict(DEFAULT_HNSW_PARAMS, **(hnsw_params or {}))
        self.seed = seed
        self.doc_ids: list[str] = []
        self._matrix = np.zeros((0, dim), dtype=np.float32)
        self._matrix64 = np.zeros((0, dim), dtype=np.float64)
        self._id_rank = np.zeros(0, dtype=np.int64)
        self._graph: Optional[HnswGraph] = None

    def __len__(self) -> int:
        return len(self.doc_ids)

    @classmethod
    def build(
        cls,
        doc_ids: Sequence[str],
        vectors: np.ndarray,
        mode: str = "exact_flat",
        hnsw_params: Optional[dict] = None,
        seed: int = 0,
    ) -> "DenseIndex":
        vectors = np.asarray(vectors)
        if vectors.ndim != 2:
            raise ValueError("vectors must be a 2-d array")
        if len(doc_ids) != vectors.shape[0]:
            raise ValueError("doc_ids and vectors disagree on length")
        if len(set(doc_ids)) != len(doc_ids):
            raise ValueError("doc_ids must be unique")
        index = cls(dim=vectors.shape[1], mode=mode, hnsw_params=hnsw_params, seed=seed)
        norms = np.linalg.norm(vectors, axis=1)
        if np.any(np.abs(norms - 1.0) > NORM_TOLERANCE):
            vectors = np.vstack([unit_normalize(v) for v in vectors])
        index.doc_ids = [str(d) for d in doc_ids]
        index._matrix = vectors.astype(np.float32)
        index._finalize()
        if mode == "approx_hnsw":
            index._build_graph()
        return index

    def _finalize(self) -> None:
        self._matrix64 = self._matrix.astype(np.float64)
        self._id_rank = np.argsort(
            np.argsort(np.asarray(self.doc_ids, dtype=object), kind="stable"),
            kind="stable",
        )

    def _build_graph(self) -> None:
        graph = HnswGraph(
            dim=self.dim,
            m=self.hnsw_params["M"],
            ef_construction=self.hnsw_params["ef_construction"],
            seed=self.seed,
            capacity=max(len(self.doc_ids), 8),
        )
        for row in self._matrix:
            graph.add(row)
        self._graph = graph

    def search(self, query: np.ndarray, k: int) -> list[tuple[str, float]]:
        """Top-min(k, N) of (doc_id, cosine score), descending score,
        ties by ascending doc_id."""
        if len(self.doc_ids) == 0:
            raise EmptyIndex("dense index contains no documents")
        if k < 1:
            raise ValueError("k must be >= 1")
        q = unit_normalize(np.asarray(query, dtype=np.float64))
        if q.shape != (self.dim,):
            raise ValueError(f"query dimension {q.shape} != index dim {self.dim}")
        if self.mode == "exact_flat" or self._graph is None:
            scores = self._matrix64 @ q
            order = np.lexsort((self._id_rank, -scores))[: min(k, len(scores))]
            return [(self.doc_ids[i], float(scores[i])) for i in order]
        hits = self._graph.search(q, k, ef=self.hnsw_params["ef_search"])
        hits.sort(key=lambda pair: (-pair[1], self.doc_ids[pair[0]]))
        return [(self.doc_ids[i], float(s)) for i, s in hits]

    # Persistence hooks used by retrieval.store
    def vectors(self) -> np.ndarray:
        return self._matrix

    def graph_links(self) -> Optional[dict]:
        return self._graph.links_to_dict() if self._graph is not None else None

    @classmethod
    def restore(
        cls,
        doc_ids: Sequence[str],
        vectors: np.ndarray,
        mode: str,
        hnsw_params: Optional[dict],
        links: Optional[dict],
        seed: int = 0,
    ) -> "DenseIndex":
        index = cls(dim=vectors.shape[1], mode=mode, hnsw_params=hnsw_params, seed=seed)
        index.doc_ids = [str(d) for d in doc_ids]
        index._matrix = vectors.astype(np.float32)
        index._finalize()
        if mode == "approx_hnsw":
            if links is not None:
                index._graph = HnswGraph.from_links(index._matrix, links)
            else:
                index._build_graph()
        return index
