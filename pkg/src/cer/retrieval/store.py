"""Index persistence.

An index directory holds:
  meta.json      dim, mode, params, doc count, corpus hash
  doc_ids.json   row order of the vector matrix
  vectors.f32    little-endian float32, row-major
  postings.jsonl one token per line: {"token", "postings": [[doc_id, tf], ...]}
  hnsw.json      graph topology (approx mode only)
"""

from __future__ import annotations

import hashlib
import json
from pathlib import Path
from typing import Optional

import numpy as np

from ..corpus import Corpus
from .dense import DenseIndex
from .sparse import SparseIndex


def corpus_hash(corpus: Corpus) -> str:
    h = hashlib.sha256()
    for doc in corpus:
        h.update(json.dumps(doc.to_dict(), ensure_ascii=False).encode("utf-8"))
        h.update(b"\n")
    return h.hexdigest()


def save_index(
    directory: str | Path,
    dense: Optional[DenseIndex] = None,
    sparse: Optional[SparseIndex] = None,
    corpus_digest: str = "",
) -> None:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    meta = {
        "dim": dense.dim if dense is not None else None,
        "mode": dense.mode if dense is not None else None,
        "params": {
            "hnsw": dense.hnsw_params if dense is not None else None,
            "bm25": {"k1": sparse.k1, "b": sparse.b} if sparse is not None else None,
        },
        "doc_count": len(dense.doc_ids) if dense is not None else (
            sparse.n_docs if sparse is not None else 0
        ),
        "corpus_hash": corpus_digest,
        "seed": dense.seed if dense is not None else 0,
    }
    (directory / "meta.json").write_text(json.dumps(meta, indent=2), "utf-8")
    if dense is not None:
        (directory / "doc_ids.json").write_text(
            json.dumps(dense.doc_ids, ensure_ascii=False), "utf-8"
        )
        vectors = np.ascontiguousarray(dense.vectors(), dtype="<f4")
        (directory / "vectors.f32").write_bytes(vectors.tobytes())
        links = dense.graph_links()
        if links is not None:
            (directory / "hnsw.json").write_text(json.dumps(links), "utf-8")
    if sparse is not None:
        with open(directory / "postings.jsonl", "w", encoding="utf-8") as fh:
            for token in sorted(sparse.postings):
                fh.write(
                    json.dumps(
                        {
                            "token": token,
                            "postings": [[d, tf] for d, tf in sparse.postings[token]],
                        },
                        ensure_ascii=False,
                    )
                )
                fh.write("\n")
        # doc ids with no tokens at all still need lengths recorded
        (directory / "doc_lengths.json").write_text(
            json.dumps(sparse.doc_lengths), "utf-8"
        )


def load_index(
    directory: str | Path,
) -> tuple[Optional[DenseIndex], Optional[SparseIndex], dict]:
    directory = Path(directory)
    meta = json.loads((directory / "meta.json").read_text("utf-8"))
    dense = None
    if (directory / "vectors.f32").exists():
        doc_ids = json.loads((directory / "doc_ids.json").read_text("utf-8"))
        raw = (directory / "vectors.f32").read_bytes()
        dim = meta["dim"]
        vectors = np.frombuffer(raw, dtype="<f4").reshape(len(doc_ids), dim)
        links = None
        if (directory / "hnsw.json").exists():
            links = json.loads((directory / "hnsw.json").read_text("utf-8"))
        dense = DenseIndex.restore(
            doc_ids=doc_ids,
            vectors=vectors.copy(),
            mode=meta["mode"],
            hnsw_params=(meta.get("params") or {}).get("hnsw"),
            links=links,
            seed=meta.get("seed", 0),
        )
    sparse = None
    if (directory / "postings.jsonl").exists():
        params = (meta.get("params") or {}).get("bm25") or {}
        sparse = SparseIndex(k1=params.get("k1", 1.2), b=params.get("b", 0.75))
        sparse.doc_lengths = {
            str(k): int(v)
            for k, v in json.loads(
                (directory / "doc_lengths.json").read_text("utf-8")
            ).items()
        }
        with open(directory / "postings.jsonl", "r", encoding="utf-8") as fh:
            for line in fh:
                line = line.strip()
                if not line:
                    continue
                rec = json.loads(line)
                sparse.postings[rec["token"]] = [
                    (str(d), int(tf)) for d, tf in rec["postings"]
                ]
        total = sum(sparse.doc_lengths.values())
        sparse.avg_doc_len = total / len(sparse.doc_lengths) if sparse.doc_lengths else 0.0
    return dense, sparse, meta
