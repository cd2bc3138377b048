"""Scientific abstract corpus: storage, JSONL round-trip, and the token
preprocessing pipeline that feeds the sparse index."""

from __future__ import annotations

import json
import re
import unicodedata
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import Iterable, Iterator, Optional

CORPUS_FIELDS = ("doc_id", "title", "abstract", "fetched_at")

_SPLIT_RE = re.compile(r"[\W_]+", re.UNICODE)


class DuplicateDocId(ValueError):
    """Two corpus documents share a doc_id."""


class IoError(Exception):
    """Corpus file could not be read or written."""


def _load_stopwords() -> frozenset[str]:
    text = resources.files("cer.data").joinpath("stopwords.txt").read_text("utf-8")
    words = set()
    for line in text.splitlines():
        line = line.strip()
        if line and not line.startswith("#"):
            words.add(line)
    return frozenset(words)


STOPWORDS = _load_stopwords()


def preprocess(text: str) -> tuple[list[str], str]:
    """Normalize text for lexical indexing.

    NFKC -> lowercase -> split on non-alphanumeric boundaries (hyphens
    split, digits kept) -> drop stopwords -> drop short tokens. Length-1
    tokens are dropped only when pure ASCII; single non-ASCII symbols
    (Greek letters etc.) carry meaning in biomedical text and are kept.

    Returns (tokens, norm_text) where norm_text is the NFKC-lowercased
    surface string.
    """
    norm_text = unicodedata.normalize("NFKC", text).lower()
    tokens = [
        tok
        for tok in _SPLIT_RE.split(norm_text)
        if tok
        and tok not in STOPWORDS
        and not (len(tok) < 2 and tok.isascii())
    ]
    return tokens, norm_text


@dataclass(frozen=True)
class CorpusDoc:
    doc_id: str
    title: str
    abstract: str
    fetched_at: str

    def __post_init__(self):
        if not self.abstract:
            raise ValueError(f"doc {self.doc_id}: abstract must be non-empty")

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "title": self.title,
            "abstract": self.abstract,
            "fetched_at": self.fetched_at,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "CorpusDoc":
        return cls(
            doc_id=str(d["doc_id"]),
            title=d.get("title", ""),
            abstract=d["abstract"],
            fetched_at=d.get("fetched_at", ""),
        )

    def surface_text(self) -> str:
        """Title + abstract as natural text (what the dense embedder sees)."""
        return f"{self.title} {self.abstract}" if self.title else self.abstract


@dataclass(frozen=True)
class ProcessedDoc:
    doc_id: str
    tokens: tuple[str, ...]
    norm_text: str


def process_doc(doc: CorpusDoc) -> ProcessedDoc:
    tokens, norm_text = preprocess(doc.surface_text())
    return ProcessedDoc(doc_id=doc.doc_id, tokens=tuple(tokens), norm_text=norm_text)


class Corpus:
    """Read-mostly snapshot of CorpusDocs, unique by doc_id.

    Built once and treated as immutable; services swap whole snapshots
    rather than mutating one in place.
    """

    def __init__(self, docs: Iterable[CorpusDoc] = ()):
        self._docs: dict[str, CorpusDoc] = {}
        for doc in docs:
            if doc.doc_id in self._docs:
                raise DuplicateDocId(f"duplicate doc_id: {doc.doc_id}")
            self._docs[doc.doc_id] = doc

    def __len__(self) -> int:
        return len(self._docs)

    def __iter__(self) -> Iterator[CorpusDoc]:
        return iter(self._docs.values())

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._docs

    def get(self, doc_id: str) -> Optional[CorpusDoc]:
        return self._docs.get(doc_id)

    def doc_ids(self) -> list[str]:
        return list(self._docs.keys())


def corpus_save(corpus: Corpus, path: str | Path) -> None:
    """Write JSON-Lines, one object per doc, canonical field order, UTF-8."""
    try:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            for doc in corpus:
                fh.write(json.dumps(doc.to_dict(), ensure_ascii=False))
                fh.write("\n")
    except OSError as e:
        raise IoError(f"cannot write corpus to {path}: {e}") from e


def corpus_load(path: str | Path) -> Corpus:
    docs = []
    try:
        with open(path, "r", encoding="utf-8") as fh:
            for lineno, line in enumerate(fh, start=1):
                line = line.strip()
                if not line:
                    continue
                try:
                    docs.append(CorpusDoc.from_dict(json.loads(line)))
                except (json.JSONDecodeError, KeyError) as e:
                    raise IoError(f"{path}:{lineno}: malformed corpus record: {e}") from e
    except OSError as e:
        raise IoError(f"cannot read corpus from {path}: {e}") from e
    return Corpus(docs)
