"""Shared domain types and the three-way verdict vocabulary.

Every other module builds on these value objects. They are all frozen
dataclasses (or enums), safe to share across threads, and serialize to flat
JSON objects with stable field names.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from enum import Enum
from typing import Optional


class UnknownLabel(ValueError):
    """Raised when a string cannot be mapped into the verdict vocabulary."""


class VerdictLabel(Enum):
    TRUE = "true"
    FALSE = "false"
    NEI = "nei"


# Normalization table for the label vocabularies of the supported datasets.
# Kept in one place so every loader and backend shares the same mapping.
_LABEL_ALIASES = {
    "true": VerdictLabel.TRUE,
    "yes": VerdictLabel.TRUE,
    "supports": VerdictLabel.TRUE,
    "support": VerdictLabel.TRUE,
    "supported": VerdictLabel.TRUE,
    "false": VerdictLabel.FALSE,
    "no": VerdictLabel.FALSE,
    "refutes": VerdictLabel.FALSE,
    "refute": VerdictLabel.FALSE,
    "refuted": VerdictLabel.FALSE,
    "contradict": VerdictLabel.FALSE,
    "contradicts": VerdictLabel.FALSE,
    "contradicted": VerdictLabel.FALSE,
    "confute": VerdictLabel.FALSE,
    "nei": VerdictLabel.NEI,
    "not enough info": VerdictLabel.NEI,
    "not enough information": VerdictLabel.NEI,
    "not_enough_info": VerdictLabel.NEI,
    "not_enough_information": VerdictLabel.NEI,
    "neutral": VerdictLabel.NEI,
}


def label_parse(s: str) -> VerdictLabel:
    """Map a raw label string onto the three-way vocabulary.

    Case-insensitive; accepts the dataset-specific aliases in the table
    above. Raises UnknownLabel for anything else.
    """
    key = s.strip().lower()
    try:
        return _LABEL_ALIASES[key]
    except KeyError:
        raise UnknownLabel(f"unknown verdict label: {s!r}") from None


def label_serialize(label: VerdictLabel) -> str:
    return label.value


class SourceKind(Enum):
    DIRECT = "direct"
    WEB_PAGE = "web_page"
    VIDEO = "video"


@dataclass(frozen=True)
class Claim:
    """A verifiable statement with provenance back into its source."""

    id: str
    text: str
    source: SourceKind = SourceKind.DIRECT
    origin_ref: Optional[str] = None
    span: Optional[tuple[int, int]] = None
    timestamp: Optional[tuple[float, float]] = None

    def __post_init__(self):
        if not self.text.strip():
            raise ValueError("claim text must be non-empty")
        if self.timestamp is not None and self.source is not SourceKind.VIDEO:
            raise ValueError("timestamp is only valid for video claims")

    def to_dict(self) -> dict:
        return {
            "id": self.id,
            "text": self.text,
            "source": self.source.value,
            "origin_ref": self.origin_ref,
            "span": list(self.span) if self.span is not None else None,
            "timestamp": list(self.timestamp) if self.timestamp is not None else None,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Claim":
        return cls(
            id=d["id"],
            text=d["text"],
            source=SourceKind(d.get("source", "direct")),
            origin_ref=d.get("origin_ref"),
            span=tuple(d["span"]) if d.get("span") is not None else None,
            timestamp=tuple(d["timestamp"]) if d.get("timestamp") is not None else None,
        )


class RetrieverKind(Enum):
    DENSE = "dense"
    SPARSE = "sparse"


@dataclass(frozen=True)
class EvidencePassage:
    """A scored scientific abstract passage."""

    doc_id: str
    title: str
    text: str
    score: float
    retriever: RetrieverKind

    def __post_init__(self):
        if not self.text:
            raise ValueError("evidence text must be non-empty")
        if self.score != self.score or self.score in (float("inf"), float("-inf")):
            raise ValueError("evidence score must be finite")

    def to_dict(self) -> dict:
        return {
            "doc_id": self.doc_id,
            "title": self.title,
            "text": self.text,
            "score": self.score,
            "retriever": self.retriever.value,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "EvidencePassage":
        return cls(
            doc_id=d["doc_id"],
            title=d["title"],
            text=d["text"],
            score=d["score"],
            retriever=RetrieverKind(d["retriever"]),
        )


@dataclass(frozen=True)
class Justification:
    """LLM explanation plus an advisory-only preliminary judgment.

    The preliminary judgment is never consumed by final classification; it
    is carried for transparency only.
    """

    text: str
    preliminary_judgment: Optional[bool] = None
    model_id: str = ""
    raw_response: str = ""

    def to_dict(self) -> dict:
        return {
            "text": self.text,
            "preliminary_judgment": self.preliminary_judgment,
            "model_id": self.model_id,
            "raw_response": self.raw_response,
        }

    @classmethod
    def from_dict(cls, d: dict) -> "Justification":
        return cls(
            text=d["text"],
            preliminary_judgment=d.get("preliminary_judgment"),
            model_id=d.get("model_id", ""),
            raw_response=d.get("raw_response", ""),
        )


@dataclass(frozen=True)
class ClaimAssessment:
    """Final verdict with the full evidence and justification trail."""

    claim: Claim
    label: VerdictLabel
    confidence: float
    evidence: tuple[EvidencePassage, ...]
    justification: Justification
    config_fingerprint: str
    degraded: bool = False

    def __post_init__(self):
        if not 0.0 <= self.confidence <= 1.0:
            raise ValueError(f"confidence must be in [0,1], got {self.confidence}")
        if len(self.evidence) > 3:
            raise ValueError("at most 3 evidence passages per assessment")

    def to_dict(self) -> dict:
        return {
            "claim": self.claim.to_dict(),
            "label": self.label.value,
            "confidence": self.confidence,
            "evidence": [e.to_dict() for e in self.evidence],
            "justification": self.justification.to_dict(),
            "config_fingerprint": self.config_fingerprint,
            "degraded": self.degraded,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), ensure_ascii=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ClaimAssessment":
        return cls(
            claim=Claim.from_dict(d["claim"]),
            label=VerdictLabel(d["label"]),
            confidence=d["confidence"],
            evidence=tuple(EvidencePassage.from_dict(e) for e in d["evidence"]),
            justification=Justification.from_dict(d["justification"]),
            config_fingerprint=d["config_fingerprint"],
            degraded=d.get("degraded", False),
        )

    @classmethod
    def from_json(cls, s: str) -> "ClaimAssessment":
        return cls.from_dict(json.loads(s))
