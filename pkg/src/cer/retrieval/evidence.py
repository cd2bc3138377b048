"""Evidence selection and the claim+evidence concatenation format."""

from __future__ import annotations

from dataclasses import dataclass

from ..corpus import Corpus
from ..models import Claim, EvidencePassage, RetrieverKind


@dataclass(frozen=True)
class RetrievalConfig:
    top_k: int = 20
    evidence_m: int = 3
    retriever: RetrieverKind = RetrieverKind.DENSE
    separator: str = "[SEP]"

    def __post_init__(self):
        if self.top_k < 1 or self.evidence_m < 1:
            raise ValueError("top_k and evidence_m must be positive")
        if self.evidence_m > self.top_k:
            raise ValueError("evidence_m must not exceed top_k")
        if not self.separator:
            raise ValueError("separator must be non-empty")

    def to_dict(self) -> dict:
        return {
            "top_k": self.top_k,
            "evidence_m": self.evidence_m,
            "retriever": self.retriever.value,
            "separator": self.separator,
        }


def select_evidence(
    ranked: list[tuple[str, float]], corpus: Corpus, cfg: RetrievalConfig
) -> list[EvidencePassage]:
    """Materialize the top min(evidence_m, len(ranked)) hits as passages."""
    passages = []
    for doc_id, score in ranked[: cfg.evidence_m]:
        doc = corpus.get(doc_id)
        if doc is None:
            raise KeyError(f"ranked doc_id {doc_id!r} not present in corpus")
        passages.append(
            EvidencePassage(
                doc_id=doc_id,
                title=doc.title,
                text=doc.abstract,
                score=score,
                retriever=cfg.retriever,
            )
        )
    return passages


def format_claim_evidence(
    claim: Claim, evidence: list[EvidencePassage], sep: str = "[SEP]"
) -> str:
    """claim text and evidence texts joined by the separator, rank order,
    single spaces around each separator, no trailing separator."""
    if not sep:
        raise ValueError("separator must be non-empty")
    parts = [claim.text]
    parts.extend(passage.text for passage in evidence)
    return f" {sep} ".join(parts)
