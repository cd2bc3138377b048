"""Evidence-based biomedical claim verification engine."""

from .models import (
    Claim,
    ClaimAssessment,
    EvidencePassage,
    Justification,
    RetrieverKind,
    SourceKind,
    UnknownLabel,
    VerdictLabel,
    label_parse,
    label_serialize,
)

__version__ = "0.1.0"

__all__ = [
    "Claim",
    "ClaimAssessment",
    "EvidencePassage",
    "Justification",
    "RetrieverKind",
    "SourceKind",
    "UnknownLabel",
    "VerdictLabel",
    "label_parse",
    "label_serialize",
    "__version__",
]
