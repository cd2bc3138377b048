"""Final three-way verdict from claim + justification.

Classifier backends are pluggable (zero-shot NLI, fine-tuned endpoint, or
deterministic mock); whichever backend runs, its scores are defensively
renormalized and the argmax is taken with a fixed tie-break order. The
preliminary judgment from reasoning never enters this stage: only the
justification text does.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from enum import Enum
from typing import Optional, Sequence

from .backends import (
    ClassifierBackend,
    HttpClassifierBackend,
    MockClassifierBackend,
    ZeroShotNliBackend,
)
from .models import Claim, ClaimAssessment, EvidencePassage, Justification, VerdictLabel

SEPARATOR = "[SEP]"

# Argmax tie-break order.
_LABEL_PRIORITY = (VerdictLabel.TRUE, VerdictLabel.FALSE, VerdictLabel.NEI)

THREE_WAY = (VerdictLabel.TRUE, VerdictLabel.FALSE, VerdictLabel.NEI)
BINARY = (VerdictLabel.TRUE, VerdictLabel.FALSE)


@dataclass(frozen=True)
class ClassifierInput:
    text: str

    @classmethod
    def build(cls, claim_text: str, justification_text: str) -> "ClassifierInput":
        if justification_text:
            return cls(text=f"{claim_text} {SEPARATOR} {justification_text}")
        return cls(text=claim_text)


@dataclass(frozen=True)
class ClassifierOutput:
    probs: dict[VerdictLabel, float]
    label: VerdictLabel


class BackendKind(Enum):
    ZERO_SHOT_NLI = "zero_shot_nli"
    FINETUNED_ENDPOINT = "finetuned_endpoint"
    MOCK = "mock"


@dataclass(frozen=True)
class ClassifierBackendSpec:
    kind: BackendKind = BackendKind.MOCK
    endpoint: Optional[str] = None
    label_space: tuple[VerdictLabel, ...] = THREE_WAY
    seed: int = 0

    def __post_init__(self):
        if self.kind is not BackendKind.MOCK and not self.endpoint:
            raise ValueError(f"{self.kind.value} backend requires an endpoint")
        if tuple(self.label_space) not in (THREE_WAY, BINARY):
            raise ValueError("label_space must be [true,false,nei] or [true,false]")

    def to_dict(self) -> dict:
        return {
            "kind": self.kind.value,
            "endpoint": self.endpoint,
            "label_space": [lab.value for lab in self.label_space],
            "seed": self.seed,
        }


def resolve_backend(spec: ClassifierBackendSpec) -> ClassifierBackend:
    if spec.kind is BackendKind.MOCK:
        return MockClassifierBackend(seed=spec.seed)
    if spec.kind is BackendKind.ZERO_SHOT_NLI:
        return ZeroShotNliBackend(spec.endpoint)
    return HttpClassifierBackend(spec.endpoint)


def normalize_probs(
    raw: Sequence[float], label_space: Sequence[VerdictLabel]
) -> ClassifierOutput:
    """Defensive renormalization plus deterministic argmax."""
    if len(raw) != len(label_space):
        raise ValueError(
            f"got {len(raw)} probabilities for {len(label_space)} labels"
        )
    values = [float(p) for p in raw]
    if any(math.isnan(p) or math.isinf(p) for p in values):
        raise ValueError("backend returned non-finite probabilities")
    if any(p < 0 for p in values):
        raise ValueError("backend returned negative probabilities")
    total = sum(values)
    if total <= 0:
        values = [1.0 / len(values)] * len(values)
    else:
        values = [p / total for p in values]
    probs = dict(zip(label_space, values))
    label = max(
        probs,
        key=lambda lab: (probs[lab], -_LABEL_PRIORITY.index(lab)),
    )
    return ClassifierOutput(probs=probs, label=label)


def classify(
    input: ClassifierInput,
    spec: ClassifierBackendSpec,
    backend: Optional[ClassifierBackend] = None,
) -> ClassifierOutput:
    backend = backend if backend is not None else resolve_backend(spec)
    rows = backend.classify_batch([input.text], spec.label_space)
    return normalize_probs(rows[0], spec.label_space)


def assess(
    claim: Claim,
    evidence: list[EvidencePassage],
    justification: Justification,
    spec: ClassifierBackendSpec,
    config_fingerprint: str = "",
    backend: Optional[ClassifierBackend] = None,
    degraded: bool = False,
) -> ClaimAssessment:
    """Classify claim + justification text and assemble the assessment.

    Only justification.text is read; the preliminary judgment is carried
    into the assessment for display but never influences the label.
    """
    classifier_input = ClassifierInput.build(claim.text, justification.text)
    output = classify(classifier_input, spec, backend=backend)
    return ClaimAssessment(
        claim=claim,
        label=output.label,
        confidence=output.probs[output.label],
        evidence=tuple(evidence),
        justification=justification,
        config_fingerprint=config_fingerprint,
        degraded=degraded,
    )
