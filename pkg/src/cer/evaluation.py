"""Benchmark loading, metric computation, constant baselines, and the
video-level decision rule.

Per-class precision/recall/F1 come from the confusion matrix with the
0/0 -> 0 convention; macro scores are unweighted means over the label
space in use, counting classes that never occur. Reports render as
percentages with two decimals, half-up.
"""

from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from pathlib import Path
from typing import Callable, Optional, Sequence

from .models import ClaimAssessment, UnknownLabel, VerdictLabel, label_parse

logger = logging.getLogger("cer.evaluation")

THREE_WAY = (VerdictLabel.TRUE, VerdictLabel.FALSE, VerdictLabel.NEI)
BINARY = (VerdictLabel.TRUE, VerdictLabel.FALSE)


class FormatError(ValueError):
    pass


class LengthMismatch(ValueError):
    pass


class InvalidForLabelSpace(ValueError):
    pass


class DatasetName(Enum):
    HEALTHFC = "healthfc"
    BIOASQ7B = "bioasq7b"
    SCIFACT = "scifact"
    CUSTOM = "custom"


class Split(Enum):
    TRAIN = "train"
    DEV = "dev"
    TEST = "test"


@dataclass(frozen=True)
class LabeledClaim:
    claim_text: str
    gold: VerdictLabel
    dataset: DatasetName = DatasetName.CUSTOM
    split: Split = Split.TEST
    gold_evidence: tuple[str, ...] = ()

    def __post_init__(self):
        if self.dataset is DatasetName.BIOASQ7B and self.gold is VerdictLabel.NEI:
            raise FormatError("bioasq7b is binary; nei gold label is invalid")


# Label space each benchmark is scored over.
DATASET_LABEL_SPACES = {
    DatasetName.HEALTHFC: THREE_WAY,
    DatasetName.BIOASQ7B: BINARY,
    DatasetName.SCIFACT: THREE_WAY,
    DatasetName.CUSTOM: THREE_WAY,
}

# Published test-split sizes and gold-label counts these benchmarks are
# expected to carry; deviations are reported, not fatal.
EXPECTED_DISTRIBUTIONS = {
    DatasetName.HEALTHFC: {
        VerdictLabel.TRUE: 202, VerdictLabel.FALSE: 125, VerdictLabel.NEI: 423,
    },
    DatasetName.BIOASQ7B: {VerdictLabel.TRUE: 614, VerdictLabel.FALSE: 131},
    DatasetName.SCIFACT: {
        VerdictLabel.TRUE: 580, VerdictLabel.FALSE: 302, VerdictLabel.NEI: 527,
    },
}


def check_distribution(
    name: DatasetName, claims: Sequence[LabeledClaim]
) -> list[str]:
    """Compare loaded gold-label counts with the expected distribution;
    returns human-readable delta lines (empty when they match)."""
    expected = EXPECTED_DISTRIBUTIONS.get(name)
    if expected is None:
        return []
    actual: dict[VerdictLabel, int] = {}
    for claim in claims:
        actual[claim.gold] = actual.get(claim.gold, 0) + 1
    deltas = []
    if sum(actual.values()) != sum(expected.values()):
        deltas.append(
            f"{name.value}: {sum(actual.values())} claims loaded, "
            f"expected {sum(expected.values())}"
        )
    for label in expected:
        got = actual.get(label, 0)
        if got != expected[label]:
            deltas.append(
                f"{name.value}: label {label.value} count {got}, "
                f"expected {expected[label]}"
            )
    return deltas


# ---------------------------------------------------------------------------
# Dataset loaders
# ---------------------------------------------------------------------------

def _load_custom(path: Path, split: Split) -> list[LabeledClaim]:
    claims = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                claims.append(
                    LabeledClaim(
                        claim_text=rec["claim"],
                        gold=label_parse(rec["label"]),
                        dataset=DatasetName.CUSTOM,
                        split=Split(rec.get("split", split.value)),
                        gold_evidence=tuple(rec.get("evidence", ())),
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                if isinstance(e, UnknownLabel):
                    raise
                raise FormatError(f"{path}:{lineno}: {e}") from e
    return claims


def _load_healthfc(path: Path, split: Split) -> list[LabeledClaim]:
    claims = []
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.DictReader(fh)
        if reader.fieldnames is None:
            raise FormatError(f"{path}: empty CSV")
        claim_col = next(
            (c for c in ("en_claim", "claim") if c in reader.fieldnames), None
        )
        label_col = next(
            (c for c in ("label", "verdict", "en_verdict") if c in reader.fieldnames),
            None,
        )
        if claim_col is None or label_col is None:
            raise FormatError(
                f"{path}: need claim and label columns, found {reader.fieldnames}"
            )
        for row in reader:
            claims.append(
                LabeledClaim(
                    claim_text=row[claim_col],
                    gold=label_parse(row[label_col]),
                    dataset=DatasetName.HEALTHFC,
                    split=split,
                )
            )
    return claims


def _load_bioasq(path: Path, split: Split) -> list[LabeledClaim]:
    try:
        data = json.loads(Path(path).read_text("utf-8"))
    except json.JSONDecodeError as e:
        raise FormatError(f"{path}: {e}") from e
    questions = data.get("questions")
    if questions is None:
        raise FormatError(f"{path}: no 'questions' array")
    claims = []
    for q in questions:
        if q.get("type") != "yesno":
            continue
        claims.append(
            LabeledClaim(
                claim_text=q["body"],
                gold=label_parse(str(q["exact_answer"])),
                dataset=DatasetName.BIOASQ7B,
                split=split,
            )
        )
    return claims


def _load_scifact(path: Path, split: Split) -> list[LabeledClaim]:
    claims = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
            except json.JSONDecodeError as e:
                raise FormatError(f"{path}:{lineno}: {e}") from e
            if "label" in rec and "evidence" not in rec:
                raise FormatError(f"{path}:{lineno}: custom-format record")
            evidence = rec.get("evidence") or {}
            labels = {
                ann["label"]
                for anns in evidence.values()
                for ann in anns
                if "label" in ann
            }
            if not labels:
                gold = VerdictLabel.NEI
            else:
                # a claim's annotations agree in the release; take the first
                gold = label_parse(sorted(labels)[0])
            claims.append(
                LabeledClaim(
                    claim_text=rec["claim"],
                    gold=gold,
                    dataset=DatasetName.SCIFACT,
                    split=split,
                    gold_evidence=tuple(str(d) for d in evidence.keys()),
                )
            )
    return claims


_LOADERS: dict[DatasetName, Callable[[Path, Split], list[LabeledClaim]]] = {
    DatasetName.CUSTOM: _load_custom,
    DatasetName.HEALTHFC: _load_healthfc,
    DatasetName.BIOASQ7B: _load_bioasq,
    DatasetName.SCIFACT: _load_scifact,
}


def load_dataset(
    name: DatasetName | str, path: str | Path, split: Split = Split.TEST
) -> list[LabeledClaim]:
    """Load a benchmark file in its official release format (or the custom
    JSONL {"claim","label"} format) and normalize labels."""
    name = DatasetName(name) if isinstance(name, str) else name
    path = Path(path)
    if not path.exists():
        raise FormatError(f"dataset file not found: {path}")
    # the custom JSONL shape is accepted for every dataset name
    if name is not DatasetName.CUSTOM:
        try:
            claims = _LOADERS[name](path, split)
        except FormatError:
            claims = _load_custom(path, split)
            claims = [
                LabeledClaim(
                    claim_text=c.claim_text,
                    gold=c.gold,
                    dataset=name,
                    split=c.split,
                    gold_evidence=c.gold_evidence,
                )
                for c in claims
            ]
    else:
        claims = _load_custom(path, split)
    deltas = check_distribution(name, claims)
    for delta in deltas:
        logger.warning("dataset distribution differs from expected: %s", delta)
    return claims


# ---------------------------------------------------------------------------
# Metrics
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class ClassMetrics:
    precision: float
    recall: float
    f1: float
    support: int


@dataclass(frozen=True)
class MetricReport:
    per_class: dict[VerdictLabel, ClassMetrics]
    macro_precision: float
    macro_recall: float
    macro_f1: float
    n: int
    confusion: tuple[tuple[int, ...], ...]  # [gold][pred] in label_space order
    label_space: tuple[VerdictLabel, ...]
    degraded_count: int = 0

    def to_dict(self) -> dict:
        return {
            "per_class": {
                lab.value: {
                    "precision": m.precision,
                    "recall": m.recall,
                    "f1": m.f1,
                    "support": m.support,
                }
                for lab, m in self.per_class.items()
            },
            "macro": {
                "precision": self.macro_precision,
                "recall": self.macro_recall,
                "f1": self.macro_f1,
            },
            "n": self.n,
            "confusion": [list(row) for row in self.confusion],
            "labels": [lab.value for lab in self.label_space],
            "degraded_count": self.degraded_count,
        }


def as_percent(x: float) -> str:
    """Percentage with 2 decimals, half-up (e.g. 0.0897778 -> '8.98')."""
    return str(
        Decimal(repr(x * 100)).quantize(Decimal("0.01"), rounding=ROUND_HALF_UP)
    )


def metrics(
    golds: Sequence[VerdictLabel],
    preds: Sequence[VerdictLabel],
    label_space: Sequence[VerdictLabel] = THREE_WAY,
) -> MetricReport:
    if len(golds) != len(preds):
        raise LengthMismatch(f"{len(golds)} golds vs {len(preds)} preds")
    if not golds:
        raise LengthMismatch("metrics need at least one (gold, pred) pair")
    label_space = tuple(label_space)
    index = {lab: i for i, lab in enumerate(label_space)}
    k = len(label_space)
    confusion = [[0] * k for _ in range(k)]
    for gold, pred in zip(golds, preds):
        if gold not in index or pred not in index:
            raise InvalidForLabelSpace(
                f"label outside label space: gold={gold}, pred={pred}"
            )
        confusion[index[gold]][index[pred]] += 1
    per_class = {}
    for lab in label_space:
        i = index[lab]
        tp = confusion[i][i]
        pred_total = sum(confusion[g][i] for g in range(k))
        gold_total = sum(confusion[i][p] for p in range(k))
        precision = tp / pred_total if pred_total else 0.0
        recall = tp / gold_total if gold_total else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        per_class[lab] = ClassMetrics(
            precision=precision, recall=recall, f1=f1, support=gold_total
        )
    return MetricReport(
        per_class=per_class,
        macro_precision=sum(m.precision for m in per_class.values()) / k,
        macro_recall=sum(m.recall for m in per_class.values()) / k,
        macro_f1=sum(m.f1 for m in per_class.values()) / k,
        n=len(golds),
        confusion=tuple(tuple(row) for row in confusion),
        label_space=label_space,
    )


def format_report(report: MetricReport) -> str:
    """Aligned plain-text table, percentages with 2 decimals."""
    rows = [("class", "precision", "recall", "f1", "support")]
    for lab in report.label_space:
        m = report.per_class[lab]
        rows.append(
            (
                lab.value,
                as_percent(m.precision),
                as_percent(m.recall),
                as_percent(m.f1),
                str(m.support),
            )
        )
    rows.append(
        (
            "macro",
            as_percent(report.macro_precision),
            as_percent(report.macro_recall),
            as_percent(report.macro_f1),
            str(report.n),
        )
    )
    widths = [max(len(r[c]) for r in rows) for c in range(5)]
    lines = [
        "  ".join(cell.rjust(widths[c]) for c, cell in enumerate(row))
        for row in rows
    ]
    return "\n".join(lines)


# ---------------------------------------------------------------------------
# Baselines
# ---------------------------------------------------------------------------

class BaselineKind(Enum):
    ALL_TRUE = "all_true"
    ALL_FALSE = "all_false"
    ALL_NEI = "all_nei"


_BASELINE_LABELS = {
    BaselineKind.ALL_TRUE: VerdictLabel.TRUE,
    BaselineKind.ALL_FALSE: VerdictLabel.FALSE,
    BaselineKind.ALL_NEI: VerdictLabel.NEI,
}


def baseline_predict(
    kind: BaselineKind | str,
    n: int,
    label_space: Sequence[VerdictLabel] = THREE_WAY,
) -> list[VerdictLabel]:
    kind = BaselineKind(kind) if isinstance(kind, str) else kind
    if n < 1:
        raise ValueError("n must be >= 1")
    label = _BASELINE_LABELS[kind]
    if label not in label_space:
        raise InvalidForLabelSpace(
            f"{kind.value} cannot be applied to label space "
            f"{[lab.value for lab in label_space]}"
        )
    return [label] * n


# ---------------------------------------------------------------------------
# Pipeline evaluation
# ---------------------------------------------------------------------------

def evaluate_pipeline(
    dataset: Sequence[LabeledClaim],
    verify: Callable[[str], ClaimAssessment],
    trace_path: Optional[str | Path] = None,
    label_space: Optional[Sequence[VerdictLabel]] = None,
) -> MetricReport:
    """Run retrieve -> reason -> assess over every labeled claim.

    Claim detection is skipped: each LabeledClaim already is a claim. Backend
    failures degrade per claim (counted in the report) rather than aborting.
    """
    if label_space is None:
        label_space = (
            DATASET_LABEL_SPACES[dataset[0].dataset] if dataset else THREE_WAY
        )
    golds = []
    preds = []
    degraded = 0
    trace_fh = open(trace_path, "w", encoding="utf-8") if trace_path else None
    try:
        for labeled in dataset:
            assessment = verify(labeled.claim_text)
            golds.append(labeled.gold)
            preds.append(assessment.label)
            if assessment.degraded:
                degraded += 1
            if trace_fh is not None:
                trace_fh.write(
                    json.dumps(
                        {
                            "claim": labeled.claim_text,
                            "gold": labeled.gold.value,
                            "assessment": assessment.to_dict(),
                        },
                        ensure_ascii=False,
                    )
                )
                trace_fh.write("\n")
    finally:
        if trace_fh is not None:
            trace_fh.close()
    report = metrics(golds, preds, label_space)
    return MetricReport(
        per_class=report.per_class,
        macro_precision=report.macro_precision,
        macro_recall=report.macro_recall,
        macro_f1=report.macro_f1,
        n=report.n,
        confusion=report.confusion,
        label_space=report.label_space,
        degraded_count=degraded,
    )


# ---------------------------------------------------------------------------
# Video-level rule
# ---------------------------------------------------------------------------

class VideoLabel(Enum):
    REAL = "real"
    FAKE = "fake"


@dataclass(frozen=True)
class VideoCase:
    video_id: str
    gold: VideoLabel
    claims: tuple[tuple[str, ClaimAssessment], ...] = ()


def video_verdict(assessments: Sequence[ClaimAssessment]) -> VideoLabel:
    """fake iff at least one claim classified false; zero-claim videos are
    real with a warning."""
    if not assessments:
        logger.warning("video has no claims; defaulting to 'real'")
        return VideoLabel.REAL
    if any(a.label is VerdictLabel.FALSE for a in assessments):
        return VideoLabel.FAKE
    return VideoLabel.REAL


def video_metrics(cases: Sequence[VideoCase]) -> dict[str, dict[str, float]]:
    """Per-class precision/recall/F1 for the real and fake classes."""
    if not cases:
        raise ValueError("cases must be non-empty")
    out = {}
    preds = [video_verdict([a for _, a in case.claims]) for case in cases]
    for cls in (VideoLabel.REAL, VideoLabel.FAKE):
        tp = sum(1 for c, p in zip(cases, preds) if c.gold is cls and p is cls)
        pred_total = sum(1 for p in preds if p is cls)
        gold_total = sum(1 for c in cases if c.gold is cls)
        precision = tp / pred_total if pred_total else 0.0
        recall = tp / gold_total if gold_total else 0.0
        f1 = (
            2 * precision * recall / (precision + recall)
            if precision + recall
            else 0.0
        )
        out[cls.value] = {"precision": precision, "recall": recall, "f1": f1}
    return out


def load_video_cases(path: str | Path) -> list[VideoCase]:
    """JSONL: {"video_id", "gold", "claims": [{"claim_text", "assessment"}]}."""
    cases = []
    with open(path, "r", encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            try:
                rec = json.loads(line)
                cases.append(
                    VideoCase(
                        video_id=rec["video_id"],
                        gold=VideoLabel(rec["gold"]),
                        claims=tuple(
                            (c["claim_text"], ClaimAssessment.from_dict(c["assessment"]))
                            for c in rec.get("claims", ())
                        ),
                    )
                )
            except (json.JSONDecodeError, KeyError, ValueError) as e:
                raise FormatError(f"{path}:{lineno}: {e}") from e
    return cases
