"""Sentence segmentation and check-worthy claim selection.

Detection runs in one of three modes: zero-shot or few-shot prompting of
the LLM backend (sentences batched, one CLAIM/OTHER token each), or a
deterministic rule-based heuristic that needs no backend and keeps the
test suite hermetic.
"""

from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from enum import Enum
from importlib import resources
from typing import Optional

from .backends import LlmBackend
from .ingest import SourceDocument
from .models import Claim, SourceKind


@dataclass(frozen=True)
class Sentence:
    text: str
    span: tuple[int, int]
    doc_ref: str = ""


class DetectionMode(Enum):
    ZERO_SHOT = "zero_shot"
    FEW_SHOT = "few_shot"
    RULE_BASED = "rule_based"


@dataclass(frozen=True)
class DetectionConfig:
    mode: DetectionMode = DetectionMode.RULE_BASED
    few_shot_examples: tuple[tuple[str, bool], ...] = ()
    max_claims: int = 25
    model_id: str = "default-llm"

    def __post_init__(self):
        if self.max_claims < 1:
            raise ValueError("max_claims must be positive")
        if (self.mode is DetectionMode.FEW_SHOT) != bool(self.few_shot_examples):
            raise ValueError("few_shot_examples required iff mode is few_shot")

    def to_dict(self) -> dict:
        return {
            "mode": self.mode.value,
            "few_shot_examples": [list(p) for p in self.few_shot_examples],
            "max_claims": self.max_claims,
            "model_id": self.model_id,
        }


# ---------------------------------------------------------------------------
# Sentence segmentation
# ---------------------------------------------------------------------------

# Final tokens that end with '.' but do not end a sentence.
_ABBREVIATIONS = frozenset(
    {"dr.", "mr.", "mrs.", "ms.", "prof.", "fig.", "figs.", "e.g.", "i.e.",
     "etc.", "vs.", "cf.", "no.", "st.", "jr.", "sr.", "al.", "approx.",
     "dept.", "est.", "ref.", "eq.", "resp."}
)

_BOUNDARY_RE = re.compile(r"[.!?]+(?=\s|$)")
_TRAILING_TOKEN_RE = re.compile(r"(\S+)$")


def _is_abbreviation(text: str, end: int) -> bool:
    match = _TRAILING_TOKEN_RE.search(text, 0, end)
    if not match:
        return False
    token = match.group(1).lower()
    if token in _ABBREVIATIONS:
        # "et al." should hold together, but a bare "al." is enough to protect
        return True
    return False


def segment(text: str) -> list[Sentence]:
    """Split on sentence-final punctuation, protecting abbreviations.

    Spans address the original text exactly; inter-sentence whitespace is
    excluded from spans, so the input can be reconstructed from spans plus
    the original gaps.
    """
    if not text.strip():
        return []
    boundaries = []
    for match in _BOUNDARY_RE.finditer(text):
        if _is_abbreviation(text, match.end()):
            continue
        boundaries.append(match.end())
    if not boundaries or boundaries[-1] < len(text.rstrip()):
        boundaries.append(len(text))
    sentences = []
    start = 0
    for boundary in boundaries:
        chunk = text[start:boundary]
        stripped = chunk.strip()
        if stripped:
            left = start + (len(chunk) - len(chunk.lstrip()))
            sentences.append(
                Sentence(text=stripped, span=(left, left + len(stripped)))
            )
        start = boundary
    return sentences


# ---------------------------------------------------------------------------
# Check-worthiness
# ---------------------------------------------------------------------------

def _load_assertive_verbs() -> frozenset[str]:
    text = resources.files("cer.data").joinpath("assertive_verbs.txt").read_text("utf-8")
    return frozenset(
        line.strip()
        for line in text.splitlines()
        if line.strip() and not line.startswith("#")
    )


ASSERTIVE_VERBS = _load_assertive_verbs()

_GREETING_STARTS = frozenset(
    {"please", "click", "hello", "hi", "hey", "welcome", "thanks", "thank",
     "subscribe", "follow"}
)

_WORD_RE = re.compile(r"[\w'-]+")

# A second sentence opening with one of these merges into the previous claim.
_ANAPHORIC_STARTS = ("This", "It", "That")

_DETECTION_INSTRUCTIONS = (
    "You review sentences from health-related content and decide which ones "
    "are worth fact-checking. Answer CLAIM for a sentence that makes a "
    "checkable statement about health, medicine, or science; answer OTHER "
    "for everything else.\n"
    "Reply with exactly one token per line (CLAIM or OTHER), one line per "
    "numbered sentence, in order."
)

_BATCH_SIZE = 20


def is_claim_rule_based(sentence_text: str) -> bool:
    """A sentence counts as a claim when it has at least 3 word tokens,
    contains an assertive/copular verb form, and is not a greeting or
    imperative opener."""
    tokens = [t.lower() for t in _WORD_RE.findall(sentence_text)]
    if len(tokens) < 3:
        return False
    if tokens[0] in _GREETING_STARTS:
        return False
    return any(tok in ASSERTIVE_VERBS for tok in tokens)


def _detection_prompt(
    sentences: list[Sentence], cfg: DetectionConfig
) -> str:
    parts = [_DETECTION_INSTRUCTIONS]
    if cfg.few_shot_examples:
        example_lines = ["Examples:"]
        for text, is_claim in cfg.few_shot_examples:
            example_lines.append(f"{text} -> {'CLAIM' if is_claim else 'OTHER'}")
        parts.append("\n".join(example_lines))
    numbered = "\n".join(
        f"{i}. {sentence.text}" for i, sentence in enumerate(sentences, start=1)
    )
    parts.append(f"Sentences:\n{numbered}")
    return "\n\n".join(parts)


def _parse_detection_response(response: str, n: int) -> list[bool]:
    flags = []
    for line in response.splitlines():
        token = line.strip().strip("`").upper()
        if token.startswith("CLAIM"):
            flags.append(True)
        elif token.startswith("OTHER"):
            flags.append(False)
        if len(flags) == n:
            break
    # missing lines are treated as OTHER rather than guessing
    flags.extend([False] * (n - len(flags)))
    return flags


def _llm_flags(
    sentences: list[Sentence], cfg: DetectionConfig, llm: LlmBackend
) -> list[bool]:
    flags: list[bool] = []
    for i in range(0, len(sentences), _BATCH_SIZE):
        batch = sentences[i : i + _BATCH_SIZE]
        response = llm.complete(
            model_id=cfg.model_id,
            system_prompt="",
            user_prompt=_detection_prompt(batch, cfg),
            temperature=0.0,
            max_tokens=max(64, 4 * len(batch)),
        )
        flags.extend(_parse_detection_response(response, len(batch)))
    return flags


def _segment_time_ranges(doc: SourceDocument) -> list[tuple[int, int, float, float]]:
    """Char ranges of each transcript segment inside raw_text."""
    ranges = []
    offset = 0
    for seg in doc.segments or ():
        start = offset
        end = offset + len(seg.text)
        ranges.append((start, end, seg.start_sec, seg.end_sec))
        offset = end + 1  # the joining space
    return ranges


def _timestamp_for_span(
    ranges: list[tuple[int, int, float, float]], span: tuple[int, int]
) -> Optional[tuple[float, float]]:
    covering = [
        (s_sec, e_sec)
        for (c_start, c_end, s_sec, e_sec) in ranges
        if c_end > span[0] and c_start < span[1]
    ]
    if not covering:
        return None
    return (covering[0][0], covering[-1][1])


def detect_claims(
    doc: SourceDocument,
    cfg: DetectionConfig,
    llm: Optional[LlmBackend] = None,
) -> list[Claim]:
    """Select check-worthy claims from a document, in document order.

    Each claim covers one sentence, or two adjacent sentences when the LLM
    flags both and the second opens anaphorically. Video claims carry the
    covering segments' time range.
    """
    sentences = segment(doc.raw_text)
    if not sentences:
        return []

    if cfg.mode is DetectionMode.RULE_BASED:
        flags = [is_claim_rule_based(s.text) for s in sentences]
    else:
        if llm is None:
            raise ValueError(f"mode {cfg.mode.value} requires an LLM backend")
        flags = _llm_flags(sentences, cfg, llm)

    doc_ref = doc.uri or hashlib.sha256(doc.raw_text.encode("utf-8")).hexdigest()[:12]
    ranges = _segment_time_ranges(doc) if doc.kind is SourceKind.VIDEO else []

    spans: list[tuple[int, int]] = []
    i = 0
    while i < len(sentences):
        if not flags[i]:
            i += 1
            continue
        span = sentences[i].span
        if (
            cfg.mode is not DetectionMode.RULE_BASED
            and i + 1 < len(sentences)
            and flags[i + 1]
            and sentences[i + 1].text.startswith(_ANAPHORIC_STARTS)
        ):
            span = (span[0], sentences[i + 1].span[1])
            i += 2
        else:
            i += 1
        spans.append(span)

    claims = []
    for span in spans[: cfg.max_claims]:
        text = doc.raw_text[span[0] : span[1]]
        timestamp = _timestamp_for_span(ranges, span) if ranges else None
        claims.append(
            Claim(
                id=f"{doc_ref}:{span[0]}-{span[1]}",
                text=text,
                source=doc.kind,
                origin_ref=doc.uri,
                span=span,
                timestamp=timestamp,
            )
        )
    return claims
