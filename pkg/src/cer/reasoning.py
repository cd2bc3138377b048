"""Verification prompt construction, LLM call, and response parsing.

The LLM returns a preliminary true/false judgment plus a free-text
justification. Only the justification travels further down the pipeline;
the judgment is advisory and is never consumed by the final classifier.
"""

from __future__ import annotations

import re
import time
from dataclasses import dataclass
from importlib import resources
from typing import Optional

from .backends import LlmBackend
from .models import Claim, EvidencePassage, Justification


class UnparseableResponse(ValueError):
    """LLM output did not contain the required fields after the retry."""


def default_role_text() -> str:
    return resources.files("cer.data").joinpath("role_prompt.txt").read_text("utf-8").strip()


@dataclass(frozen=True)
class PromptConfig:
    include_role: bool = True
    include_evidence: bool = True
    require_justification: bool = True
    role_text: str = ""
    temperature: float = 0.0
    max_tokens: int = 512
    model_id: str = "default-llm"

    def __post_init__(self):
        if not 0.0 <= self.temperature <= 2.0:
            raise ValueError("temperature must be in [0, 2]")
        if self.max_tokens < 64:
            raise ValueError("max_tokens must be >= 64")
        if not self.role_text:
            object.__setattr__(self, "role_text", default_role_text())

    def to_dict(self) -> dict:
        return {
            "include_role": self.include_role,
            "include_evidence": self.include_evidence,
            "require_justification": self.require_justification,
            "role_text": self.role_text,
            "temperature": self.temperature,
            "max_tokens": self.max_tokens,
            "model_id": self.model_id,
        }


@dataclass(frozen=True)
class ReasoningResult:
    justification: Justification
    prompt_text: str
    latency_ms: int
    attempts: int


def build_prompt(
    claim: Claim, evidence: list[EvidencePassage], cfg: PromptConfig
) -> str:
    """Deterministic prompt: role, numbered evidence, claim, output format."""
    sections = []
    if cfg.include_role:
        sections.append(cfg.role_text)
    if cfg.include_evidence and evidence:
        lines = ["Scientific evidence:"]
        for i, passage in enumerate(evidence, start=1):
            title = passage.title.rstrip(".")
            lines.append(f"[{i}] {title}. {passage.text}")
        sections.append("\n".join(lines))
    sections.append(f"Claim to verify: {claim.text}")
    if cfg.require_justification:
        sections.append(
            "Answer in exactly this format:\n"
            "JUDGMENT: true or false\n"
            "JUSTIFICATION: your detailed reasoning, citing evidence by number"
        )
    else:
        sections.append(
            "Answer in exactly this format:\nJUDGMENT: true or false"
        )
    return "\n\n".join(sections)


_FENCE_RE = re.compile(r"^```[a-zA-Z]*\s*$|^```\s*$", re.MULTILINE)
_JUDGMENT_RE = re.compile(r"(?im)^\s*judgment\s*:\s*(\S+)\s*$")
_JUSTIFICATION_RE = re.compile(r"(?is)^\s*justification\s*:\s*(.*)$", re.MULTILINE)


def parse_response(text: str) -> tuple[bool, str]:
    """Extract (preliminary_judgment, justification_text) from LLM output.

    Tolerates markdown fences, surrounding whitespace, and any casing.
    Raises UnparseableResponse when the judgment line is missing or not
    true/false.
    """
    cleaned = _FENCE_RE.sub("", text).strip()
    judgment_match = _JUDGMENT_RE.search(cleaned)
    if not judgment_match:
        raise UnparseableResponse("no JUDGMENT line found")
    verdict_token = judgment_match.group(1).strip().strip(".").lower()
    if verdict_token not in ("true", "false"):
        raise UnparseableResponse(f"judgment {verdict_token!r} is not true/false")
    justification_match = _JUSTIFICATION_RE.search(cleaned)
    justification = justification_match.group(1).strip() if justification_match else ""
    return verdict_token == "true", justification


_FORMAT_REMINDER = (
    "\n\nRespond only in the required format:\n"
    "JUDGMENT: true or false\nJUSTIFICATION: ..."
)


def reason(
    claim: Claim,
    evidence: list[EvidencePassage],
    cfg: PromptConfig,
    llm: LlmBackend,
) -> ReasoningResult:
    """Call the LLM with the structured prompt; one parse-repair retry."""
    prompt = build_prompt(claim, evidence, cfg)
    started = time.monotonic()
    attempts = 0
    parse_error: Optional[UnparseableResponse] = None
    current_prompt = prompt
    raw = ""
    while attempts < 2:
        attempts += 1
        raw = llm.complete(
            model_id=cfg.model_id,
            system_prompt="",
            user_prompt=current_prompt,
            temperature=cfg.temperature,
            max_tokens=cfg.max_tokens,
        )
        try:
            judgment, justification_text = parse_response(raw)
        except UnparseableResponse as e:
            parse_error = e
            current_prompt = prompt + _FORMAT_REMINDER
            continue
        latency_ms = int((time.monotonic() - started) * 1000)
        return ReasoningResult(
            justification=Justification(
                text=justification_text,
                preliminary_judgment=judgment,
                model_id=cfg.model_id,
                raw_response=raw,
            ),
            prompt_text=prompt,
            latency_ms=latency_ms,
            attempts=attempts,
        )
    raise UnparseableResponse(
        f"unparseable LLM response after {attempts} attempts: {parse_error}"
    )
