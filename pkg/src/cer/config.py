"""Pipeline configuration: one place for every knob, endpoint, path, and
timeout, with a SHA-256 fingerprint over the canonical serialized form.

The fingerprint is recomputed on load and embedded in every assessment, so
results are traceable to the exact configuration that produced them.
Endpoint environment variables (CER_LLM_ENDPOINT, CER_EMBED_ENDPOINT,
CER_CLASSIFIER_ENDPOINT) override file values; CER_CONFIG names the
default config file.
"""

from __future__ import annotations

import hashlib
import json
import os
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from .claims import DetectionConfig, DetectionMode
from .models import VerdictLabel
from .reasoning import PromptConfig
from .retrieval.evidence import RetrievalConfig
from .models import RetrieverKind
from .veracity import BackendKind, ClassifierBackendSpec

CONFIG_ENV = "CER_CONFIG"
LLM_ENDPOINT_ENV = "CER_LLM_ENDPOINT"
EMBED_ENDPOINT_ENV = "CER_EMBED_ENDPOINT"
CLASSIFIER_ENDPOINT_ENV = "CER_CLASSIFIER_ENDPOINT"


@dataclass(frozen=True)
class Timeouts:
    llm: float = 60.0
    embed: float = 10.0
    fetch: float = 15.0
    retries: int = 2

    def to_dict(self) -> dict:
        return {
            "llm": self.llm,
            "embed": self.embed,
            "fetch": self.fetch,
            "retries": self.retries,
        }


@dataclass(frozen=True)
class PipelineConfig:
    retrieval: RetrievalConfig = field(default_factory=RetrievalConfig)
    detection: DetectionConfig = field(default_factory=DetectionConfig)
    prompt: PromptConfig = field(default_factory=PromptConfig)
    classifier: ClassifierBackendSpec = field(default_factory=ClassifierBackendSpec)
    corpus_path: Optional[str] = None
    index_path: Optional[str] = None
    cache_path: Optional[str] = None
    cache_max_entries: int = 10_000
    llm_endpoint: Optional[str] = None
    embed_endpoint: Optional[str] = None
    embed_dim: int = 384
    dense_mode: str = "exact_flat"
    mock_backends: bool = False
    seed: int = 0
    timeouts: Timeouts = field(default_factory=Timeouts)
    max_claim_chars: int = 2000
    max_video_bytes: int = 50_000_000

    def to_dict(self) -> dict:
        return {
            "retrieval": self.retrieval.to_dict(),
            "detection": self.detection.to_dict(),
            "prompt": self.prompt.to_dict(),
            "classifier": self.classifier.to_dict(),
            "corpus_path": self.corpus_path,
            "index_path": self.index_path,
            "cache_path": self.cache_path,
            "cache_max_entries": self.cache_max_entries,
            "llm_endpoint": self.llm_endpoint,
            "embed_endpoint": self.embed_endpoint,
            "embed_dim": self.embed_dim,
            "dense_mode": self.dense_mode,
            "mock_backends": self.mock_backends,
            "seed": self.seed,
            "timeouts": self.timeouts.to_dict(),
            "max_claim_chars": self.max_claim_chars,
            "max_video_bytes": self.max_video_bytes,
        }

    @property
    def fingerprint(self) -> str:
        canonical = json.dumps(
            self.to_dict(), sort_keys=True, separators=(",", ":"), ensure_ascii=False
        )
        return hashlib.sha256(canonical.encode("utf-8")).hexdigest()

    @classmethod
    def from_dict(cls, d: dict) -> "PipelineConfig":
        retrieval = d.get("retrieval", {})
        detection = d.get("detection", {})
        prompt = d.get("prompt", {})
        classifier = d.get("classifier", {})
        timeouts = d.get("timeouts", {})
        return cls(
            retrieval=RetrievalConfig(
                top_k=retrieval.get("top_k", 20),
                evidence_m=retrieval.get("evidence_m", 3),
                retriever=RetrieverKind(retrieval.get("retriever", "dense")),
                separator=retrieval.get("separator", "[SEP]"),
            ),
            detection=DetectionConfig(
                mode=DetectionMode(detection.get("mode", "rule_based")),
                few_shot_examples=tuple(
                    (t, bool(flag))
                    for t, flag in detection.get("few_shot_examples", ())
                ),
                max_claims=detection.get("max_claims", 25),
                model_id=detection.get("model_id", "default-llm"),
            ),
            prompt=PromptConfig(
                include_role=prompt.get("include_role", True),
                include_evidence=prompt.get("include_evidence", True),
                require_justification=prompt.get("require_justification", True),
                role_text=prompt.get("role_text", ""),
                temperature=prompt.get("temperature", 0.0),
                max_tokens=prompt.get("max_tokens", 512),
                model_id=prompt.get("model_id", "default-llm"),
            ),
            classifier=ClassifierBackendSpec(
                kind=BackendKind(classifier.get("kind", "mock")),
                endpoint=classifier.get("endpoint"),
                label_space=tuple(
                    VerdictLabel(v)
                    for v in classifier.get("label_space", ["true", "false", "nei"])
                ),
                seed=classifier.get("seed", 0),
            ),
            corpus_path=d.get("corpus_path"),
            index_path=d.get("index_path"),
            cache_path=d.get("cache_path"),
            cache_max_entries=d.get("cache_max_entries", 10_000),
            llm_endpoint=d.get("llm_endpoint"),
            embed_endpoint=d.get("embed_endpoint"),
            embed_dim=d.get("embed_dim", 384),
            dense_mode=d.get("dense_mode", "exact_flat"),
            mock_backends=d.get("mock_backends", False),
            seed=d.get("seed", 0),
            timeouts=Timeouts(
                llm=timeouts.get("llm", 60.0),
                embed=timeouts.get("embed", 10.0),
                fetch=timeouts.get("fetch", 15.0),
                retries=timeouts.get("retries", 2),
            ),
            max_claim_chars=d.get("max_claim_chars", 2000),
            max_video_bytes=d.get("max_video_bytes", 50_000_000),
        )

    @classmethod
    def load(cls, path: Optional[str | Path] = None) -> "PipelineConfig":
        """Read a JSON config file (or CER_CONFIG, or all defaults) and
        apply endpoint environment overrides."""
        if path is None:
            path = os.environ.get(CONFIG_ENV)
        data = {}
        if path:
            data = json.loads(Path(path).read_text("utf-8"))
        cfg = cls.from_dict(data)
        overrides = {}
        if os.environ.get(LLM_ENDPOINT_ENV):
            overrides["llm_endpoint"] = os.environ[LLM_ENDPOINT_ENV]
        if os.environ.get(EMBED_ENDPOINT_ENV):
            overrides["embed_endpoint"] = os.environ[EMBED_ENDPOINT_ENV]
        if os.environ.get(CLASSIFIER_ENDPOINT_ENV):
            classifier = dict(cfg.classifier.to_dict())
            classifier["endpoint"] = os.environ[CLASSIFIER_ENDPOINT_ENV]
            merged = cfg.to_dict()
            merged["classifier"] = classifier
            merged.update(overrides)
            return cls.from_dict(merged)
        if overrides:
            merged = cfg.to_dict()
            merged.update(overrides)
            return cls.from_dict(merged)
        return cfg
