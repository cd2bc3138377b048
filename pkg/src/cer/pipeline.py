"""Pipeline orchestration: wire corpus, indexes, backends, and cache into
the verify operations the service and CLI expose."""

from __future__ import annotations

import hashlib
import logging
from typing import Optional

from .backends import (
    BackendUnavailable,
    EmbeddingBackend,
    HttpEmbeddingBackend,
    HttpLlmBackend,
    LlmBackend,
    MockEmbeddingBackend,
    MockLlmBackend,
    embed,
)
from .cache import AssessmentCache, cache_key
from .claims import DetectionMode, detect_claims
from .config import PipelineConfig
from .corpus import Corpus, corpus_load, preprocess
from .ingest import SourceDocument
from .models import Claim, ClaimAssessment, EvidencePassage, Justification, RetrieverKind
from .reasoning import UnparseableResponse, reason
from .retrieval import (
    DenseIndex,
    SparseIndex,
    build_sparse_index,
    load_index,
    select_evidence,
    sparse_search,
)
from .retrieval.dense import EmptyIndex as DenseEmptyIndex
from .retrieval.sparse import EmptyIndex as SparseEmptyIndex
from .veracity import MockClassifierBackend, assess, resolve_backend

logger = logging.getLogger("cer.pipeline")


class Pipeline:
    def __init__(
        self,
        config: PipelineConfig,
        corpus: Optional[Corpus] = None,
        dense_index: Optional[DenseIndex] = None,
        sparse_index: Optional[SparseIndex] = None,
        llm: Optional[LlmBackend] = None,
        embedder: Optional[EmbeddingBackend] = None,
        classifier_backend=None,
        cache: Optional[AssessmentCache] = None,
    ):
        self.config = config
        self.fingerprint = config.fingerprint
        self.corpus = corpus if corpus is not None else Corpus()
        self.dense_index = dense_index
        self.sparse_index = sparse_index
        self.cache = cache
        self.llm = llm if llm is not None else self._default_llm()
        self.embedder = embedder if embedder is not None else self._default_embedder()
        if classifier_backend is not None:
            self.classifier_backend = classifier_backend
        elif config.mock_backends:
            self.classifier_backend = MockClassifierBackend(seed=config.classifier.seed)
        else:
            self.classifier_backend = resolve_backend(config.classifier)

    def _default_llm(self) -> LlmBackend:
        if self.config.mock_backends or not self.config.llm_endpoint:
            return MockLlmBackend()
        return HttpLlmBackend(
            self.config.llm_endpoint,
            timeout=self.config.timeouts.llm,
            retries=self.config.timeouts.retries,
        )

    def _default_embedder(self) -> EmbeddingBackend:
        if self.config.mock_backends or not self.config.embed_endpoint:
            return MockEmbeddingBackend(dim=self.config.embed_dim, seed=self.config.seed)
        return HttpEmbeddingBackend(
            self.config.embed_endpoint,
            dim=self.config.embed_dim,
            timeout=self.config.timeouts.embed,
            retries=self.config.timeouts.retries,
        )

    # ------------------------------------------------------------------
    # Construction helpers
    # ------------------------------------------------------------------

    @classmethod
    def from_config(cls, config: PipelineConfig, **overrides) -> "Pipeline":
        corpus = overrides.pop("corpus", None)
        if corpus is None and config.corpus_path:
            corpus = corpus_load(config.corpus_path)
        dense_index = overrides.pop("dense_index", None)
        sparse_index = overrides.pop("sparse_index", None)
        if dense_index is None and sparse_index is None and config.index_path:
            dense_index, sparse_index, _ = load_index(config.index_path)
        cache = overrides.pop("cache", None)
        if cache is None and config.cache_path:
            cache = AssessmentCache(config.cache_path, config.cache_max_entries)
        pipeline = cls(
            config,
            corpus=corpus,
            dense_index=dense_index,
            sparse_index=sparse_index,
            cache=cache,
            **overrides,
        )
        if corpus is not None and len(corpus) > 0:
            pipeline.ensure_indexes()
        return pipeline

    def ensure_indexes(self) -> None:
        """Build whichever index the configured retriever needs, if absent."""
        if (
            self.config.retrieval.retriever is RetrieverKind.DENSE
            and self.dense_index is None
            and len(self.corpus) > 0
        ):
            doc_ids = self.corpus.doc_ids()
            texts = [self.corpus.get(d).surface_text() for d in doc_ids]
            vectors = self.embedder.embed_batch(texts)
            self.dense_index = DenseIndex.build(
                doc_ids,
                vectors,
                mode=self.config.dense_mode,
                seed=self.config.seed,
            )
        if (
            self.config.retrieval.retriever is RetrieverKind.SPARSE
            and self.sparse_index is None
            and len(self.corpus) > 0
        ):
            self.sparse_index = build_sparse_index(self.corpus)

    # ------------------------------------------------------------------
    # Stages
    # ------------------------------------------------------------------

    def retrieve(self, claim: Claim) -> list[EvidencePassage]:
        cfg = self.config.retrieval
        try:
            if cfg.retriever is RetrieverKind.DENSE:
                if self.dense_index is None:
                    return []
                query = embed(self.embedder, claim.text)
                ranked = self.dense_index.search(query, cfg.top_k)
            else:
                if self.sparse_index is None:
                    return []
                tokens, _ = preprocess(claim.text)
                ranked = sparse_search(self.sparse_index, tokens, cfg.top_k)
        except (DenseEmptyIndex, SparseEmptyIndex):
            return []
        return select_evidence(ranked, self.corpus, cfg)

    def verify_claim(self, claim: Claim) -> ClaimAssessment:
        evidence = self.retrieve(claim)
        degraded = False
        try:
            result = reason(claim, evidence, self.config.prompt, self.llm)
            justification = result.justification
        except (BackendUnavailable, UnparseableResponse) as e:
            logger.warning("reasoning failed for claim %s: %s", claim.id, e)
            degraded = True
            justification = Justification(
                text="", model_id=self.config.prompt.model_id, raw_response=""
            )
        return assess(
            claim,
            evidence,
            justification,
            self.config.classifier,
            config_fingerprint=self.fingerprint,
            backend=self.classifier_backend,
            degraded=degraded,
        )

    def verify_claim_text(self, text: str, use_cache: bool = True) -> tuple[ClaimAssessment, bool]:
        """Verify one claim given as plain text; returns (assessment, cached)."""
        key = cache_key(text, self.fingerprint)
        if use_cache and self.cache is not None:
            hit = self.cache.get(key)
            if hit is not None:
                return hit, True
        claim = Claim(
            id=hashlib.sha256(text.encode("utf-8")).hexdigest()[:12], text=text
        )
        assessment = self.verify_claim(claim)
        if use_cache and self.cache is not None:
            self.cache.put(key, assessment)
        return assessment, False

    def verify_document(self, doc: SourceDocument) -> list[ClaimAssessment]:
        llm = None
        if self.config.detection.mode is not DetectionMode.RULE_BASED:
            llm = self.llm
        claims = detect_claims(doc, self.config.detection, llm=llm)
        return [self.verify_claim(claim) for claim in claims]
