"""Pluggable model backends: LLM, embeddings, and verdict classifiers.

Every backend comes in two flavors behind one interface: an HTTP adapter
speaking a small JSON wire format, and a deterministic mock used by the
hermetic test suite and by ``--mock-backends`` runs. Mocks never touch the
network and always return the same output for the same input.

Wire formats:
  LLM         POST {model_id, system_prompt, user_prompt, temperature,
                    max_tokens} -> {text}
  embeddings  POST {model_id, texts: [str]} -> {vectors: [[float]]}
  classifier  POST {texts: [str], label_space: [str]} -> {probs: [[float]]}
"""

from __future__ import annotations

import hashlib
import re
import threading
import time
from typing import Optional, Protocol, Sequence

import httpx
import numpy as np

from .models import VerdictLabel


class BackendUnavailable(RuntimeError):
    """A backend could not be reached or kept failing.

    Carries retry metadata so callers can decide whether to degrade or
    surface the failure.
    """

    def __init__(self, message: str, attempts: int = 1, retryable: bool = True):
        super().__init__(message)
        self.attempts = attempts
        self.retryable = retryable


# In-flight request limit shared by the LLM and classifier adapters.
DEFAULT_CONCURRENCY = 4


def _post_json(
    url: str,
    payload: dict,
    timeout: float,
    retries: int = 2,
    semaphore: Optional[threading.Semaphore] = None,
    client: Optional[httpx.Client] = None,
    backoff: float = 0.5,
) -> dict:
    """POST with bounded retries (exponential backoff on 5xx / transport errors)."""
    attempts = 0
    delay = backoff
    last_err: Exception | None = None
    while attempts <= retries:
        attempts += 1
        try:
            if semaphore is not None:
                semaphore.acquire()
            try:
                if client is not None:
                    resp = client.post(url, json=payload, timeout=timeout)
                else:
                    resp = httpx.post(url, json=payload, timeout=timeout)
            finally:
                if semaphore is not None:
                    semaphore.release()
            if resp.status_code >= 500:
                last_err = BackendUnavailable(
                    f"{url} returned {resp.status_code}", attempts=attempts
                )
            elif resp.status_code >= 400:
                raise BackendUnavailable(
                    f"{url} returned {resp.status_code}",
                    attempts=attempts,
                    retryable=False,
                )
            else:
                return resp.json()
        except httpx.TimeoutException as e:
            last_err = e
        except httpx.HTTPError as e:
            last_err = e
        if attempts <= retries:
            time.sleep(delay)
            delay *= 2
    raise BackendUnavailable(
        f"backend at {url} unavailable after {attempts} attempts: {last_err}",
        attempts=attempts,
    )


# ---------------------------------------------------------------------------
# LLM backend (shared by claim detection and reasoning)
# ---------------------------------------------------------------------------

class LlmBackend(Protocol):
    def complete(
        self,
        model_id: str,
        system_prompt: str,
        user_prompt: str,
        temperature: float,
        max_tokens: int,
    ) -> str: ...


class HttpLlmBackend:
    """Chat-completions-style HTTP adapter."""

    def __init__(
        self,
        endpoint: str,
        timeout: float = 60.0,
        retries: int = 2,
        semaphore: Optional[threading.Semaphore] = None,
        transport: Optional[httpx.BaseTransport] = None,
        backoff: float = 0.5,
    ):
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self.semaphore = semaphore or threading.Semaphore(DEFAULT_CONCURRENCY)
        self._client = httpx.Client(transport=transport) if transport else None

    def complete(self, model_id, system_prompt, user_prompt, temperature, max_tokens):
        data = _post_json(
            self.endpoint,
            {
                "model_id": model_id,
                "system_prompt": system_prompt,
                "user_prompt": user_prompt,
                "temperature": temperature,
                "max_tokens": max_tokens,
            },
            timeout=self.timeout,
            retries=self.retries,
            semaphore=self.semaphore,
            client=self._client,
            backoff=self.backoff,
        )
        try:
            return data["text"]
        except (KeyError, TypeError):
            raise BackendUnavailable(
                f"malformed LLM response from {self.endpoint}", retryable=False
            )


def prompt_digest(prompt: str) -> str:
    return hashlib.sha256(prompt.encode("utf-8")).hexdigest()


class MockLlmBackend:
    """Deterministic stand-in for an LLM endpoint.

    Canned responses are registered against the SHA-256 of the exact user
    prompt. Unregistered prompts get a structural default: detection-style
    prompts are answered with one CLAIM line per listed sentence, and
    reasoning-style prompts with a well-formed judgment + justification
    whose polarity is derived from the prompt hash.
    """

    def __init__(self):
        self._canned: dict[str, str] = {}
        self.calls: list[str] = []

    def register(self, user_prompt: str, response: str) -> None:
        self._canned[prompt_digest(user_prompt)] = response

    def complete(self, model_id, system_prompt, user_prompt, temperature, max_tokens):
        self.calls.append(user_prompt)
        digest = prompt_digest(user_prompt)
        if digest in self._canned:
            return self._canned[digest]
        if "CLAIM" in user_prompt and "OTHER" in user_prompt:
            n = len(re.findall(r"(?m)^\d+\. ", user_prompt))
            return "\n".join("CLAIM" for _ in range(max(n, 1)))
        if "JUDGMENT:" in user_prompt:
            verdict = "true" if int(digest[:8], 16) % 2 == 0 else "false"
            return (
                f"JUDGMENT: {verdict}\n"
                f"JUSTIFICATION: Deterministic mock justification ({digest[:12]})."
            )
        return f"mock-response-{digest[:12]}"


# ---------------------------------------------------------------------------
# Embedding backend
# ---------------------------------------------------------------------------

class DimensionMismatch(ValueError):
    """Backend returned vectors of an unexpected dimension."""


class EmbeddingBackend(Protocol):
    dim: int

    def embed_batch(self, texts: Sequence[str]) -> np.ndarray: ...


def unit_normalize(v: np.ndarray) -> np.ndarray:
    norm = float(np.linalg.norm(v))
    if norm == 0.0 or not np.isfinite(norm):
        out = np.zeros_like(v)
        out[0] = 1.0
        return out
    return v / norm


class HttpEmbeddingBackend:
    def __init__(
        self,
        endpoint: str,
        dim: int = 384,
        model_id: str = "default-embedder",
        timeout: float = 10.0,
        retries: int = 2,
        transport: Optional[httpx.BaseTransport] = None,
        backoff: float = 0.5,
    ):
        self.endpoint = endpoint
        self.dim = dim
        self.model_id = model_id
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._client = httpx.Client(transport=transport) if transport else None

    def embed_batch(self, texts):
        data = _post_json(
            self.endpoint,
            {"model_id": self.model_id, "texts": list(texts)},
            timeout=self.timeout,
            retries=self.retries,
            client=self._client,
            backoff=self.backoff,
        )
        try:
            vectors = np.asarray(data["vectors"], dtype=np.float64)
        except (KeyError, TypeError, ValueError):
            raise BackendUnavailable(
                f"malformed embedding response from {self.endpoint}", retryable=False
            )
        if vectors.ndim != 2 or vectors.shape != (len(texts), self.dim):
            raise DimensionMismatch(
                f"expected {(len(texts), self.dim)}, got {vectors.shape}"
            )
        return np.vstack([unit_normalize(v) for v in vectors])


class MockEmbeddingBackend:
    """Seeded hash-projection embedder: deterministic, no model involved.

    Each token maps to a fixed pseudo-random Gaussian vector (seeded by the
    token hash); a text embeds as the L2-normalized sum over its token
    multiset, so repeated tokens count with multiplicity and identical
    strings always embed identically.
    """

    def __init__(self, dim: int = 384, seed: int = 0):
        self.dim = dim
        self.seed = seed
        self._token_cache: dict[str, np.ndarray] = {}

    def _token_vector(self, token: str) -> np.ndarray:
        vec = self._token_cache.get(token)
        if vec is None:
            h = hashlib.sha256(f"{self.seed}:{token}".encode("utf-8")).digest()
            rng = np.random.default_rng(int.from_bytes(h[:8], "little"))
            vec = rng.standard_normal(self.dim)
            self._token_cache[token] = vec
        return vec

    def embed_batch(self, texts):
        out = np.zeros((len(texts), self.dim), dtype=np.float64)
        for i, text in enumerate(texts):
            tokens = re.findall(r"[\w]+", text.lower())
            acc = np.zeros(self.dim, dtype=np.float64)
            for tok in tokens:
                acc += self._token_vector(tok)
            out[i] = unit_normalize(acc)
        return out


def embed(backend: EmbeddingBackend, text: str) -> np.ndarray:
    """Embed a single text as a unit vector of the backend's dimension."""
    vec = backend.embed_batch([text])[0]
    if vec.shape != (backend.dim,):
        raise DimensionMismatch(f"expected ({backend.dim},), got {vec.shape}")
    return unit_normalize(vec)


# ---------------------------------------------------------------------------
# Classifier backend
# ---------------------------------------------------------------------------

class LabelSpaceMismatch(ValueError):
    """Backend probabilities do not align with the requested label space."""


class ClassifierBackend(Protocol):
    def classify_batch(
        self, texts: Sequence[str], label_space: Sequence[VerdictLabel]
    ) -> list[list[float]]: ...


# Entailment hypotheses used when the backend is a generic zero-shot NLI
# endpoint rather than a verdict-tuned one.
NLI_HYPOTHESES = {
    VerdictLabel.TRUE: "This claim is true given the evidence.",
    VerdictLabel.FALSE: "This claim is false given the evidence.",
    VerdictLabel.NEI: "This claim is unverifiable given the evidence.",
}


class HttpClassifierBackend:
    """Fine-tuned verdict endpoint: label space is passed through verbatim."""

    def __init__(
        self,
        endpoint: str,
        timeout: float = 30.0,
        retries: int = 2,
        transport: Optional[httpx.BaseTransport] = None,
        backoff: float = 0.5,
    ):
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self.backoff = backoff
        self._client = httpx.Client(transport=transport) if transport else None

    def _wire_labels(self, label_space: Sequence[VerdictLabel]) -> list[str]:
        return [lab.value for lab in label_space]

    def classify_batch(self, texts, label_space):
        data = _post_json(
            self.endpoint,
            {"texts": list(texts), "label_space": self._wire_labels(label_space)},
            timeout=self.timeout,
            retries=self.retries,
            client=self._client,
            backoff=self.backoff,
        )
        probs = data.get("probs") if isinstance(data, dict) else None
        if not isinstance(probs, list) or len(probs) != len(texts):
            raise BackendUnavailable(
                f"malformed classifier response from {self.endpoint}", retryable=False
            )
        for row in probs:
            if len(row) != len(label_space):
                raise LabelSpaceMismatch(
                    f"expected {len(label_space)} probabilities, got {len(row)}"
                )
        return probs


class ZeroShotNliBackend(HttpClassifierBackend):
    """Zero-shot path: verdicts become entailment hypotheses on the wire."""

    def _wire_labels(self, label_space):
        return [NLI_HYPOTHESES[lab] for lab in label_space]


class MockClassifierBackend:
    """Deterministic classifier keyed on the input hash.

    Optionally forces specific labels: ``force`` maps a claim text (the part
    of the classifier input before the separator) to the label that should
    win, which gets ``force_confidence`` probability mass.
    """

    def __init__(
        self,
        seed: int = 0,
        force: Optional[dict[str, VerdictLabel]] = None,
        force_confidence: float = 0.7,
    ):
        self.seed = seed
        self.force = force or {}
        self.force_confidence = force_confidence

    def _forced_label(self, text: str) -> Optional[VerdictLabel]:
        claim_part = text.split(" [SEP] ")[0]
        return self.force.get(claim_part, self.force.get(text))

    def classify_batch(self, texts, label_space):
        rows = []
        for text in texts:
            forced = self._forced_label(text)
            if forced is not None and forced in label_space:
                rest = (1.0 - self.force_confidence) / max(len(label_space) - 1, 1)
                row = [
                    self.force_confidence if lab is forced else rest
                    for lab in label_space
                ]
            else:
                h = hashlib.sha256(f"{self.seed}:{text}".encode("utf-8")).digest()
                raw = [1 + h[i % len(h)] for i in range(len(label_space))]
                total = sum(raw)
                row = [r / total for r in raw]
            rows.append(row)
        return rows
