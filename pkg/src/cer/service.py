"""HTTP service: synchronous claim verification plus asynchronous URL and
video jobs, a health probe, and the config fingerprint endpoint.

Routes (JSON unless noted):
  POST /v1/verify/claim   {text} -> {assessment, cached}
  POST /v1/verify/url     {url} -> job stub
  POST /v1/verify/video   multipart upload -> job stub
  GET  /v1/jobs/{id}      job state + results
  GET  /v1/health
  GET  /v1/config
"""

from __future__ import annotations

import logging
import threading
import uuid
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional
from urllib.parse import urlparse

from fastapi import FastAPI, File, HTTPException, UploadFile
from fastapi.responses import JSONResponse
from fastapi.staticfiles import StaticFiles
from pydantic import BaseModel

from .backends import BackendUnavailable
from .ingest import (
    FetchTimeout,
    HttpError,
    MockSpeechBackend,
    SourceDocument,
    SpeechBackend,
    TooLarge,
    fetch_url,
    transcribe_video,
)
from .models import ClaimAssessment
from .pipeline import Pipeline

logger = logging.getLogger("cer.service")


class ClaimRequest(BaseModel):
    text: str


class UrlRequest(BaseModel):
    url: str


@dataclass
class VerificationJob:
    job_id: str
    kind: str
    input_ref: str
    state: str = "queued"
    results: list[ClaimAssessment] = field(default_factory=list)
    error: Optional[str] = None

    def to_dict(self) -> dict:
        return {
            "job_id": self.job_id,
            "kind": self.kind,
            "input_ref": self.input_ref,
            "state": self.state,
            "results": [a.to_dict() for a in self.results],
            "error": self.error,
        }


_TRANSITIONS = {
    "queued": {"running"},
    "running": {"done", "failed"},
    "done": set(),
    "failed": set(),
}


class JobStore:
    def __init__(self, workers: int = 2):
        self._jobs: dict[str, VerificationJob] = {}
        self._lock = threading.Lock()
        self._executor = ThreadPoolExecutor(max_workers=workers)

    def create(self, kind: str, input_ref: str) -> VerificationJob:
        job = VerificationJob(job_id=uuid.uuid4().hex, kind=kind, input_ref=input_ref)
        with self._lock:
            self._jobs[job.job_id] = job
        return job

    def get(self, job_id: str) -> Optional[VerificationJob]:
        with self._lock:
            return self._jobs.get(job_id)

    def transition(self, job: VerificationJob, state: str) -> None:
        with self._lock:
            if state not in _TRANSITIONS[job.state]:
                raise RuntimeError(f"illegal transition {job.state} -> {state}")
            job.state = state

    def submit(self, job: VerificationJob, fn) -> None:
        def run():
            self.transition(job, "running")
            try:
                job.results = fn()
            except Exception as e:  # job failure is data, not a crash
                job.error = f"{type(e).__name__}: {e}"
                self.transition(job, "failed")
                return
            self.transition(job, "done")

        self._executor.submit(run)

    def shutdown(self) -> None:
        self._executor.shutdown(wait=False)


def create_app(
    pipeline: Pipeline,
    speech_backend: Optional[SpeechBackend] = None,
    static_dir: Optional[str | Path] = None,
    fetch_transport=None,
) -> FastAPI:
    app = FastAPI(title="cer", version="0.1.0")
    jobs = JobStore()
    app.state.pipeline = pipeline
    app.state.jobs = jobs
    if speech_backend is None:
        speech_backend = MockSpeechBackend()
    cfg = pipeline.config

    @app.post("/v1/verify/claim")
    def verify_claim(req: ClaimRequest):
        text = req.text.strip()
        if not text:
            raise HTTPException(status_code=400, detail="claim text is empty")
        if len(text) > cfg.max_claim_chars:
            raise HTTPException(
                status_code=400,
                detail=f"claim text exceeds {cfg.max_claim_chars} characters",
            )
        try:
            assessment, cached = pipeline.verify_claim_text(text)
        except BackendUnavailable as e:
            raise HTTPException(status_code=502, detail=str(e))
        return {"assessment": assessment.to_dict(), "cached": cached}

    @app.post("/v1/verify/url", status_code=202)
    def verify_url(req: UrlRequest):
        parsed = urlparse(req.url)
        if parsed.scheme not in ("http", "https") or not parsed.netloc:
            raise HTTPException(status_code=400, detail="invalid url")
        job = jobs.create("url", req.url)

        def run() -> list[ClaimAssessment]:
            html = fetch_url(
                req.url,
                timeout=cfg.timeouts.fetch,
                transport=fetch_transport,
            )
            doc = SourceDocument.from_web(req.url, html)
            return pipeline.verify_document(doc)

        jobs.submit(job, run)
        return {"job_id": job.job_id, "state": job.state}

    @app.post("/v1/verify/video", status_code=202)
    async def verify_video(file: UploadFile = File(...)):
        media = await file.read()
        if len(media) > cfg.max_video_bytes:
            raise HTTPException(status_code=413, detail="upload too large")
        job = jobs.create("video", file.filename or "upload")

        def run() -> list[ClaimAssessment]:
            segments = transcribe_video(media, speech_backend)
            if not segments:
                return []
            doc = SourceDocument.from_segments(segments, uri=job.input_ref)
            return pipeline.verify_document(doc)

        jobs.submit(job, run)
        return {"job_id": job.job_id, "state": job.state}

    @app.get("/v1/jobs/{job_id}")
    def get_job(job_id: str):
        job = jobs.get(job_id)
        if job is None:
            raise HTTPException(status_code=404, detail="unknown job")
        return job.to_dict()

    @app.get("/v1/health")
    def health():
        return {
            "status": "ok",
            "corpus_docs": len(pipeline.corpus),
            "fingerprint": pipeline.fingerprint,
        }

    @app.get("/v1/config")
    def get_config():
        return {
            "fingerprint": pipeline.fingerprint,
            "config": pipeline.config.to_dict(),
        }

    @app.exception_handler(FetchTimeout)
    def fetch_timeout_handler(request, exc):
        return JSONResponse(status_code=504, content={"detail": str(exc)})

    @app.exception_handler(TooLarge)
    def too_large_handler(request, exc):
        return JSONResponse(status_code=413, content={"detail": str(exc)})

    @app.exception_handler(HttpError)
    def http_error_handler(request, exc):
        return JSONResponse(status_code=502, content={"detail": str(exc)})

    if static_dir and Path(static_dir).is_dir():
        app.mount("/", StaticFiles(directory=str(static_dir), html=True), name="ui")

    return app
