"""PubMed client speaking the NCBI E-utilities wire protocol.

Two-step flow: esearch.fcgi returns an id list, efetch.fcgi returns the
abstracts as XML. The client rate-limits itself (NCBI allows 3 req/s
without an API key) and retries 5xx responses twice with backoff.
"""

from __future__ import annotations

import os
import threading
import time
import xml.etree.ElementTree as ET
from datetime import datetime, timezone

import httpx

from .corpus import CorpusDoc

EUTILS_BASE = "https://eutils.ncbi.nlm.nih.gov/entrez/eutils"
API_KEY_ENV = "CER_PUBMED_API_KEY"


class RateLimited(RuntimeError):
    """Upstream rejected the request rate (HTTP 429)."""


class UpstreamError(RuntimeError):
    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"upstream returned HTTP {status}")
        self.status = status


class ParseError(ValueError):
    """E-utilities response XML could not be parsed."""


class PubMedClient:
    def __init__(
        self,
        base_url: str = EUTILS_BASE,
        api_key: str | None = None,
        rate_limit_per_sec: float = 3.0,
        timeout: float = 15.0,
        retry_backoff: float = 0.5,
        transport: httpx.BaseTransport | None = None,
    ):
        if rate_limit_per_sec <= 0:
            raise ValueError("rate_limit_per_sec must be positive")
        self.api_key = api_key if api_key is not None else os.environ.get(API_KEY_ENV)
        self._min_interval = 1.0 / rate_limit_per_sec
        self._retry_backoff = retry_backoff
        self._last_request = 0.0
        self._lock = threading.Lock()
        self._client = httpx.Client(
            base_url=base_url.rstrip("/"), timeout=timeout, transport=transport
        )

    def close(self) -> None:
        self._client.close()

    def _throttle(self) -> None:
        with self._lock:
            now = time.monotonic()
            wait = self._last_request + self._min_interval - now
            if wait > 0:
                time.sleep(wait)
            self._last_request = time.monotonic()

    def _get(self, path: str, params: dict) -> str:
        if self.api_key:
            params = {**params, "api_key": self.api_key}
        attempts = 0
        delay = self._retry_backoff
        while True:
            attempts += 1
            self._throttle()
            try:
                resp = self._client.get(path, params=params)
            except httpx.HTTPError as e:
                raise UpstreamError(0, f"request to {path} failed: {e}") from e
            if resp.status_code == 429:
                raise RateLimited(f"{path}: rate limited by upstream")
            if resp.status_code >= 500 and attempts <= 2:
                time.sleep(delay)
                delay *= 2
                continue
            if resp.status_code != 200:
                raise UpstreamError(resp.status_code)
            return resp.text

    def search_ids(self, query: str, max_docs: int) -> list[str]:
        if not query:
            raise ValueError("query must be non-empty")
        if max_docs < 1:
            raise ValueError("max_docs must be positive")
        body = self._get(
            "/esearch.fcgi",
            {"db": "pubmed", "term": query, "retmax": max_docs, "retmode": "xml"},
        )
        try:
            root = ET.fromstring(body)
        except ET.ParseError as e:
            raise ParseError(f"malformed esearch XML: {e}") from e
        return [el.text for el in root.findall(".//IdList/Id") if el.text]

    def fetch_abstracts(self, pmids: list[str]) -> list[CorpusDoc]:
        if not pmids:
            return []
        body = self._get(
            "/efetch.fcgi",
            {
                "db": "pubmed",
                "id": ",".join(pmids),
                "retmode": "xml",
                "rettype": "abstract",
            },
        )
        try:
            root = ET.fromstring(body)
        except ET.ParseError as e:
            raise ParseError(f"malformed efetch XML: {e}") from e
        fetched_at = datetime.now(timezone.utc).isoformat(timespec="seconds")
        docs = []
        for article in root.findall(".//PubmedArticle"):
            pmid_el = article.find(".//MedlineCitation/PMID")
            title_el = article.find(".//Article/ArticleTitle")
            pmid = pmid_el.text if pmid_el is not None else None
            if not pmid:
                continue
            title = "".join(title_el.itertext()).strip() if title_el is not None else ""
            sections = [
                "".join(el.itertext()).strip()
                for el in article.findall(".//Abstract/AbstractText")
            ]
            abstract = " ".join(s for s in sections if s)
            if not abstract:
                continue  # abstracts-only corpus; skip title-only records
            docs.append(
                CorpusDoc(
                    doc_id=pmid, title=title, abstract=abstract, fetched_at=fetched_at
                )
            )
        return docs

    def search_fetch(self, query: str, max_docs: int) -> list[CorpusDoc]:
        """esearch then efetch; returns at most max_docs parsed docs."""
        pmids = self.search_ids(query, max_docs)
        return self.fetch_abstracts(pmids[:max_docs])
