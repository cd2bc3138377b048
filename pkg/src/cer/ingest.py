"""Input normalization: plain text, web pages, and video transcripts all
become SourceDocuments ready for claim detection.

Web-page text extraction is tag-soup tolerant and purely tag-based: content
of non-visible elements (script/style/head/nav/header/footer/...) is
dropped, block-level boundaries become newlines, and whitespace collapses
to single spaces within a line. Speech-to-text is an adapter: the engine
never embeds a speech model.
"""

from __future__ import annotations

import base64
import hashlib
import json
import re
from dataclasses import dataclass
from datetime import datetime, timezone
from html.parser import HTMLParser
from pathlib import Path
from typing import Optional, Protocol
from urllib.parse import urlparse

import httpx

from .backends import BackendUnavailable, _post_json
from .models import SourceKind


class EmptyDocument(ValueError):
    """No visible text remained after extraction."""


class FetchTimeout(RuntimeError):
    pass


class TooLarge(RuntimeError):
    pass


class HttpError(RuntimeError):
    def __init__(self, status: int, message: str = ""):
        super().__init__(message or f"HTTP {status}")
        self.status = status


class MediaDecodeError(RuntimeError):
    """Media bytes could not be decoded by the speech backend."""


@dataclass(frozen=True)
class TranscriptSegment:
    start_sec: float
    end_sec: float
    text: str

    def __post_init__(self):
        if self.start_sec < 0:
            raise ValueError("start_sec must be >= 0")
        if self.end_sec <= self.start_sec:
            raise ValueError("end_sec must be > start_sec")


def _check_segments(segments: list[TranscriptSegment]) -> None:
    for prev, cur in zip(segments, segments[1:]):
        if cur.start_sec < prev.end_sec:
            raise ValueError(
                f"segments overlap or are unsorted: {prev} before {cur}"
            )


@dataclass(frozen=True)
class SourceDocument:
    kind: SourceKind
    raw_text: str
    uri: Optional[str] = None
    segments: Optional[tuple[TranscriptSegment, ...]] = None
    fetched_at: str = ""

    def __post_init__(self):
        if self.kind is SourceKind.WEB_PAGE and not self.uri:
            raise ValueError("web_page documents require a uri")
        if self.segments is not None:
            _check_segments(list(self.segments))
            joined = " ".join(seg.text for seg in self.segments)
            if joined != self.raw_text:
                raise ValueError("raw_text must equal space-joined segment texts")

    @classmethod
    def from_text(cls, text: str) -> "SourceDocument":
        return cls(kind=SourceKind.DIRECT, raw_text=text, fetched_at=_now())

    @classmethod
    def from_web(cls, uri: str, html: str) -> "SourceDocument":
        return cls(
            kind=SourceKind.WEB_PAGE,
            raw_text=extract_web_text(html),
            uri=uri,
            fetched_at=_now(),
        )

    @classmethod
    def from_segments(
        cls, segments: list[TranscriptSegment], uri: Optional[str] = None
    ) -> "SourceDocument":
        return cls(
            kind=SourceKind.VIDEO,
            raw_text=" ".join(seg.text for seg in segments),
            uri=uri,
            segments=tuple(segments),
            fetched_at=_now(),
        )


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


# ---------------------------------------------------------------------------
# Web page text extraction
# ---------------------------------------------------------------------------

# Elements whose content a text-only render never shows.
_HIDDEN_TAGS = frozenset(
    {"script", "style", "noscript", "template", "head", "title",
     "nav", "header", "footer"}
)

# Elements that open/close a visual block; boundaries become newlines.
_BLOCK_TAGS = frozenset(
    {"p", "div", "br", "li", "ul", "ol", "dl", "dt", "dd", "h1", "h2", "h3",
     "h4", "h5", "h6", "table", "thead", "tbody", "tfoot", "tr", "caption",
     "blockquote", "pre", "section", "article", "aside", "main", "figure",
     "figcaption", "hr", "form", "fieldset", "address"}
)

# Cells separate with a space, not a new line.
_CELL_TAGS = frozenset({"td", "th"})

_WS_RE = re.compile(r"\s+")


class _VisibleTextParser(HTMLParser):
    def __init__(self):
        super().__init__(convert_charrefs=True)
        self._hidden_depth: dict[str, int] = {}
        self._buffer: list[str] = []
        self.lines: list[str] = []

    def _hidden(self) -> bool:
        return any(v > 0 for v in self._hidden_depth.values())

    def _flush(self) -> None:
        line = _WS_RE.sub(" ", "".join(self._buffer)).strip()
        self._buffer.clear()
        if line:
            self.lines.append(line)

    def handle_starttag(self, tag, attrs):
        if tag in _HIDDEN_TAGS:
            self._hidden_depth[tag] = self._hidden_depth.get(tag, 0) + 1
        if tag in _BLOCK_TAGS:
            self._flush()
        elif tag in _CELL_TAGS:
            self._buffer.append(" ")

    def handle_endtag(self, tag):
        if tag in _HIDDEN_TAGS:
            depth = self._hidden_depth.get(tag, 0)
            if depth > 0:
                self._hidden_depth[tag] = depth - 1
        if tag in _BLOCK_TAGS:
            self._flush()
        elif tag in _CELL_TAGS:
            self._buffer.append(" ")

    def handle_startendtag(self, tag, attrs):
        if tag in _BLOCK_TAGS:
            self._flush()

    def handle_data(self, data):
        if self._hidden():
            return
        pieces = data.split("\n")
        for i, piece in enumerate(pieces):
            if i > 0:
                self._flush()
            self._buffer.append(piece)

    def result(self) -> str:
        self._flush()
        return "\n".join(self.lines)


def extract_web_text(html: str) -> str:
    """Visible text in document order; newline per block, collapsed spaces.

    Idempotent on its own output as long as the visible text itself does
    not contain markup-significant sequences ("<letter", entity refs).
    """
    parser = _VisibleTextParser()
    parser.feed(html)
    parser.close()
    text = parser.result()
    if not text:
        raise EmptyDocument("no visible text in document")
    return text


# ---------------------------------------------------------------------------
# URL fetching
# ---------------------------------------------------------------------------

def fetch_url(
    url: str,
    timeout: float = 15.0,
    max_bytes: int = 5_000_000,
    max_redirects: int = 5,
    transport: Optional[httpx.BaseTransport] = None,
) -> str:
    """GET a page body; follows at most max_redirects, enforces timeout and
    a body size cap."""
    parsed = urlparse(url)
    if parsed.scheme not in ("http", "https"):
        raise ValueError(f"url must be http(s), got {url!r}")
    redirects = 0
    current = url
    with httpx.Client(
        follow_redirects=False, timeout=timeout, transport=transport
    ) as client:
        while True:
            try:
                resp = client.get(current)
            except httpx.TimeoutException as e:
                raise FetchTimeout(f"fetching {current} timed out") from e
            except httpx.HTTPError as e:
                raise HttpError(0, f"fetching {current} failed: {e}") from e
            if resp.status_code in (301, 302, 303, 307, 308):
                redirects += 1
                if redirects > max_redirects:
                    raise HttpError(
                        resp.status_code,
                        f"redirect limit ({max_redirects}) exceeded at {current}",
                    )
                location = resp.headers.get("location")
                if not location:
                    raise HttpError(resp.status_code, "redirect without Location")
                current = str(httpx.URL(current).join(location))
                continue
            if resp.status_code >= 400 or resp.status_code < 200:
                raise HttpError(resp.status_code)
            body = resp.content
            if len(body) > max_bytes:
                raise TooLarge(f"body of {len(body)} bytes exceeds cap {max_bytes}")
            return resp.text


# ---------------------------------------------------------------------------
# Speech-to-text adapter
# ---------------------------------------------------------------------------

class SpeechBackend(Protocol):
    def transcribe(
        self, media: bytes, lang_hint: Optional[str]
    ) -> list[TranscriptSegment]: ...


class HttpSpeechBackend:
    """Adapter for an external transcription service.

    The service is expected to handle media decoding itself (the usual
    deployment pairs it with a decoder command such as
    ``ffmpeg -i <in> -ac 1 -ar 16000 -f s16le -`` producing mono 16 kHz
    PCM). Wire format: {audio: base64, lang_hint} -> {segments: [{start,
    end, text}]}.
    """

    def __init__(
        self,
        endpoint: str,
        timeout: float = 120.0,
        retries: int = 2,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.endpoint = endpoint
        self.timeout = timeout
        self.retries = retries
        self._client = httpx.Client(transport=transport) if transport else None

    def transcribe(self, media, lang_hint):
        data = _post_json(
            self.endpoint,
            {
                "audio": base64.b64encode(media).decode("ascii"),
                "lang_hint": lang_hint,
            },
            timeout=self.timeout,
            retries=self.retries,
            client=self._client,
        )
        if "error" in data:
            raise MediaDecodeError(str(data["error"]))
        try:
            return [
                TranscriptSegment(seg["start"], seg["end"], seg["text"])
                for seg in data["segments"]
            ]
        except (KeyError, TypeError) as e:
            raise BackendUnavailable(
                f"malformed transcription response: {e}", retryable=False
            )


class MockSpeechBackend:
    """Fixture-table transcriber: SHA-256(media) -> registered segments.

    The table may come from a JSON file ({hex_digest: [[start, end, text],
    ...]}) or be registered programmatically. Unknown media raises
    MediaDecodeError; empty audio transcribes to no segments.
    """

    def __init__(self, fixture_path: Optional[str | Path] = None):
        self._table: dict[str, list[TranscriptSegment]] = {}
        if fixture_path is not None:
            raw = json.loads(Path(fixture_path).read_text("utf-8"))
            for digest, segs in raw.items():
                self._table[digest] = [
                    TranscriptSegment(s[0], s[1], s[2]) for s in segs
                ]

    def register(self, media: bytes, segments: list[TranscriptSegment]) -> None:
        self._table[hashlib.sha256(media).hexdigest()] = list(segments)

    def transcribe(self, media, lang_hint):
        if not media:
            return []
        digest = hashlib.sha256(media).hexdigest()
        if digest not in self._table:
            raise MediaDecodeError(f"no fixture registered for media {digest[:12]}")
        return list(self._table[digest])


def transcribe_video(
    media: bytes, backend: SpeechBackend, lang_hint: Optional[str] = "en"
) -> list[TranscriptSegment]:
    """Transcribe media through the configured adapter; validates ordering."""
    segments = backend.transcribe(media, lang_hint)
    _check_segments(segments)
    return segments
