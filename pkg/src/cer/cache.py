"""Durable assessment cache: single-file append log + in-memory LRU index.

Each put appends one JSON line {key, assessment}; the newest record for a
key wins on load. The file is compacted at startup when it contains dead
or over-bound records. Disk problems are never fatal: a corrupt record is
a miss, a failed write is logged and skipped.
"""

from __future__ import annotations

import hashlib
import json
import logging
import threading
from collections import OrderedDict
from pathlib import Path
from typing import Optional

from .models import ClaimAssessment

logger = logging.getLogger("cer.cache")


def cache_key(claim_text: str, fingerprint: str) -> str:
    normalized = " ".join(claim_text.split())
    return hashlib.sha256(f"{normalized}:{fingerprint}".encode("utf-8")).hexdigest()


class AssessmentCache:
    def __init__(self, path: str | Path, max_entries: int = 10_000):
        if max_entries < 1:
            raise ValueError("max_entries must be positive")
        self._path = Path(path)
        self._max_entries = max_entries
        self._lock = threading.Lock()
        self._index: OrderedDict[str, ClaimAssessment] = OrderedDict()
        self._load()

    def __len__(self) -> int:
        with self._lock:
            return len(self._index)

    def _load(self) -> None:
        if not self._path.exists():
            return
        live = 0
        total = 0
        try:
            with open(self._path, "r", encoding="utf-8") as fh:
                for line in fh:
                    line = line.strip()
                    if not line:
                        continue
                    total += 1
                    try:
                        rec = json.loads(line)
                        assessment = ClaimAssessment.from_dict(rec["assessment"])
                        key = rec["key"]
                    except (json.JSONDecodeError, KeyError, ValueError, TypeError):
                        logger.warning("skipping corrupt cache record")
                        continue
                    self._index.pop(key, None)
                    self._index[key] = assessment
                    live += 1
        except OSError as e:
            logger.warning("cache file unreadable, starting empty: %s", e)
            self._index.clear()
            return
        while len(self._index) > self._max_entries:
            self._index.popitem(last=False)
        if total != len(self._index):
            self._compact()

    def _compact(self) -> None:
        tmp = self._path.with_suffix(self._path.suffix + ".tmp")
        try:
            with open(tmp, "w", encoding="utf-8") as fh:
                for key, assessment in self._index.items():
                    fh.write(
                        json.dumps(
                            {"key": key, "assessment": assessment.to_dict()},
                            ensure_ascii=False,
                        )
                    )
                    fh.write("\n")
            tmp.replace(self._path)
        except OSError as e:
            logger.warning("cache compaction failed (continuing): %s", e)

    def get(self, key: str) -> Optional[ClaimAssessment]:
        with self._lock:
            assessment = self._index.get(key)
            if assessment is not None:
                self._index.move_to_end(key)
            return assessment

    def put(self, key: str, assessment: ClaimAssessment) -> None:
        with self._lock:
            self._index.pop(key, None)
            self._index[key] = assessment
            while len(self._index) > self._max_entries:
                self._index.popitem(last=False)
            try:
                self._path.parent.mkdir(parents=True, exist_ok=True)
                with open(self._path, "a", encoding="utf-8") as fh:
                    fh.write(
                        json.dumps(
                            {"key": key, "assessment": assessment.to_dict()},
                            ensure_ascii=False,
                        )
                    )
                    fh.write("\n")
            except OSError as e:
                logger.warning("cache write failed (continuing): %s", e)
