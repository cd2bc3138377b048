import json

from cer.cache import AssessmentCache, cache_key
from cer.models import Claim, ClaimAssessment, Justification, VerdictLabel


def _assessment(text="Aspirin reduces fever.", fingerprint="fp1") -> ClaimAssessment:
    return ClaimAssessment(
        claim=Claim(id="c", text=text),
        label=VerdictLabel.TRUE,
        confidence=0.8,
        evidence=(),
        justification=Justification(text="j"),
        config_fingerprint=fingerprint,
    )


class TestCacheKey:
    def test_whitespace_normalized(self):
        assert cache_key("a   b\tc", "fp") == cache_key("a b c", "fp")

    def test_fingerprint_changes_key(self):
        assert cache_key("claim", "fp1") != cache_key("claim", "fp2")


class TestAssessmentCache:
    def test_put_get_round_trip(self, tmp_path):
        cache = AssessmentCache(tmp_path / "cache.jsonl")
        key = cache_key("Aspirin reduces fever.", "fp1")
        cache.put(key, _assessment())
        assert cache.get(key) == _assessment()

    def test_miss_on_fingerprint_change(self, tmp_path):
        cache = AssessmentCache(tmp_path / "cache.jsonl")
        cache.put(cache_key("claim text", "fp1"), _assessment())
        assert cache.get(cache_key("claim text", "fp2")) is None

    def test_survives_restart(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        key = cache_key("Aspirin reduces fever.", "fp1")
        AssessmentCache(path).put(key, _assessment())
        reopened = AssessmentCache(path)
        assert reopened.get(key) == _assessment()

    def test_corrupt_record_is_a_miss_not_a_crash(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        cache = AssessmentCache(path)
        key_ok = cache_key("good claim here", "fp")
        key_bad = cache_key("bad claim here", "fp")
        cache.put(key_ok, _assessment("good claim here"))
        cache.put(key_bad, _assessment("bad claim here"))
        lines = path.read_text().splitlines()
        lines[1] = lines[1][: len(lines[1]) // 2]  # truncate the second record
        path.write_text("\n".join(lines) + "\n")
        reopened = AssessmentCache(path)
        assert reopened.get(key_ok) == _assessment("good claim here")
        assert reopened.get(key_bad) is None

    def test_lru_eviction_above_bound(self, tmp_path):
        cache = AssessmentCache(tmp_path / "cache.jsonl", max_entries=2)
        keys = [cache_key(f"claim {i}", "fp") for i in range(3)]
        for i, key in enumerate(keys):
            cache.put(key, _assessment(f"claim {i}"))
        assert cache.get(keys[0]) is None
        assert cache.get(keys[1]) is not None
        assert cache.get(keys[2]) is not None

    def test_lru_recency_on_get(self, tmp_path):
        cache = AssessmentCache(tmp_path / "cache.jsonl", max_entries=2)
        k0, k1, k2 = (cache_key(f"claim {i}", "fp") for i in range(3))
        cache.put(k0, _assessment("claim 0"))
        cache.put(k1, _assessment("claim 1"))
        cache.get(k0)  # refresh k0; k1 becomes the eviction candidate
        cache.put(k2, _assessment("claim 2"))
        assert cache.get(k0) is not None
        assert cache.get(k1) is None

    def test_startup_compaction_drops_dead_records(self, tmp_path):
        path = tmp_path / "cache.jsonl"
        cache = AssessmentCache(path)
        key = cache_key("claim text", "fp")
        for _ in range(5):
            cache.put(key, _assessment("claim text"))  # 5 appended records
        assert len(path.read_text().splitlines()) == 5
        AssessmentCache(path)  # reopening compacts
        lines = path.read_text().splitlines()
        assert len(lines) == 1
        assert json.loads(lines[0])["key"] == key
