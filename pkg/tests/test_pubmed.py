import time

import httpx
import pytest

from cer.pubmed import ParseError, PubMedClient, RateLimited, UpstreamError

ESEARCH_XML = """<?xml version="1.0" encoding="UTF-8"?>
<eSearchResult>
  <Count>2</Count><RetMax>2</RetMax><RetStart>0</RetStart>
  <IdList><Id>11111111</Id><Id>22222222</Id></IdList>
</eSearchResult>
"""

ESEARCH_EMPTY_XML = """<?xml version="1.0" encoding="UTF-8"?>
<eSearchResult><Count>0</Count><IdList></IdList></eSearchResult>
"""

EFETCH_XML = """<?xml version="1.0" encoding="UTF-8"?>
<PubmedArticleSet>
  <PubmedArticle>
    <MedlineCitation><PMID Version="1">11111111</PMID>
      <Article>
        <ArticleTitle>Aspirin and fever</ArticleTitle>
        <Abstract><AbstractText>Aspirin reduces fever.</AbstractText></Abstract>
      </Article>
    </MedlineCitation>
  </PubmedArticle>
  <PubmedArticle>
    <MedlineCitation><PMID Version="1">22222222</PMID>
      <Article>
        <ArticleTitle>Vitamin D trials</ArticleTitle>
        <Abstract>
          <AbstractText Label="BACKGROUND">Background text.</AbstractText>
          <AbstractText Label="RESULTS">Result text.</AbstractText>
        </Abstract>
      </Article>
    </MedlineCitation>
  </PubmedArticle>
</PubmedArticleSet>
"""


def _client(handler, **kwargs) -> PubMedClient:
    kwargs.setdefault("rate_limit_per_sec", 1000.0)
    kwargs.setdefault("retry_backoff", 0.01)
    return PubMedClient(
        base_url="http://eutils.test",
        api_key="",
        transport=httpx.MockTransport(handler),
        **kwargs,
    )


def test_search_fetch_replays_fixture():
    def handler(request: httpx.Request) -> httpx.Response:
        if request.url.path.endswith("esearch.fcgi"):
            assert request.url.params["db"] == "pubmed"
            return httpx.Response(200, text=ESEARCH_XML)
        assert request.url.params["id"] == "11111111,22222222"
        return httpx.Response(200, text=EFETCH_XML)

    client = _client(handler)
    docs = client.search_fetch("aspirin fever", max_docs=5)
    assert [d.doc_id for d in docs] == ["11111111", "22222222"]
    assert docs[0].abstract == "Aspirin reduces fever."
    assert docs[1].abstract == "Background text. Result text."
    client.close()


def test_empty_id_list_returns_no_docs():
    def handler(request):
        return httpx.Response(200, text=ESEARCH_EMPTY_XML)

    client = _client(handler)
    assert client.search_fetch("nohits", max_docs=5) == []
    client.close()


def test_truncated_xml_raises_parse_error():
    def handler(request):
        return httpx.Response(200, text=ESEARCH_XML[: len(ESEARCH_XML) // 2])

    client = _client(handler)
    with pytest.raises(ParseError):
        client.search_ids("aspirin", 5)
    client.close()


def test_rate_limit_is_respected():
    stamps = []

    def handler(request):
        stamps.append(time.monotonic())
        return httpx.Response(200, text=ESEARCH_EMPTY_XML)

    client = _client(handler, rate_limit_per_sec=50.0)
    for _ in range(5):
        client.search_ids("q", 1)
    client.close()
    gaps = [b - a for a, b in zip(stamps, stamps[1:])]
    assert all(gap >= 0.02 * 0.9 for gap in gaps), gaps


def test_5xx_retried_twice_then_succeeds():
    calls = {"n": 0}

    def handler(request):
        calls["n"] += 1
        if calls["n"] < 3:
            return httpx.Response(503)
        return httpx.Response(200, text=ESEARCH_EMPTY_XML)

    client = _client(handler)
    assert client.search_ids("q", 1) == []
    assert calls["n"] == 3
    client.close()


def test_5xx_exhausted_raises_upstream_error():
    def handler(request):
        return httpx.Response(500)

    client = _client(handler)
    with pytest.raises(UpstreamError) as exc_info:
        client.search_ids("q", 1)
    assert exc_info.value.status == 500
    client.close()


def test_429_raises_rate_limited():
    def handler(request):
        return httpx.Response(429)

    client = _client(handler)
    with pytest.raises(RateLimited):
        client.search_ids("q", 1)
    client.close()


def test_api_key_is_sent_when_configured():
    seen = {}

    def handler(request):
        seen["api_key"] = request.url.params.get("api_key")
        return httpx.Response(200, text=ESEARCH_EMPTY_XML)

    client = PubMedClient(
        base_url="http://eutils.test",
        api_key="sekrit",
        rate_limit_per_sec=1000.0,
        transport=httpx.MockTransport(handler),
    )
    client.search_ids("q", 1)
    assert seen["api_key"] == "sekrit"
    client.close()


def test_records_without_abstract_are_skipped():
    xml = """<PubmedArticleSet><PubmedArticle>
      <MedlineCitation><PMID>333</PMID>
        <Article><ArticleTitle>No abstract</ArticleTitle></Article>
      </MedlineCitation>
    </PubmedArticle></PubmedArticleSet>"""

    def handler(request):
        return httpx.Response(200, text=xml)

    client = _client(handler)
    assert client.fetch_abstracts(["333"]) == []
    client.close()
