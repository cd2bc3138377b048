"""Command-line interface: corpus ingestion, index building, one-off
verification, benchmark evaluation, and serving the HTTP API."""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click

from .backends import MockEmbeddingBackend
from .config import PipelineConfig
from .corpus import Corpus, corpus_load, corpus_save
from .evaluation import (
    DATASET_LABEL_SPACES,
    BaselineKind,
    DatasetName,
    Split,
    baseline_predict,
    check_distribution,
    evaluate_pipeline,
    format_report,
    load_dataset,
    metrics,
)
from .pipeline import Pipeline
from .pubmed import PubMedClient
from .retrieval import DenseIndex, build_sparse_index, corpus_hash, save_index


def _load_config(config_path, mock_backends=False, retriever=None) -> PipelineConfig:
    cfg = PipelineConfig.load(config_path)
    merged = cfg.to_dict()
    if mock_backends:
        merged["mock_backends"] = True
    if retriever:
        merged["retrieval"]["retriever"] = retriever
    return PipelineConfig.from_dict(merged)


@click.group()
def main():
    """Evidence-based biomedical claim verification."""


@main.command("ingest-corpus")
@click.option("--query", required=True, help="PubMed search query.")
@click.option("--max-docs", default=100, show_default=True, type=int)
@click.option("--out", required=True, type=click.Path(dir_okay=False))
@click.option("--base-url", default=None, help="Override the E-utilities base URL.")
def ingest_corpus(query, max_docs, out, base_url):
    """Fetch abstracts from PubMed into a JSONL corpus snapshot."""
    kwargs = {"base_url": base_url} if base_url else {}
    client = PubMedClient(**kwargs)
    try:
        docs = client.search_fetch(query, max_docs)
    finally:
        client.close()
    corpus_save(Corpus(docs), out)
    click.echo(f"wrote {len(docs)} docs to {out}")


@main.command("build-index")
@click.option("--corpus", "corpus_path", required=True, type=click.Path(exists=True))
@click.option("--out", required=True, type=click.Path(file_okay=False))
@click.option(
    "--retriever",
    type=click.Choice(["dense", "sparse", "both"]),
    default="both",
    show_default=True,
)
@click.option(
    "--mode",
    type=click.Choice(["exact_flat", "approx_hnsw"]),
    default="exact_flat",
    show_default=True,
)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--mock-backends", is_flag=True, help="Embed with the deterministic mock.")
def build_index(corpus_path, out, retriever, mode, config_path, mock_backends):
    """Build dense and/or sparse indexes from a corpus snapshot."""
    cfg = _load_config(config_path, mock_backends=mock_backends)
    corpus = corpus_load(corpus_path)
    dense = None
    sparse = None
    if retriever in ("dense", "both"):
        pipeline = Pipeline(cfg, corpus=corpus)
        embedder = pipeline.embedder if not mock_backends else MockEmbeddingBackend(
            dim=cfg.embed_dim, seed=cfg.seed
        )
        doc_ids = corpus.doc_ids()
        texts = [corpus.get(d).surface_text() for d in doc_ids]
        vectors = embedder.embed_batch(texts)
        dense = DenseIndex.build(doc_ids, vectors, mode=mode, seed=cfg.seed)
    if retriever in ("sparse", "both"):
        sparse = build_sparse_index(corpus)
    save_index(out, dense=dense, sparse=sparse, corpus_digest=corpus_hash(corpus))
    click.echo(f"indexed {len(corpus)} docs into {out}")


@main.command("verify")
@click.argument("text")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--mock-backends", is_flag=True)
@click.option(
    "--retriever", type=click.Choice(["dense", "sparse"]), default=None
)
def verify(text, config_path, mock_backends, retriever):
    """Verify a single claim and print the assessment JSON."""
    cfg = _load_config(config_path, mock_backends=mock_backends, retriever=retriever)
    pipeline = Pipeline.from_config(cfg)
    assessment, cached = pipeline.verify_claim_text(text)
    click.echo(
        json.dumps(
            {"assessment": assessment.to_dict(), "cached": cached},
            ensure_ascii=False,
            indent=2,
        )
    )


@main.command("evaluate")
@click.option(
    "--dataset",
    type=click.Choice([d.value for d in DatasetName]),
    required=True,
)
@click.option("--path", "data_path", required=True, type=click.Path(exists=True))
@click.option(
    "--split",
    type=click.Choice([s.value for s in Split]),
    default="test",
    show_default=True,
)
@click.option(
    "--baseline",
    type=click.Choice([b.value for b in BaselineKind]),
    default=None,
    help="Score a constant predictor instead of the pipeline.",
)
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--mock-backends", is_flag=True)
@click.option(
    "--retriever", type=click.Choice(["dense", "sparse"]), default=None
)
@click.option("--report", "report_path", default=None, type=click.Path(dir_okay=False))
@click.option("--trace", "trace_path", default=None, type=click.Path(dir_okay=False))
def evaluate(
    dataset,
    data_path,
    split,
    baseline,
    config_path,
    mock_backends,
    retriever,
    report_path,
    trace_path,
):
    """Evaluate a baseline or the full pipeline on a benchmark file."""
    name = DatasetName(dataset)
    claims = load_dataset(name, data_path, Split(split))
    if not claims:
        raise click.ClickException("dataset is empty")
    deltas = check_distribution(name, claims)
    for delta in deltas:
        click.echo(f"note: {delta}", err=True)
    label_space = DATASET_LABEL_SPACES[name]
    if baseline is not None:
        golds = [c.gold for c in claims]
        preds = baseline_predict(BaselineKind(baseline), len(claims), label_space)
        report = metrics(golds, preds, label_space)
    else:
        cfg = _load_config(
            config_path, mock_backends=mock_backends, retriever=retriever
        )
        pipeline = Pipeline.from_config(cfg)
        report = evaluate_pipeline(
            claims,
            lambda text: pipeline.verify_claim_text(text)[0],
            trace_path=trace_path,
            label_space=label_space,
        )
    click.echo(format_report(report))
    if report_path:
        Path(report_path).write_text(
            json.dumps(report.to_dict(), indent=2), "utf-8"
        )
        click.echo(f"report written to {report_path}", err=True)


@main.command("serve")
@click.option("--config", "config_path", default=None, type=click.Path(exists=True))
@click.option("--host", default="127.0.0.1", show_default=True)
@click.option("--port", default=8000, show_default=True, type=int)
@click.option("--mock-backends", is_flag=True)
@click.option("--static-dir", default=None, type=click.Path(file_okay=False))
def serve(config_path, host, port, mock_backends, static_dir):
    """Run the HTTP service."""
    import uvicorn

    from .service import create_app

    cfg = _load_config(config_path, mock_backends=mock_backends)
    pipeline = Pipeline.from_config(cfg)
    app = create_app(pipeline, static_dir=static_dir)
    uvicorn.run(app, host=host, port=port)


if __name__ == "__main__":
    sys.exit(main())
