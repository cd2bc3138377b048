from pathlib import Path

import pytest

from cer.config import PipelineConfig
from cer.corpus import corpus_load
from cer.pipeline import Pipeline

DATA_DIR = Path(__file__).parent / "data"


@pytest.fixture(scope="session")
def data_dir() -> Path:
    return DATA_DIR


@pytest.fixture(scope="session")
def small_corpus():
    return corpus_load(DATA_DIR / "corpus_small.jsonl")


def make_mock_config(**overrides) -> PipelineConfig:
    base = PipelineConfig.from_dict({"mock_backends": True})
    merged = base.to_dict()
    merged.update(overrides)
    return PipelineConfig.from_dict(merged)


@pytest.fixture()
def mock_pipeline(small_corpus) -> Pipeline:
    pipeline = Pipeline(make_mock_config(), corpus=small_corpus)
    pipeline.ensure_indexes()
    return pipeline
