from .dense import DenseIndex, EmptyIndex as DenseEmptyIndex
from .evidence import RetrievalConfig, format_claim_evidence, select_evidence
from .hnsw import HnswGraph
from .sparse import EmptyIndex as SparseEmptyIndex
from .sparse import SparseIndex, build_sparse_index, sparse_search
from .store import corpus_hash, load_index, save_index

__all__ = [
    "DenseIndex",
    "DenseEmptyIndex",
    "HnswGraph",
    "RetrievalConfig",
    "SparseIndex",
    "SparseEmptyIndex",
    "build_sparse_index",
    "corpus_hash",
    "format_claim_evidence",
    "load_index",
    "save_index",
    "select_evidence",
    "sparse_search",
]
