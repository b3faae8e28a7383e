"""Health-focused retrieval toolkit.

BM25 retrieval over an inverted index, semantic and quality-criterion
re-ranking, reciprocal rank fusion, and a multi-aspect evaluation harness
(nDCG, P@10, CAM, compatibility) with TREC-style file formats throughout.
"""

from .bm25 import (
    Bm25Params,
    InvertedIndex,
    bm25_score,
    build_index,
    load_index,
    save_index,
    search,
    tokenize,
)
from .data import (
    AspectJudgment,
    BINARY_COMBOS,
    CriterionVector,
    DataFormatError,
    Document,
    DocumentStore,
    EmbeddingRecord,
    JudgmentSet,
    RankedList,
    RunEntry,
    Topic,
    derive_binary_qrels,
    load_corpus,
    load_embeddings,
    load_qrels,
    load_topics,
    read_run,
    write_run,
)
from .fusion import (
    DEFAULT_RUN_MATRIX,
    FusionConfig,
    build_run,
    parse_fusion_configs,
    rrf_fuse,
)
from .metrics import (
    ASPECT_SPECS,
    COMPAT_SPECS,
    CompatibilitySpec,
    EvalReport,
    EvalSpec,
    aspect_relevance,
    average_precision,
    cam,
    compatibility,
    evaluate_runs,
    ideal_list,
    ndcg,
    precision_at,
    rbo,
)
from .pipeline import (
    PipelineConfig,
    PipelineError,
    RunAllResult,
    config_from_manifest,
    load_allowlist,
    parse_pipeline_config,
    run_all,
)
from .quality import (
    REFERENCE_VECTOR,
    load_criterion_scores,
    quality_similarity,
    rerank_by_quality,
)
from .semantic import (
    FileEmbeddingProvider,
    HashedTfEmbeddingProvider,
    cosine,
    segment_sentences,
    semantic_rank,
    truncate_for_embedding,
)

__version__ = "0.1.0"

__all__ = [
    "AspectJudgment",
    "ASPECT_SPECS",
    "BINARY_COMBOS",
    "Bm25Params",
    "COMPAT_SPECS",
    "CompatibilitySpec",
    "CriterionVector",
    "DataFormatError",
    "DEFAULT_RUN_MATRIX",
    "Document",
    "DocumentStore",
    "EmbeddingRecord",
    "EvalReport",
    "EvalSpec",
    "FileEmbeddingProvider",
    "FusionConfig",
    "HashedTfEmbeddingProvider",
    "InvertedIndex",
    "JudgmentSet",
    "PipelineConfig",
    "PipelineError",
    "RankedList",
    "REFERENCE_VECTOR",
    "RunAllResult",
    "RunEntry",
    "Topic",
    "aspect_relevance",
    "average_precision",
    "bm25_score",
    "build_index",
    "build_run",
    "cam",
    "compatibility",
    "config_from_manifest",
    "cosine",
    "derive_binary_qrels",
    "evaluate_runs",
    "ideal_list",
    "load_allowlist",
    "load_corpus",
    "load_criterion_scores",
    "load_embeddings",
    "load_index",
    "load_qrels",
    "load_topics",
    "ndcg",
    "parse_fusion_configs",
    "parse_pipeline_config",
    "precision_at",
    "quality_similarity",
    "rbo",
    "read_run",
    "rerank_by_quality",
    "rrf_fuse",
    "run_all",
    "save_index",
    "search",
    "segment_sentences",
    "semantic_rank",
    "tokenize",
    "truncate_for_embedding",
    "write_run",
]
