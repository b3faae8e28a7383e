"""qualityexport: produce criterion-score and embedding files for healthrank.

The package talks to the ranking pipeline only through its text file
formats; nothing here imports it.
"""

from .dataset import (
    CRITERIA,
    CorpusDoc,
    LabeledExample,
    TopicEntry,
    load_corpus,
    load_labeled_dataset,
    load_topics,
)
from .encoder import DEFAULT_DIM, DEFAULT_ENCODER, SentenceEncoder
from .errors import ExportError
from .export import (
    ExporterJob,
    ExportResult,
    export_criterion_scores,
    export_embeddings,
    finetune_toy,
)
from .model import (
    BUNDLED_MODELS,
    CriterionClassifier,
    bundled_classifier,
    finetune,
    resolve_model,
    text_features,
)
from .text import segment_sentences, stable_hash, tokenize, truncate_text
from .writers import atomic_write, write_criterion_file, write_embedding_file

__version__ = "0.1.0"

__all__ = [
    "BUNDLED_MODELS",
    "CRITERIA",
    "CorpusDoc",
    "CriterionClassifier",
    "DEFAULT_DIM",
    "DEFAULT_ENCODER",
    "ExportError",
    "ExportResult",
    "ExporterJob",
    "LabeledExample",
    "SentenceEncoder",
    "TopicEntry",
    "atomic_write",
    "bundled_classifier",
    "export_criterion_scores",
    "export_embeddings",
    "finetune",
    "finetune_toy",
    "load_corpus",
    "load_labeled_dataset",
    "load_topics",
    "resolve_model",
    "segment_sentences",
    "stable_hash",
    "text_features",
    "tokenize",
    "truncate_text",
    "write_criterion_file",
    "write_embedding_file",
]
