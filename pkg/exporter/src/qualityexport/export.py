"""Job definitions and the three export operations.

An ExporterJob gathers everything one invocation needs; the operations
validate inputs fully before the atomic write, so a failed run never
replaces or truncates an existing output file.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .dataset import CRITERIA, load_corpus, load_labeled_dataset, load_topics
from .encoder import DEFAULT_DIM, DEFAULT_ENCODER, SentenceEncoder
from .errors import ExportError
from .model import DEFAULT_EPOCHS, DEFAULT_LR, DEFAULT_SEED, finetune, resolve_model
from .text import DEFAULT_SENTENCE_LIMIT, truncate_text
from .writers import write_criterion_file, write_embedding_file

MODES = ("criteria", "embeddings")


@dataclass(frozen=True)
class ExporterJob:
    """One export invocation: what to run on which files.

    ``model`` is a bundled identifier or an artifact path in criteria mode
    and an encoder identifier in embeddings mode. ``topics_path``, ``dim``
    and ``embed_description`` apply to embeddings mode only.
    """

    mode: str
    corpus_path: str
    output_path: str
    model: str = ""
    topics_path: str | None = None
    batch_size: int = 32
    max_sentences: int = DEFAULT_SENTENCE_LIMIT
    dim: int = DEFAULT_DIM
    embed_description: bool = False
    device: str = "cpu"

    def __post_init__(self) -> None:
        if self.mode not in MODES:
            raise ExportError(f"mode must be one of {', '.join(MODES)}, got {self.mode!r}")
        if not self.corpus_path or not self.output_path:
            raise ExportError("corpus_path and output_path are required")
        if self.batch_size < 1:
            raise ExportError(f"batch size must be >= 1, got {self.batch_size}")
        if self.max_sentences < 1:
            raise ExportError(f"max sentences must be >= 1, got {self.max_sentences}")
        if self.dim < 1:
            raise ExportError(f"dimension must be >= 1, got {self.dim}")
        # the hint exists for interface parity; only a cpu backend is built in
        if self.device != "cpu":
            raise ExportError(f"device {self.device!r} unavailable, only cpu is supported")
        if self.mode == "criteria":
            if not self.model:
                raise ExportError("criteria mode needs a model identifier or artifact path")
            if self.topics_path is not None:
                raise ExportError("criteria mode scores documents only, drop topics_path")


@dataclass(frozen=True)
class ExportResult:
    """What an operation wrote: path, line count, and the mode's detail."""

    output_path: str
    count: int
    source_tag: str = ""
    dim: int = 0


def export_criterion_scores(job: ExporterJob) -> ExportResult:
    """Score every corpus document and write the criterion file.

    The source tag in every line is the model identifier, so files from
    different models stay distinguishable downstream.
    """
    if job.mode != "criteria":
        raise ExportError(f"job mode is {job.mode!r}, expected criteria")
    classifier = resolve_model(job.model)
    docs = load_corpus(job.corpus_path)
    probabilities = classifier.predict_proba([doc.text for doc in docs], job.batch_size)
    write_criterion_file(
        job.output_path,
        [doc.doc_id for doc in docs],
        probabilities,
        source_tag=classifier.model_id,
        columns=CRITERIA,
    )
    return ExportResult(job.output_path, len(docs), source_tag=classifier.model_id)


def export_embeddings(job: ExporterJob) -> ExportResult:
    """Embed corpus documents, plus topics when given, into one file.

    Documents are truncated to their first ``max_sentences`` sentences
    before encoding; topic queries are embedded whole, with the description
    appended when ``embed_description`` is set.
    """
    if job.mode != "embeddings":
        raise ExportError(f"job mode is {job.mode!r}, expected embeddings")
    docs = load_corpus(job.corpus_path)
    topics = load_topics(job.topics_path) if job.topics_path else []
    doc_ids = {doc.doc_id for doc in docs}
    for topic in topics:
        if topic.topic_id in doc_ids:
            raise ExportError(
                f"id {topic.topic_id!r} appears as both a document and a topic"
            )
    texts = [truncate_text(doc.text, job.max_sentences) for doc in docs]
    for topic in topics:
        if job.embed_description and topic.description:
            texts.append(f"{topic.query} {topic.description}")
        else:
            texts.append(topic.query)
    encoder = SentenceEncoder(job.model or DEFAULT_ENCODER, job.dim)
    matrix = encoder.encode(texts, job.batch_size)
    if matrix.shape[1] != job.dim or not np.all(np.isfinite(matrix)):
        raise ExportError(
            f"encoder produced shape {matrix.shape} for dim {job.dim}, refusing to write"
        )
    ids = [doc.doc_id for doc in docs] + [topic.topic_id for topic in topics]
    write_embedding_file(job.output_path, list(zip(ids, matrix)), job.dim)
    return ExportResult(job.output_path, len(ids), dim=job.dim)


def finetune_toy(
    dataset_path: str,
    output_path: str,
    model_id: str = "toy-finetuned",
    epochs: int = DEFAULT_EPOCHS,
    lr: float = DEFAULT_LR,
    seed: int = DEFAULT_SEED,
) -> dict[int, float]:
    """Train the toy classifier on a labeled dataset and save the artifact.

    Returns per-criterion train accuracy. The dataset must hold at least 20
    rows; smaller sets say nothing about whether training worked.
    """
    examples = load_labeled_dataset(dataset_path)
    if len(examples) < 20:
        raise ExportError(f"need at least 20 labeled examples, got {len(examples)}")
    if not model_id or any(ch.isspace() for ch in model_id):
        raise ExportError(f"model id must be non-empty without whitespace, got {model_id!r}")
    classifier, accuracy = finetune(examples, model_id, epochs=epochs, lr=lr, seed=seed)
    classifier.save(output_path)
    return accuracy
