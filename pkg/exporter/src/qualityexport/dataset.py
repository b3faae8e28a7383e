"""Input readers: labeled training data, document corpus, topic file.

All three are line-delimited JSON. The corpus and topic formats mirror what
the consuming pipeline reads, so the same files drive both tools; readers
are deliberately reimplemented here to keep the package dependency-free
beyond numpy.
"""

from __future__ import annotations

import json
from dataclasses import dataclass

from .errors import ExportError

# criterion columns, in emission order
CRITERIA = (1, 2, 7, 8)


@dataclass(frozen=True)
class LabeledExample:
    """One training row: text plus a binary label per criterion."""

    text: str
    labels: tuple[int, int, int, int]


@dataclass(frozen=True)
class CorpusDoc:
    doc_id: str
    text: str


@dataclass(frozen=True)
class TopicEntry:
    topic_id: str
    query: str
    description: str = ""


def _records(path: str):
    """Yield (lineno, parsed dict) for each non-blank line."""
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ExportError(f"{path}:{lineno}: malformed record: {exc}") from None
            if not isinstance(record, dict):
                raise ExportError(f"{path}:{lineno}: record must be an object")
            yield lineno, record


def _checked_id(value: str, what: str, path: str, lineno: int) -> str:
    # ids become whitespace-separated fields in the output files
    if not value or any(ch.isspace() for ch in value):
        raise ExportError(
            f"{path}:{lineno}: {what} must be non-empty without whitespace, got {value!r}"
        )
    return value


def load_labeled_dataset(path: str) -> list[LabeledExample]:
    """Load training rows: ``{"text": ..., "labels": [b, b, b, b]}``.

    Labels are the four criteria in column order; each must be 0 or 1.
    """
    examples: list[LabeledExample] = []
    for lineno, record in _records(path):
        if "text" not in record or "labels" not in record:
            raise ExportError(f"{path}:{lineno}: record must carry text and labels fields")
        text = record["text"]
        if not isinstance(text, str):
            raise ExportError(f"{path}:{lineno}: text must be a string")
        labels = record["labels"]
        if not isinstance(labels, list) or len(labels) != len(CRITERIA):
            raise ExportError(
                f"{path}:{lineno}: labels must list {len(CRITERIA)} values, "
                f"one per criterion {CRITERIA}"
            )
        for value in labels:
            if not isinstance(value, int) or isinstance(value, bool) or value not in (0, 1):
                raise ExportError(f"{path}:{lineno}: label {value!r} is not 0 or 1")
        examples.append(LabeledExample(text=text, labels=tuple(labels)))
    if not examples:
        raise ExportError(f"{path}: dataset holds no examples")
    return examples


def load_corpus(path: str) -> list[CorpusDoc]:
    """Load documents: ``{"doc_id": ..., "text": ...}``; ids must be unique."""
    docs: list[CorpusDoc] = []
    seen: set[str] = set()
    for lineno, record in _records(path):
        if "doc_id" not in record or "text" not in record:
            raise ExportError(f"{path}:{lineno}: record must carry doc_id and text fields")
        doc_id = _checked_id(str(record["doc_id"]), "doc_id", path, lineno)
        if doc_id in seen:
            raise ExportError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
        seen.add(doc_id)
        docs.append(CorpusDoc(doc_id=doc_id, text=str(record["text"])))
    if not docs:
        raise ExportError(f"{path}: corpus holds no documents")
    return docs


def load_topics(path: str) -> list[TopicEntry]:
    """Load topics: ``{"topic_id": ..., "query": ...}``; ids must be unique."""
    topics: list[TopicEntry] = []
    seen: set[str] = set()
    for lineno, record in _records(path):
        if "topic_id" not in record or "query" not in record:
            raise ExportError(f"{path}:{lineno}: record must carry topic_id and query fields")
        topic_id = _checked_id(str(record["topic_id"]), "topic_id", path, lineno)
        if topic_id in seen:
            raise ExportError(f"{path}:{lineno}: duplicate topic_id {topic_id!r}")
        seen.add(topic_id)
        topics.append(
            TopicEntry(
                topic_id=topic_id,
                query=str(record["query"]),
                description=str(record.get("description", "")),
            )
        )
    return topics
