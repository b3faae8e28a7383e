"""Shared data model and file formats.

Every stage of the pipeline exchanges data through the plain-text formats
defined here:

* corpus: one JSON object per line with fields ``doc_id``, ``url``, ``text``
* topics: one JSON object per line with fields ``topic_id``, ``query``,
  ``description`` (description optional)
* qrels: ``topic_id 0 doc_id usefulness correctness credibility``,
  whitespace separated; ``-1`` marks an unjudged binary aspect
* run: ``topic_id Q0 doc_id rank score run_tag`` with single spaces and the
  score rendered with 6 decimal places
* criterion scores: ``doc_id p1 p2 p7 p8 source_tag`` (see quality module)
* embeddings: a header line holding the dimension, then
  ``id v1 v2 ... v_dim`` per line

Loaders are pure functions and the resulting containers are treated as
immutable, so they are safe to share across worker threads.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Iterable, Iterator, Mapping


class DataFormatError(ValueError):
    """Raised when an input file violates one of the formats above."""


def _no_whitespace(value: str, what: str) -> None:
    if not value:
        raise DataFormatError(f"{what} must be non-empty")
    if any(ch.isspace() for ch in value):
        # every downstream format is whitespace-delimited
        raise DataFormatError(f"{what} must not contain whitespace: {value!r}")


@dataclass(frozen=True)
class Document:
    """One corpus entry: the unit that is indexed, ranked, and judged."""

    doc_id: str
    url: str
    text: str

    def __post_init__(self) -> None:
        _no_whitespace(self.doc_id, "doc_id")


@dataclass(frozen=True)
class Topic:
    """A health query driving retrieval."""

    topic_id: str
    query: str
    description: str = ""

    def __post_init__(self) -> None:
        _no_whitespace(self.topic_id, "topic_id")
        if not self.query:
            raise DataFormatError(f"topic {self.topic_id}: query must be non-empty")


class DocumentStore:
    """Immutable collection of documents with unique ids, in load order."""

    def __init__(self, documents: Iterable[Document]):
        self._documents: list[Document] = []
        self._by_id: dict[str, Document] = {}
        for doc in documents:
            if doc.doc_id in self._by_id:
                raise DataFormatError(f"duplicate doc_id {doc.doc_id!r}")
            self._by_id[doc.doc_id] = doc
            self._documents.append(doc)

    def __len__(self) -> int:
        return len(self._documents)

    def __iter__(self) -> Iterator[Document]:
        return iter(self._documents)

    def __contains__(self, doc_id: str) -> bool:
        return doc_id in self._by_id

    def get(self, doc_id: str) -> Document:
        try:
            return self._by_id[doc_id]
        except KeyError:
            raise KeyError(f"unknown doc_id {doc_id!r}") from None

    def doc_ids(self) -> list[str]:
        return [d.doc_id for d in self._documents]


@dataclass(frozen=True)
class AspectJudgment:
    """Graded usefulness plus binary correctness/credibility for (topic, doc).

    ``None`` means the aspect was left unjudged; it is never coerced to 0.
    """

    topic_id: str
    doc_id: str
    usefulness: int
    correctness: int | None
    credibility: int | None

    def __post_init__(self) -> None:
        if self.usefulness < 0:
            raise DataFormatError(
                f"usefulness must be >= 0, got {self.usefulness} "
                f"for ({self.topic_id}, {self.doc_id})"
            )
        for name, value in (("correctness", self.correctness),
                            ("credibility", self.credibility)):
            if value not in (None, 0, 1):
                raise DataFormatError(
                    f"{name} must be 0, 1, or unjudged, got {value} "
                    f"for ({self.topic_id}, {self.doc_id})"
                )


class JudgmentSet:
    """All aspect judgments for a topic set, at most one per (topic, doc)."""

    def __init__(self, judgments: Iterable[AspectJudgment]):
        self._judgments: list[AspectJudgment] = []
        self._by_topic: dict[str, dict[str, AspectJudgment]] = {}
        for j in judgments:
            per_topic = self._by_topic.setdefault(j.topic_id, {})
            if j.doc_id in per_topic:
                raise DataFormatError(
                    f"duplicate judgment for topic {j.topic_id}, doc {j.doc_id}"
                )
            per_topic[j.doc_id] = j
            self._judgments.append(j)

    def __len__(self) -> int:
        return len(self._judgments)

    def __iter__(self) -> Iterator[AspectJudgment]:
        return iter(self._judgments)

    def topic_ids(self) -> list[str]:
        return sorted(self._by_topic)

    def for_topic(self, topic_id: str) -> dict[str, AspectJudgment]:
        return self._by_topic.get(topic_id, {})


@dataclass(frozen=True)
class RunEntry:
    doc_id: str
    score: float
    rank: int


@dataclass(frozen=True)
class RankedList:
    """Ordered retrieval output for one topic from one ranker or fusion.

    Invariants (checked by :meth:`validate`): ranks are contiguous from 1,
    doc ids are unique, scores are non-increasing with rank, and equal
    scores are ordered by ascending doc_id.
    """

    topic_id: str
    run_tag: str
    entries: tuple[RunEntry, ...] = field(default_factory=tuple)

    @classmethod
    def from_scores(
        cls,
        topic_id: str,
        scores: Mapping[str, float],
        run_tag: str,
        depth: int | None = None,
    ) -> "RankedList":
        """Build a list from a doc_id -> score map using the canonical order.

        Documents are sorted by descending score, ties broken by ascending
        doc_id; ``depth`` truncates after sorting.
        """
        for doc_id, score in scores.items():
            if not math.isfinite(score):
                raise DataFormatError(
                    f"non-finite score {score!r} for doc {doc_id} in topic {topic_id}"
                )
        ordered = sorted(scores.items(), key=lambda kv: (-kv[1], kv[0]))
        if depth is not None:
            ordered = ordered[:depth]
        entries = tuple(
            RunEntry(doc_id=d, score=float(s), rank=i)
            for i, (d, s) in enumerate(ordered, 1)
        )
        return cls(topic_id=topic_id, run_tag=run_tag, entries=entries)

    def doc_ids(self) -> list[str]:
        return [e.doc_id for e in self.entries]

    def with_tag(self, run_tag: str) -> "RankedList":
        return RankedList(self.topic_id, run_tag, self.entries)

    def truncated(self, depth: int) -> "RankedList":
        if len(self.entries) <= depth:
            return self
        return RankedList(self.topic_id, self.run_tag, self.entries[:depth])

    def validate(self) -> None:
        _no_whitespace(self.topic_id, "topic_id")
        _no_whitespace(self.run_tag, "run_tag")
        seen: set[str] = set()
        for i, entry in enumerate(self.entries):
            _no_whitespace(entry.doc_id, "doc_id")
            if entry.rank != i + 1:
                raise DataFormatError(
                    f"topic {self.topic_id}: rank {entry.rank} at position {i + 1}, "
                    f"ranks must be contiguous from 1"
                )
            if not math.isfinite(entry.score):
                raise DataFormatError(
                    f"topic {self.topic_id}: non-finite score at rank {entry.rank}"
                )
            if entry.doc_id in seen:
                raise DataFormatError(
                    f"topic {self.topic_id}: duplicate doc_id {entry.doc_id!r}"
                )
            seen.add(entry.doc_id)
            if i > 0:
                prev = self.entries[i - 1]
                if entry.score > prev.score:
                    raise DataFormatError(
                        f"topic {self.topic_id}: score increases at rank {entry.rank}"
                    )
                if entry.score == prev.score and entry.doc_id < prev.doc_id:
                    raise DataFormatError(
                        f"topic {self.topic_id}: tied scores out of doc_id order "
                        f"at rank {entry.rank}"
                    )


def load_corpus(path: str) -> DocumentStore:
    """Load a line-delimited JSON corpus; duplicate doc ids are an error."""
    documents: list[Document] = []
    seen: dict[str, int] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}:{lineno}: malformed record: {exc}") from None
            if not isinstance(record, dict) or "doc_id" not in record or "text" not in record:
                raise DataFormatError(
                    f"{path}:{lineno}: record must carry doc_id and text fields"
                )
            doc = Document(
                doc_id=str(record["doc_id"]),
                url=str(record.get("url", "")),
                text=str(record["text"]),
            )
            if doc.doc_id in seen:
                raise DataFormatError(
                    f"{path}:{lineno}: duplicate doc_id {doc.doc_id!r} "
                    f"(first seen on line {seen[doc.doc_id]})"
                )
            seen[doc.doc_id] = lineno
            documents.append(doc)
    return DocumentStore(documents)


def load_topics(path: str) -> list[Topic]:
    """Load a line-delimited JSON topic file; topic ids must be unique."""
    topics: list[Topic] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            try:
                record = json.loads(line)
            except json.JSONDecodeError as exc:
                raise DataFormatError(f"{path}:{lineno}: malformed record: {exc}") from None
            if not isinstance(record, dict) or "topic_id" not in record or "query" not in record:
                raise DataFormatError(
                    f"{path}:{lineno}: record must carry topic_id and query fields"
                )
            topic = Topic(
                topic_id=str(record["topic_id"]),
                query=str(record["query"]),
                description=str(record.get("description", "")),
            )
            if topic.topic_id in seen:
                raise DataFormatError(
                    f"{path}:{lineno}: duplicate topic_id {topic.topic_id!r}"
                )
            seen.add(topic.topic_id)
            topics.append(topic)
    return topics


def _parse_grade(token: str, what: str, path: str, lineno: int) -> int:
    try:
        return int(token)
    except ValueError:
        raise DataFormatError(f"{path}:{lineno}: non-integer {what}: {token!r}") from None


def load_qrels(path: str, max_grade: int = 2) -> JudgmentSet:
    """Load three-aspect qrels.

    Line format: ``topic_id 0 doc_id usefulness correctness credibility``.
    Correctness and credibility may be ``-1`` meaning unjudged; the sentinel
    is preserved as ``None``, never coerced to 0. Every non-blank line yields
    exactly one judgment or an error.
    """
    judgments: list[AspectJudgment] = []
    seen: set[tuple[str, str]] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 6 fields, got {len(parts)}"
                )
            topic_id, _iter, doc_id, use_s, cor_s, cred_s = parts
            usefulness = _parse_grade(use_s, "usefulness", path, lineno)
            if not 0 <= usefulness <= max_grade:
                raise DataFormatError(
                    f"{path}:{lineno}: usefulness {usefulness} outside 0..{max_grade}"
                )
            aspects: list[int | None] = []
            for name, token in (("correctness", cor_s), ("credibility", cred_s)):
                value = _parse_grade(token, name, path, lineno)
                if value == -1:
                    aspects.append(None)
                elif value in (0, 1):
                    aspects.append(value)
                else:
                    raise DataFormatError(
                        f"{path}:{lineno}: {name} must be -1, 0, or 1, got {value}"
                    )
            key = (topic_id, doc_id)
            if key in seen:
                raise DataFormatError(
                    f"{path}:{lineno}: duplicate judgment for topic {topic_id}, "
                    f"doc {doc_id}"
                )
            seen.add(key)
            judgments.append(
                AspectJudgment(topic_id, doc_id, usefulness, aspects[0], aspects[1])
            )
    return JudgmentSet(judgments)


def write_run(path: str, lists: Iterable[RankedList]) -> None:
    """Write ranked lists in TREC run format, scores at 6 decimal places."""
    with open(path, "w", encoding="utf-8") as fh:
        for ranked in lists:
            ranked.validate()
            for entry in ranked.entries:
                fh.write(
                    f"{ranked.topic_id} Q0 {entry.doc_id} "
                    f"{entry.rank} {entry.score:.6f} {ranked.run_tag}\n"
                )


def read_run(path: str) -> list[RankedList]:
    """Read a TREC run file back into ranked lists, one per topic.

    Ranks must be contiguous from 1 within each topic and scores must be
    non-increasing with rank. Tied scores are accepted in any order here:
    the 6-decimal rendering can collapse close scores that were ordered by
    their full-precision values.
    """
    per_topic: dict[str, list[RunEntry]] = {}
    tags: dict[str, str] = {}
    order: list[str] = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 6 fields, got {len(parts)}"
                )
            topic_id, q0, doc_id, rank_s, score_s, run_tag = parts
            if q0 != "Q0":
                raise DataFormatError(f"{path}:{lineno}: expected literal Q0, got {q0!r}")
            try:
                rank = int(rank_s)
                score = float(score_s)
            except ValueError:
                raise DataFormatError(
                    f"{path}:{lineno}: bad rank or score: {rank_s!r} {score_s!r}"
                ) from None
            entries = per_topic.setdefault(topic_id, [])
            if not entries:
                order.append(topic_id)
                tags[topic_id] = run_tag
            elif tags[topic_id] != run_tag:
                raise DataFormatError(
                    f"{path}:{lineno}: run_tag changes within topic {topic_id}"
                )
            if rank != len(entries) + 1:
                raise DataFormatError(
                    f"{path}:{lineno}: topic {topic_id} rank {rank} after "
                    f"rank {len(entries)}, ranks must be contiguous from 1"
                )
            if entries and score > entries[-1].score:
                raise DataFormatError(
                    f"{path}:{lineno}: topic {topic_id} score increases at rank {rank}"
                )
            entries.append(RunEntry(doc_id=doc_id, score=score, rank=rank))
    lists = []
    for topic_id in order:
        ranked = RankedList(topic_id, tags[topic_id], tuple(per_topic[topic_id]))
        seen: set[str] = set()
        for entry in ranked.entries:
            if entry.doc_id in seen:
                raise DataFormatError(
                    f"{path}: topic {topic_id}: duplicate doc_id {entry.doc_id!r}"
                )
            seen.add(entry.doc_id)
        lists.append(ranked)
    return lists


BINARY_COMBOS = (
    "useful",
    "useful-correct",
    "useful-credible",
    "useful-correct-credible",
)


def derive_binary_qrels(
    judgments: JudgmentSet,
    combo: str,
    threshold: int = 1,
) -> dict[str, dict[str, bool]]:
    """Collapse three-aspect judgments into binary relevance.

    A document is relevant iff its usefulness grade is at least ``threshold``
    and every binary aspect named in ``combo`` equals 1. An unjudged aspect in
    the combo makes the document non-relevant. The returned map has one entry
    per judged (topic, doc) pair.
    """
    if combo not in BINARY_COMBOS:
        raise ValueError(f"unknown combo {combo!r}, expected one of {BINARY_COMBOS}")
    if threshold < 1:
        raise ValueError(f"threshold must be >= 1, got {threshold}")
    need_correct = "correct" in combo
    need_credible = "credible" in combo
    relevance: dict[str, dict[str, bool]] = {}
    for j in judgments:
        relevant = j.usefulness >= threshold
        if need_correct:
            relevant = relevant and j.correctness == 1
        if need_credible:
            relevant = relevant and j.credibility == 1
        relevance.setdefault(j.topic_id, {})[j.doc_id] = relevant
    return relevance


@dataclass(frozen=True)
class CriterionVector:
    """Per-document probabilities for the four quality criteria (1, 2, 7, 8)."""

    doc_id: str
    p1: float
    p2: float
    p7: float
    p8: float
    source_tag: str

    def __post_init__(self) -> None:
        for name, value in zip(("p1", "p2", "p7", "p8"), self.as_tuple()):
            if not (math.isfinite(value) and 0.0 <= value <= 1.0):
                raise DataFormatError(
                    f"doc {self.doc_id}: {name}={value!r} outside [0, 1]"
                )

    def as_tuple(self) -> tuple[float, float, float, float]:
        return (self.p1, self.p2, self.p7, self.p8)


@dataclass(frozen=True)
class EmbeddingRecord:
    """An id (doc or topic) with its fixed-length embedding vector."""

    id: str
    vector: tuple[float, ...]

    @property
    def dim(self) -> int:
        return len(self.vector)


def load_embeddings(path: str) -> list[EmbeddingRecord]:
    """Load an embedding file: a dimension header, then one vector per line."""
    records: list[EmbeddingRecord] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        header = fh.readline()
        try:
            dim = int(header.strip())
        except ValueError:
            raise DataFormatError(
                f"{path}:1: header must be the integer dimension, got {header!r}"
            ) from None
        if dim <= 0:
            raise DataFormatError(f"{path}:1: dimension must be positive, got {dim}")
        for lineno, line in enumerate(fh, 2):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != dim + 1:
                raise DataFormatError(
                    f"{path}:{lineno}: expected id plus {dim} components, "
                    f"got {len(parts) - 1}"
                )
            rec_id = parts[0]
            if rec_id in seen:
                raise DataFormatError(f"{path}:{lineno}: duplicate id {rec_id!r}")
            seen.add(rec_id)
            try:
                values = tuple(float(v) for v in parts[1:])
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-numeric component") from None
            if not all(math.isfinite(v) for v in values):
                raise DataFormatError(f"{path}:{lineno}: non-finite component")
            records.append(EmbeddingRecord(id=rec_id, vector=values))
    return records
