"""Inverted index and BM25 scoring.

The index maps each term to a postings list of (document position, term
frequency) pairs. Scoring uses the non-negative log(1 + .) idf variant so
every score is >= 0 and zero-score documents can be dropped from results.
"""

from __future__ import annotations

import math
import re
from bisect import bisect_left
from collections import Counter
from dataclasses import dataclass
from typing import IO, Iterable, Sequence

from .data import DataFormatError, DocumentStore, RankedList, Topic

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)

INDEX_FORMAT = "healthrank.index.v1"


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character."""
    return _TOKEN.findall(text.lower())


@dataclass(frozen=True)
class Bm25Params:
    """k1 controls term-frequency saturation, b controls length normalization.

    Defaults follow the common 0.9 / 0.4 baseline configuration.
    """

    k1: float = 0.9
    b: float = 0.4

    def __post_init__(self) -> None:
        if self.k1 <= 0:
            raise ValueError(f"k1 must be > 0, got {self.k1}")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError(f"b must be in [0, 1], got {self.b}")


class InvertedIndex:
    """Immutable term -> postings index over a document store."""

    def __init__(
        self,
        doc_ids: Sequence[str],
        doc_lengths: Sequence[int],
        postings: dict[str, list[tuple[int, int]]],
    ):
        if len(doc_ids) != len(doc_lengths):
            raise ValueError("doc_ids and doc_lengths must align")
        self.doc_ids = list(doc_ids)
        self.doc_lengths = list(doc_lengths)
        self.postings = postings
        self.doc_count = len(self.doc_ids)
        total = sum(self.doc_lengths)
        self.avg_doc_length = total / self.doc_count if self.doc_count else 0.0

    def df(self, term: str) -> int:
        return len(self.postings.get(term, ()))

    def term_count(self) -> int:
        return len(self.postings)

    def idf(self, term: str) -> float:
        df = self.df(term)
        if df == 0:
            return 0.0
        n = self.doc_count
        return math.log(1.0 + (n - df + 0.5) / (df + 0.5))

    def term_frequency(self, term: str, doc_index: int) -> int:
        plist = self.postings.get(term)
        if not plist:
            return 0
        pos = bisect_left(plist, (doc_index,))
        if pos < len(plist) and plist[pos][0] == doc_index:
            return plist[pos][1]
        return 0


def build_index(store: DocumentStore) -> InvertedIndex:
    """Index every document in the store; deterministic for a given store."""
    if len(store) == 0:
        raise ValueError("cannot index an empty document store")
    doc_ids: list[str] = []
    doc_lengths: list[int] = []
    postings: dict[str, list[tuple[int, int]]] = {}
    for doc_index, doc in enumerate(store):
        tokens = tokenize(doc.text)
        doc_ids.append(doc.doc_id)
        doc_lengths.append(len(tokens))
        for term, tf in Counter(tokens).items():
            postings.setdefault(term, []).append((doc_index, tf))
    # documents are visited in store order, so postings are already sorted
    return InvertedIndex(doc_ids, doc_lengths, postings)


def bm25_score(
    query_tokens: Sequence[str],
    doc_index: int,
    index: InvertedIndex,
    params: Bm25Params,
) -> float:
    """Score one document against the query tokens.

    Each occurrence of a query token contributes separately; tokens absent
    from the dictionary contribute 0.
    """
    score = 0.0
    dl = index.doc_lengths[doc_index]
    for term in query_tokens:
        tf = index.term_frequency(term, doc_index)
        if tf == 0:
            continue
        norm = params.k1 * (1.0 - params.b + params.b * dl / index.avg_doc_length)
        score += index.idf(term) * tf * (params.k1 + 1.0) / (tf + norm)
    return score


def search(
    topic: Topic,
    index: InvertedIndex,
    params: Bm25Params | None = None,
    k: int = 1000,
    allowed_doc_ids: Iterable[str] | None = None,
    run_tag: str = "bm25",
) -> RankedList:
    """Return the top-k documents for a topic as a ranked list.

    Only documents with a positive score appear. ``allowed_doc_ids``
    restricts scoring to a per-topic candidate pool.
    """
    if k < 1:
        raise ValueError(f"k must be >= 1, got {k}")
    params = params or Bm25Params()
    query_tokens = tokenize(topic.query)
    allowed: set[int] | None = None
    if allowed_doc_ids is not None:
        wanted = set(allowed_doc_ids)
        allowed = {i for i, d in enumerate(index.doc_ids) if d in wanted}
    accum: dict[int, float] = {}
    for term in query_tokens:
        plist = index.postings.get(term)
        if not plist:
            continue
        idf = index.idf(term)
        k1, b = params.k1, params.b
        for doc_index, tf in plist:
            if allowed is not None and doc_index not in allowed:
                continue
            dl = index.doc_lengths[doc_index]
            norm = k1 * (1.0 - b + b * dl / index.avg_doc_length)
            accum[doc_index] = accum.get(doc_index, 0.0) + idf * tf * (k1 + 1.0) / (tf + norm)
    scores = {
        index.doc_ids[doc_index]: score
        for doc_index, score in accum.items()
        if score > 0.0
    }
    return RankedList.from_scores(topic.topic_id, scores, run_tag, depth=k)


def save_index(index: InvertedIndex, fh: IO[str]) -> None:
    """Serialize to the versioned line format; byte-identical per index."""
    fh.write(f"{INDEX_FORMAT}\n")
    fh.write("analyzer lower_alnum\n")
    fh.write(f"docs {index.doc_count}\n")
    fh.write(f"terms {index.term_count()}\n")
    for doc_id, length in zip(index.doc_ids, index.doc_lengths):
        fh.write(f"doc {doc_id} {length}\n")
    for term in sorted(index.postings):
        plist = index.postings[term]
        cells = " ".join(f"{doc_index}:{tf}" for doc_index, tf in plist)
        fh.write(f"term {term} {len(plist)} {cells}\n")


def load_index(fh: IO[str]) -> InvertedIndex:
    header = fh.readline().strip()
    if header != INDEX_FORMAT:
        raise DataFormatError(f"unrecognized index header {header!r}")
    analyzer = fh.readline().split()
    if analyzer[:2] != ["analyzer", "lower_alnum"]:
        raise DataFormatError(f"unsupported analyzer line: {' '.join(analyzer)!r}")
    doc_line = fh.readline().split()
    term_line = fh.readline().split()
    if doc_line[:1] != ["docs"] or term_line[:1] != ["terms"]:
        raise DataFormatError("index is missing docs/terms counts")
    doc_count = int(doc_line[1])
    term_count = int(term_line[1])
    doc_ids: list[str] = []
    doc_lengths: list[int] = []
    postings: dict[str, list[tuple[int, int]]] = {}
    for line in fh:
        parts = line.split()
        if not parts:
            continue
        if parts[0] == "doc":
            if len(parts) != 3:
                raise DataFormatError(f"malformed doc line: {line.rstrip()!r}")
            doc_ids.append(parts[1])
            doc_lengths.append(int(parts[2]))
        elif parts[0] == "term":
            if len(parts) < 3:
                raise DataFormatError(f"malformed term line: {line.rstrip()!r}")
            term, df = parts[1], int(parts[2])
            plist = []
            for cell in parts[3:]:
                doc_index_s, _, tf_s = cell.partition(":")
                plist.append((int(doc_index_s), int(tf_s)))
            if len(plist) != df:
                raise DataFormatError(
                    f"term {term!r}: stated df {df} != {len(plist)} postings"
                )
            postings[term] = plist
        else:
            raise DataFormatError(f"unrecognized index line: {line.rstrip()!r}")
    if len(doc_ids) != doc_count:
        raise DataFormatError(f"expected {doc_count} docs, found {len(doc_ids)}")
    if len(postings) != term_count:
        raise DataFormatError(f"expected {term_count} terms, found {len(postings)}")
    return InvertedIndex(doc_ids, doc_lengths, postings)
