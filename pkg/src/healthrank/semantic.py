"""Semantic ranking by cosine similarity over document embeddings.

Documents are represented by the embedding of their first 20 sentences.
Vectors come either from an embedding file produced by an external encoder
or from a built-in deterministic fallback (L2-normalized hashed term
frequencies), so the full pipeline runs with zero external artifacts.
"""

from __future__ import annotations

import re

import numpy as np

from .bm25 import tokenize
from .data import DocumentStore, RankedList, Topic, load_embeddings

# split after ., ! or ? when followed by whitespace (or end of text)
_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")

DEFAULT_SENTENCE_LIMIT = 20
FALLBACK_DIM = 256
# seed and multiplier of the fallback term hash; fixed so rankings are
# reproducible across runs and machines
HASH_SEED = 0x811C9DC5
HASH_MULTIPLIER = 31


def segment_sentences(text: str) -> list[str]:
    """Split on sentence terminators followed by whitespace or end of text.

    Deliberately naive: abbreviations like "Dr." start a new segment.
    """
    return [part.strip() for part in _SENTENCE_BREAK.split(text) if part.strip()]


def truncate_for_embedding(text: str, limit: int = DEFAULT_SENTENCE_LIMIT) -> str:
    """Keep the first ``limit`` sentences, space-joined."""
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    return " ".join(segment_sentences(text)[:limit])


def cosine(u: np.ndarray, v: np.ndarray) -> float:
    """Cosine similarity; 0.0 when either vector has zero norm."""
    u = np.asarray(u, dtype=np.float64)
    v = np.asarray(v, dtype=np.float64)
    if u.shape != v.shape:
        raise ValueError(f"dimension mismatch: {u.shape} vs {v.shape}")
    nu = float(np.linalg.norm(u))
    nv = float(np.linalg.norm(v))
    if nu == 0.0 or nv == 0.0:
        return 0.0
    return float(np.dot(u, v) / (nu * nv))


def _term_bucket(term: str, dim: int) -> int:
    h = HASH_SEED
    for ch in term:
        h = (h * HASH_MULTIPLIER + ord(ch)) & 0xFFFFFFFF
    return h % dim


class FileEmbeddingProvider:
    """Vectors for topic and document ids read from an embedding file."""

    def __init__(self, path: str):
        records = load_embeddings(path)
        if not records:
            raise ValueError(f"embedding file {path} holds no vectors")
        self.dim = records[0].dim
        self._vectors = {
            rec.id: np.asarray(rec.vector, dtype=np.float64) for rec in records
        }

    def vector(self, item_id: str) -> np.ndarray:
        try:
            return self._vectors[item_id]
        except KeyError:
            raise KeyError(f"no embedding for id {item_id!r}") from None


class HashedTfEmbeddingProvider:
    """Deterministic fallback: hashed term-frequency vectors, L2-normalized.

    Documents are truncated to their first ``sentence_limit`` sentences
    before embedding, matching the rule external encoders follow. An empty
    text maps to the zero vector, which the cosine rule scores as 0.
    """

    def __init__(
        self,
        store: DocumentStore,
        topics: list[Topic] | None = None,
        dim: int = FALLBACK_DIM,
        sentence_limit: int = DEFAULT_SENTENCE_LIMIT,
        embed_description: bool = False,
    ):
        if dim < 1:
            raise ValueError(f"dim must be >= 1, got {dim}")
        self.dim = dim
        self.sentence_limit = sentence_limit
        self._store = store
        self._topic_queries = {
            t.topic_id: (f"{t.query} {t.description}" if embed_description and t.description
                         else t.query)
            for t in (topics or [])
        }
        self._cache: dict[str, np.ndarray] = {}

    def embed_text(self, text: str) -> np.ndarray:
        vec = np.zeros(self.dim, dtype=np.float64)
        for term in tokenize(text):
            vec[_term_bucket(term, self.dim)] += 1.0
        norm = float(np.linalg.norm(vec))
        if norm > 0.0:
            vec /= norm
        return vec

    def vector(self, item_id: str) -> np.ndarray:
        cached = self._cache.get(item_id)
        if cached is not None:
            return cached
        if item_id in self._topic_queries:
            text = self._topic_queries[item_id]
        elif item_id in self._store:
            text = truncate_for_embedding(
                self._store.get(item_id).text, self.sentence_limit
            )
        else:
            raise KeyError(f"no text for id {item_id!r}")
        vec = self.embed_text(text)
        self._cache[item_id] = vec
        return vec


def semantic_rank(
    topic: Topic,
    candidate_doc_ids: list[str],
    provider,
    run_tag: str = "semantic",
) -> RankedList:
    """Order candidates by cosine similarity to the topic vector.

    The output is always a permutation of the candidates; ties are broken
    by ascending doc_id.
    """
    topic_vec = provider.vector(topic.topic_id)
    scores = {
        doc_id: cosine(topic_vec, provider.vector(doc_id))
        for doc_id in candidate_doc_ids
    }
    return RankedList.from_scores(topic.topic_id, scores, run_tag)
