"""Text normalization shared by the classifier and the encoder.

The sentence-truncation rule here must stay in lockstep with the consuming
pipeline, which embeds only the first 20 sentences of each document: same
terminator set (. ! ?), same whitespace-following split, same space-join.
A contract test compares the two implementations on randomized inputs.
"""

from __future__ import annotations

import re

import numpy as np

_TOKEN = re.compile(r"[^\W_]+", re.UNICODE)
# split after ., ! or ? when followed by whitespace (or end of text)
_SENTENCE_BREAK = re.compile(r"(?<=[.!?])\s+")

DEFAULT_SENTENCE_LIMIT = 20

# FNV-1a, 32 bit: stable across processes and platforms, unlike hash()
FNV_BASIS = 0x811C9DC5
FNV_PRIME = 0x01000193


def tokenize(text: str) -> list[str]:
    """Lowercase and split on any non-alphanumeric character."""
    return _TOKEN.findall(text.lower())


def segment_sentences(text: str) -> list[str]:
    """Split on sentence terminators followed by whitespace or end of text."""
    return [part.strip() for part in _SENTENCE_BREAK.split(text) if part.strip()]


def truncate_text(text: str, limit: int = DEFAULT_SENTENCE_LIMIT) -> str:
    """Keep the first ``limit`` sentences, space-joined."""
    if limit < 1:
        raise ValueError(f"limit must be >= 1, got {limit}")
    return " ".join(segment_sentences(text)[:limit])


def stable_hash(text: str, seed: int = FNV_BASIS) -> int:
    """32-bit FNV-1a over the UTF-8 bytes of ``text``."""
    h = seed
    for byte in text.encode("utf-8"):
        h ^= byte
        h = (h * FNV_PRIME) & 0xFFFFFFFF
    return h


def hashed_counts(tokens: list[str], dim: int) -> np.ndarray:
    """Token counts folded into ``dim`` buckets by the stable hash."""
    vec = np.zeros(dim, dtype=np.float64)
    for token in tokens:
        vec[stable_hash(token) % dim] += 1.0
    return vec
