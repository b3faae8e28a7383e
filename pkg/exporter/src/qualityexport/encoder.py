"""Deterministic sentence encoder: hashed counts through a random projection.

A stand-in for a neural encoder with the same interface contract: fixed
output dimension, identical text gives identical vectors, batch inference.
The projection matrix is seeded from the model identifier, so different
identifiers produce genuinely different embedding spaces.
"""

from __future__ import annotations

import numpy as np

from .errors import ExportError
from .text import hashed_counts, stable_hash, tokenize

DEFAULT_ENCODER = "toy-encoder"
DEFAULT_DIM = 384
# token-count space folded by hashing before projection
_VOCAB_DIM = 4096


class SentenceEncoder:
    """Maps text to an L2-normalized vector of ``dim`` components."""

    def __init__(self, model_id: str = DEFAULT_ENCODER, dim: int = DEFAULT_DIM):
        if dim < 1:
            raise ExportError(f"dimension must be >= 1, got {dim}")
        self.model_id = model_id
        self.dim = dim
        rng = np.random.RandomState(stable_hash(f"encoder:{model_id}:{dim}"))
        self._projection = rng.standard_normal((_VOCAB_DIM, dim)) / np.sqrt(dim)

    def encode(self, texts: list[str], batch_size: int = 32) -> np.ndarray:
        """Vectors for each text, shape (len(texts), dim); empty text maps to zero."""
        if batch_size < 1:
            raise ExportError(f"batch size must be >= 1, got {batch_size}")
        blocks = []
        for start in range(0, len(texts), batch_size):
            chunk = texts[start:start + batch_size]
            # one row product per text: results never depend on batch size,
            # which a whole-chunk matmul cannot promise (blocked kernels)
            vectors = np.stack([
                hashed_counts(tokenize(text), _VOCAB_DIM) @ self._projection
                for text in chunk
            ])
            norms = np.linalg.norm(vectors, axis=1, keepdims=True)
            np.divide(vectors, norms, out=vectors, where=norms > 0.0)
            blocks.append(vectors)
        if not blocks:
            return np.empty((0, self.dim), dtype=np.float64)
        return np.vstack(blocks)
