"""Multi-label quality classifier: one logistic head per criterion.

Documents are featurized as L2-normalized hashed bag-of-words vectors, and
each of the four criteria gets an independent sigmoid output. Two model
identifiers ship built in, "toy-base" and "toy-large"; they share the code
path and differ only in seeded weights, so swapping the identifier yields a
differently tagged score file. Fine-tuned weights round-trip through a JSON
artifact whose bytes are stable for a fixed dataset and seed.
"""

from __future__ import annotations

import json
import os
from dataclasses import dataclass

import numpy as np

from .dataset import CRITERIA, LabeledExample
from .errors import ExportError
from .text import hashed_counts, stable_hash, tokenize
from .writers import atomic_write

MODEL_FORMAT = "qualityexport.model.v1"
FEATURE_DIM = 512
BUNDLED_MODELS = ("toy-base", "toy-large")

# keep probabilities inside the open interval even after 6-decimal formatting
PROB_MARGIN = 1e-6

DEFAULT_EPOCHS = 400
DEFAULT_LR = 2.0
DEFAULT_SEED = 13
_BUNDLED_WEIGHT_SCALE = 0.3
_INIT_WEIGHT_SCALE = 0.01


def _sigmoid(z: np.ndarray) -> np.ndarray:
    # split by sign so exp never overflows
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def text_features(texts: list[str], dim: int = FEATURE_DIM) -> np.ndarray:
    """Hashed token counts per text, L2-normalized; empty text stays zero."""
    matrix = np.zeros((len(texts), dim), dtype=np.float64)
    for i, text in enumerate(texts):
        matrix[i] = hashed_counts(tokenize(text), dim)
    norms = np.linalg.norm(matrix, axis=1, keepdims=True)
    np.divide(matrix, norms, out=matrix, where=norms > 0.0)
    return matrix


@dataclass(frozen=True, eq=False)
class CriterionClassifier:
    """Logistic heads over hashed features; weights shape (4, feature_dim)."""

    model_id: str
    weights: np.ndarray
    bias: np.ndarray

    def __post_init__(self) -> None:
        if (
            self.weights.ndim != 2
            or self.weights.shape[0] != len(CRITERIA)
            or self.weights.shape[1] < 1
            or self.bias.shape != (len(CRITERIA),)
        ):
            raise ExportError(
                f"model {self.model_id}: weights {self.weights.shape} and "
                f"bias {self.bias.shape} do not form {len(CRITERIA)} heads"
            )
        if not (np.all(np.isfinite(self.weights)) and np.all(np.isfinite(self.bias))):
            raise ExportError(f"model {self.model_id}: non-finite parameters")

    @property
    def feature_dim(self) -> int:
        return self.weights.shape[1]

    def predict_proba(self, texts: list[str], batch_size: int = 32) -> np.ndarray:
        """Per-criterion probabilities, shape (len(texts), 4), in (0, 1).

        Inference is batched: each slice goes through one vectorized
        matrix product, so memory stays bounded on large corpora.
        """
        if batch_size < 1:
            raise ExportError(f"batch size must be >= 1, got {batch_size}")
        heads = self.weights.T
        blocks = []
        for start in range(0, len(texts), batch_size):
            feats = text_features(texts[start:start + batch_size], self.feature_dim)
            # per-row products keep outputs identical for every batch size
            logits = np.stack([row @ heads for row in feats]) + self.bias
            blocks.append(_sigmoid(logits))
        if not blocks:
            return np.empty((0, len(CRITERIA)), dtype=np.float64)
        return np.clip(np.vstack(blocks), PROB_MARGIN, 1.0 - PROB_MARGIN)

    def save(self, path: str) -> None:
        """Write the JSON artifact; key order is fixed so bytes are stable."""
        payload = {
            "format": MODEL_FORMAT,
            "model_id": self.model_id,
            "feature_dim": self.feature_dim,
            "criteria": list(CRITERIA),
            "weights": self.weights.tolist(),
            "bias": self.bias.tolist(),
        }
        text = json.dumps(payload, sort_keys=True, indent=2) + "\n"
        atomic_write(path, lambda fh: fh.write(text))

    @classmethod
    def load(cls, path: str) -> "CriterionClassifier":
        try:
            with open(path, encoding="utf-8") as fh:
                payload = json.load(fh)
        except json.JSONDecodeError as exc:
            raise ExportError(f"{path}: not a model artifact: {exc}") from None
        if not isinstance(payload, dict) or payload.get("format") != MODEL_FORMAT:
            raise ExportError(f"{path}: not a {MODEL_FORMAT} artifact")
        try:
            model_id = str(payload["model_id"])
            weights = np.asarray(payload["weights"], dtype=np.float64)
            bias = np.asarray(payload["bias"], dtype=np.float64)
        except (KeyError, TypeError, ValueError) as exc:
            raise ExportError(f"{path}: incomplete model artifact: {exc}") from None
        return cls(model_id=model_id, weights=weights, bias=bias)


def bundled_classifier(model_id: str) -> CriterionClassifier:
    """Fixed-weight classifier for a built-in identifier."""
    if model_id not in BUNDLED_MODELS:
        raise ExportError(
            f"unknown bundled model {model_id!r}, choose from {', '.join(BUNDLED_MODELS)}"
        )
    rng = np.random.RandomState(stable_hash(f"classifier:{model_id}"))
    weights = rng.standard_normal((len(CRITERIA), FEATURE_DIM)) * _BUNDLED_WEIGHT_SCALE
    bias = np.zeros(len(CRITERIA), dtype=np.float64)
    return CriterionClassifier(model_id=model_id, weights=weights, bias=bias)


def resolve_model(name_or_path: str) -> CriterionClassifier:
    """Bundled identifier first, then a path to a saved artifact."""
    if name_or_path in BUNDLED_MODELS:
        return bundled_classifier(name_or_path)
    if os.path.exists(name_or_path):
        return CriterionClassifier.load(name_or_path)
    raise ExportError(
        f"model {name_or_path!r} is neither a bundled identifier "
        f"({', '.join(BUNDLED_MODELS)}) nor an artifact file"
    )


def finetune(
    examples: list[LabeledExample],
    model_id: str,
    epochs: int = DEFAULT_EPOCHS,
    lr: float = DEFAULT_LR,
    seed: int = DEFAULT_SEED,
) -> tuple[CriterionClassifier, dict[int, float]]:
    """Full-batch gradient descent on the mean logistic loss.

    Returns the trained classifier and per-criterion train accuracy at the
    0.5 threshold. No shuffling is involved, so a fixed seed pins the whole
    trajectory and the resulting artifact bytes.
    """
    if epochs < 1 or lr <= 0.0:
        raise ExportError(f"need epochs >= 1 and lr > 0, got epochs={epochs} lr={lr}")
    features = text_features([ex.text for ex in examples])
    targets = np.array([ex.labels for ex in examples], dtype=np.float64)
    rng = np.random.RandomState(seed)
    weights = rng.standard_normal((len(CRITERIA), FEATURE_DIM)) * _INIT_WEIGHT_SCALE
    bias = np.zeros(len(CRITERIA), dtype=np.float64)
    count = len(examples)
    for _ in range(epochs):
        residual = _sigmoid(features @ weights.T + bias) - targets
        weights -= lr * (residual.T @ features) / count
        bias -= lr * residual.mean(axis=0)
    classifier = CriterionClassifier(model_id=model_id, weights=weights, bias=bias)
    predictions = _sigmoid(features @ weights.T + bias) >= 0.5
    accuracy = {
        criterion: float(np.mean(predictions[:, i] == (targets[:, i] == 1.0)))
        for i, criterion in enumerate(CRITERIA)
    }
    return classifier, accuracy
