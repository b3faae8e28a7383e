"""Quality re-ranking against the all-ones criterion reference.

An ideal health article is assumed to satisfy every quality criterion, so
its criterion-probability vector is (1, 1, 1, 1). Candidate documents are
re-ordered by the cosine similarity between their own criterion vector and
that reference. Cosine is magnitude-blind: (0.1, 0.1, 0.1, 0.1) scores 1.0
exactly like (1, 1, 1, 1). That property is kept as-is; callers who care
about magnitude must encode it in the probabilities themselves.
"""

from __future__ import annotations

import logging
import math
from typing import Mapping

from .data import CriterionVector, DataFormatError, RankedList

logger = logging.getLogger(__name__)

REFERENCE_VECTOR = (1.0, 1.0, 1.0, 1.0)
_REFERENCE_NORM = 2.0  # sqrt(4)


def quality_similarity(cv: CriterionVector) -> float:
    """Cosine similarity between a criterion vector and the reference.

    The zero vector scores 0. Always in [0, 1] for probabilities in [0, 1].
    """
    values = cv.as_tuple()
    norm = math.sqrt(sum(v * v for v in values))
    if norm == 0.0:
        return 0.0
    return sum(values) / (norm * _REFERENCE_NORM)


def rerank_by_quality(
    base: RankedList,
    scores: Mapping[str, CriterionVector],
    run_tag: str | None = None,
) -> RankedList:
    """Reorder a ranked list by descending quality similarity.

    The output is a permutation of the input. Documents without a criterion
    vector get similarity 0 and sink to the bottom; how many were missing is
    logged as a warning.
    """
    missing = 0
    similarity: dict[str, float] = {}
    for entry in base.entries:
        cv = scores.get(entry.doc_id)
        if cv is None:
            missing += 1
            similarity[entry.doc_id] = 0.0
        else:
            similarity[entry.doc_id] = quality_similarity(cv)
    if missing:
        logger.warning(
            "topic %s: %d of %d documents have no quality scores, ranked last",
            base.topic_id, missing, len(base.entries),
        )
    return RankedList.from_scores(
        base.topic_id, similarity, run_tag or base.run_tag
    )


def load_criterion_scores(path: str) -> dict[str, CriterionVector]:
    """Load a criterion-score file: ``doc_id p1 p2 p7 p8 source_tag``.

    Probabilities must be in [0, 1]; duplicate doc ids are an error.
    """
    vectors: dict[str, CriterionVector] = {}
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            if not line.strip():
                continue
            parts = line.split()
            if len(parts) != 6:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 6 fields, got {len(parts)}"
                )
            doc_id, p1, p2, p7, p8, source_tag = parts
            if doc_id in vectors:
                raise DataFormatError(f"{path}:{lineno}: duplicate doc_id {doc_id!r}")
            try:
                probs = tuple(float(p) for p in (p1, p2, p7, p8))
            except ValueError:
                raise DataFormatError(f"{path}:{lineno}: non-numeric probability") from None
            try:
                vectors[doc_id] = CriterionVector(doc_id, *probs, source_tag=source_tag)
            except DataFormatError as exc:
                raise DataFormatError(f"{path}:{lineno}: {exc}") from None
    return vectors
