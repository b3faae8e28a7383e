"""Output writers for the two exported file formats.

Both formats are whitespace-separated text, written atomically: content is
rendered to a temp file in the target directory and moved into place with
os.replace, so a crash or validation failure never leaves a partial file.
Validation happens while rendering, before the rename.
"""

from __future__ import annotations

import math
import os
import tempfile
from typing import Callable, Sequence, TextIO

import numpy as np

from .errors import ExportError


def atomic_write(path: str, render: Callable[[TextIO], None]) -> None:
    """Render into a sibling temp file, then rename onto ``path``."""
    target = os.path.abspath(path)
    fd, tmp = tempfile.mkstemp(dir=os.path.dirname(target), prefix=".qx-tmp-")
    try:
        with os.fdopen(fd, "w", encoding="utf-8", newline="\n") as fh:
            render(fh)
        os.replace(tmp, target)
    except BaseException:
        try:
            os.unlink(tmp)
        except OSError:
            pass
        raise


def _checked_probability(value: float, doc_id: str, column: int) -> float:
    if not (math.isfinite(value) and 0.0 <= value <= 1.0):
        raise ExportError(f"doc {doc_id}: criterion {column} score {value!r} outside [0, 1]")
    return value


def write_criterion_file(
    path: str,
    doc_ids: Sequence[str],
    probabilities: np.ndarray,
    source_tag: str,
    columns: Sequence[int],
) -> None:
    """Write ``doc_id p1 p2 p7 p8 source_tag`` lines, one per document."""
    if not source_tag or any(ch.isspace() for ch in source_tag):
        raise ExportError(f"source tag must be non-empty without whitespace, got {source_tag!r}")
    probabilities = np.asarray(probabilities, dtype=np.float64)
    if probabilities.shape != (len(doc_ids), len(columns)):
        raise ExportError(
            f"score matrix shape {probabilities.shape} does not match "
            f"{len(doc_ids)} documents x {len(columns)} criteria"
        )

    def render(fh: TextIO) -> None:
        seen: set[str] = set()
        for doc_id, row in zip(doc_ids, probabilities):
            if doc_id in seen:
                raise ExportError(f"duplicate doc_id {doc_id!r}")
            seen.add(doc_id)
            cells = " ".join(
                f"{_checked_probability(float(value), doc_id, column):.6f}"
                for column, value in zip(columns, row)
            )
            fh.write(f"{doc_id} {cells} {source_tag}\n")

    atomic_write(path, render)


def write_embedding_file(
    path: str,
    records: Sequence[tuple[str, np.ndarray]],
    dim: int,
) -> None:
    """Write the dimension header, then ``id v1 .. vdim`` per record."""
    if dim < 1:
        raise ExportError(f"dimension must be positive, got {dim}")

    def render(fh: TextIO) -> None:
        fh.write(f"{dim}\n")
        seen: set[str] = set()
        for rec_id, vector in records:
            if rec_id in seen:
                raise ExportError(f"duplicate id {rec_id!r}")
            seen.add(rec_id)
            vector = np.asarray(vector, dtype=np.float64)
            if vector.shape != (dim,):
                raise ExportError(
                    f"id {rec_id}: vector has {vector.size} components, header says {dim}"
                )
            if not np.all(np.isfinite(vector)):
                raise ExportError(f"id {rec_id}: non-finite component")
            cells = " ".join(f"{value:.6f}" for value in vector)
            fh.write(f"{rec_id} {cells}\n")

    atomic_write(path, render)
