"""Reciprocal rank fusion of component rankings.

Fusion reads ranks only: a document's fused score is the sum of
1 / (k + rank) over every input list containing it, so the raw retrieval
scores never matter. A single-component configuration passes its input
through unchanged, which keeps baseline runs and fused runs on one code
path.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Mapping, Sequence

from .data import RankedList

DEFAULT_RRF_K = 60.0
DEFAULT_DEPTH = 1000

# the standard run matrix: which components feed each fused run
DEFAULT_RUN_MATRIX: tuple[tuple[str, tuple[str, ...]], ...] = (
    ("upv_bm25", ("bm25",)),
    ("upv_fuse_2", ("bm25", "semantic")),
    ("upv_fuse_3", ("bm25", "qe_base")),
    ("upv_fuse_5", ("bm25", "qe_large")),
    ("upv_fuse_7", ("bm25", "semantic", "qe_base")),
    ("upv_fuse_9", ("bm25", "semantic", "qe_large")),
)


@dataclass(frozen=True)
class FusionConfig:
    run_tag: str
    components: tuple[str, ...]
    rrf_k: float = DEFAULT_RRF_K

    def __post_init__(self) -> None:
        if not self.run_tag:
            raise ValueError("run_tag must be non-empty")
        if not self.components:
            raise ValueError(f"run {self.run_tag}: components must be non-empty")
        if len(set(self.components)) != len(self.components):
            raise ValueError(f"run {self.run_tag}: duplicate component")
        if self.rrf_k <= 0:
            raise ValueError(f"run {self.run_tag}: rrf_k must be > 0, got {self.rrf_k}")


def rrf_fuse(
    lists: Sequence[RankedList],
    k: float = DEFAULT_RRF_K,
    run_tag: str = "fused",
) -> RankedList:
    """Fuse rankings for one topic by reciprocal rank.

    Every document appearing in at least one input receives
    sum(1 / (k + rank)) over the lists containing it; ties are broken by
    ascending doc_id.
    """
    if not lists:
        raise ValueError("need at least one list to fuse")
    if k <= 0:
        raise ValueError(f"k must be > 0, got {k}")
    topic_id = lists[0].topic_id
    for ranked in lists[1:]:
        if ranked.topic_id != topic_id:
            raise ValueError(
                f"cannot fuse lists for different topics: "
                f"{topic_id!r} vs {ranked.topic_id!r}"
            )
    fused: dict[str, float] = {}
    for ranked in lists:
        for entry in ranked.entries:
            fused[entry.doc_id] = fused.get(entry.doc_id, 0.0) + 1.0 / (k + entry.rank)
    return RankedList.from_scores(topic_id, fused, run_tag)


def build_run(
    config: FusionConfig,
    component_lists: Mapping[str, Mapping[str, RankedList]],
    depth: int = DEFAULT_DEPTH,
) -> dict[str, RankedList]:
    """Materialize one run configuration over all topics.

    ``component_lists`` maps component name -> topic_id -> ranked list.
    A one-component config passes its lists through with the run tag
    stamped; otherwise the components are fused per topic. Output is
    truncated to ``depth``.
    """
    for name in config.components:
        if name not in component_lists:
            raise ValueError(f"run {config.run_tag}: unknown component {name!r}")
    topic_ids = sorted(component_lists[config.components[0]])
    for name in config.components[1:]:
        if sorted(component_lists[name]) != topic_ids:
            raise ValueError(
                f"run {config.run_tag}: component {name!r} covers a different topic set"
            )
    out: dict[str, RankedList] = {}
    for topic_id in topic_ids:
        if len(config.components) == 1:
            ranked = component_lists[config.components[0]][topic_id]
            out[topic_id] = ranked.with_tag(config.run_tag).truncated(depth)
        else:
            inputs = [component_lists[name][topic_id] for name in config.components]
            fused = rrf_fuse(inputs, k=config.rrf_k, run_tag=config.run_tag)
            out[topic_id] = fused.truncated(depth)
    return out


def parse_fusion_configs(path: str, rrf_k: float = DEFAULT_RRF_K) -> list[FusionConfig]:
    """Read a run configuration file.

    One config per line: ``run_tag component[,component...] [rrf_k]``.
    Blank lines and ``#`` comments are skipped; a missing third field uses
    the given default constant.
    """
    configs: list[FusionConfig] = []
    seen: set[str] = set()
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, 1):
            stripped = line.strip()
            if not stripped or stripped.startswith("#"):
                continue
            parts = stripped.split()
            if len(parts) not in (2, 3):
                raise ValueError(
                    f"{path}:{lineno}: expected 'run_tag components [k]', "
                    f"got {len(parts)} fields"
                )
            tag = parts[0]
            if tag in seen:
                raise ValueError(f"{path}:{lineno}: duplicate run_tag {tag!r}")
            seen.add(tag)
            components = tuple(c for c in parts[1].split(",") if c)
            k = float(parts[2]) if len(parts) == 3 else rrf_k
            configs.append(FusionConfig(tag, components, k))
    return configs
