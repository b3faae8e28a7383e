"""Multi-aspect evaluation: nDCG, P@10, CAM, rank-biased overlap, compatibility.

Eight aspect evaluations pair a qrels derivation with a metric:

=== ========================== =========
id  derivation                 metric
=== ========================== =========
1   graded.usefulness          nDCG
2   binary.useful-correct      nDCG
3   binary.useful-correct*     P@10
4   binary.useful-credible     nDCG
5   useful-correct-credible    nDCG
6   2aspects.correct-credible  CAM_MAP
7   2aspects.useful-credible   CAM_MAP
8   3aspects                   CAM_MAP_3
=== ========================== =========

Compatibility scores a run against an ideal ordering of qualifying
documents (helpful: judged correct and credible; harmful: judged
incorrect) using truncated rank-biased overlap, normalized by the ideal's
self-overlap so a run whose prefix equals the ideal scores exactly 1.0.
Topics with no qualifying documents are excluded from means and counted,
never silently scored as zero.
"""

from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from typing import Mapping, Sequence

from .data import AspectJudgment, JudgmentSet, RankedList, derive_binary_qrels

logger = logging.getLogger(__name__)

ASPECTS = ("useful", "correct", "credible")
DEFAULT_EVAL_DEPTH = 1000


def ndcg(
    run: RankedList,
    gains: Mapping[str, float],
    depth: int = DEFAULT_EVAL_DEPTH,
) -> float | None:
    """Normalized discounted cumulative gain at ``depth``.

    ``gains`` holds the judged gain per doc_id; unjudged documents gain 0.
    The ideal ranking sorts all judged gains descending and is truncated at
    the same depth, so a perfect ordering scores exactly 1.0. Returns None
    when the ideal gain is zero (topic excluded from means).
    """
    for doc_id, gain in gains.items():
        if gain < 0:
            raise ValueError(f"negative gain {gain} for doc {doc_id}")
    dcg = 0.0
    for entry in run.entries[:depth]:
        gain = gains.get(entry.doc_id, 0.0)
        if gain:
            dcg += gain / math.log2(entry.rank + 1)
    idcg = 0.0
    for i, gain in enumerate(sorted(gains.values(), reverse=True)[:depth], 1):
        if gain:
            idcg += gain / math.log2(i + 1)
    if idcg == 0.0:
        return None
    return dcg / idcg


def precision_at(run: RankedList, relevant: set[str], cutoff: int = 10) -> float:
    """Fraction of the top ``cutoff`` that is relevant; short lists count as
    non-relevant padding."""
    if cutoff < 1:
        raise ValueError(f"cutoff must be >= 1, got {cutoff}")
    hits = sum(1 for entry in run.entries[:cutoff] if entry.doc_id in relevant)
    return hits / cutoff


def average_precision(
    run: RankedList,
    relevant: set[str],
    depth: int = DEFAULT_EVAL_DEPTH,
) -> float | None:
    """Mean of precision@rank over relevant ranks, divided by the number of
    judged-relevant documents. Returns None when nothing is judged relevant
    (topic excluded from means)."""
    total_relevant = len(relevant)
    if total_relevant == 0:
        return None
    hits = 0
    total = 0.0
    for entry in run.entries[:depth]:
        if entry.doc_id in relevant:
            hits += 1
            total += hits / entry.rank
    return total / total_relevant


def aspect_relevance(
    judgments: JudgmentSet,
    aspect: str,
    threshold: int = 1,
) -> dict[str, set[str]]:
    """Per-topic relevant document sets for a single aspect.

    useful: usefulness >= threshold; correct: correctness == 1;
    credible: credibility == 1. Unjudged aspects are never relevant.
    """
    if aspect not in ASPECTS:
        raise ValueError(f"unknown aspect {aspect!r}, expected one of {ASPECTS}")
    relevant: dict[str, set[str]] = {t: set() for t in judgments.topic_ids()}
    for j in judgments:
        if aspect == "useful":
            hit = j.usefulness >= threshold
        elif aspect == "correct":
            hit = j.correctness == 1
        else:
            hit = j.credibility == 1
        if hit:
            relevant[j.topic_id].add(j.doc_id)
    return relevant


def _mean_ap(
    run_lists: Mapping[str, RankedList],
    relevant_by_topic: Mapping[str, set[str]],
    depth: int,
) -> tuple[float | None, int, int]:
    """Mean AP over topics; topics with no relevant documents are excluded.

    Returns (mean or None, topics used, topics excluded).
    """
    values = []
    excluded = 0
    for topic_id in sorted(relevant_by_topic):
        relevant = relevant_by_topic[topic_id]
        if not relevant:
            excluded += 1
            continue
        run = run_lists.get(topic_id) or RankedList(topic_id, "empty", ())
        ap = average_precision(run, relevant, depth)
        assert ap is not None
        values.append(ap)
    if not values:
        return None, 0, excluded
    return sum(values) / len(values), len(values), excluded


def cam(
    run_lists: Mapping[str, RankedList],
    judgments: JudgmentSet,
    aspects: Sequence[str],
    weights: Sequence[float],
    threshold: int = 1,
    depth: int = DEFAULT_EVAL_DEPTH,
) -> float:
    """Convex aggregation of per-aspect MAP scores.

    Each aspect's binary relevance is derived independently and its MAP is
    computed over the topics where that aspect has relevant documents. An
    aspect with no eligible topics contributes 0.
    """
    if len(aspects) != len(weights):
        raise ValueError(
            f"{len(aspects)} aspects but {len(weights)} weights"
        )
    if len(aspects) not in (2, 3):
        raise ValueError(f"CAM takes 2 or 3 aspects, got {len(aspects)}")
    if any(w < 0 for w in weights):
        raise ValueError("weights must be non-negative")
    if abs(sum(weights) - 1.0) > 1e-9:
        raise ValueError(f"weights must sum to 1, got {sum(weights)}")
    total = 0.0
    for aspect, weight in zip(aspects, weights):
        relevant = aspect_relevance(judgments, aspect, threshold)
        mean, _used, excl = _mean_ap(run_lists, relevant, depth)
        if mean is None:
            logger.warning("aspect %s: no topic has relevant documents", aspect)
            mean = 0.0
        elif excl:
            logger.info("aspect %s: %d topics excluded (nothing relevant)", aspect, excl)
        total += weight * mean
    return total


def rbo(
    list_a: Sequence[str],
    list_b: Sequence[str],
    p: float,
    depth: int,
) -> float:
    """Truncated rank-biased overlap.

    (1 - p) * sum over d = 1..depth of p^(d-1) * |top_d(A) & top_d(B)| / d.
    A list shorter than d contributes its full prefix at that depth.
    """
    if not 0.0 < p < 1.0:
        raise ValueError(f"p must be in (0, 1), got {p}")
    if depth < 1:
        raise ValueError(f"depth must be >= 1, got {depth}")
    if len(set(list_a)) != len(list_a) or len(set(list_b)) != len(list_b):
        raise ValueError("rbo inputs must not contain duplicates")
    seen_a: set[str] = set()
    seen_b: set[str] = set()
    overlap = 0
    total = 0.0
    weight = 1.0
    for d in range(1, depth + 1):
        if d > len(list_a) and d > len(list_b) and weight * overlap == 0.0:
            break
        if d <= len(list_a):
            item = list_a[d - 1]
            if item in seen_b:
                overlap += 1
            seen_a.add(item)
        if d <= len(list_b):
            item = list_b[d - 1]
            if item in seen_a:
                overlap += 1
            seen_b.add(item)
        total += weight * overlap / d
        weight *= p
    return (1.0 - p) * total


@dataclass(frozen=True)
class CompatibilitySpec:
    """Polarity plus the persistence and depth of the overlap measure."""

    polarity: str
    persistence: float = 0.95
    depth: int = DEFAULT_EVAL_DEPTH

    def __post_init__(self) -> None:
        if self.polarity not in ("harmful", "helpful"):
            raise ValueError(f"polarity must be harmful or helpful, got {self.polarity!r}")
        if not 0.0 < self.persistence < 1.0:
            raise ValueError(f"persistence must be in (0, 1), got {self.persistence}")
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")


def ideal_list(
    topic_judgments: Mapping[str, AspectJudgment],
    polarity: str,
) -> list[str]:
    """Qualifying documents for one topic, best first.

    helpful: judged correct and credible; harmful: judged incorrect.
    Both orderings sort by descending usefulness, ties by ascending doc_id.
    """
    if polarity == "helpful":
        docs = [
            j for j in topic_judgments.values()
            if j.correctness == 1 and j.credibility == 1
        ]
    elif polarity == "harmful":
        docs = [j for j in topic_judgments.values() if j.correctness == 0]
    else:
        raise ValueError(f"polarity must be harmful or helpful, got {polarity!r}")
    docs.sort(key=lambda j: (-j.usefulness, j.doc_id))
    return [j.doc_id for j in docs]


def _compatibility_stats(
    run_lists: Mapping[str, RankedList],
    judgments: JudgmentSet,
    spec: CompatibilitySpec,
) -> tuple[float | None, int, int]:
    values = []
    excluded = 0
    for topic_id in judgments.topic_ids():
        ideal = ideal_list(judgments.for_topic(topic_id), spec.polarity)
        if not ideal:
            excluded += 1
            continue
        run = run_lists.get(topic_id)
        run_ids = run.doc_ids() if run is not None else []
        self_overlap = rbo(ideal, ideal, spec.persistence, spec.depth)
        values.append(
            rbo(run_ids, ideal, spec.persistence, spec.depth) / self_overlap
        )
    if not values:
        return None, 0, excluded
    return sum(values) / len(values), len(values), excluded


def compatibility(
    run_lists: Mapping[str, RankedList],
    judgments: JudgmentSet,
    spec: CompatibilitySpec,
) -> float | None:
    """Mean normalized overlap with the per-topic ideal ranking.

    Topics whose ideal is empty are excluded from the mean; returns None if
    every topic was excluded.
    """
    mean, _used, excluded = _compatibility_stats(run_lists, judgments, spec)
    if excluded:
        logger.info(
            "%s compatibility: %d topics excluded (empty ideal)",
            spec.polarity, excluded,
        )
    return mean


@dataclass(frozen=True)
class EvalSpec:
    """One aspect evaluation: a qrels derivation paired with a metric."""

    spec_id: int
    name: str
    metric: str                      # ndcg | p10 | cam_map | cam_map_3
    combo: str | None = None         # binary derivation for ndcg / p10
    aspects: tuple[str, ...] = ()    # aspect set for CAM metrics
    depth: int = DEFAULT_EVAL_DEPTH


ASPECT_SPECS: tuple[EvalSpec, ...] = (
    EvalSpec(1, "graded.usefulness", "ndcg"),
    EvalSpec(2, "binary.useful-correct", "ndcg", combo="useful-correct"),
    EvalSpec(3, "binary.useful-correct*", "p10", combo="useful-correct", depth=10),
    EvalSpec(4, "binary.useful-credible", "ndcg", combo="useful-credible"),
    EvalSpec(5, "useful-correct-credible", "ndcg", combo="useful-correct-credible"),
    EvalSpec(6, "2aspects.correct-credible", "cam_map", aspects=("correct", "credible")),
    EvalSpec(7, "2aspects.useful-credible", "cam_map", aspects=("useful", "credible")),
    EvalSpec(8, "3aspects", "cam_map_3", aspects=("useful", "correct", "credible")),
)

COMPAT_SPECS: tuple[CompatibilitySpec, ...] = (
    CompatibilitySpec("harmful"),
    CompatibilitySpec("helpful"),
)


@dataclass(frozen=True)
class EvalCell:
    run_tag: str
    column: str
    value: float | None
    topics_used: int
    topics_excluded: int
    better_than_baseline: bool = False


@dataclass
class EvalReport:
    """Per-run, per-column means with better-than-baseline flags."""

    baseline: str
    columns: list[str]
    run_tags: list[str]
    cells: dict[tuple[str, str], EvalCell] = field(default_factory=dict)

    def cell(self, run_tag: str, column: str) -> EvalCell:
        return self.cells[(run_tag, column)]

    def to_text(self) -> str:
        width = max(len(t) for t in self.run_tags + ["run"]) + 2
        lines = ["".join(["run".ljust(width)] + [c.rjust(9) for c in self.columns])]
        for tag in self.run_tags:
            parts = [tag.ljust(width)]
            for column in self.columns:
                cell = self.cells[(tag, column)]
                text = "n/a" if cell.value is None else f"{cell.value:.4f}"
                if cell.better_than_baseline:
                    text += "*"
                parts.append(text.rjust(9))
            lines.append("".join(parts))
        lines.append("")
        lines.append(
            f"* better than baseline {self.baseline} "
            f"(lower is better for harmful)"
        )
        notes = [
            f"{cell.run_tag} {cell.column}: {cell.topics_excluded} topics excluded"
            for cell in self.cells.values()
            if cell.topics_excluded
        ]
        if notes:
            lines.append("excluded topics:")
            lines.extend("  " + n for n in notes)
        return "\n".join(lines) + "\n"

    def to_delimited(self) -> str:
        rows = []
        for tag in self.run_tags:
            for column in self.columns:
                cell = self.cells[(tag, column)]
                value = "nan" if cell.value is None else f"{cell.value:.6f}"
                flag = "1" if cell.better_than_baseline else "0"
                rows.append(f"{tag}\t{column}\t{value}\t{flag}")
        return "\n".join(rows) + "\n"


def _binary_gains(relevance: Mapping[str, bool]) -> dict[str, float]:
    return {doc_id: 1.0 if rel else 0.0 for doc_id, rel in relevance.items()}


def _aspect_value(
    spec: EvalSpec,
    run_lists: Mapping[str, RankedList],
    judgments: JudgmentSet,
    threshold: int,
) -> tuple[float | None, int, int]:
    topic_ids = judgments.topic_ids()
    if spec.metric in ("ndcg", "p10") and spec.combo is not None:
        relevance = derive_binary_qrels(judgments, spec.combo, threshold)
    if spec.metric == "ndcg":
        values = []
        excluded = 0
        for topic_id in topic_ids:
            if spec.combo is None:
                gains: dict[str, float] = {
                    doc_id: float(j.usefulness)
                    for doc_id, j in judgments.for_topic(topic_id).items()
                }
            else:
                gains = _binary_gains(relevance.get(topic_id, {}))
            run = run_lists.get(topic_id) or RankedList(topic_id, "empty", ())
            value = ndcg(run, gains, spec.depth)
            if value is None:
                excluded += 1
            else:
                values.append(value)
        if not values:
            return None, 0, excluded
        return sum(values) / len(values), len(values), excluded
    if spec.metric == "p10":
        values = []
        for topic_id in topic_ids:
            relevant = {d for d, rel in relevance.get(topic_id, {}).items() if rel}
            run = run_lists.get(topic_id) or RankedList(topic_id, "empty", ())
            values.append(precision_at(run, relevant, spec.depth))
        if not values:
            return None, 0, 0
        return sum(values) / len(values), len(values), 0
    if spec.metric in ("cam_map", "cam_map_3"):
        weights = tuple(1.0 / len(spec.aspects) for _ in spec.aspects)
        value = cam(run_lists, judgments, spec.aspects, weights, threshold, spec.depth)
        return value, len(topic_ids), 0
    raise ValueError(f"unknown metric {spec.metric!r}")


def evaluate_runs(
    runs: Mapping[str, Mapping[str, RankedList]],
    judgments: JudgmentSet,
    baseline: str,
    aspect_specs: Sequence[EvalSpec] = ASPECT_SPECS,
    compat_specs: Sequence[CompatibilitySpec] = COMPAT_SPECS,
    threshold: int = 1,
) -> EvalReport:
    """Score every run on every aspect and compatibility column.

    Cells strictly better than the baseline run's cell are flagged; for
    harmful compatibility lower is better. Topics present in a run but
    absent from the judgments are skipped with a warning.
    """
    if baseline not in runs:
        raise ValueError(f"baseline {baseline!r} is not among the runs")
    judged = set(judgments.topic_ids())
    for run_tag, run_lists in runs.items():
        unjudged = sorted(set(run_lists) - judged)
        if unjudged:
            logger.warning(
                "run %s: skipping %d unjudged topics: %s",
                run_tag, len(unjudged), ", ".join(unjudged),
            )
    columns = [str(s.spec_id) for s in aspect_specs] + [s.polarity for s in compat_specs]
    report = EvalReport(baseline=baseline, columns=columns, run_tags=list(runs))
    raw: dict[tuple[str, str], tuple[float | None, int, int]] = {}
    for run_tag, run_lists in runs.items():
        for spec in aspect_specs:
            raw[(run_tag, str(spec.spec_id))] = _aspect_value(
                spec, run_lists, judgments, threshold
            )
        for cspec in compat_specs:
            raw[(run_tag, cspec.polarity)] = _compatibility_stats(
                run_lists, judgments, cspec
            )
    lower_is_better = {s.polarity for s in compat_specs if s.polarity == "harmful"}
    for (run_tag, column), (value, used, excluded) in raw.items():
        base_value = raw[(baseline, column)][0]
        better = False
        if value is not None and base_value is not None:
            if column in lower_is_better:
                better = value < base_value
            else:
                better = value > base_value
        report.cells[(run_tag, column)] = EvalCell(
            run_tag, column, value, used, excluded, better
        )
    return report
