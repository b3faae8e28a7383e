import logging
import random

import pytest

from healthrank.data import CriterionVector, DataFormatError, RankedList
from healthrank.quality import (
    REFERENCE_VECTOR,
    load_criterion_scores,
    quality_similarity,
    rerank_by_quality,
)


def vec(doc_id, *probs, tag="test"):
    return CriterionVector(doc_id, *probs, source_tag=tag)


def test_reference_vector_is_all_ones():
    assert REFERENCE_VECTOR == (1.0, 1.0, 1.0, 1.0)


def test_similarity_worked_values():
    assert quality_similarity(vec("a", 1, 1, 1, 1)) == pytest.approx(1.0)
    assert quality_similarity(vec("b", 1, 0, 0, 0)) == pytest.approx(0.5)
    # collinear with the reference: magnitude is invisible to cosine
    assert quality_similarity(vec("c", 0.5, 0.5, 0.5, 0.5)) == pytest.approx(1.0)
    assert quality_similarity(vec("d", 0, 0, 0, 0)) == 0.0


def test_similarity_in_unit_interval():
    rng = random.Random(31)
    for _ in range(200):
        value = quality_similarity(
            vec("x", *(rng.random() for _ in range(4)))
        )
        assert 0.0 <= value <= 1.0 + 1e-12


def test_rerank_orders_by_similarity():
    base = RankedList.from_scores("101", {"low": 9.0, "high": 1.0}, "bm25")
    scores = {"low": vec("low", 1, 0, 0, 0), "high": vec("high", 1, 1, 1, 1)}
    result = rerank_by_quality(base, scores)
    assert result.doc_ids() == ["high", "low"]
    assert result.entries[0].score == pytest.approx(1.0)
    assert result.entries[1].score == pytest.approx(0.5)


def test_rerank_is_permutation():
    rng = random.Random(8)
    base = RankedList.from_scores(
        "101", {f"d{i}": rng.random() for i in range(40)}, "bm25"
    )
    scores = {
        f"d{i}": vec(f"d{i}", *(rng.random() for _ in range(4)))
        for i in range(40)
    }
    result = rerank_by_quality(base, scores)
    assert sorted(result.doc_ids()) == sorted(base.doc_ids())


def test_rerank_all_tied_falls_back_to_doc_id_order():
    base = RankedList.from_scores("101", {"b": 3.0, "c": 2.0, "a": 1.0}, "bm25")
    shared = {d: vec(d, 0.5, 0.5, 0.5, 0.5) for d in ("a", "b", "c")}
    result = rerank_by_quality(base, shared)
    assert result.doc_ids() == ["a", "b", "c"]


def test_rerank_missing_scores_sink_and_warn(caplog):
    base = RankedList.from_scores("101", {"d1": 3.0, "d2": 2.0, "d3": 1.0}, "bm25")
    scores = {"d3": vec("d3", 0.2, 0.2, 0.2, 0.2)}
    with caplog.at_level(logging.WARNING, logger="healthrank.quality"):
        result = rerank_by_quality(base, scores)
    assert result.doc_ids() == ["d3", "d1", "d2"]
    assert "2 of 3" in caplog.text


def test_rerank_empty_base():
    base = RankedList.from_scores("101", {}, "bm25")
    assert rerank_by_quality(base, {}).entries == ()


def test_rerank_keeps_or_replaces_tag():
    base = RankedList.from_scores("101", {"d1": 1.0}, "bm25")
    scores = {"d1": vec("d1", 1, 1, 1, 1)}
    assert rerank_by_quality(base, scores).run_tag == "bm25"
    assert rerank_by_quality(base, scores, run_tag="qe_base").run_tag == "qe_base"


def test_rerank_idempotent():
    rng = random.Random(12)
    base = RankedList.from_scores(
        "101", {f"d{i}": rng.random() for i in range(20)}, "bm25"
    )
    scores = {
        f"d{i}": vec(f"d{i}", *(rng.random() for _ in range(4)))
        for i in range(20)
    }
    once = rerank_by_quality(base, scores)
    twice = rerank_by_quality(once, scores)
    assert twice.doc_ids() == once.doc_ids()


def test_uniform_scaling_preserves_order():
    rng = random.Random(44)
    base = RankedList.from_scores(
        "101", {f"d{i}": float(i) for i in range(15)}, "bm25"
    )
    for trial in range(20):
        raw = {
            f"d{i}": [rng.uniform(0.05, 1.0) for _ in range(4)]
            for i in range(15)
        }
        c = rng.uniform(0.1, 1.0)
        plain = {d: vec(d, *p) for d, p in raw.items()}
        scaled = {d: vec(d, *(v * c for v in p)) for d, p in raw.items()}
        assert (rerank_by_quality(base, plain).doc_ids()
                == rerank_by_quality(base, scaled).doc_ids()), f"trial {trial}"


def test_load_criterion_scores(tmp_path):
    path = tmp_path / "scores.txt"
    path.write_text(
        "d7 0.9 0.8 0.1 0.7 qe_large\nd8 0 1 0.5 0.25 qe_large\n",
        encoding="utf-8",
    )
    scores = load_criterion_scores(path)
    assert scores["d7"].as_tuple() == (0.9, 0.8, 0.1, 0.7)
    assert scores["d7"].source_tag == "qe_large"
    assert len(scores) == 2


def test_load_criterion_scores_rejects_out_of_range(tmp_path):
    path = tmp_path / "scores.txt"
    path.write_text("d7 0.9 1.3 0.1 0.7 tag\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match=":1"):
        load_criterion_scores(path)


def test_load_criterion_scores_rejects_duplicates_and_bad_fields(tmp_path):
    dup = tmp_path / "dup.txt"
    dup.write_text("d7 0.1 0.1 0.1 0.1 a\nd7 0.2 0.2 0.2 0.2 a\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match="duplicate"):
        load_criterion_scores(dup)
    short = tmp_path / "short.txt"
    short.write_text("d7 0.1 0.1 0.1\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match="6 fields"):
        load_criterion_scores(short)
    alpha = tmp_path / "alpha.txt"
    alpha.write_text("d7 0.1 x 0.1 0.1 tag\n", encoding="utf-8")
    with pytest.raises(DataFormatError, match="non-numeric"):
        load_criterion_scores(alpha)


def test_two_score_files_stay_independent(tmp_path):
    base = tmp_path / "base.txt"
    large = tmp_path / "large.txt"
    base.write_text("d1 0.9 0.9 0.9 0.9 qe_base\n", encoding="utf-8")
    large.write_text("d1 0.1 0.1 0.9 0.1 qe_large\n", encoding="utf-8")
    score_base = load_criterion_scores(base)
    score_large = load_criterion_scores(large)
    assert score_base["d1"].source_tag == "qe_base"
    assert score_large["d1"].source_tag == "qe_large"
    assert score_base["d1"].as_tuple() != score_large["d1"].as_tuple()
