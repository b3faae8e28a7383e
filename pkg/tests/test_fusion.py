import random

import pytest

from healthrank.data import RankedList
from healthrank.fusion import (
    DEFAULT_RUN_MATRIX,
    FusionConfig,
    build_run,
    parse_fusion_configs,
    rrf_fuse,
)


def permutation_list(topic_id, doc_ids, tag="perm"):
    scores = {d: float(len(doc_ids) - i) for i, d in enumerate(doc_ids)}
    return RankedList.from_scores(topic_id, scores, tag)


def test_single_list_keeps_order():
    base = permutation_list("101", ["d3", "d1", "d2"])
    fused = rrf_fuse([base], k=60.0)
    assert fused.doc_ids() == ["d3", "d1", "d2"]


def test_hand_computed_example():
    # doc A at ranks (1, 3), doc B at ranks (2, 2) with k=60
    list1 = permutation_list("101", ["A", "B", "C"])
    list2 = permutation_list("101", ["C", "B", "A"])
    fused = rrf_fuse([list1, list2], k=60.0)
    scores = {e.doc_id: e.score for e in fused.entries}
    assert scores["A"] == pytest.approx(1 / 61 + 1 / 63, abs=1e-12)
    assert scores["B"] == pytest.approx(2 / 62, abs=1e-12)
    assert fused.doc_ids().index("A") < fused.doc_ids().index("B")


def test_topic_mismatch_rejected():
    with pytest.raises(ValueError, match="different topics"):
        rrf_fuse([
            permutation_list("101", ["a"]),
            permutation_list("102", ["a"]),
        ])


def test_fused_support_is_union():
    list1 = permutation_list("101", ["a", "b", "c"])
    list2 = permutation_list("101", ["c", "d"])
    fused = rrf_fuse([list1, list2])
    assert sorted(fused.doc_ids()) == ["a", "b", "c", "d"]


def test_permutation_symmetry():
    rng = random.Random(5)
    docs = [f"d{i}" for i in range(12)]
    for _ in range(20):
        a = docs[:]
        b = docs[:]
        rng.shuffle(a)
        rng.shuffle(b)
        l1, l2 = permutation_list("101", a), permutation_list("101", b)
        assert rrf_fuse([l1, l2]).doc_ids() == rrf_fuse([l2, l1]).doc_ids()


def test_additional_support_never_hurts():
    rng = random.Random(29)
    docs = [f"d{i}" for i in range(10)]
    for _ in range(20):
        a, b = docs[:], docs[:]
        rng.shuffle(a)
        rng.shuffle(b)
        target = rng.choice(docs)
        without = [d for d in b if d != target]
        fused_with = rrf_fuse([
            permutation_list("101", a), permutation_list("101", b)
        ])
        fused_without = rrf_fuse([
            permutation_list("101", a), permutation_list("101", without)
        ])
        score_with = {e.doc_id: e.score for e in fused_with.entries}[target]
        score_without = {e.doc_id: e.score for e in fused_without.entries}[target]
        assert score_with >= score_without


def test_score_invariance():
    # fusion reads ranks only: replacing scores with any other strictly
    # decreasing values changes nothing
    rng = random.Random(71)
    docs = [f"d{i}" for i in range(15)]
    order1, order2 = docs[:], docs[:]
    rng.shuffle(order1)
    rng.shuffle(order2)

    def with_scores(order, scores):
        entries = dict(zip(order, scores))
        return RankedList.from_scores("101", entries, "x")

    base = rrf_fuse([
        permutation_list("101", order1), permutation_list("101", order2)
    ])
    for _ in range(10):
        scores1 = sorted((rng.uniform(0, 100) for _ in docs), reverse=True)
        scores2 = sorted((rng.uniform(0, 100) for _ in docs), reverse=True)
        perturbed = rrf_fuse([
            with_scores(order1, scores1), with_scores(order2, scores2)
        ])
        assert perturbed.doc_ids() == base.doc_ids()


def test_fusion_config_validation():
    with pytest.raises(ValueError):
        FusionConfig("", ("bm25",))
    with pytest.raises(ValueError):
        FusionConfig("x", ())
    with pytest.raises(ValueError):
        FusionConfig("x", ("a", "a"))
    with pytest.raises(ValueError):
        FusionConfig("x", ("a",), rrf_k=0)


def test_default_matrix_matches_component_layout():
    matrix = dict(DEFAULT_RUN_MATRIX)
    assert matrix["upv_bm25"] == ("bm25",)
    assert matrix["upv_fuse_2"] == ("bm25", "semantic")
    assert matrix["upv_fuse_3"] == ("bm25", "qe_base")
    assert matrix["upv_fuse_5"] == ("bm25", "qe_large")
    assert matrix["upv_fuse_7"] == ("bm25", "semantic", "qe_base")
    assert matrix["upv_fuse_9"] == ("bm25", "semantic", "qe_large")
    assert len(matrix) == 6


def test_build_run_single_component_passthrough():
    lists = {
        "101": permutation_list("101", ["a", "b"], tag="bm25"),
        "102": permutation_list("102", ["c"], tag="bm25"),
    }
    out = build_run(FusionConfig("upv_bm25", ("bm25",)), {"bm25": lists})
    assert out["101"].doc_ids() == ["a", "b"]
    assert out["101"].run_tag == "upv_bm25"
    assert [e.score for e in out["101"].entries] == [
        e.score for e in lists["101"].entries
    ]


def test_build_run_duplicate_input_preserves_order():
    base = permutation_list("101", ["b", "a", "c"])
    out = build_run(
        FusionConfig("dup", ("one", "two")),
        {"one": {"101": base}, "two": {"101": base}},
    )
    assert out["101"].doc_ids() == ["b", "a", "c"]
    # scores are doubled relative to a single-input fusion
    single = rrf_fuse([base])
    for fused_entry, single_entry in zip(out["101"].entries, single.entries):
        assert fused_entry.score == pytest.approx(2 * single_entry.score)


def test_build_run_depth_truncation():
    docs = [f"d{i:02d}" for i in range(30)]
    lists = {"101": permutation_list("101", docs, tag="bm25")}
    out = build_run(FusionConfig("t", ("bm25",)), {"bm25": lists}, depth=10)
    assert len(out["101"].entries) == 10


def test_build_run_missing_component():
    with pytest.raises(ValueError, match="unknown component"):
        build_run(FusionConfig("x", ("bm25", "ghost")), {"bm25": {}})


def test_build_run_topic_set_mismatch():
    lists_a = {"101": permutation_list("101", ["a"])}
    lists_b = {"102": permutation_list("102", ["a"])}
    with pytest.raises(ValueError, match="different topic set"):
        build_run(FusionConfig("x", ("a", "b")), {"a": lists_a, "b": lists_b})


def test_parse_fusion_configs(tmp_path):
    path = tmp_path / "runs.cfg"
    path.write_text(
        "# comment\n"
        "upv_bm25 bm25\n"
        "upv_fuse_2 bm25,semantic\n"
        "custom bm25,qe_base 30\n",
        encoding="utf-8",
    )
    configs = parse_fusion_configs(path)
    assert [c.run_tag for c in configs] == ["upv_bm25", "upv_fuse_2", "custom"]
    assert configs[1].components == ("bm25", "semantic")
    assert configs[1].rrf_k == 60.0
    assert configs[2].rrf_k == 30.0


def test_parse_fusion_configs_duplicate_tag(tmp_path):
    path = tmp_path / "runs.cfg"
    path.write_text("a bm25\na semantic\n", encoding="utf-8")
    with pytest.raises(ValueError, match="duplicate run_tag"):
        parse_fusion_configs(path)
