#!/usr/bin/env python3
"""Generate the committed synthetic fixture under fixtures/synthetic/.

Deterministic: a fixed RNG seed drives every choice, so rerunning the
script reproduces the fixture byte for byte. Before writing anything the
script runs the full pipeline in a scratch directory and checks the
structural guarantees the test suite depends on:

  - every topic retrieves at least 20 documents under BM25
  - every topic has helpful-ideal and harmful-ideal documents, and at
    least one relevant document under every binary derivation
  - the bm25+semantic fused run and the plain BM25 run disagree on the
    top-10 documents for at least one topic
  - the two criterion-score files produce different rankings
  - the evaluation table has a value in every cell with no excluded topics

Usage: python3 scripts/make_synthetic_fixture.py [--out fixtures/synthetic]
"""

from __future__ import annotations

import argparse
import json
import random
import tempfile
from pathlib import Path

from healthrank import RankedList, ideal_list, load_qrels, derive_binary_qrels
from healthrank.data import BINARY_COMBOS
from healthrank.pipeline import parse_pipeline_config, run_all

SEED = 7

TOPICS = [
    ("101", "green tea weight loss",
     "Does drinking green tea meaningfully help with weight loss?"),
    ("102", "zinc lozenges shorten colds",
     "Can zinc lozenges shorten the duration of the common cold?"),
    ("103", "honey soothes night cough",
     "Does a spoonful of honey soothe a child's cough at night?"),
    ("104", "magnesium prevents migraine headaches",
     "Do magnesium supplements prevent migraine headaches?"),
    ("105", "echinacea reduces flu risk",
     "Does taking echinacea reduce the risk of catching the flu?"),
]

FILLER = (
    "study results people daily water sleep doctor advice evidence research "
    "diet exercise body immune system effect benefits trial participants "
    "group placebo weeks reported symptoms common winter season vitamins "
    "minerals food meals morning evening habits routine healthy lifestyle "
    "experts suggest findings published journal review analysis data "
    "measured levels blood pressure heart rate energy mood focus claims "
    "sources article readers online website popular remedy natural "
    "supplement dose amount caution warning balance overall conclusion"
).split()

DOCS_PER_TOPIC = 40
STRONG_PER_TOPIC = 12
JUDGED_FROM_TOP = 25
EXTRA_UNRETRIEVED = 3


def _sentences(rng: random.Random, words: list[str]) -> str:
    """Chunk shuffled words into capitalized period-terminated sentences."""
    out = []
    i = 0
    while i < len(words):
        n = rng.randint(5, 11)
        chunk = words[i:i + n]
        i += n
        sentence = " ".join(chunk)
        out.append(sentence[0].upper() + sentence[1:] + ".")
    return " ".join(out)


def _doc_text(rng: random.Random, terms: list[str], role: str,
              other_terms: list[str]) -> str:
    words: list[str] = []
    if role == "champion":
        # every query term exactly once and nothing else: the hashed
        # embedding is exactly parallel to the query's
        return " ".join(terms) + "."
    if role == "strong":
        for term in terms:
            words += [term] * rng.randint(4, 6)
        words += rng.choices(FILLER, k=rng.randint(18, 30))
    elif role == "medium":
        for term in rng.sample(terms, k=rng.randint(2, min(3, len(terms)))):
            words += [term] * rng.randint(1, 3)
        words += rng.choices(FILLER, k=rng.randint(30, 55))
    else:  # weak
        words += rng.sample(terms, k=1) * rng.randint(1, 2)
        words += rng.choices(FILLER, k=rng.randint(45, 80))
        if rng.random() < 0.5:
            words += rng.sample(other_terms, k=rng.randint(1, 2))
    rng.shuffle(words)
    return _sentences(rng, words)


def build_fixture(out_dir: Path) -> None:
    rng = random.Random(SEED)
    out_dir.mkdir(parents=True, exist_ok=True)

    champions: dict[str, str] = {}
    corpus_lines: list[str] = []
    doc_counter = 0
    all_terms = {tid: q.split() for tid, q, _ in TOPICS}
    for tid, query, _desc in TOPICS:
        terms = all_terms[tid]
        other_terms = [t for other, ts in all_terms.items() if other != tid for t in ts]
        roles = (["strong"] * STRONG_PER_TOPIC + ["champion"]
                 + ["medium"] * 21 + ["weak"] * 6)
        assert len(roles) == DOCS_PER_TOPIC
        for role in roles:
            doc_counter += 1
            doc_id = f"d{doc_counter:03d}"
            if role == "champion":
                champions[tid] = doc_id
            text = _doc_text(rng, terms, role, other_terms)
            record = {
                "doc_id": doc_id,
                "url": f"https://example.org/articles/{doc_id}",
                "text": text,
            }
            corpus_lines.append(json.dumps(record, ensure_ascii=False))
    (out_dir / "corpus.jsonl").write_text("\n".join(corpus_lines) + "\n", "utf-8")

    topic_lines = [
        json.dumps({"topic_id": tid, "query": q, "description": d}, ensure_ascii=False)
        for tid, q, d in TOPICS
    ]
    (out_dir / "topics.jsonl").write_text("\n".join(topic_lines) + "\n", "utf-8")

    for tag in ("qe_base", "qe_large"):
        lines = []
        for i in range(1, doc_counter + 1):
            probs = [round(rng.random(), 3) for _ in range(4)]
            lines.append(f"d{i:03d} " + " ".join(f"{p:.3f}" for p in probs) + f" {tag}")
        (out_dir / f"scores_{tag}.txt").write_text("\n".join(lines) + "\n", "utf-8")

    config_text = (
        "# Synthetic end-to-end fixture configuration.\n"
        "corpus = corpus.jsonl\n"
        "topics = topics.jsonl\n"
        "qrels = qrels.txt\n"
        "output_dir = out\n"
        "scores.qe_base = scores_qe_base.txt\n"
        "scores.qe_large = scores_qe_large.txt\n"
        "k1 = 0.9\n"
        "b = 0.4\n"
        "depth = 1000\n"
        "rrf_k = 60\n"
        "baseline = upv_bm25\n"
    )
    (out_dir / "pipeline.cfg").write_text(config_text, "utf-8")

    # qrels need the actual BM25 rankings, so run retrieval without qrels
    with tempfile.TemporaryDirectory() as tmp:
        probe_cfg = out_dir / "_probe.cfg"
        probe_cfg.write_text(
            config_text.replace("qrels = qrels.txt\n", ""), "utf-8"
        )
        config = parse_pipeline_config(probe_cfg, {"output_dir": tmp})
        result = run_all(config)
        from healthrank import read_run
        bm25_lists = {rl.topic_id: rl for rl in read_run(result.run_paths["upv_bm25"])}
        probe_cfg.unlink()

    qrels_lines: list[str] = []
    for tid, _q, _d in TOPICS:
        ranked = bm25_lists[tid]
        block_start = (int(tid) - 101) * DOCS_PER_TOPIC + 1
        block = [f"d{i:03d}" for i in range(block_start, block_start + DOCS_PER_TOPIC)]
        judged = list(ranked.doc_ids()[:JUDGED_FROM_TOP])
        retrieved = set(ranked.doc_ids())
        unretrieved = [d for d in block if d not in retrieved and d not in judged]
        judged += rng.sample(unretrieved, k=min(EXTRA_UNRETRIEVED, len(unretrieved)))
        order = list(range(len(judged)))
        rng.shuffle(order)
        helpful_slots = set(order[:4])
        harmful_slots = set(order[4:8])
        for slot, doc_id in enumerate(judged):
            if slot in helpful_slots:
                useful, correct, credible = 2, 1, 1
            elif slot in harmful_slots:
                useful = rng.randint(1, 2)
                correct = 0
                credible = rng.choice([0, 1, -1])
            else:
                useful = rng.choices([0, 1, 2], weights=[35, 40, 25])[0]
                correct = rng.choices([1, 0, -1], weights=[45, 30, 25])[0]
                credible = rng.choices([1, 0, -1], weights=[50, 30, 20])[0]
            qrels_lines.append(f"{tid} 0 {doc_id} {useful} {correct} {credible}")
    (out_dir / "qrels.txt").write_text("\n".join(qrels_lines) + "\n", "utf-8")

    verify(out_dir, champions)


def verify(out_dir: Path, champions: dict[str, str]) -> None:
    from healthrank import read_run

    with tempfile.TemporaryDirectory() as tmp:
        config = parse_pipeline_config(out_dir / "pipeline.cfg", {"output_dir": tmp})
        result = run_all(config)
        assert len(result.run_paths) == 6, sorted(result.run_paths)
        runs = {
            tag: {rl.topic_id: rl for rl in read_run(path)}
            for tag, path in result.run_paths.items()
        }
        report = result.report
        assert report is not None

    judgments = load_qrels(out_dir / "qrels.txt")
    topic_ids = judgments.topic_ids()
    assert len(topic_ids) == 5

    for tid in topic_ids:
        bm25 = runs["upv_bm25"][tid]
        assert len(bm25.entries) >= 20, (tid, len(bm25.entries))
        per_topic = judgments.for_topic(tid)
        assert ideal_list(per_topic, "helpful"), f"{tid}: empty helpful ideal"
        assert ideal_list(per_topic, "harmful"), f"{tid}: empty harmful ideal"
        for combo in BINARY_COMBOS:
            relevant = derive_binary_qrels(judgments, combo)[tid]
            assert any(relevant.values()), f"{tid}: nothing relevant under {combo}"

    diverging = [
        tid for tid in topic_ids
        if set(runs["upv_bm25"][tid].doc_ids()[:10])
        != set(runs["upv_fuse_2"][tid].doc_ids()[:10])
    ]
    assert diverging, "bm25 and bm25+semantic top-10 sets never diverge"
    for tid in diverging:
        champion = champions[tid]
        in_fused = champion in runs["upv_fuse_2"][tid].doc_ids()[:10]
        in_bm25 = champion in runs["upv_bm25"][tid].doc_ids()[:10]
        print(f"  topic {tid}: top-10 diverges "
              f"(champion {champion}: bm25 {in_bm25}, fused {in_fused})")

    qe3 = {t: runs["upv_fuse_3"][t].doc_ids() for t in topic_ids}
    qe5 = {t: runs["upv_fuse_5"][t].doc_ids() for t in topic_ids}
    assert qe3 != qe5, "qe_base and qe_large orderings are identical"

    tags = sorted(runs)
    for i, a in enumerate(tags):
        for b in tags[i + 1:]:
            orders_a = {t: runs[a][t].doc_ids() for t in topic_ids}
            orders_b = {t: runs[b][t].doc_ids() for t in topic_ids}
            assert orders_a != orders_b, f"{a} and {b} are identical"

    for (tag, column), cell in report.cells.items():
        assert cell.value is not None, (tag, column)
        assert cell.topics_excluded == 0, (tag, column, cell.topics_excluded)
    print(f"  verified: 6 distinct runs, divergence in {len(diverging)} topics, "
          f"all {len(report.cells)} eval cells populated")


def main() -> None:
    parser = argparse.ArgumentParser(description=__doc__)
    parser.add_argument(
        "--out", default="fixtures/synthetic", type=Path,
        help="output directory (default: fixtures/synthetic)",
    )
    args = parser.parse_args()
    build_fixture(args.out)
    print(f"fixture written to {args.out}")


if __name__ == "__main__":
    main()
