"""Command-line interface.

Subcommands: index, search, rerank, fuse, eval, run-all. The first five
operate on explicit file arguments; run-all drives the whole pipeline from
a key=value config file (or a manifest.json) with per-key overrides.
Exit codes: 0 success, 1 validation or input-format error, 2 runtime
failure mid-pipeline.
"""

from __future__ import annotations

import argparse
import logging
import sys
from pathlib import Path
from typing import Sequence

from .bm25 import Bm25Params, build_index, load_index, save_index, search
from .data import (
    DataFormatError,
    RankedList,
    load_corpus,
    load_qrels,
    load_topics,
    read_run,
    write_run,
)
from .fusion import FusionConfig, build_run
from .metrics import ASPECT_SPECS, COMPAT_SPECS, CompatibilitySpec, evaluate_runs
from .pipeline import (
    PipelineError,
    config_from_manifest,
    load_allowlist,
    parse_pipeline_config,
    run_all,
)
from .quality import load_criterion_scores, rerank_by_quality
from .semantic import (
    FileEmbeddingProvider,
    HashedTfEmbeddingProvider,
    semantic_rank,
)

logger = logging.getLogger(__name__)


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    """argparse defaults to exit code 2 on usage errors; we reserve 2 for
    runtime failures, so usage problems raise and map to exit 1."""

    def error(self, message: str) -> None:  # type: ignore[override]
        raise _UsageError(message)


def _lists_by_topic(lists: Sequence[RankedList]) -> dict[str, RankedList]:
    by_topic: dict[str, RankedList] = {}
    for ranked in lists:
        if ranked.topic_id in by_topic:
            raise DataFormatError(f"duplicate topic {ranked.topic_id} in run")
        by_topic[ranked.topic_id] = ranked
    return by_topic


def _write_sorted(path: Path, by_topic: dict[str, RankedList]) -> None:
    write_run(path, [by_topic[t] for t in sorted(by_topic)])


def cmd_index(args: argparse.Namespace) -> int:
    store = load_corpus(args.corpus)
    index = build_index(store)
    with open(args.output, "w", encoding="utf-8") as fh:
        save_index(index, fh)
    print(
        f"{index.doc_count} documents, {index.term_count()} terms, "
        f"avgdl {index.avg_doc_length:.3f}"
    )
    return 0


def cmd_search(args: argparse.Namespace) -> int:
    with open(args.index, encoding="utf-8") as fh:
        index = load_index(fh)
    topics = load_topics(args.topics)
    params = Bm25Params(k1=args.k1, b=args.b)
    pools = load_allowlist(args.allowlist) if args.allowlist else {}
    by_topic: dict[str, RankedList] = {}
    for topic in topics:
        by_topic[topic.topic_id] = search(
            topic,
            index,
            params,
            k=args.k,
            allowed_doc_ids=pools.get(topic.topic_id),
            run_tag=args.tag,
        )
    _write_sorted(Path(args.output), by_topic)
    print(f"wrote {len(by_topic)} topics to {args.output}")
    return 0


def cmd_rerank(args: argparse.Namespace) -> int:
    base_lists = read_run(args.run)
    by_topic = _lists_by_topic(base_lists)
    out: dict[str, RankedList] = {}
    if args.method == "quality":
        if not args.scores:
            raise _UsageError("--method quality requires --scores")
        score_map = load_criterion_scores(args.scores)
        for topic_id, ranked in by_topic.items():
            out[topic_id] = rerank_by_quality(ranked, score_map, run_tag=args.tag)
    else:
        if not args.topics:
            raise _UsageError("--method semantic requires --topics")
        topics = {t.topic_id: t for t in load_topics(args.topics)}
        if args.embeddings:
            provider = FileEmbeddingProvider(args.embeddings)
        else:
            if not args.corpus:
                raise _UsageError(
                    "--method semantic requires --embeddings or --corpus"
                )
            store = load_corpus(args.corpus)
            provider = HashedTfEmbeddingProvider(
                store,
                topics.values(),
                dim=args.dim,
                sentence_limit=args.sentence_limit,
                embed_description=args.embed_description,
            )
        for topic_id, ranked in by_topic.items():
            if topic_id not in topics:
                raise DataFormatError(f"run topic {topic_id} not in topics file")
            tag = args.tag or "semantic"
            try:
                out[topic_id] = semantic_rank(
                    topics[topic_id], ranked.doc_ids(), provider, run_tag=tag
                )
            except KeyError as exc:
                raise DataFormatError(f"topic {topic_id}: {exc.args[0]}") from exc
    _write_sorted(Path(args.output), out)
    print(f"wrote {len(out)} topics to {args.output}")
    return 0


def cmd_fuse(args: argparse.Namespace) -> int:
    if len(args.run) < 2:
        raise _UsageError("fuse needs at least two --run files")
    component_lists: dict[str, dict[str, RankedList]] = {}
    names: list[str] = []
    for i, run_path in enumerate(args.run, 1):
        name = f"input{i}"
        names.append(name)
        component_lists[name] = _lists_by_topic(read_run(run_path))
    config = FusionConfig(args.tag, tuple(names), rrf_k=args.k)
    fused = build_run(config, component_lists, depth=args.depth)
    _write_sorted(Path(args.output), fused)
    print(f"wrote {len(fused)} topics to {args.output}")
    return 0


def cmd_eval(args: argparse.Namespace) -> int:
    judgments = load_qrels(args.qrels, max_grade=args.max_grade)
    runs: dict[str, dict[str, RankedList]] = {}
    for run_path in args.run:
        lists = read_run(run_path)
        tag = lists[0].run_tag if lists else Path(run_path).stem
        if tag in runs:
            raise DataFormatError(f"duplicate run_tag {tag!r} across run files")
        runs[tag] = _lists_by_topic(lists)
    baseline = args.baseline or next(iter(runs))
    compat_specs = tuple(
        CompatibilitySpec(s.polarity, args.compat_p, args.compat_depth)
        for s in COMPAT_SPECS
    )
    report = evaluate_runs(
        runs,
        judgments,
        baseline=baseline,
        aspect_specs=ASPECT_SPECS,
        compat_specs=compat_specs,
        threshold=args.threshold,
    )
    print(report.to_text(), end="")
    if args.output_rows:
        Path(args.output_rows).write_text(report.to_delimited(), encoding="utf-8")
    if args.output_text:
        Path(args.output_text).write_text(report.to_text(), encoding="utf-8")
    return 0


def cmd_run_all(args: argparse.Namespace) -> int:
    overrides: dict[str, str] = {}
    for key, flag_value in (
        ("corpus", args.corpus),
        ("topics", args.topics),
        ("qrels", args.qrels),
        ("output_dir", args.output_dir),
        ("baseline", args.baseline),
    ):
        if flag_value is not None:
            overrides[key] = flag_value
    for setting in args.set:
        if "=" not in setting:
            raise _UsageError(f"--set expects key=value, got {setting!r}")
        key, _, value = setting.partition("=")
        overrides[key.strip()] = value.strip()
    config_path = Path(args.config)
    if config_path.suffix == ".json":
        config = config_from_manifest(config_path, overrides)
    else:
        config = parse_pipeline_config(config_path, overrides)
    result = run_all(config)
    print(f"wrote {len(result.run_paths)} run files to {config.output_dir}")
    if result.report is not None:
        print(result.report.to_text(), end="")
    print(f"manifest: {result.manifest_path}")
    return 0


def _build_parser() -> _Parser:
    parser = _Parser(prog="healthrank", description=__doc__)
    parser.add_argument("--verbose", action="store_true", help="info-level logging")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("index", help="build and save an inverted index")
    p.add_argument("--corpus", required=True)
    p.add_argument("--output", required=True)
    p.set_defaults(func=cmd_index)

    p = sub.add_parser("search", help="rank topics against a saved index")
    p.add_argument("--index", required=True)
    p.add_argument("--topics", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--k", type=int, default=1000)
    p.add_argument("--k1", type=float, default=0.9)
    p.add_argument("--b", type=float, default=0.4)
    p.add_argument("--allowlist")
    p.add_argument("--tag", default="bm25")
    p.set_defaults(func=cmd_search)

    p = sub.add_parser("rerank", help="reorder an existing run file")
    p.add_argument("--method", choices=("semantic", "quality"), required=True)
    p.add_argument("--run", required=True)
    p.add_argument("--output", required=True)
    p.add_argument("--scores", help="criterion-score file (quality)")
    p.add_argument("--topics", help="topics file (semantic)")
    p.add_argument("--corpus", help="corpus for the fallback embedder (semantic)")
    p.add_argument("--embeddings", help="precomputed embedding file (semantic)")
    p.add_argument("--tag", default=None)
    p.add_argument("--dim", type=int, default=256)
    p.add_argument("--sentence-limit", type=int, default=20)
    p.add_argument("--embed-description", action="store_true")
    p.set_defaults(func=cmd_rerank)

    p = sub.add_parser("fuse", help="reciprocal-rank-fuse two or more runs")
    p.add_argument("--run", action="append", default=[], help="repeatable")
    p.add_argument("--output", required=True)
    p.add_argument("--tag", default="fused")
    p.add_argument("--k", type=float, default=60.0)
    p.add_argument("--depth", type=int, default=1000)
    p.set_defaults(func=cmd_fuse)

    p = sub.add_parser("eval", help="score runs against three-aspect qrels")
    p.add_argument("--qrels", required=True)
    p.add_argument("--run", action="append", default=[], required=True)
    p.add_argument("--baseline", default=None, help="default: first run's tag")
    p.add_argument("--threshold", type=int, default=1)
    p.add_argument("--max-grade", type=int, default=2)
    p.add_argument("--compat-p", type=float, default=0.95)
    p.add_argument("--compat-depth", type=int, default=1000)
    p.add_argument("--output-text")
    p.add_argument("--output-rows")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("run-all", help="full pipeline from a config file")
    p.add_argument("--config", required=True, help=".cfg key=value file or manifest.json")
    p.add_argument("--corpus")
    p.add_argument("--topics")
    p.add_argument("--qrels")
    p.add_argument("--output-dir", dest="output_dir")
    p.add_argument("--baseline")
    p.add_argument(
        "--set", action="append", default=[], metavar="KEY=VALUE",
        help="override any config key; repeatable",
    )
    p.set_defaults(func=cmd_run_all)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    logging.basicConfig(
        level=logging.INFO if args.verbose else logging.WARNING,
        format="%(levelname)s %(name)s: %(message)s",
        stream=sys.stderr,
    )
    try:
        return args.func(args)
    except _UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (DataFormatError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except (PipelineError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))
