"""End-to-end orchestration: index, retrieve, rerank, fuse, evaluate.

A pipeline is described by a flat key=value config file (``#`` starts a
comment; blank lines ignored; relative paths resolve against the config
file's directory):

    corpus = corpus.jsonl
    topics = topics.jsonl
    qrels = qrels.txt                  # optional; enables evaluation
    output_dir = out
    scores.qe_base = scores_base.txt   # criterion scores, one key per source
    scores.qe_large = scores_large.txt
    embeddings = vectors.txt           # optional; fallback hashing otherwise
    allowlist = pools.txt              # optional per-topic candidate pools
    k1 = 0.9
    b = 0.4
    depth = 1000
    rrf_k = 60
    semantic_dim = 256
    sentence_limit = 20
    embed_description = false
    usefulness_threshold = 1
    usefulness_max = 2
    compat_p = 0.95
    compat_depth = 1000
    baseline = upv_bm25
    run.upv_bm25 = bm25                # omit run.* keys for the default matrix
    run.upv_fuse_2 = bm25,semantic

Component names usable in run.* lines: ``bm25``, ``semantic``, and every
``scores.<name>`` key. run_all writes ``<run_tag>.run`` per run config, an
evaluation table (eval.txt, eval.tsv) when qrels are configured, and a
manifest.json recording every parameter so the exact invocation can be
replayed (``run-all --config manifest.json``).
"""

from __future__ import annotations

import hashlib
import json
import logging
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Mapping, Sequence

from .bm25 import Bm25Params, build_index, search
from .data import (
    DataFormatError,
    JudgmentSet,
    RankedList,
    load_corpus,
    load_qrels,
    load_topics,
    write_run,
)
from .fusion import DEFAULT_RUN_MATRIX, FusionConfig, build_run
from .metrics import (
    ASPECT_SPECS,
    COMPAT_SPECS,
    CompatibilitySpec,
    EvalReport,
    evaluate_runs,
)
from .quality import load_criterion_scores, rerank_by_quality
from .semantic import (
    DEFAULT_SENTENCE_LIMIT,
    FALLBACK_DIM,
    HASH_MULTIPLIER,
    HASH_SEED,
    FileEmbeddingProvider,
    HashedTfEmbeddingProvider,
    semantic_rank,
)

logger = logging.getLogger(__name__)

MANIFEST_FORMAT = "healthrank.manifest.v1"

_SCALAR_KEYS = frozenset({
    "corpus", "topics", "qrels", "output_dir", "embeddings", "allowlist",
    "k1", "b", "depth", "rrf_k", "semantic_dim", "sentence_limit",
    "embed_description", "usefulness_threshold", "usefulness_max",
    "compat_p", "compat_depth", "baseline",
})
_PATH_KEYS = frozenset({
    "corpus", "topics", "qrels", "output_dir", "embeddings", "allowlist",
})
_BUILTIN_COMPONENTS = ("bm25", "semantic")


class PipelineError(RuntimeError):
    """A pipeline stage failed after validation succeeded."""


@dataclass(frozen=True)
class PipelineConfig:
    """Everything run_all needs; validated before any stage runs."""

    corpus: Path
    topics: Path
    output_dir: Path
    qrels: Path | None = None
    embeddings: Path | None = None
    allowlist: Path | None = None
    score_files: dict[str, Path] = field(default_factory=dict)
    bm25: Bm25Params = field(default_factory=Bm25Params)
    depth: int = 1000
    rrf_k: float = 60.0
    semantic_dim: int = FALLBACK_DIM
    sentence_limit: int = DEFAULT_SENTENCE_LIMIT
    embed_description: bool = False
    usefulness_threshold: int = 1
    usefulness_max: int = 2
    compat_persistence: float = 0.95
    compat_depth: int = 1000
    baseline: str = "upv_bm25"
    runs: tuple[FusionConfig, ...] = ()

    def __post_init__(self) -> None:
        if self.depth < 1:
            raise ValueError(f"depth must be >= 1, got {self.depth}")
        defaulted = not self.runs
        if defaulted:
            object.__setattr__(
                self,
                "runs",
                tuple(
                    FusionConfig(tag, components, self.rrf_k)
                    for tag, components in DEFAULT_RUN_MATRIX
                ),
            )
        tags = [r.run_tag for r in self.runs]
        if len(set(tags)) != len(tags):
            raise ValueError(f"duplicate run_tag among {tags}")
        known = set(_BUILTIN_COMPONENTS) | set(self.score_files)
        for run in self.runs:
            for component in run.components:
                if component in known:
                    continue
                if defaulted:
                    raise ValueError(
                        "the default run set needs score sources named "
                        "'qe_base' and 'qe_large'; add scores.qe_base and "
                        "scores.qe_large, or define run.<tag> entries explicitly"
                    )
                raise ValueError(
                    f"run {run.run_tag}: unknown component {component!r}; "
                    f"known: {', '.join(sorted(known))}"
                )

    def validate_paths(self) -> None:
        """Referenced input paths must exist before any stage runs."""
        paths: list[tuple[str, Path | None]] = [
            ("corpus", self.corpus),
            ("topics", self.topics),
            ("qrels", self.qrels),
            ("embeddings", self.embeddings),
            ("allowlist", self.allowlist),
        ]
        paths.extend((f"scores.{name}", p) for name, p in self.score_files.items())
        for label, path in paths:
            if path is not None and not path.is_file():
                raise DataFormatError(f"{label} file not found: {path}")

    def needed_components(self) -> set[str]:
        return {c for run in self.runs for c in run.components}


def _parse_bool(value: str, key: str) -> bool:
    lowered = value.strip().lower()
    if lowered in ("true", "yes", "1"):
        return True
    if lowered in ("false", "no", "0"):
        return False
    raise DataFormatError(f"{key}: expected true/false, got {value!r}")


def _build_config(
    items: Mapping[str, str],
    base_dirs: Mapping[str, Path],
) -> PipelineConfig:
    """Assemble a PipelineConfig from raw key=value pairs.

    ``base_dirs`` gives the directory each key's relative paths resolve
    against (config-file keys resolve against the config's directory,
    command-line overrides against the working directory).
    """
    def resolve(key: str) -> Path:
        return (base_dirs[key] / items[key]).resolve()

    scalars: dict[str, object] = {}
    score_files: dict[str, Path] = {}
    run_specs: list[tuple[str, tuple[str, ...]]] = []
    numeric = {
        "k1": float, "b": float, "depth": int, "rrf_k": float,
        "semantic_dim": int, "sentence_limit": int,
        "usefulness_threshold": int, "usefulness_max": int,
        "compat_p": float, "compat_depth": int,
    }
    for key, value in items.items():
        if key.startswith("scores."):
            name = key[len("scores."):]
            if not name:
                raise DataFormatError("scores. key needs a source name")
            score_files[name] = resolve(key)
        elif key.startswith("run."):
            tag = key[len("run."):]
            if not tag:
                raise DataFormatError("run. key needs a run_tag")
            components = tuple(c.strip() for c in value.split(",") if c.strip())
            if not components:
                raise DataFormatError(f"run.{tag}: no components listed")
            run_specs.append((tag, components))
        elif key in _PATH_KEYS:
            scalars[key] = resolve(key)
        elif key in numeric:
            try:
                scalars[key] = numeric[key](value)
            except ValueError:
                raise DataFormatError(f"{key}: not a number: {value!r}") from None
        elif key == "embed_description":
            scalars[key] = _parse_bool(value, key)
        elif key == "baseline":
            scalars[key] = value.strip()
        else:
            raise DataFormatError(f"unknown config key {key!r}")
    for required in ("corpus", "topics", "output_dir"):
        if required not in scalars:
            raise DataFormatError(f"config is missing required key {required!r}")
    rrf_k = float(scalars.get("rrf_k", 60.0))
    runs = tuple(FusionConfig(tag, comps, rrf_k) for tag, comps in run_specs)
    try:
        return PipelineConfig(
            corpus=scalars["corpus"],
            topics=scalars["topics"],
            output_dir=scalars["output_dir"],
            qrels=scalars.get("qrels"),
            embeddings=scalars.get("embeddings"),
            allowlist=scalars.get("allowlist"),
            score_files=score_files,
            bm25=Bm25Params(
                k1=float(scalars.get("k1", 0.9)),
                b=float(scalars.get("b", 0.4)),
            ),
            depth=int(scalars.get("depth", 1000)),
            rrf_k=rrf_k,
            semantic_dim=int(scalars.get("semantic_dim", FALLBACK_DIM)),
            sentence_limit=int(scalars.get("sentence_limit", DEFAULT_SENTENCE_LIMIT)),
            embed_description=bool(scalars.get("embed_description", False)),
            usefulness_threshold=int(scalars.get("usefulness_threshold", 1)),
            usefulness_max=int(scalars.get("usefulness_max", 2)),
            compat_persistence=float(scalars.get("compat_p", 0.95)),
            compat_depth=int(scalars.get("compat_depth", 1000)),
            baseline=str(scalars.get("baseline", "upv_bm25")),
            runs=runs,
        )
    except ValueError as exc:
        raise DataFormatError(f"invalid config: {exc}") from None


def parse_pipeline_config(
    path: str | Path,
    overrides: Mapping[str, str] | None = None,
) -> PipelineConfig:
    """Read a key=value config file; ``overrides`` win over file values.

    Override paths resolve against the current directory, file paths
    against the config file's directory.
    """
    path = Path(path)
    if path.suffix == ".json":
        return config_from_manifest(path, overrides)
    config_dir = path.resolve().parent
    items: dict[str, str] = {}
    base_dirs: dict[str, Path] = {}
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise DataFormatError(f"cannot read config {path}: {exc}") from exc
    for lineno, raw in enumerate(lines, 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise DataFormatError(f"{path}:{lineno}: expected key = value")
        key, _, value = line.partition("=")
        key, value = key.strip(), value.strip()
        if key in items:
            raise DataFormatError(f"{path}:{lineno}: duplicate key {key!r}")
        items[key] = value
        base_dirs[key] = config_dir
    for key, value in (overrides or {}).items():
        items[key] = value
        base_dirs[key] = Path.cwd()
    return _build_config(items, base_dirs)


def load_allowlist(path: str | Path) -> dict[str, frozenset[str]]:
    """Per-topic candidate pools: one "topic_id doc_id" pair per line."""
    pools: dict[str, set[str]] = {}
    path = Path(path)
    with open(path, encoding="utf-8") as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            fields = line.split()
            if len(fields) != 2:
                raise DataFormatError(
                    f"{path}:{lineno}: expected 'topic_id doc_id', got {len(fields)} fields"
                )
            pools.setdefault(fields[0], set()).add(fields[1])
    return {topic: frozenset(docs) for topic, docs in pools.items()}


@dataclass(frozen=True)
class RunAllResult:
    """Artifacts produced by run_all, keyed for tests and the CLI."""

    run_paths: dict[str, Path]
    eval_text_path: Path | None
    eval_rows_path: Path | None
    manifest_path: Path
    report: EvalReport | None


def _sha256(path: Path) -> str:
    digest = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            digest.update(chunk)
    return digest.hexdigest()


def _stage(name: str, topic_id: str | None = None):
    """Decorator-free stage guard: re-raise with stage and topic context."""
    class _Guard:
        def __enter__(self) -> None:
            return None

        def __exit__(self, exc_type, exc, tb) -> bool:
            if exc is not None and not isinstance(exc, PipelineError):
                where = f"stage {name}"
                if topic_id is not None:
                    where += f", topic {topic_id}"
                raise PipelineError(f"{where}: {exc}") from exc
            return False

    return _Guard()


def run_all(config: PipelineConfig) -> RunAllResult:
    """Index, retrieve, rerank, fuse, evaluate; write everything under
    output_dir. Purely deterministic: identical inputs give byte-identical
    artifacts."""
    config.validate_paths()
    if config.qrels is not None:
        if config.baseline not in {r.run_tag for r in config.runs}:
            raise DataFormatError(
                f"baseline {config.baseline!r} is not one of the configured runs"
            )
    store = load_corpus(config.corpus)
    topics = load_topics(config.topics)
    if not topics:
        raise DataFormatError(f"no topics in {config.topics}")
    judgments: JudgmentSet | None = None
    if config.qrels is not None:
        judgments = load_qrels(config.qrels, max_grade=config.usefulness_max)
    pools = load_allowlist(config.allowlist) if config.allowlist else {}
    score_maps = {
        name: load_criterion_scores(path)
        for name, path in sorted(config.score_files.items())
    }
    needed = config.needed_components()

    with _stage("index"):
        index = build_index(store)

    all_doc_ids = list(store.doc_ids())
    candidates: dict[str, list[str]] = {}
    for topic in topics:
        pool = pools.get(topic.topic_id)
        if pool is None:
            candidates[topic.topic_id] = all_doc_ids
        else:
            unknown = sorted(d for d in pool if d not in store)
            if unknown:
                logger.warning(
                    "allowlist for topic %s names %d unknown documents (ignored)",
                    topic.topic_id, len(unknown),
                )
            candidates[topic.topic_id] = sorted(d for d in pool if d in store)

    component_lists: dict[str, dict[str, RankedList]] = {}

    bm25_lists: dict[str, RankedList] = {}
    for topic in topics:
        with _stage("bm25", topic.topic_id):
            pool = pools.get(topic.topic_id)
            bm25_lists[topic.topic_id] = search(
                topic, index, config.bm25, k=config.depth, allowed_doc_ids=pool
            )
    component_lists["bm25"] = bm25_lists

    if "semantic" in needed:
        with _stage("semantic"):
            if config.embeddings is not None:
                provider = FileEmbeddingProvider(config.embeddings)
            else:
                provider = HashedTfEmbeddingProvider(
                    store,
                    topics,
                    dim=config.semantic_dim,
                    sentence_limit=config.sentence_limit,
                    embed_description=config.embed_description,
                )
        semantic_lists: dict[str, RankedList] = {}
        for topic in topics:
            with _stage("semantic", topic.topic_id):
                semantic_lists[topic.topic_id] = semantic_rank(
                    topic, candidates[topic.topic_id], provider
                )
        component_lists["semantic"] = semantic_lists

    for name, score_map in score_maps.items():
        if name not in needed:
            continue
        reranked: dict[str, RankedList] = {}
        for topic in topics:
            with _stage(f"quality:{name}", topic.topic_id):
                reranked[topic.topic_id] = rerank_by_quality(
                    bm25_lists[topic.topic_id], score_map, run_tag=name
                )
        component_lists[name] = reranked

    config.output_dir.mkdir(parents=True, exist_ok=True)
    runs: dict[str, dict[str, RankedList]] = {}
    run_paths: dict[str, Path] = {}
    for fusion_config in config.runs:
        with _stage(f"fuse:{fusion_config.run_tag}"):
            runs[fusion_config.run_tag] = build_run(
                fusion_config, component_lists, depth=config.depth
            )
        path = config.output_dir / f"{fusion_config.run_tag}.run"
        lists = [runs[fusion_config.run_tag][t] for t in sorted(runs[fusion_config.run_tag])]
        with _stage(f"write:{fusion_config.run_tag}"):
            write_run(path, lists)
        run_paths[fusion_config.run_tag] = path

    report: EvalReport | None = None
    eval_text_path: Path | None = None
    eval_rows_path: Path | None = None
    if judgments is not None:
        with _stage("evaluate"):
            compat_specs = tuple(
                CompatibilitySpec(s.polarity, config.compat_persistence, config.compat_depth)
                for s in COMPAT_SPECS
            )
            report = evaluate_runs(
                runs,
                judgments,
                baseline=config.baseline,
                aspect_specs=ASPECT_SPECS,
                compat_specs=compat_specs,
                threshold=config.usefulness_threshold,
            )
        eval_text_path = config.output_dir / "eval.txt"
        eval_rows_path = config.output_dir / "eval.tsv"
        eval_text_path.write_text(report.to_text(), encoding="utf-8")
        eval_rows_path.write_text(report.to_delimited(), encoding="utf-8")

    manifest_path = config.output_dir / "manifest.json"
    _write_manifest(config, run_paths, eval_text_path, eval_rows_path, manifest_path)
    return RunAllResult(run_paths, eval_text_path, eval_rows_path, manifest_path, report)


def _write_manifest(
    config: PipelineConfig,
    run_paths: Mapping[str, Path],
    eval_text_path: Path | None,
    eval_rows_path: Path | None,
    manifest_path: Path,
) -> None:
    manifest = {
        "format": MANIFEST_FORMAT,
        "inputs": {
            "corpus": str(config.corpus),
            "topics": str(config.topics),
            "qrels": str(config.qrels) if config.qrels else None,
            "embeddings": str(config.embeddings) if config.embeddings else None,
            "allowlist": str(config.allowlist) if config.allowlist else None,
            "scores": {n: str(p) for n, p in sorted(config.score_files.items())},
        },
        "parameters": {
            "k1": config.bm25.k1,
            "b": config.bm25.b,
            "depth": config.depth,
            "rrf_k": config.rrf_k,
            "semantic_dim": config.semantic_dim,
            "sentence_limit": config.sentence_limit,
            "embed_description": config.embed_description,
            "usefulness_threshold": config.usefulness_threshold,
            "usefulness_max": config.usefulness_max,
            "compat_p": config.compat_persistence,
            "compat_depth": config.compat_depth,
            "baseline": config.baseline,
            "hash_seed": HASH_SEED,
            "hash_multiplier": HASH_MULTIPLIER,
        },
        "runs": {r.run_tag: list(r.components) for r in config.runs},
        "output_dir": str(config.output_dir),
        "outputs": {
            "runs": {
                tag: {"file": path.name, "sha256": _sha256(path)}
                for tag, path in run_paths.items()
            },
            "eval_text": eval_text_path.name if eval_text_path else None,
            "eval_rows": eval_rows_path.name if eval_rows_path else None,
        },
    }
    manifest_path.write_text(
        json.dumps(manifest, indent=2, sort_keys=True) + "\n", encoding="utf-8"
    )


def config_from_manifest(
    path: str | Path,
    overrides: Mapping[str, str] | None = None,
) -> PipelineConfig:
    """Rebuild the PipelineConfig a manifest records, for exact replay."""
    path = Path(path)
    try:
        manifest = json.loads(path.read_text(encoding="utf-8"))
    except (OSError, json.JSONDecodeError) as exc:
        raise DataFormatError(f"cannot read manifest {path}: {exc}") from exc
    if manifest.get("format") != MANIFEST_FORMAT:
        raise DataFormatError(
            f"{path}: not a {MANIFEST_FORMAT} manifest"
        )
    inputs = manifest["inputs"]
    params = manifest["parameters"]
    items: dict[str, str] = {
        "corpus": inputs["corpus"],
        "topics": inputs["topics"],
        "output_dir": manifest["output_dir"],
        "k1": str(params["k1"]),
        "b": str(params["b"]),
        "depth": str(params["depth"]),
        "rrf_k": str(params["rrf_k"]),
        "semantic_dim": str(params["semantic_dim"]),
        "sentence_limit": str(params["sentence_limit"]),
        "embed_description": "true" if params["embed_description"] else "false",
        "usefulness_threshold": str(params["usefulness_threshold"]),
        "usefulness_max": str(params["usefulness_max"]),
        "compat_p": str(params["compat_p"]),
        "compat_depth": str(params["compat_depth"]),
        "baseline": params["baseline"],
    }
    for optional in ("qrels", "embeddings", "allowlist"):
        if inputs.get(optional):
            items[optional] = inputs[optional]
    for name, score_path in inputs.get("scores", {}).items():
        items[f"scores.{name}"] = score_path
    for tag, components in manifest.get("runs", {}).items():
        items[f"run.{tag}"] = ",".join(components)
    base_dir = path.resolve().parent
    base_dirs = {key: base_dir for key in items}
    for key, value in (overrides or {}).items():
        items[key] = value
        base_dirs[key] = Path.cwd()
    return _build_config(items, base_dirs)


def with_output_dir(config: PipelineConfig, output_dir: str | Path) -> PipelineConfig:
    """Copy of the config writing to a different directory."""
    return replace(config, output_dir=Path(output_dir).resolve())
