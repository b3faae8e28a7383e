"""Command-line entry: score-criteria, embed, finetune-toy.

Exit codes: 0 success, 1 validation or usage error, 2 runtime failure
(unreadable or unwritable paths and the like).
"""

from __future__ import annotations

import argparse
import sys

from .dataset import CRITERIA
from .encoder import DEFAULT_DIM, DEFAULT_ENCODER
from .errors import ExportError
from .export import ExporterJob, export_criterion_scores, export_embeddings, finetune_toy
from .model import DEFAULT_EPOCHS, DEFAULT_LR, DEFAULT_SEED
from .text import DEFAULT_SENTENCE_LIMIT


class _UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    # argparse exits with 2 on bad usage; remap onto the validation code
    def error(self, message: str):
        raise _UsageError(message)


def _build_parser() -> _Parser:
    parser = _Parser(prog="qualityexport", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    score = sub.add_parser("score-criteria", help="write per-document criterion probabilities")
    score.add_argument("--corpus", required=True, help="JSONL corpus with doc_id and text")
    score.add_argument("--model", required=True,
                       help="bundled identifier (toy-base, toy-large) or artifact path")
    score.add_argument("--output", required=True, help="criterion-score file to write")
    score.add_argument("--batch-size", type=int, default=32)
    score.add_argument("--device", default="cpu")

    embed = sub.add_parser("embed", help="write embedding vectors for documents and topics")
    embed.add_argument("--corpus", required=True, help="JSONL corpus with doc_id and text")
    embed.add_argument("--topics", help="optional JSONL topics with topic_id and query")
    embed.add_argument("--output", required=True, help="embedding file to write")
    embed.add_argument("--model", default=DEFAULT_ENCODER, help="encoder identifier")
    embed.add_argument("--dim", type=int, default=DEFAULT_DIM)
    embed.add_argument("--max-sentences", type=int, default=DEFAULT_SENTENCE_LIMIT,
                       help="document truncation depth before encoding")
    embed.add_argument("--embed-description", action="store_true",
                       help="append the topic description to its query")
    embed.add_argument("--batch-size", type=int, default=32)
    embed.add_argument("--device", default="cpu")

    tune = sub.add_parser("finetune-toy", help="train the toy classifier on a labeled dataset")
    tune.add_argument("--dataset", required=True,
                      help="JSONL rows with text and 4 binary labels")
    tune.add_argument("--output", required=True, help="model artifact to write")
    tune.add_argument("--model-id", default="toy-finetuned")
    tune.add_argument("--epochs", type=int, default=DEFAULT_EPOCHS)
    tune.add_argument("--lr", type=float, default=DEFAULT_LR)
    tune.add_argument("--seed", type=int, default=DEFAULT_SEED)
    return parser


def _cmd_score(args: argparse.Namespace) -> int:
    job = ExporterJob(
        mode="criteria",
        corpus_path=args.corpus,
        output_path=args.output,
        model=args.model,
        batch_size=args.batch_size,
        device=args.device,
    )
    result = export_criterion_scores(job)
    print(f"wrote {result.count} criterion rows (tag {result.source_tag}): {result.output_path}")
    return 0


def _cmd_embed(args: argparse.Namespace) -> int:
    job = ExporterJob(
        mode="embeddings",
        corpus_path=args.corpus,
        output_path=args.output,
        model=args.model,
        topics_path=args.topics,
        batch_size=args.batch_size,
        max_sentences=args.max_sentences,
        dim=args.dim,
        embed_description=args.embed_description,
        device=args.device,
    )
    result = export_embeddings(job)
    print(f"wrote {result.count} vectors (dim {result.dim}): {result.output_path}")
    return 0


def _cmd_finetune(args: argparse.Namespace) -> int:
    accuracy = finetune_toy(
        args.dataset,
        args.output,
        model_id=args.model_id,
        epochs=args.epochs,
        lr=args.lr,
        seed=args.seed,
    )
    for criterion in CRITERIA:
        print(f"criterion {criterion}: train accuracy {accuracy[criterion]:.3f}")
    print(f"wrote model artifact: {args.output}")
    return 0


_COMMANDS = {
    "score-criteria": _cmd_score,
    "embed": _cmd_embed,
    "finetune-toy": _cmd_finetune,
}


def main(argv: list[str]) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
        return _COMMANDS[args.command](args)
    except _UsageError as exc:
        print(f"usage error: {exc}", file=sys.stderr)
        return 1
    except ExportError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except OSError as exc:
        print(f"io error: {exc}", file=sys.stderr)
        return 2


def entrypoint() -> None:
    sys.exit(main(sys.argv[1:]))


if __name__ == "__main__":
    entrypoint()
