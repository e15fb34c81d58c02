"""Adapter CLI: run a third-party topic model backend on a corpus file.

    topicbench-adapter run --backend sklearn-vb --preset ldavb_default \
        --corpus corpus.txt --out result.txt

Exit codes: 0 validated output written; 2 usage or input validation error;
3 backend library missing; 4 backend crashed.
"""

from __future__ import annotations

import argparse
import sys

from .backends import (
    BACKENDS,
    BackendFailure,
    BackendUnavailable,
    PRESETS,
    preset_priors,
    run_backend,
)
from .formats import CorpusFormatError, read_corpus, write_result

DEFAULT_ITERATIONS = 100


def cmd_run(args: argparse.Namespace) -> int:
    try:
        corpus = read_corpus(args.corpus)
    except CorpusFormatError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    num_topics = args.ka if args.ka is not None else corpus.num_topics
    if num_topics < 1:
        print("error: --ka must be >= 1", file=sys.stderr)
        return 2
    try:
        alpha, beta = preset_priors(args.preset, num_topics)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    if args.alpha is not None:
        alpha = args.alpha
    if args.beta is not None:
        beta = args.beta

    try:
        run = run_backend(args.backend, corpus, num_topics, alpha, beta,
                          args.iterations, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except BackendUnavailable as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 3
    except BackendFailure as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 4

    hyperparams = {
        "K_a": num_topics,
        "alpha": alpha,
        "beta": beta,
        "iterations": run.iterations,
        "preset": args.preset,
        "seed": args.seed,
        "seeded": str(run.seeded).lower(),
    }
    try:
        write_result(args.out, args.backend, run.topic_doc, run.word_topic,
                     run.label_rows, hyperparams)
    except (ValueError, OSError) as exc:
        print(f"error: backend output failed validation: {exc}", file=sys.stderr)
        return 4
    print(f"wrote {args.out} ({run.topic_doc.shape[0]} documents, "
          f"{run.word_topic.shape[0]} topics)")
    return 0


def cmd_list(_args: argparse.Namespace) -> int:
    for name in sorted(BACKENDS):
        try:
            if name == "sklearn-vb":
                import sklearn  # noqa: F401
            elif name == "gensim-vb":
                import gensim  # noqa: F401
            status = "available"
        except ImportError:
            status = "not installed"
        print(f"{name}: {status}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicbench-adapter",
        description="Run an external topic model backend on a topicbench corpus file",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("run", help="run a backend and write a result file")
    p.add_argument("--backend", required=True, help=f"one of: {', '.join(sorted(BACKENDS))}")
    p.add_argument("--preset", default="ldavb_default", choices=PRESETS,
                   help="hyperparameter preset (default ldavb_default)")
    p.add_argument("--corpus", required=True, help="topicbench corpus file")
    p.add_argument("--out", required=True, help="result file path")
    p.add_argument("--ka", type=int, help="assumed topic count (default: corpus header K)")
    p.add_argument("--alpha", type=float, help="override the preset document prior")
    p.add_argument("--beta", type=float, help="override the preset topic prior")
    p.add_argument("--iterations", type=int, default=DEFAULT_ITERATIONS)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("list", help="list backends and their availability")
    p.set_defaults(func=cmd_list)
    return parser


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    return args.func(args)


if __name__ == "__main__":
    sys.exit(main())
