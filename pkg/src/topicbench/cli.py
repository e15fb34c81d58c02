"""Command-line interface.

Verbs: ``generate`` (spec flags to corpus files), ``infer`` (corpus file to
result file via collapsed Gibbs), ``score`` (corpus + labels + result to a
scores CSV row), ``sweep`` (plan file to scores/summary CSVs), ``repro``
(two-run overlap table), ``compare-dist`` (truth + result to distribution
grids), and ``plan`` (emit a ready-made sweep plan).

Every flag has a config-file equivalent: pass ``--config file.json`` with
keys named like the long flags (underscores for dashes); explicit flags win
over config values.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import replace
from pathlib import Path

import numpy as np

from .corpus import CorpusSpec, CorpusSpecError
from .generator import generate_corpus
from .gibbs import DEFAULT_SWEEPS, GibbsConfig, PRESETS, hyperparam_preset, run_gibbs
from .harness import (
    AlgorithmSpec,
    ExperimentPlan,
    PlanError,
    compare_distributions,
    plan_from_dict,
    plan_to_dict,
    run_reproducibility,
    run_sweep,
)
from .interchange import (
    InterchangeError,
    append_score_rows,
    export_corpus,
    export_result,
    import_corpus,
    import_labels,
    import_result,
    import_truth,
)
from .metrics import confusion, doc_classification_labels, doc_classification_nmi, nmi

log = logging.getLogger("topicbench")

FULL_SCALE = {"num_topics": 10, "num_documents": 10_000, "doc_length": 100, "vocab_size": 1000}
DESK_SCALE = {"num_topics": 10, "num_documents": 2000, "doc_length": 100, "vocab_size": 1000}


def _load_config(path: str | None) -> dict:
    if not path:
        return {}
    with open(path, "r", encoding="utf-8") as fh:
        data = json.load(fh)
    if not isinstance(data, dict):
        raise SystemExit(f"config {path} must hold a JSON object")
    return data


def _merged(args: argparse.Namespace, defaults: dict) -> argparse.Namespace:
    """Fill unset flags from --config then from hard defaults."""
    config = _load_config(getattr(args, "config", None))
    for key, value in vars(args).items():
        if value is None and key in config:
            setattr(args, key, config[key])
    for key, value in defaults.items():
        if getattr(args, key, None) is None:
            setattr(args, key, value)
    return args


def _spec_args(p: argparse.ArgumentParser) -> None:
    p.add_argument("--num-topics", type=int, help="planted topic count")
    p.add_argument("--num-docs", type=int, help="document count")
    p.add_argument("--doc-length", type=int, help="tokens per document")
    p.add_argument("--vocab-size", type=int, help="unique words")
    p.add_argument("--stopword-fraction", type=float, help="fraction of unique words made stopwords")
    p.add_argument("--c", type=float, help="structure weight for both words and documents")
    p.add_argument("--c-word", type=float, help="word-side structure weight (overrides --c)")
    p.add_argument("--c-doc", type=float, help="document-side structure weight (overrides --c)")
    p.add_argument("--word-dist", choices=("uniform", "powerlaw"), help="global word distribution")
    p.add_argument("--word-gamma", type=float, help="power-law exponent for word frequencies")
    p.add_argument("--topic-size-dist", choices=("uniform", "powerlaw"), help="topic size distribution")
    p.add_argument("--topic-size-gamma", type=float, help="power-law exponent for topic sizes")
    p.add_argument("--burstiness", type=float, help="Dirichlet concentration; omit to disable")
    p.add_argument("--stopwords-by-rank", action="store_const", const=True,
                   help="take the top-frequency words as stopwords instead of a random draw")
    p.add_argument("--seed", type=int, help="generator seed")
    p.add_argument("--full-scale", action="store_const", const=True,
                   help="use the full-scale corpus profile (10^4 documents)")


_SPEC_DEFAULTS = {
    "stopword_fraction": 0.0,
    "c": 1.0,
    "word_dist": "uniform",
    "topic_size_dist": "uniform",
    "stopwords_by_rank": False,
    "seed": 0,
    "full_scale": False,
}


def _spec_from_args(args: argparse.Namespace) -> CorpusSpec:
    scale = FULL_SCALE if args.full_scale else DESK_SCALE
    c_w = args.c_word if args.c_word is not None else args.c
    c_d = args.c_doc if args.c_doc is not None else args.c
    return CorpusSpec(
        num_topics=args.num_topics if args.num_topics is not None else scale["num_topics"],
        num_documents=args.num_docs if args.num_docs is not None else scale["num_documents"],
        doc_length=args.doc_length if args.doc_length is not None else scale["doc_length"],
        vocab_size=args.vocab_size if args.vocab_size is not None else scale["vocab_size"],
        stopword_fraction=args.stopword_fraction,
        structure_word=c_w,
        structure_doc=c_d,
        word_dist=args.word_dist,
        word_gamma=args.word_gamma,
        topic_size_dist=args.topic_size_dist,
        topic_size_gamma=args.topic_size_gamma,
        burstiness=args.burstiness,
        stopwords_by_rank=bool(args.stopwords_by_rank),
        seed=args.seed,
    )


def cmd_generate(args: argparse.Namespace) -> int:
    args = _merged(args, {**_SPEC_DEFAULTS, "with_truth": True})
    spec = _spec_from_args(args)
    corpus = generate_corpus(spec)
    paths = export_corpus(corpus, args.out, with_truth=args.with_truth)
    log.info("wrote %s (%d tokens)", paths.corpus, corpus.num_tokens)
    if args.with_truth:
        log.info("wrote %s and %s", paths.labels, paths.truth)
    return 0


def cmd_infer(args: argparse.Namespace) -> int:
    args = _merged(args, {"sweeps": DEFAULT_SWEEPS, "seed": 0, "preset": None})
    loaded = import_corpus(args.corpus)
    k_a = args.ka
    if k_a is None:
        raise SystemExit("--ka is required (assumed topic count)")
    if args.alpha is not None and args.beta is not None:
        alpha, beta = args.alpha, args.beta
    else:
        alpha, beta = hyperparam_preset(args.preset or "ldags_default", k_a)
    config = GibbsConfig(num_topics=k_a, alpha=alpha, beta=beta, sweeps=args.sweeps, seed=args.seed)
    t0 = time.perf_counter()
    result = run_gibbs(loaded.docs, config, vocab_size=loaded.header.vocab_size)
    log.info("gibbs finished in %.1f s", time.perf_counter() - t0)
    offsets = np.concatenate(([0], np.cumsum(loaded.doc_lengths())))
    export_result(result, args.out, doc_offsets=offsets)
    log.info("wrote %s", args.out)
    return 0


def cmd_score(args: argparse.Namespace) -> int:
    args = _merged(args, {"experiment_id": "adhoc", "exclude_stopwords": False})
    loaded = import_corpus(args.corpus)
    lengths = loaded.doc_lengths()
    planted = import_labels(args.labels, doc_lengths=lengths,
                            num_labels=loaded.header.num_topics)
    result = import_result(args.result, doc_lengths=lengths)
    truth = import_truth(args.truth) if args.truth else None

    mask = None
    if args.exclude_stopwords:
        if truth is None:
            raise SystemExit("--exclude-stopwords requires --truth")
        mask = ~truth.truth.is_stopword()[loaded.flat_words()]
    token = nmi(confusion(planted, result.token_labels, mask=mask))
    doc_nmi_value: object = "nan"
    if truth is not None:
        doc = doc_classification_nmi(
            doc_classification_labels(result), truth.truth.doc_topic_map
        )
        doc_nmi_value = doc.nmi
    uniform = len(set(int(m) for m in lengths)) == 1
    row = {
        "experiment_id": args.experiment_id,
        "algorithm_tag": result.algorithm_tag,
        "K_a": result.hyperparams.get("K_a", result.num_topics),
        "c": loaded.header.structure_word,
        "P_s": loaded.header.stopword_fraction,
        "m_d": int(lengths[0]) if uniform else float(np.mean(lengths)),
        "seed": loaded.header.seed,
        "I_bits": token.mutual_information,
        "H_bits": token.entropy_planted,
        "Hp_bits": token.entropy_inferred,
        "nmi": token.nmi,
        "voi_bits": token.voi,
        "K_inferred": result.token_labels.distinct_used,
        "doc_nmi": doc_nmi_value,
        "wall_ms": "nan",
    }
    append_score_rows(args.out, [row])
    print(f"nmi={token.nmi:.6f} I_bits={token.mutual_information:.6f} "
          f"K_inferred={result.token_labels.distinct_used} doc_nmi={doc_nmi_value}")
    return 0


def cmd_sweep(args: argparse.Namespace) -> int:
    args = _merged(args, {"workers": 1})
    with open(args.plan, "r", encoding="utf-8") as fh:
        plan = plan_from_dict(json.load(fh))
    if args.seed is not None:
        plan = replace(plan, base_seed=args.seed)
    scores, summary = run_sweep(plan, args.out, workers=args.workers)
    print(f"scores: {scores}")
    print(f"summary: {summary}")
    return 0


def cmd_repro(args: argparse.Namespace) -> int:
    args = _merged(args, {**_SPEC_DEFAULTS, "realizations": 5,
                          "sweeps": DEFAULT_SWEEPS, "preset": None})
    spec = _spec_from_args(args)
    k_a = args.ka if args.ka is not None else spec.num_topics
    algo = AlgorithmSpec(
        name="gibbs", kind="gibbs", num_topics=k_a,
        preset=args.preset, alpha=args.alpha, beta=args.beta, sweeps=args.sweeps,
    )
    rows = run_reproducibility(spec, algo, args.realizations)
    values = np.array([row["nmi"] for row in rows])
    if args.out:
        with open(args.out, "w", encoding="utf-8") as fh:
            fh.write("realization,corpus_seed,seed_a,seed_b,nmi,I_bits\n")
            for row in rows:
                fh.write(
                    f"{row['realization']},{row['corpus_seed']},{row['seed_a']},"
                    f"{row['seed_b']},{row['nmi']:.10g},{row['I_bits']:.10g}\n"
                )
        log.info("wrote %s", args.out)
    sd = float(np.std(values, ddof=1)) if values.size > 1 else float("nan")
    print(f"reproducibility nmi mean={values.mean():.6f} sd={sd:.6f} n={values.size}")
    return 0


def cmd_compare_dist(args: argparse.Namespace) -> int:
    args = _merged(args, {})
    truth = import_truth(args.truth)
    result = import_result(args.result)
    summary = compare_distributions(truth, result, args.out_prefix)
    for key, value in summary.items():
        print(f"{key}={value:.6g}" if isinstance(value, float) else f"{key}={value}")
    return 0


_RECIPES = ("structure", "ka", "hyperparams", "stopwords", "doclength")


def _recipe_plan(args: argparse.Namespace) -> ExperimentPlan:
    scale = FULL_SCALE if args.full_scale else DESK_SCALE
    realizations = args.realizations if args.realizations is not None else (10 if args.full_scale else 5)
    sweeps = args.sweeps if args.sweeps is not None else (1000 if args.full_scale else 300)
    base = CorpusSpec(
        num_topics=scale["num_topics"],
        num_documents=scale["num_documents"],
        doc_length=scale["doc_length"],
        vocab_size=scale["vocab_size"],
        structure_word=0.7,
        structure_doc=0.7,
        seed=args.seed,
    )
    gibbs = AlgorithmSpec(name="gibbs", num_topics=args.ka or 10,
                          preset="ldags_default", sweeps=sweeps)
    recipe = args.recipe
    if recipe == "structure":
        return ExperimentPlan(
            experiment_id="structure", base_spec=base, swept="c",
            values=tuple(round(0.1 * i, 1) for i in range(11)),
            realizations=realizations, algorithms=(gibbs,),
        )
    if recipe == "ka":
        fixed_c = args.c if args.c is not None else 0.8
        return ExperimentPlan(
            experiment_id="ka", base_spec=replace(base, structure_word=fixed_c, structure_doc=fixed_c),
            swept="K_a", values=(5, 10, 20, 50, 100),
            realizations=realizations, algorithms=(gibbs,),
        )
    if recipe == "hyperparams":
        return ExperimentPlan(
            experiment_id="hyperparams", base_spec=base, swept="preset",
            values=("ldags_default", "ldavb_default"),
            realizations=realizations, algorithms=(gibbs,),
        )
    if recipe == "stopwords":
        k = 40 if args.full_scale else 10
        ka = 100 if args.full_scale else (args.ka or 10)
        return ExperimentPlan(
            experiment_id="stopwords",
            base_spec=replace(base, num_topics=k),
            swept="P_s", values=(0.0, 0.3, 0.65),
            realizations=realizations,
            algorithms=(replace(gibbs, num_topics=ka),),
        )
    if recipe == "doclength":
        return ExperimentPlan(
            experiment_id="doclength", base_spec=base, swept="m_d",
            values=(10, 30, 100), realizations=realizations, algorithms=(gibbs,),
        )
    raise SystemExit(f"unknown recipe {recipe!r}; choose from {_RECIPES}")


def cmd_plan(args: argparse.Namespace) -> int:
    args = _merged(args, {"full_scale": False, "seed": 42})
    plan = _recipe_plan(args)
    with open(args.out, "w", encoding="utf-8") as fh:
        json.dump(plan_to_dict(plan), fh, indent=2)
        fh.write("\n")
    print(f"wrote {args.out}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="topicbench",
        description="Synthetic planted-topic corpora and token-level topic model scoring",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("generate", help="generate a synthetic corpus")
    _spec_args(p)
    p.add_argument("--out", required=True, help="corpus file path")
    p.add_argument("--no-truth", dest="with_truth", action="store_const", const=False,
                   help="blind mode: skip label file and truth sidecar")
    p.add_argument("--config", help="JSON file with flag defaults")
    p.set_defaults(func=cmd_generate)

    p = sub.add_parser("infer", help="run collapsed Gibbs LDA on a corpus file")
    p.add_argument("--corpus", required=True)
    p.add_argument("--out", required=True, help="result file path")
    p.add_argument("--ka", type=int, help="assumed topic count")
    p.add_argument("--preset", choices=PRESETS, help="hyperparameter preset")
    p.add_argument("--alpha", type=float, help="document prior (with --beta, overrides preset)")
    p.add_argument("--beta", type=float, help="topic prior")
    p.add_argument("--sweeps", type=int, help=f"full Gibbs sweeps (default {DEFAULT_SWEEPS})")
    p.add_argument("--seed", type=int, help="sampler seed")
    p.add_argument("--config", help="JSON file with flag defaults")
    p.set_defaults(func=cmd_infer)

    p = sub.add_parser("score", help="score a result file against planted labels")
    p.add_argument("--corpus", required=True)
    p.add_argument("--labels", required=True, help="planted label file")
    p.add_argument("--result", required=True)
    p.add_argument("--out", required=True, help="scores CSV (appended)")
    p.add_argument("--truth", help="truth sidecar (enables doc NMI and stopword masking)")
    p.add_argument("--experiment-id")
    p.add_argument("--exclude-stopwords", action="store_const", const=True,
                   help="restrict token scoring to topical-word tokens")
    p.add_argument("--config", help="JSON file with flag defaults")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("sweep", help="run an experiment plan")
    p.add_argument("--plan", required=True, help="plan JSON")
    p.add_argument("--out", required=True, help="output directory")
    p.add_argument("--workers", type=int, help="parallel cells (default 1)")
    p.add_argument("--seed", type=int, help="override the plan's base seed")
    p.add_argument("--config", help="JSON file with flag defaults")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("repro", help="two-run reproducibility study")
    _spec_args(p)
    p.add_argument("--ka", type=int, help="assumed topic count (default: planted)")
    p.add_argument("--preset", choices=PRESETS)
    p.add_argument("--alpha", type=float)
    p.add_argument("--beta", type=float)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--realizations", "-R", type=int)
    p.add_argument("--out", help="per-realization CSV")
    p.add_argument("--config", help="JSON file with flag defaults")
    p.set_defaults(func=cmd_repro)

    p = sub.add_parser("compare-dist", help="planted vs inferred distribution grids")
    p.add_argument("--truth", required=True, help="truth sidecar")
    p.add_argument("--result", required=True)
    p.add_argument("--out-prefix", required=True)
    p.add_argument("--config", help="JSON file with flag defaults")
    p.set_defaults(func=cmd_compare_dist)

    p = sub.add_parser("plan", help="emit a ready-made sweep plan")
    p.add_argument("--recipe", required=True, choices=_RECIPES)
    p.add_argument("--out", required=True, help="plan JSON path")
    p.add_argument("--full-scale", action="store_const", const=True)
    p.add_argument("--realizations", "-R", type=int)
    p.add_argument("--sweeps", type=int)
    p.add_argument("--ka", type=int)
    p.add_argument("--c", type=float)
    p.add_argument("--seed", type=int)
    p.add_argument("--config", help="JSON file with flag defaults")
    p.set_defaults(func=cmd_plan)

    return parser


def main(argv: list[str] | None = None) -> int:
    logging.basicConfig(level=logging.INFO, format="%(levelname)s %(message)s")
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (CorpusSpecError, InterchangeError, PlanError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
