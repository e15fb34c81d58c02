"""Experiment runner: parameter sweeps, reproducibility and distribution diffs.

A sweep plan names one swept parameter (structure ``c``, assumed topic count
``K_a``, stopword fraction ``P_s``, document length ``m_d``, or a
hyperparameter ``preset``), a value list, and a realization count.  Every
(point, realization) cell gets its own deterministically derived seed, so
reruns regenerate identical corpora and identical in-package inference
results; completed rows in the scores CSV are skipped on rerun.

Seed derivation (recorded here so other implementations can reproduce the
sequence): splitmix64 is the standard 64-bit finalizing mixer

    x += 0x9E3779B97F4A7C15
    x = (x ^ (x >> 30)) * 0xBF58476D1CE4E5B9
    x = (x ^ (x >> 27)) * 0x94D049BB133111EB
    x =  x ^ (x >> 31)

and ``derive_seed(base, i, j)`` chains it with level constants:

    s = splitmix64(base)
    s = splitmix64(s ^ (i + 0x9E3779B97F4A7C15))
    s = splitmix64(s ^ (j + 0xD1B54A32D192ED03))

For sweeps whose parameter only affects the inference side (``K_a``,
``preset``), the corpus point index is pinned to 0 so all points share the
same realization corpora and differ purely in the algorithm setting.
"""

from __future__ import annotations

import logging
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from pathlib import Path
from threading import Lock
from typing import Mapping

import numpy as np

from .corpus import (
    CorpusSpec,
    SyntheticCorpus,
    TopicModelResult,
    topic_doc_matrix,
    word_topic_matrix,
)
from .generator import generate_corpus
from .gibbs import GibbsConfig, PRESETS, hyperparam_preset, run_gibbs
from .interchange import (
    LoadedTruth,
    append_score_rows,
    export_corpus,
    import_result,
    read_scores,
    score_is_complete,
)
from .metrics import (
    confusion,
    doc_classification_labels,
    doc_classification_nmi,
    nmi,
)

__all__ = [
    "PlanError",
    "splitmix64",
    "derive_seed",
    "AlgorithmSpec",
    "ExperimentPlan",
    "plan_from_dict",
    "plan_to_dict",
    "score_result",
    "run_sweep",
    "summarize_scores",
    "compare_distributions",
    "run_reproducibility",
]

log = logging.getLogger("topicbench")

_MASK64 = (1 << 64) - 1
_GOLDEN = 0x9E3779B97F4A7C15
_LEVEL2 = 0xD1B54A32D192ED03

SWEEPABLE = ("c", "K_a", "P_s", "m_d", "preset")
CORPUS_PARAMS = ("c", "P_s", "m_d")


class PlanError(ValueError):
    """Raised for invalid experiment plans."""


def splitmix64(x: int) -> int:
    x = (x + _GOLDEN) & _MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & _MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & _MASK64
    return (x ^ (x >> 31)) & _MASK64


def derive_seed(base: int, i: int, j: int) -> int:
    s = splitmix64(base & _MASK64)
    s = splitmix64(s ^ ((i + _GOLDEN) & _MASK64))
    s = splitmix64(s ^ ((j + _LEVEL2) & _MASK64))
    return s


@dataclass(frozen=True)
class AlgorithmSpec:
    """One inference arm of a sweep.

    ``kind`` is ``gibbs`` for the in-package sampler or ``external`` for
    results produced out-of-band (an adapter drops result files into the
    sweep's ``results/`` directory and the sweep scores them).
    """

    name: str = "gibbs"
    kind: str = "gibbs"
    num_topics: int | None = None
    preset: str | None = None
    alpha: float | None = None
    beta: float | None = None
    sweeps: int = 1000

    def __post_init__(self) -> None:
        if self.kind not in ("gibbs", "external"):
            raise PlanError(f"unknown algorithm kind {self.kind!r}")
        if self.preset is not None and self.preset not in PRESETS:
            raise PlanError(f"unknown preset {self.preset!r}")
        if self.kind == "gibbs" and self.num_topics is None:
            raise PlanError("gibbs algorithm needs num_topics (K_a)")

    def resolve_priors(self, num_topics: int) -> tuple[float, float]:
        if self.alpha is not None and self.beta is not None:
            return self.alpha, self.beta
        return hyperparam_preset(self.preset or "ldags_default", num_topics)


@dataclass(frozen=True)
class ExperimentPlan:
    """A swept parameter, its values, and the arms to run at each point."""

    experiment_id: str
    base_spec: CorpusSpec
    swept: str
    values: tuple
    realizations: int
    algorithms: tuple[AlgorithmSpec, ...] = (AlgorithmSpec(num_topics=10),)
    base_seed: int | None = None
    export_corpora: bool = False

    def __post_init__(self) -> None:
        if self.swept not in SWEEPABLE:
            raise PlanError(f"swept parameter must be one of {SWEEPABLE}")
        if len(self.values) == 0:
            raise PlanError("empty sweep value list")
        if self.realizations < 1:
            raise PlanError("realizations must be >= 1")
        if not self.algorithms:
            raise PlanError("no algorithms declared")
        for v in self.values:
            self._check_value(v)
        object.__setattr__(self, "values", tuple(self.values))
        object.__setattr__(self, "algorithms", tuple(self.algorithms))

    def _check_value(self, v) -> None:
        if self.swept in ("c", "P_s"):
            if not 0.0 <= float(v) <= 1.0:
                raise PlanError(f"{self.swept} value {v} outside [0, 1]")
        elif self.swept in ("K_a", "m_d"):
            if int(v) < 1:
                raise PlanError(f"{self.swept} value {v} must be >= 1")
        elif self.swept == "preset" and v not in PRESETS:
            raise PlanError(f"unknown preset value {v!r}")

    @property
    def seed(self) -> int:
        return self.base_seed if self.base_seed is not None else self.base_spec.seed

    def point_spec(self, point_index: int) -> CorpusSpec:
        """Corpus spec at one sweep point (seed handled separately)."""
        v = self.values[point_index]
        if self.swept == "c":
            return replace(self.base_spec, structure_word=float(v), structure_doc=float(v))
        if self.swept == "P_s":
            return replace(self.base_spec, stopword_fraction=float(v))
        if self.swept == "m_d":
            return replace(self.base_spec, doc_length=int(v))
        return self.base_spec

    def point_algorithm(self, algo: AlgorithmSpec, point_index: int) -> AlgorithmSpec:
        v = self.values[point_index]
        if self.swept == "K_a":
            return replace(algo, num_topics=int(v))
        if self.swept == "preset":
            return replace(algo, preset=str(v), alpha=None, beta=None)
        return algo

    def corpus_point_index(self, point_index: int) -> int:
        """Corpora are shared across points for inference-side sweeps."""
        return point_index if self.swept in CORPUS_PARAMS else 0


def _spec_from_dict(d: Mapping) -> CorpusSpec:
    kwargs = dict(d)
    if isinstance(kwargs.get("doc_length"), list):
        kwargs["doc_length"] = tuple(kwargs["doc_length"])
    return CorpusSpec(**kwargs)


def plan_from_dict(d: Mapping) -> ExperimentPlan:
    try:
        base = _spec_from_dict(d["base_spec"])
        algorithms = tuple(
            AlgorithmSpec(**a) for a in d.get("algorithms", [{"num_topics": base.num_topics}])
        )
        return ExperimentPlan(
            experiment_id=str(d["experiment_id"]),
            base_spec=base,
            swept=str(d["swept"]),
            values=tuple(d["values"]),
            realizations=int(d.get("realizations", 1)),
            algorithms=algorithms,
            base_seed=d.get("base_seed"),
            export_corpora=bool(d.get("export_corpora", False)),
        )
    except (KeyError, TypeError) as exc:
        raise PlanError(f"malformed plan: {exc}") from exc


def plan_to_dict(plan: ExperimentPlan) -> dict:
    spec = plan.base_spec
    return {
        "experiment_id": plan.experiment_id,
        "base_spec": {
            "num_topics": spec.num_topics,
            "num_documents": spec.num_documents,
            "doc_length": list(spec.doc_length)
            if isinstance(spec.doc_length, tuple)
            else spec.doc_length,
            "vocab_size": spec.vocab_size,
            "stopword_fraction": spec.stopword_fraction,
            "structure_word": spec.structure_word,
            "structure_doc": spec.structure_doc,
            "word_dist": spec.word_dist,
            "word_gamma": spec.word_gamma,
            "topic_size_dist": spec.topic_size_dist,
            "topic_size_gamma": spec.topic_size_gamma,
            "burstiness": spec.burstiness,
            "stopwords_by_rank": spec.stopwords_by_rank,
            "seed": spec.seed,
        },
        "swept": plan.swept,
        "values": list(plan.values),
        "realizations": plan.realizations,
        "algorithms": [
            {
                "name": a.name,
                "kind": a.kind,
                "num_topics": a.num_topics,
                "preset": a.preset,
                "alpha": a.alpha,
                "beta": a.beta,
                "sweeps": a.sweeps,
            }
            for a in plan.algorithms
        ],
        "base_seed": plan.base_seed,
        "export_corpora": plan.export_corpora,
    }


def _uniform_doc_length(spec: CorpusSpec):
    if isinstance(spec.doc_length, tuple):
        lengths = set(spec.doc_length)
        return spec.doc_length[0] if len(lengths) == 1 else float(np.mean(spec.doc_length))
    return spec.doc_length


def score_result(
    corpus: SyntheticCorpus,
    result: TopicModelResult,
    exclude_stopword_tokens: bool = False,
) -> dict[str, object]:
    """Token NMI, doc-classification NMI and topic-count fields for one run."""
    mask = None
    if exclude_stopword_tokens:
        mask = ~corpus.stopword_token_mask()
    token = nmi(confusion(corpus.planted, result.token_labels, mask=mask))
    doc = doc_classification_nmi(
        doc_classification_labels(result), corpus.truth.doc_topic_map
    )
    return {
        "I_bits": token.mutual_information,
        "H_bits": token.entropy_planted,
        "Hp_bits": token.entropy_inferred,
        "nmi": token.nmi,
        "voi_bits": token.voi,
        "K_inferred": result.token_labels.distinct_used,
        "doc_nmi": doc.nmi,
    }


def _row_key(row: Mapping[str, object]) -> tuple:
    return tuple(str(row.get(col, "")) for col in ("experiment_id", "algorithm_tag", "K_a", "c", "P_s", "m_d", "seed"))


def _cell_rows(
    plan: ExperimentPlan,
    point_index: int,
    realization: int,
    out_dir: Path,
    done: set[tuple],
) -> list[dict[str, object]]:
    spec = plan.point_spec(point_index)
    corpus_seed = derive_seed(plan.seed, plan.corpus_point_index(point_index), realization)
    spec = replace(spec, seed=corpus_seed)

    pending: list[AlgorithmSpec] = []
    base_row = {
        "experiment_id": plan.experiment_id,
        "c": spec.structure_word,
        "P_s": spec.stopword_fraction,
        "m_d": _uniform_doc_length(spec),
        "seed": corpus_seed,
    }
    for algo in plan.algorithms:
        algo = plan.point_algorithm(algo, point_index)
        probe = dict(base_row, algorithm_tag=algo.name, K_a=algo.num_topics if algo.num_topics is not None else "")
        if _row_key(probe) in done:
            continue
        pending.append(algo)
    if not pending and not plan.export_corpora:
        return []

    corpus = generate_corpus(spec)
    if plan.export_corpora or any(a.kind == "external" for a in plan.algorithms):
        cdir = out_dir / "corpora"
        cdir.mkdir(parents=True, exist_ok=True)
        cpath = cdir / f"p{point_index:02d}_r{realization:02d}.txt"
        if not cpath.exists():
            export_corpus(corpus, cpath)

    rows = []
    for algo in pending:
        row = dict(base_row, algorithm_tag=algo.name)
        if algo.kind == "gibbs":
            k_a = int(algo.num_topics)
            alpha, beta = algo.resolve_priors(k_a)
            config = GibbsConfig(
                num_topics=k_a,
                alpha=alpha,
                beta=beta,
                sweeps=algo.sweeps,
                seed=derive_seed(corpus_seed, 0, 1),
            )
            t0 = time.perf_counter()
            result = run_gibbs(corpus, config)
            wall_ms = (time.perf_counter() - t0) * 1e3
            row.update(score_result(corpus, result))
            row.update(K_a=k_a, wall_ms=round(wall_ms, 3))
        else:
            rpath = out_dir / "results" / f"{algo.name}_p{point_index:02d}_r{realization:02d}.txt"
            row.update(K_a=algo.num_topics if algo.num_topics is not None else "")
            try:
                result = import_result(rpath, doc_lengths=corpus.spec.doc_lengths())
            except Exception as exc:
                log.warning("external result %s unavailable: %s", rpath, exc)
                row.update(
                    I_bits="nan", H_bits="nan", Hp_bits="nan", nmi="nan",
                    voi_bits="nan", K_inferred="nan", doc_nmi="nan", wall_ms="nan",
                )
                rows.append(row)
                continue
            row.update(score_result(corpus, result))
            row.update(wall_ms="nan")
        rows.append(row)
    return rows


def run_sweep(
    plan: ExperimentPlan, out_dir: str | Path, workers: int = 1
) -> tuple[Path, Path]:
    """Run every (point, realization, algorithm) cell and aggregate.

    Returns ``(scores_csv, summary_csv)``.  Cells already present and
    complete in the scores CSV are skipped; failed external rows are retried.
    """
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)
    scores_path = out_dir / "scores.csv"
    done: set[tuple] = set()
    if scores_path.exists():
        for row in read_scores(scores_path):
            if score_is_complete(row):
                done.add(_row_key(row))

    cells = [
        (p, r)
        for p in range(len(plan.values))
        for r in range(plan.realizations)
    ]
    appender = Lock()

    def work(cell: tuple[int, int]) -> int:
        p, r = cell
        rows = _cell_rows(plan, p, r, out_dir, done)
        if rows:
            with appender:
                append_score_rows(scores_path, rows)
        log.info(
            "%s point %d/%d realization %d/%d: %d row(s)",
            plan.experiment_id, p + 1, len(plan.values), r + 1, plan.realizations, len(rows),
        )
        return len(rows)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            list(pool.map(work, cells))
    else:
        for cell in cells:
            work(cell)

    summary_path = out_dir / "summary.csv"
    summarize_scores(scores_path, summary_path)
    return scores_path, summary_path


def summarize_scores(scores_path: str | Path, summary_path: str | Path) -> None:
    """Per-(algorithm, point) mean and sample standard deviation."""
    rows = [r for r in read_scores(scores_path) if score_is_complete(r)]
    groups: dict[tuple, list[dict]] = {}
    for row in rows:
        key = tuple(str(row.get(c, "")) for c in ("experiment_id", "algorithm_tag", "K_a", "c", "P_s", "m_d"))
        groups.setdefault(key, []).append(row)

    def stats(values: list[float]) -> tuple[float, float]:
        arr = np.asarray(values, dtype=np.float64)
        sd = float(np.std(arr, ddof=1)) if arr.size > 1 else float("nan")
        return float(arr.mean()), sd

    lines = [
        "experiment_id,algorithm_tag,K_a,c,P_s,m_d,n,nmi_mean,nmi_sd,"
        "doc_nmi_mean,doc_nmi_sd,K_inferred_mean"
    ]
    for key in sorted(groups):
        members = groups[key]
        nmi_mean, nmi_sd = stats([float(r["nmi"]) for r in members])
        doc_mean, doc_sd = stats([float(r["doc_nmi"]) for r in members])
        k_inf = float(np.mean([float(r["K_inferred"]) for r in members]))
        lines.append(
            ",".join(
                [*key, str(len(members))]
                + [format(x, ".10g") for x in (nmi_mean, nmi_sd, doc_mean, doc_sd, k_inf)]
            )
        )
    Path(summary_path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def _greedy_match(mass: np.ndarray) -> list[tuple[int, int]]:
    """Pair planted rows with inferred columns by descending shared mass."""
    m = mass.copy()
    pairs = []
    for _ in range(min(m.shape)):
        t, tp = np.unravel_index(np.argmax(m), m.shape)
        if m[t, tp] < 0:
            break
        pairs.append((int(t), int(tp)))
        m[t, :] = -1.0
        m[:, tp] = -1.0
    return pairs


def _row_entropy_bits(mat: np.ndarray) -> float:
    p = np.where(mat > 0, mat, 1.0)
    return float(np.mean(-(np.where(mat > 0, mat, 0.0) * np.log2(p)).sum(axis=1)))


def compare_distributions(
    loaded: LoadedTruth, result: TopicModelResult, out_prefix: str | Path
) -> dict[str, object]:
    """Planted-vs-inferred distribution grids and total-variation distances.

    Inferred topics are reordered by greedy confusion-mass matching so
    corresponding topics line up on the diagonal; unmatched inferred topics
    (when the backend assumed more topics than planted) are appended in
    descending mass order.  Emits four matrix grids plus a distance table;
    returns the summary statistics.
    """
    truth = loaded.truth
    if result.num_documents != truth.num_documents:
        raise ValueError(
            f"document count mismatch: truth {truth.num_documents},"
            f" result {result.num_documents}"
        )
    if result.vocab_size != truth.vocab_size:
        raise ValueError(
            f"vocabulary mismatch: truth {truth.vocab_size}, result {result.vocab_size}"
        )
    planted_td = topic_doc_matrix(truth, loaded.structure_doc)
    planted_wt = word_topic_matrix(truth, loaded.structure_word)
    k, kp = truth.num_topics, result.num_topics

    mass = np.zeros((k, kp))
    np.add.at(mass, truth.doc_topic_map, result.topic_doc)
    pairs = _greedy_match(mass)
    matched_cols = [tp for _, tp in pairs]
    layout = {t: pos for pos, (t, _) in enumerate(pairs)}
    rest = [tp for tp in range(kp) if tp not in set(matched_cols)]
    rest.sort(key=lambda tp: -float(result.topic_doc[:, tp].sum()))
    col_order = matched_cols + rest

    inferred_td = result.topic_doc[:, col_order]
    inferred_wt = result.word_topic[col_order, :]

    # Documents: TV between the planted row and the inferred row with matched
    # topics aligned; unmatched inferred mass counts fully toward the distance.
    aligned = np.zeros((truth.num_documents, max(k, len(col_order))))
    for t, tp in pairs:
        aligned[:, t] = result.topic_doc[:, tp]
    extra = np.asarray([result.topic_doc[:, tp] for tp in rest]).T if rest else None
    if extra is not None:
        aligned[:, k : k + len(rest)] = extra
    planted_pad = np.zeros_like(aligned)
    planted_pad[:, :k] = planted_td
    tv_docs = 0.5 * np.abs(planted_pad - aligned).sum(axis=1)

    pair_rows = []
    for t, tp in pairs:
        tv = 0.5 * float(np.abs(planted_wt[t] - result.word_topic[tp]).sum())
        pair_rows.append((t, tp, tv))

    out_prefix = Path(out_prefix)
    out_prefix.parent.mkdir(parents=True, exist_ok=True)

    def grid(name: str, mat: np.ndarray) -> None:
        np.savetxt(
            f"{out_prefix}.{name}.csv", mat, delimiter=",", fmt="%.10g"
        )

    grid("topic_doc.planted", planted_td)
    grid("topic_doc.inferred", inferred_td)
    grid("word_topic.planted", planted_wt)
    grid("word_topic.inferred", inferred_wt)
    with open(f"{out_prefix}.distances.csv", "w", encoding="utf-8") as fh:
        fh.write("planted_topic,inferred_topic,tv_word_topic\n")
        for t, tp, tv in pair_rows:
            fh.write(f"{t},{tp},{format(tv, '.10g')}\n")

    summary = {
        "matched_pairs": len(pairs),
        "mean_tv_topic_doc": float(tv_docs.mean()),
        "mean_tv_word_topic": float(np.mean([tv for _, _, tv in pair_rows])) if pair_rows else float("nan"),
        "entropy_planted_topic_doc": _row_entropy_bits(planted_td),
        "entropy_inferred_topic_doc": _row_entropy_bits(result.topic_doc),
        "entropy_planted_word_topic": _row_entropy_bits(planted_wt),
        "entropy_inferred_word_topic": _row_entropy_bits(result.word_topic),
    }
    return summary


def run_reproducibility(
    spec: CorpusSpec,
    algorithm: AlgorithmSpec,
    realizations: int,
) -> list[dict[str, object]]:
    """Per realization: one corpus, two independent runs, their overlap NMI."""
    if realizations < 1:
        raise PlanError("realizations must be >= 1")
    if algorithm.kind != "gibbs":
        raise PlanError("reproducibility runs require an in-package algorithm")
    rows = []
    for r in range(realizations):
        corpus_seed = derive_seed(spec.seed, r, 0)
        corpus = generate_corpus(replace(spec, seed=corpus_seed))
        k_a = int(algorithm.num_topics)
        alpha, beta = algorithm.resolve_priors(k_a)
        labelings = []
        seeds = (derive_seed(corpus_seed, 0, 1), derive_seed(corpus_seed, 0, 2))
        for seed in seeds:
            config = GibbsConfig(
                num_topics=k_a, alpha=alpha, beta=beta,
                sweeps=algorithm.sweeps, seed=seed,
            )
            labelings.append(run_gibbs(corpus, config).token_labels)
        score = nmi(confusion(labelings[0], labelings[1]))
        rows.append(
            {
                "realization": r,
                "corpus_seed": corpus_seed,
                "seed_a": seeds[0],
                "seed_b": seeds[1],
                "nmi": score.nmi,
                "I_bits": score.mutual_information,
            }
        )
    return rows
