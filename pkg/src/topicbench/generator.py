"""Sampling a synthetic corpus with a fully known planted topic structure.

Generation proceeds in four steps: split the vocabulary into stopwords and
topical words, fix the global word distribution and the per-topic word
counts, partition the topical words over topics (which pins down the
corpus-wide topic weights and each document's home topic), and finally draw
every token as a topic followed by a word.

Randomness layout: corpus-level structure (vocabulary partition, home
topics) comes from the master stream of ``spec.seed``; each document then
draws its tokens (and, when burstiness is on, its perturbed word
distributions) from an independent substream keyed by ``(seed, d)``.
Documents can therefore be generated in parallel without changing the
result, and the same spec always yields a byte-identical corpus.
"""

from __future__ import annotations

import numpy as np

from .corpus import (
    CorpusSpec,
    CorpusSpecError,
    GroundTruth,
    SyntheticCorpus,
    TokenLabeling,
    topic_marginal,
    word_topic_matrix,
)

__all__ = [
    "build_word_marginal",
    "allocate_topic_sizes",
    "assign_vocabulary",
    "ground_truth_from_spec",
    "bursty_word_topic_rows",
    "generate_corpus",
]


def master_rng(seed: int) -> np.random.Generator:
    """Stream for corpus-level structure decisions."""
    return np.random.default_rng(np.random.SeedSequence(seed))


def doc_rng(seed: int, doc: int) -> np.random.Generator:
    """Independent substream for document ``doc``, keyed by (seed, doc)."""
    return np.random.default_rng(np.random.SeedSequence(seed, spawn_key=(doc,)))


def build_word_marginal(dist: str, gamma: float | None, vocab_size: int) -> np.ndarray:
    """Global word distribution over word ids.

    ``uniform`` gives every word probability 1/V.  ``powerlaw`` assigns the
    r-th most frequent word probability proportional to ``r**-gamma`` with
    ``gamma > 1``; word id ``r - 1`` carries rank ``r``, so ids are ordered
    by decreasing frequency.
    """
    if vocab_size < 2:
        raise CorpusSpecError("vocab_size must be >= 2")
    if dist == "uniform":
        return np.full(vocab_size, 1.0 / vocab_size)
    if dist == "powerlaw":
        if gamma is None or gamma <= 1.0:
            raise CorpusSpecError("powerlaw exponent must be > 1")
        ranks = np.arange(1, vocab_size + 1, dtype=np.float64)
        weights = ranks ** (-gamma)
        return weights / weights.sum()
    raise CorpusSpecError(f"unknown word distribution {dist!r}")


def allocate_topic_sizes(
    num_topics: int, num_topical: int, dist: str = "uniform", gamma: float | None = None
) -> np.ndarray:
    """Integer word counts per topic, summing to ``num_topical``.

    Uniform allocation gives every topic ``num_topical // num_topics`` words
    and hands the remainder one word each to the lowest-indexed topics.
    Power-law allocation makes topic rank r proportional to ``r**-gamma``
    (largest topic first), rounded by largest remainder with every topic
    keeping at least one word.
    """
    if num_topical < num_topics:
        raise CorpusSpecError("fewer topical words than topics")
    if dist == "uniform":
        base, extra = divmod(num_topical, num_topics)
        sizes = np.full(num_topics, base, dtype=np.int64)
        sizes[:extra] += 1
        return sizes
    if dist == "powerlaw":
        if gamma is None or gamma <= 1.0:
            raise CorpusSpecError("powerlaw exponent must be > 1")
        ranks = np.arange(1, num_topics + 1, dtype=np.float64)
        target = ranks ** (-gamma)
        target *= num_topical / target.sum()
        sizes = np.maximum(np.floor(target).astype(np.int64), 1)
        # Largest-remainder rounding, then trim any overshoot caused by the
        # at-least-one floor, always keeping sizes >= 1.
        shortfall = num_topical - int(sizes.sum())
        if shortfall > 0:
            order = np.argsort(-(target - np.floor(target)), kind="stable")
            sizes[order[:shortfall]] += 1
        while shortfall < 0:
            candidates = np.flatnonzero(sizes > 1)
            take = min(candidates.size, -shortfall)
            sizes[candidates[-take:]] -= 1
            shortfall += take
        return sizes
    raise CorpusSpecError(f"unknown topic size distribution {dist!r}")


def assign_vocabulary(
    spec: CorpusSpec, rng: np.random.Generator
) -> tuple[np.ndarray, np.ndarray]:
    """Partition word ids into stopwords and per-topic word sets.

    Returns ``(word_topic_map, topic_sizes)`` where the map holds -1 for
    stopwords.  Stopword membership is drawn uniformly over word ids
    (independent of frequency rank) unless ``spec.stopwords_by_rank`` asks
    for the top-frequency words instead.
    """
    v = spec.vocab_size
    n_stop = spec.num_stopwords
    if spec.stopwords_by_rank:
        stop_ids = np.arange(n_stop, dtype=np.int64)
    else:
        stop_ids = rng.choice(v, size=n_stop, replace=False)
    word_topic_map = np.full(v, -1, dtype=np.int64)
    topical_ids = np.setdiff1d(np.arange(v, dtype=np.int64), stop_ids, assume_unique=True)
    sizes = allocate_topic_sizes(
        spec.num_topics, topical_ids.size, spec.topic_size_dist, spec.topic_size_gamma
    )
    shuffled = rng.permutation(topical_ids)
    bounds = np.concatenate(([0], np.cumsum(sizes)))
    for t in range(spec.num_topics):
        word_topic_map[shuffled[bounds[t] : bounds[t + 1]]] = t
    return word_topic_map, sizes


def ground_truth_from_spec(spec: CorpusSpec, rng: np.random.Generator) -> GroundTruth:
    """Draw the corpus-level planted structure (everything except tokens)."""
    p_w = build_word_marginal(spec.word_dist, spec.word_gamma, spec.vocab_size)
    word_topic_map, sizes = assign_vocabulary(spec, rng)
    p_t = topic_marginal(p_w, word_topic_map, spec.num_topics)
    doc_topic_map = _draw_categorical(p_t, rng.random(spec.num_documents))
    return GroundTruth(
        word_marginal=p_w,
        word_topic_map=word_topic_map,
        doc_topic_map=doc_topic_map,
        topic_marginal=p_t,
        topic_sizes=sizes,
    )


def _cumulative(p: np.ndarray) -> np.ndarray:
    """Cumulative table for inverse-CDF draws; final entry pinned to 1."""
    cum = np.cumsum(p, axis=-1)
    cum[..., -1] = 1.0
    return cum


def _draw_categorical(p: np.ndarray, u: np.ndarray) -> np.ndarray:
    """Inverse-CDF draw: index i is selected iff cum[i-1] <= u < cum[i]."""
    return np.searchsorted(_cumulative(p), u, side="right").astype(np.int64)


def bursty_word_topic_rows(
    word_topic: np.ndarray, concentration: float, rng: np.random.Generator
) -> np.ndarray:
    """One document's perturbed word distributions, drawn per topic row.

    Each row is a Dirichlet draw with mean equal to the global row and
    concentration ``concentration``; smaller values make repeated word use
    within a document more likely.  Realized as normalized unit-scale Gamma
    draws so zero-probability words stay exactly zero.
    """
    g = rng.standard_gamma(concentration * word_topic)
    totals = g.sum(axis=1, keepdims=True)
    # A tiny concentration can zero out an entire row; fall back to the mean.
    dead = totals[:, 0] <= 0.0
    if np.any(dead):
        g[dead] = word_topic[dead]
        totals = g.sum(axis=1, keepdims=True)
    return g / totals


def generate_corpus(spec: CorpusSpec) -> SyntheticCorpus:
    """Run the full generative process for ``spec``.

    For every token, a topic is drawn from the document's topic distribution
    and then a word from that topic's word distribution (the per-document
    perturbed one when burstiness is on).  The drawn topic is recorded as the
    token's planted label, for stopword tokens too.
    """
    rng = master_rng(spec.seed)
    truth = ground_truth_from_spec(spec, rng)
    p_wt = word_topic_matrix(truth, spec.structure_word)
    cum_wt_global = _cumulative(p_wt)
    p_t = truth.topic_marginal
    lengths = spec.doc_lengths()
    offsets = np.concatenate(([0], np.cumsum(lengths)))
    n_total = int(offsets[-1])
    words = np.empty(n_total, dtype=np.int64)
    labels = np.empty(n_total, dtype=np.int64)

    for d in range(spec.num_documents):
        sub = doc_rng(spec.seed, d)
        if spec.burstiness is not None:
            cum_wt = _cumulative(bursty_word_topic_rows(p_wt, spec.burstiness, sub))
        else:
            cum_wt = cum_wt_global
        p_td = (1.0 - spec.structure_doc) * p_t
        p_td[int(truth.doc_topic_map[d])] += spec.structure_doc
        m = int(lengths[d])
        z = _draw_categorical(p_td, sub.random(m))
        u_w = sub.random(m)
        w = np.empty(m, dtype=np.int64)
        for t in np.unique(z):
            sel = z == t
            w[sel] = np.searchsorted(cum_wt[t], u_w[sel], side="right")
        lo, hi = offsets[d], offsets[d + 1]
        words[lo:hi] = w
        labels[lo:hi] = z

    return SyntheticCorpus(
        spec=spec,
        truth=truth,
        token_words=words,
        doc_offsets=offsets,
        planted=TokenLabeling(labels, spec.num_topics),
    )
