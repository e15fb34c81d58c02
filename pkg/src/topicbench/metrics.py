"""Scoring inferred topic labels against a reference labeling.

The central object is the token-level confusion matrix: the fraction of
tokens carrying reference label t and candidate label t'.  From it we report
mutual information, the marginal entropies, the normalized mutual
information 2I/(H + H'), and the variation of information H + H' - 2I.  All
information quantities use base-2 logarithms (bits).

Counts are accumulated as exact integers and divided by the token count
once, so the joint distribution carries no accumulated floating error.  The
two label sets may have different cardinalities.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .corpus import TokenLabeling, TopicModelResult

__all__ = [
    "ConfusionMatrix",
    "OverlapScore",
    "confusion",
    "nmi",
    "doc_classification_labels",
    "doc_classification_nmi",
    "reproducibility",
]


def _as_labeling(labels: TokenLabeling | np.ndarray) -> TokenLabeling:
    if isinstance(labels, TokenLabeling):
        return labels
    return TokenLabeling.from_labels(np.asarray(labels))


@dataclass(frozen=True)
class ConfusionMatrix:
    """Joint label counts; ``counts[t, t']`` tokens carry labels (t, t')."""

    counts: np.ndarray
    total_tokens: int

    def __post_init__(self) -> None:
        counts = np.asarray(self.counts, dtype=np.int64)
        counts.flags.writeable = False
        object.__setattr__(self, "counts", counts)
        if counts.ndim != 2:
            raise ValueError("counts must be a matrix")
        if self.total_tokens != int(counts.sum()):
            raise ValueError("total_tokens must equal the count sum")

    @property
    def joint(self) -> np.ndarray:
        """p[t, t'] as exact counts divided by the token total."""
        return self.counts / self.total_tokens

    @property
    def row_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=1) / self.total_tokens

    @property
    def col_marginal(self) -> np.ndarray:
        return self.counts.sum(axis=0) / self.total_tokens

    def merged(self, other: "ConfusionMatrix") -> "ConfusionMatrix":
        """Combine disjoint token shards (count matrices add)."""
        if self.counts.shape != other.counts.shape:
            raise ValueError("shard shapes differ")
        return ConfusionMatrix(
            self.counts + other.counts, self.total_tokens + other.total_tokens
        )


@dataclass(frozen=True)
class OverlapScore:
    """Information-theoretic agreement between two labelings, in bits."""

    mutual_information: float
    entropy_planted: float
    entropy_inferred: float
    nmi: float
    voi: float


def confusion(
    planted: TokenLabeling | np.ndarray,
    inferred: TokenLabeling | np.ndarray,
    mask: np.ndarray | None = None,
) -> ConfusionMatrix:
    """Count joint label occurrences over tokens.

    ``mask``, when given, selects the tokens to score (used e.g. to exclude
    stopword tokens).  Matrix dimensions follow each side's declared label
    cardinality, so the two sides may disagree on the number of topics.
    """
    a = _as_labeling(planted)
    b = _as_labeling(inferred)
    if len(a) != len(b):
        raise ValueError(f"labeling lengths differ: {len(a)} vs {len(b)}")
    rows, cols = a.labels, b.labels
    if mask is not None:
        mask = np.asarray(mask, dtype=bool)
        if mask.shape != rows.shape:
            raise ValueError("mask must parallel the labelings")
        rows, cols = rows[mask], cols[mask]
    n = rows.shape[0]
    if n == 0:
        raise ValueError("cannot build a confusion matrix over zero tokens")
    t, tp = a.num_labels, b.num_labels
    counts = np.bincount(rows * tp + cols, minlength=t * tp).reshape(t, tp)
    return ConfusionMatrix(counts, n)


def nmi(cm: ConfusionMatrix) -> OverlapScore:
    """Mutual information, entropies, NMI and VOI of a confusion matrix.

    Zero cells contribute nothing (0 log 0 = 0).  When both sides are a
    single label the entropies vanish and the two trivial partitions are
    identical, so the NMI is defined as 1.  Rounding noise is clipped so the
    reported values respect 0 <= I and 0 <= NMI <= 1.
    """
    p = cm.joint
    pr = cm.row_marginal
    pc = cm.col_marginal
    r, c = np.nonzero(cm.counts)
    cell = p[r, c]
    info = float(np.sum(cell * np.log2(cell / (pr[r] * pc[c]))))
    info = max(info, 0.0)
    h_row = float(-np.sum(pr[pr > 0] * np.log2(pr[pr > 0])))
    h_col = float(-np.sum(pc[pc > 0] * np.log2(pc[pc > 0])))
    denom = h_row + h_col
    if denom > 0.0:
        ratio = min(max(2.0 * info / denom, 0.0), 1.0)
    else:
        ratio = 1.0
    return OverlapScore(
        mutual_information=info,
        entropy_planted=h_row,
        entropy_inferred=h_col,
        nmi=ratio,
        voi=denom - 2.0 * info,
    )


def doc_classification_labels(result: TopicModelResult) -> np.ndarray:
    """Predicted per-document category: the most probable inferred topic.

    Ties break toward the lowest topic index.
    """
    return np.argmax(result.topic_doc, axis=1).astype(np.int64)


def doc_classification_nmi(
    predicted: np.ndarray, reference: np.ndarray
) -> OverlapScore:
    """NMI between predicted and reference document categories."""
    predicted = np.asarray(predicted, dtype=np.int64)
    reference = np.asarray(reference, dtype=np.int64)
    if predicted.shape != reference.shape:
        raise ValueError("document label lists must have equal length")
    if predicted.size == 0:
        raise ValueError("no documents to classify")
    return nmi(confusion(predicted, reference))


def reproducibility(
    result_a: TokenLabeling | np.ndarray, result_b: TokenLabeling | np.ndarray
) -> OverlapScore:
    """Agreement between two inference runs on the same corpus."""
    return nmi(confusion(result_a, result_b))
