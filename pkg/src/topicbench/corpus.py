"""Domain types and closed-form distributions of the planted-topic corpus model.

A corpus is governed by a global word distribution, a partition of the
vocabulary into stopwords and topical words (each topical word owned by
exactly one topic), and two interpolation weights that blend structured and
random behaviour:

* ``structure_word`` blends a word's affinity for its own topic with its
  global frequency,
* ``structure_doc`` blends a document's affinity for its own topic with the
  corpus-wide topic weights.

Everything in this module is deterministic given its inputs; sampling lives
in :mod:`topicbench.generator`.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Mapping, Sequence

import numpy as np

__all__ = [
    "CorpusSpecError",
    "CorpusSpec",
    "GroundTruth",
    "TokenLabeling",
    "SyntheticCorpus",
    "TopicModelResult",
    "num_stopwords",
    "topic_marginal",
    "word_given_topic",
    "topic_given_doc",
    "word_topic_matrix",
    "topic_doc_matrix",
]

_SEED_MAX = 2**64


class CorpusSpecError(ValueError):
    """Raised when corpus parameters violate the model's constraints."""


def _frozen(a: np.ndarray) -> np.ndarray:
    a = np.ascontiguousarray(a)
    a.flags.writeable = False
    return a


def num_stopwords(stopword_fraction: float, vocab_size: int) -> int:
    """Number of unique words designated as stopwords (round half up)."""
    return int(np.floor(stopword_fraction * vocab_size + 0.5))


@dataclass(frozen=True)
class CorpusSpec:
    """All knobs of the generative process.

    ``doc_length`` is either one length shared by all documents or an
    explicit per-document tuple.  ``burstiness`` is the Dirichlet
    concentration used to perturb per-document word distributions; ``None``
    disables the perturbation entirely (the infinite-concentration limit).
    """

    num_topics: int
    num_documents: int
    doc_length: int | tuple[int, ...]
    vocab_size: int
    stopword_fraction: float = 0.0
    structure_word: float = 1.0
    structure_doc: float = 1.0
    word_dist: str = "uniform"
    word_gamma: float | None = None
    topic_size_dist: str = "uniform"
    topic_size_gamma: float | None = None
    burstiness: float | None = None
    stopwords_by_rank: bool = False
    seed: int = 0

    def __post_init__(self) -> None:
        if self.num_topics < 1:
            raise CorpusSpecError("num_topics must be >= 1")
        if self.num_documents < 1:
            raise CorpusSpecError("num_documents must be >= 1")
        if self.vocab_size < 2:
            raise CorpusSpecError("vocab_size must be >= 2")
        if isinstance(self.doc_length, (list, tuple, np.ndarray)):
            lengths = tuple(int(m) for m in self.doc_length)
            if len(lengths) != self.num_documents:
                raise CorpusSpecError(
                    "per-document doc_length must have num_documents entries"
                )
            if any(m < 1 for m in lengths):
                raise CorpusSpecError("every document length must be >= 1")
            object.__setattr__(self, "doc_length", lengths)
        elif int(self.doc_length) < 1:
            raise CorpusSpecError("doc_length must be >= 1")
        else:
            object.__setattr__(self, "doc_length", int(self.doc_length))
        if not 0.0 <= self.stopword_fraction <= 1.0:
            raise CorpusSpecError("stopword_fraction must lie in [0, 1]")
        if not 0.0 <= self.structure_word <= 1.0:
            raise CorpusSpecError("structure_word must lie in [0, 1]")
        if not 0.0 <= self.structure_doc <= 1.0:
            raise CorpusSpecError("structure_doc must lie in [0, 1]")
        for dist, gamma, what in (
            (self.word_dist, self.word_gamma, "word_dist"),
            (self.topic_size_dist, self.topic_size_gamma, "topic_size_dist"),
        ):
            if dist not in ("uniform", "powerlaw"):
                raise CorpusSpecError(f"{what} must be 'uniform' or 'powerlaw'")
            if dist == "powerlaw" and (gamma is None or gamma <= 1.0):
                raise CorpusSpecError(f"{what} exponent must be > 1")
        if self.burstiness is not None and not self.burstiness > 0:
            raise CorpusSpecError("burstiness concentration must be positive")
        if not 0 <= self.seed < _SEED_MAX:
            raise CorpusSpecError("seed must be a 64-bit unsigned integer")
        # The topical set must be able to give every topic at least one word.
        if self.num_topical_words < self.num_topics:
            raise CorpusSpecError(
                f"only {self.num_topical_words} topical words for "
                f"{self.num_topics} topics; lower stopword_fraction or num_topics"
            )

    @property
    def num_stopwords(self) -> int:
        return num_stopwords(self.stopword_fraction, self.vocab_size)

    @property
    def num_topical_words(self) -> int:
        return self.vocab_size - self.num_stopwords

    def doc_lengths(self) -> np.ndarray:
        """Per-document lengths as an int64 array of shape (num_documents,)."""
        if isinstance(self.doc_length, tuple):
            return np.asarray(self.doc_length, dtype=np.int64)
        return np.full(self.num_documents, self.doc_length, dtype=np.int64)

    @property
    def num_tokens(self) -> int:
        return int(self.doc_lengths().sum())


@dataclass(frozen=True)
class GroundTruth:
    """Closed-form planted structure of a corpus.

    ``word_topic_map`` holds one topic id per word, with -1 marking
    stopwords.  ``topic_marginal`` is the corpus-wide topic weight vector
    implied by the word marginal and the word-topic partition.
    """

    word_marginal: np.ndarray
    word_topic_map: np.ndarray
    doc_topic_map: np.ndarray
    topic_marginal: np.ndarray
    topic_sizes: np.ndarray

    def __post_init__(self) -> None:
        object.__setattr__(self, "word_marginal", _frozen(np.asarray(self.word_marginal, dtype=np.float64)))
        object.__setattr__(self, "word_topic_map", _frozen(np.asarray(self.word_topic_map, dtype=np.int64)))
        object.__setattr__(self, "doc_topic_map", _frozen(np.asarray(self.doc_topic_map, dtype=np.int64)))
        object.__setattr__(self, "topic_marginal", _frozen(np.asarray(self.topic_marginal, dtype=np.float64)))
        object.__setattr__(self, "topic_sizes", _frozen(np.asarray(self.topic_sizes, dtype=np.int64)))
        if abs(self.word_marginal.sum() - 1.0) > 1e-12:
            raise ValueError("word marginal must sum to 1")
        if abs(self.topic_marginal.sum() - 1.0) > 1e-12:
            raise ValueError("topic marginal must sum to 1")
        k = self.num_topics
        if self.word_topic_map.max(initial=-1) >= k:
            raise ValueError("word_topic_map refers to a topic out of range")
        if self.doc_topic_map.size and not (
            0 <= self.doc_topic_map.min() and self.doc_topic_map.max() < k
        ):
            raise ValueError("doc_topic_map refers to a topic out of range")
        if int(self.topic_sizes.sum()) != int(np.count_nonzero(self.word_topic_map >= 0)):
            raise ValueError("topic_sizes must sum to the number of topical words")

    @property
    def num_topics(self) -> int:
        return self.topic_marginal.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.word_marginal.shape[0]

    @property
    def num_documents(self) -> int:
        return self.doc_topic_map.shape[0]

    @property
    def stopword_ids(self) -> np.ndarray:
        return np.flatnonzero(self.word_topic_map < 0)

    @property
    def topical_ids(self) -> np.ndarray:
        return np.flatnonzero(self.word_topic_map >= 0)

    def is_stopword(self) -> np.ndarray:
        """Boolean mask over word ids, True for stopwords."""
        return self.word_topic_map < 0


@dataclass(frozen=True)
class TokenLabeling:
    """One topic id per token, in document-major token order.

    ``num_labels`` is the declared label cardinality; every label id lies in
    ``[0, num_labels)`` but ids may go unused (an inference run with an
    assumed topic count rarely populates every topic).
    """

    labels: np.ndarray
    num_labels: int

    def __post_init__(self) -> None:
        labels = np.asarray(self.labels, dtype=np.int64)
        object.__setattr__(self, "labels", _frozen(labels))
        if labels.ndim != 1:
            raise ValueError("labels must be one-dimensional")
        if labels.size == 0:
            raise ValueError("labeling must contain at least one token")
        if labels.min() < 0 or labels.max() >= self.num_labels:
            raise ValueError("label ids must lie in [0, num_labels)")

    @classmethod
    def from_labels(cls, labels: Sequence[int] | np.ndarray, num_labels: int | None = None) -> "TokenLabeling":
        arr = np.asarray(labels, dtype=np.int64)
        if num_labels is None:
            num_labels = int(arr.max()) + 1 if arr.size else 1
        return cls(arr, int(num_labels))

    def __len__(self) -> int:
        return self.labels.shape[0]

    @property
    def distinct_used(self) -> int:
        """Number of label ids that actually occur."""
        return int(np.unique(self.labels).size)


@dataclass(frozen=True)
class SyntheticCorpus:
    """Generated token sequences plus the planted per-token topic labels.

    Tokens are stored flat in document-major order; ``doc_offsets[d]`` and
    ``doc_offsets[d + 1]`` delimit document ``d``.  Every token has a planted
    label: the topic drawn at the first step of the generative process, even
    when the word drawn afterwards is a stopword.
    """

    spec: CorpusSpec
    truth: GroundTruth
    token_words: np.ndarray
    doc_offsets: np.ndarray
    planted: TokenLabeling

    def __post_init__(self) -> None:
        object.__setattr__(self, "token_words", _frozen(np.asarray(self.token_words, dtype=np.int64)))
        object.__setattr__(self, "doc_offsets", _frozen(np.asarray(self.doc_offsets, dtype=np.int64)))
        if self.doc_offsets.shape[0] != self.spec.num_documents + 1:
            raise ValueError("doc_offsets must have num_documents + 1 entries")
        if self.doc_offsets[0] != 0 or self.doc_offsets[-1] != self.token_words.shape[0]:
            raise ValueError("doc_offsets must span the token array")
        if len(self.planted) != self.token_words.shape[0]:
            raise ValueError("planted labels must parallel the tokens")

    @property
    def num_tokens(self) -> int:
        return self.token_words.shape[0]

    @property
    def num_documents(self) -> int:
        return self.spec.num_documents

    def doc_words(self, d: int) -> np.ndarray:
        return self.token_words[self.doc_offsets[d] : self.doc_offsets[d + 1]]

    def doc_labels(self, d: int) -> np.ndarray:
        return self.planted.labels[self.doc_offsets[d] : self.doc_offsets[d + 1]]

    def iter_docs(self) -> Iterator[np.ndarray]:
        for d in range(self.num_documents):
            yield self.doc_words(d)

    def token_doc_ids(self) -> np.ndarray:
        """Document id of each token, shape (num_tokens,)."""
        return np.repeat(
            np.arange(self.num_documents, dtype=np.int64), np.diff(self.doc_offsets)
        )

    def stopword_token_mask(self) -> np.ndarray:
        """True for tokens whose word is a stopword."""
        return self.truth.is_stopword()[self.token_words]


@dataclass(frozen=True)
class TopicModelResult:
    """Inferred distributions and token labels from any inference backend.

    The inferred topic count (rows of ``word_topic``) does not have to match
    the planted one.
    """

    topic_doc: np.ndarray
    word_topic: np.ndarray
    token_labels: TokenLabeling
    algorithm_tag: str = "unknown"
    hyperparams: Mapping[str, object] = field(default_factory=dict)

    ROW_SUM_TOL = 1e-9

    def __post_init__(self) -> None:
        object.__setattr__(self, "topic_doc", _frozen(np.asarray(self.topic_doc, dtype=np.float64)))
        object.__setattr__(self, "word_topic", _frozen(np.asarray(self.word_topic, dtype=np.float64)))
        object.__setattr__(self, "hyperparams", dict(self.hyperparams))
        if self.topic_doc.ndim != 2 or self.word_topic.ndim != 2:
            raise ValueError("topic_doc and word_topic must be matrices")
        if self.topic_doc.shape[1] != self.word_topic.shape[0]:
            raise ValueError("topic_doc columns must match word_topic rows")
        for name, mat in (("topic_doc", self.topic_doc), ("word_topic", self.word_topic)):
            bad = np.flatnonzero(np.abs(mat.sum(axis=1) - 1.0) > self.ROW_SUM_TOL)
            if bad.size:
                raise ValueError(f"{name} row {bad[0]} does not sum to 1")
        if self.token_labels.num_labels != self.num_topics:
            raise ValueError("token label cardinality must equal the inferred topic count")

    @property
    def num_topics(self) -> int:
        return self.word_topic.shape[0]

    @property
    def num_documents(self) -> int:
        return self.topic_doc.shape[0]

    @property
    def vocab_size(self) -> int:
        return self.word_topic.shape[1]


def topic_marginal(
    word_marginal: np.ndarray, word_topic_map: np.ndarray, num_topics: int
) -> np.ndarray:
    """Corpus-wide topic weights implied by the word marginal.

    Each topic's weight is the total marginal probability of the words it
    owns, renormalized over the topical part of the vocabulary so the result
    sums to one even when stopwords carry probability mass.
    """
    word_marginal = np.asarray(word_marginal, dtype=np.float64)
    word_topic_map = np.asarray(word_topic_map, dtype=np.int64)
    topical = word_topic_map >= 0
    mass = float(word_marginal[topical].sum())
    if not mass > 0.0:
        raise ValueError("no topical mass")
    weights = np.bincount(
        word_topic_map[topical], weights=word_marginal[topical], minlength=num_topics
    )
    return weights / mass


def word_given_topic(truth: GroundTruth, structure_word: float, word: int, topic: int) -> float:
    """Probability that ``topic`` emits ``word``.

    Topical words interpolate between their own-topic share and their global
    frequency; stopwords appear with their global frequency in every topic.
    """
    p_w = float(truth.word_marginal[word])
    owner = int(truth.word_topic_map[word])
    if owner < 0:
        return p_w
    p_t = float(truth.topic_marginal[owner])
    assert p_t > 0.0, "topical word mapped to a weightless topic"
    structured = p_w / p_t if owner == topic else 0.0
    return structure_word * structured + (1.0 - structure_word) * p_w


def topic_given_doc(truth: GroundTruth, structure_doc: float, topic: int, doc: int) -> float:
    """Probability that document ``doc`` uses ``topic``."""
    own = 1.0 if int(truth.doc_topic_map[doc]) == topic else 0.0
    return structure_doc * own + (1.0 - structure_doc) * float(truth.topic_marginal[topic])


def word_topic_matrix(truth: GroundTruth, structure_word: float) -> np.ndarray:
    """Full per-topic word distribution, shape (num_topics, vocab_size)."""
    k, v = truth.num_topics, truth.vocab_size
    p_w = truth.word_marginal
    mat = np.tile((1.0 - structure_word) * p_w, (k, 1))
    stop = truth.is_stopword()
    mat[:, stop] = p_w[stop]
    topical = truth.topical_ids
    owners = truth.word_topic_map[topical]
    mat[owners, topical] += structure_word * p_w[topical] / truth.topic_marginal[owners]
    return mat


def topic_doc_matrix(truth: GroundTruth, structure_doc: float) -> np.ndarray:
    """Full per-document topic distribution, shape (num_documents, num_topics)."""
    d = truth.num_documents
    mat = np.tile((1.0 - structure_doc) * truth.topic_marginal, (d, 1))
    mat[np.arange(d), truth.doc_topic_map] += structure_doc
    return mat
