"""Topic model backends and their hyperparameter presets.

Each backend maps a corpus to inferred topic-per-document and word-per-topic
distributions plus one topic label per token.  Backends that only yield
distributions derive token labels as the argmax of the per-token
responsibility, proportional to P(t|d) * P(w|t).

Presets mirror the defaults of the two mainstream LDA stacks:
``ldags_default`` is alpha = 5/K, beta = 0.01; ``ldavb_default`` is
alpha = 1/K, beta = 1/K.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .formats import Corpus

PRESETS = ("ldags_default", "ldavb_default")


class BackendUnavailable(RuntimeError):
    """The requested backend's library is not importable."""


class BackendFailure(RuntimeError):
    """The backend ran but did not produce a usable model."""


def preset_priors(name: str, num_topics: int) -> tuple[float, float]:
    if name == "ldags_default":
        return 5.0 / num_topics, 0.01
    if name == "ldavb_default":
        return 1.0 / num_topics, 1.0 / num_topics
    raise ValueError(f"unknown preset {name!r}; expected one of {PRESETS}")


@dataclass(frozen=True)
class BackendRun:
    topic_doc: np.ndarray
    word_topic: np.ndarray
    label_rows: list
    seeded: bool
    iterations: int


def _doc_term_matrix(corpus: Corpus):
    from scipy import sparse

    rows = np.concatenate([
        np.full(doc.shape[0], d, dtype=np.int64) for d, doc in enumerate(corpus.docs)
    ])
    cols = np.concatenate(corpus.docs)
    data = np.ones(cols.shape[0], dtype=np.float64)
    mat = sparse.coo_matrix(
        (data, (rows, cols)), shape=(corpus.num_documents, corpus.vocab_size)
    )
    return mat.tocsr()


def _responsibility_labels(corpus: Corpus, topic_doc: np.ndarray, word_topic: np.ndarray):
    """Per-token argmax of P(t|d) * P(w|t), row per document."""
    label_rows = []
    for d, doc in enumerate(corpus.docs):
        scores = topic_doc[d][:, None] * word_topic[:, doc]
        label_rows.append(np.argmax(scores, axis=0).astype(np.int64))
    return label_rows


def run_sklearn_vb(corpus: Corpus, num_topics: int, alpha: float, beta: float,
                   iterations: int, seed: int) -> BackendRun:
    """Batch variational Bayes LDA from scikit-learn."""
    try:
        from sklearn.decomposition import LatentDirichletAllocation
    except ImportError as exc:  # pragma: no cover - sklearn is a declared dep
        raise BackendUnavailable(
            "backend 'sklearn-vb' needs scikit-learn; pip install scikit-learn"
        ) from exc

    x = _doc_term_matrix(corpus)
    model = LatentDirichletAllocation(
        n_components=num_topics,
        doc_topic_prior=alpha,
        topic_word_prior=beta,
        learning_method="batch",
        max_iter=iterations,
        random_state=seed % 2**32,
    )
    try:
        doc_topic = model.fit_transform(x)
    except Exception as exc:
        raise BackendFailure(f"sklearn LDA failed: {exc}") from exc
    topic_doc = doc_topic / doc_topic.sum(axis=1, keepdims=True)
    word_topic = model.components_ / model.components_.sum(axis=1, keepdims=True)
    labels = _responsibility_labels(corpus, topic_doc, word_topic)
    return BackendRun(topic_doc=topic_doc, word_topic=word_topic,
                      label_rows=labels, seeded=True, iterations=iterations)


def run_gensim_vb(corpus: Corpus, num_topics: int, alpha: float, beta: float,
                  iterations: int, seed: int) -> BackendRun:
    """Online variational Bayes LDA from gensim."""
    try:
        from gensim.models import LdaModel
    except ImportError as exc:
        raise BackendUnavailable(
            "backend 'gensim-vb' needs gensim; pip install gensim"
        ) from exc

    bow = [
        [(int(w), int(n)) for w, n in zip(*np.unique(doc, return_counts=True))]
        for doc in corpus.docs
    ]
    try:
        model = LdaModel(
            corpus=bow,
            num_topics=num_topics,
            id2word={i: str(i) for i in range(corpus.vocab_size)},
            alpha=alpha,
            eta=beta,
            iterations=iterations,
            passes=max(1, iterations // 10),
            random_state=seed % 2**32,
        )
        gamma, _ = model.inference(bow)
    except Exception as exc:
        raise BackendFailure(f"gensim LDA failed: {exc}") from exc
    topic_doc = gamma / gamma.sum(axis=1, keepdims=True)
    word_topic = model.get_topics()
    word_topic = word_topic / word_topic.sum(axis=1, keepdims=True)
    labels = _responsibility_labels(corpus, topic_doc, word_topic)
    return BackendRun(topic_doc=topic_doc, word_topic=word_topic,
                      label_rows=labels, seeded=True, iterations=iterations)


BACKENDS = {
    "sklearn-vb": run_sklearn_vb,
    "gensim-vb": run_gensim_vb,
}


def run_backend(name: str, corpus: Corpus, num_topics: int, alpha: float,
                beta: float, iterations: int, seed: int) -> BackendRun:
    try:
        fn = BACKENDS[name]
    except KeyError:
        raise ValueError(
            f"unknown backend {name!r}; available: {', '.join(sorted(BACKENDS))}"
        ) from None
    return fn(corpus, num_topics, alpha, beta, iterations, seed)
