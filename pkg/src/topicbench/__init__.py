"""Synthetic corpora with planted topic structure, and token-level scoring.

The package generates bag-of-words corpora whose per-token topic labels are
known by construction, runs (or imports) topic inference on them, and scores
any model's output against the planted truth with token-level normalized
mutual information.
"""

from .corpus import (
    CorpusSpec,
    CorpusSpecError,
    GroundTruth,
    SyntheticCorpus,
    TokenLabeling,
    TopicModelResult,
    topic_doc_matrix,
    topic_given_doc,
    topic_marginal,
    word_given_topic,
    word_topic_matrix,
)
from .generator import (
    build_word_marginal,
    bursty_word_topic_rows,
    generate_corpus,
)
from .gibbs import GibbsConfig, GibbsError, hyperparam_preset, run_gibbs
from .metrics import (
    ConfusionMatrix,
    OverlapScore,
    confusion,
    doc_classification_labels,
    doc_classification_nmi,
    nmi,
    reproducibility,
)

__version__ = "0.1.0"

__all__ = [
    "CorpusSpec",
    "CorpusSpecError",
    "GroundTruth",
    "SyntheticCorpus",
    "TokenLabeling",
    "TopicModelResult",
    "topic_marginal",
    "word_given_topic",
    "topic_given_doc",
    "word_topic_matrix",
    "topic_doc_matrix",
    "build_word_marginal",
    "bursty_word_topic_rows",
    "generate_corpus",
    "GibbsConfig",
    "GibbsError",
    "hyperparam_preset",
    "run_gibbs",
    "ConfusionMatrix",
    "OverlapScore",
    "confusion",
    "nmi",
    "doc_classification_labels",
    "doc_classification_nmi",
    "reproducibility",
    "__version__",
]
