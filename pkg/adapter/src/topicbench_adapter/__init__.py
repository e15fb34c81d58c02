"""Bridge from third-party topic model libraries to topicbench interchange files."""

from .backends import BACKENDS, PRESETS, preset_priors, run_backend
from .formats import Corpus, CorpusFormatError, read_corpus, write_result

__version__ = "0.1.0"

__all__ = [
    "BACKENDS",
    "PRESETS",
    "preset_priors",
    "run_backend",
    "Corpus",
    "CorpusFormatError",
    "read_corpus",
    "write_result",
    "__version__",
]
