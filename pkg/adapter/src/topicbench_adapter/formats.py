"""Reader/writer for the topicbench plain-text interchange formats.

Implemented against the published format contract, not against the
topicbench package: a corpus file is one header line

    #topicbench-corpus format=1 K=.. D=.. V=.. P_s=.. c_w=.. c_d=.. seed=..

followed by one line of space-separated word ids per document; a result
file is

    #topicbench-result format=1
    algorithm: <tag>
    num_topics: <K'>
    num_documents: <D>
    vocab_size: <V>
    hyperparams: key=value ...
    [topic_doc]    D rows of K' floats
    [word_topic]   K' rows of V floats
    [labels]       one row of topic ids per document

with floats at 17 significant digits and UTF-8/LF encoding throughout.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

FORMAT_VERSION = 1
ROW_SUM_TOL = 1e-9


class CorpusFormatError(ValueError):
    """Raised when a corpus file does not follow the interchange contract."""


@dataclass(frozen=True)
class Corpus:
    num_topics: int
    num_documents: int
    vocab_size: int
    seed: int
    docs: tuple[np.ndarray, ...]

    @property
    def num_tokens(self) -> int:
        return int(sum(d.shape[0] for d in self.docs))


def read_corpus(path: str | Path) -> Corpus:
    path = Path(path)
    try:
        lines = path.read_text(encoding="utf-8").splitlines()
    except OSError as exc:
        raise CorpusFormatError(f"cannot read {path}: {exc}") from exc
    if not lines:
        raise CorpusFormatError(f"{path}: empty file")
    head = lines[0].split()
    if not head or head[0] != "#topicbench-corpus":
        raise CorpusFormatError(f"{path}: missing corpus header")
    fields = dict(tok.partition("=")[::2] for tok in head[1:])
    if fields.get("format") != str(FORMAT_VERSION):
        raise CorpusFormatError(
            f"{path}: unsupported format version {fields.get('format')!r}"
        )
    try:
        k = int(fields["K"])
        d = int(fields["D"])
        v = int(fields["V"])
        seed = int(fields["seed"])
    except (KeyError, ValueError) as exc:
        raise CorpusFormatError(f"{path}: incomplete header: {exc}") from exc
    if len(lines) - 1 != d:
        raise CorpusFormatError(
            f"{path}: header declares {d} documents, found {len(lines) - 1}"
        )
    docs = []
    for lineno, line in enumerate(lines[1:], start=2):
        try:
            ids = np.array([int(tok) for tok in line.split()], dtype=np.int64)
        except ValueError as exc:
            raise CorpusFormatError(f"{path}:{lineno}: bad word id: {exc}") from exc
        if ids.size == 0:
            raise CorpusFormatError(f"{path}:{lineno}: empty document")
        if ids.min() < 0 or ids.max() >= v:
            raise CorpusFormatError(f"{path}:{lineno}: word id out of range")
        docs.append(ids)
    return Corpus(num_topics=k, num_documents=d, vocab_size=v, seed=seed,
                  docs=tuple(docs))


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def write_result(
    path: str | Path,
    algorithm: str,
    topic_doc: np.ndarray,
    word_topic: np.ndarray,
    label_rows: list[np.ndarray],
    hyperparams: dict,
) -> None:
    """Write a validated result file; raises if the matrices are off-contract."""
    topic_doc = np.asarray(topic_doc, dtype=np.float64)
    word_topic = np.asarray(word_topic, dtype=np.float64)
    k = word_topic.shape[0]
    if topic_doc.shape[1] != k:
        raise ValueError("topic_doc columns must match word_topic rows")
    for name, mat in (("topic_doc", topic_doc), ("word_topic", word_topic)):
        bad = np.flatnonzero(np.abs(mat.sum(axis=1) - 1.0) > ROW_SUM_TOL)
        if bad.size:
            raise ValueError(f"{name} row {bad[0]} does not sum to 1")
    if len(label_rows) != topic_doc.shape[0]:
        raise ValueError("label rows must match the document count")
    for row in label_rows:
        if row.size and (row.min() < 0 or row.max() >= k):
            raise ValueError("label id out of range")
    toks = []
    for key, value in hyperparams.items():
        if isinstance(value, float):
            toks.append(f"{key}={_fmt(value)}")
        else:
            toks.append(f"{key}={value}")
    lines = [
        f"#topicbench-result format={FORMAT_VERSION}",
        f"algorithm: {algorithm}",
        f"num_topics: {k}",
        f"num_documents: {topic_doc.shape[0]}",
        f"vocab_size: {word_topic.shape[1]}",
        "hyperparams: " + " ".join(toks),
        "[topic_doc]",
        *(" ".join(_fmt(x) for x in row) for row in topic_doc),
        "[word_topic]",
        *(" ".join(_fmt(x) for x in row) for row in word_topic),
        "[labels]",
        *(" ".join(str(int(x)) for x in row) for row in label_rows),
    ]
    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
