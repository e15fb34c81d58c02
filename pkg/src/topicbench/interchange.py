"""Plain-text interchange formats for corpora, labels, results and scores.

All files are UTF-8 with LF line endings; floats are written with 17
significant digits so doubles survive a write/read round trip bit-exactly.
Formats carry an explicit version token and unknown versions are rejected.

Corpus file: one header line echoing the generating parameters, then one
line per document of space-separated word ids.

Label file: one line per document of space-separated topic ids, shaped
exactly like the corpus body.

Truth sidecar: the planted distributions and assignments needed to
reconstruct the closed-form ground truth without regenerating the corpus.

Result file: inferred topic-per-document and word-per-topic matrices plus a
label block, produced by any backend (in-package or external).

Scores CSV: one flat row per evaluation, schema in ``SCORE_COLUMNS``.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .corpus import GroundTruth, SyntheticCorpus, TokenLabeling, TopicModelResult

__all__ = [
    "InterchangeError",
    "CorpusHeader",
    "LoadedCorpus",
    "LoadedTruth",
    "CorpusPaths",
    "corpus_paths",
    "export_corpus",
    "import_corpus",
    "write_corpus_file",
    "write_label_file",
    "import_labels",
    "write_truth_file",
    "import_truth",
    "export_result",
    "import_result",
    "SCORE_COLUMNS",
    "append_score_rows",
    "read_scores",
]

CORPUS_MAGIC = "#topicbench-corpus"
TRUTH_MAGIC = "#topicbench-truth"
RESULT_MAGIC = "#topicbench-result"
FORMAT_VERSION = 1

SCORE_COLUMNS = (
    "experiment_id",
    "algorithm_tag",
    "K_a",
    "c",
    "P_s",
    "m_d",
    "seed",
    "I_bits",
    "H_bits",
    "Hp_bits",
    "nmi",
    "voi_bits",
    "K_inferred",
    "doc_nmi",
    "wall_ms",
)


class InterchangeError(ValueError):
    """Raised for malformed, mis-shaped or wrong-version interchange files."""


def _fmt(x: float) -> str:
    return format(float(x), ".17g")


def _float_row(values: Iterable[float]) -> str:
    return " ".join(_fmt(v) for v in values)


def _int_row(values: Iterable[int]) -> str:
    return " ".join(str(int(v)) for v in values)


def _read_text(path: Path) -> list[str]:
    try:
        text = path.read_text(encoding="utf-8")
    except OSError as exc:
        raise InterchangeError(f"cannot read {path}: {exc}") from exc
    return text.split("\n")


def _write_text(path: Path, lines: Iterable[str]) -> None:
    try:
        path.write_text("\n".join(lines) + "\n", encoding="utf-8", newline="\n")
    except OSError as exc:
        raise InterchangeError(f"cannot write {path}: {exc}") from exc


def _parse_magic(path: Path, line: str, magic: str) -> dict[str, str]:
    parts = line.split()
    if not parts or parts[0] != magic:
        raise InterchangeError(f"{path}: not a {magic} file")
    fields: dict[str, str] = {}
    for tok in parts[1:]:
        key, _, value = tok.partition("=")
        if not value:
            raise InterchangeError(f"{path}: malformed header token {tok!r}")
        fields[key] = value
    version = fields.get("format")
    if version != str(FORMAT_VERSION):
        raise InterchangeError(f"{path}: unsupported format version {version!r}")
    return fields


def _parse_ints(path: Path, lineno: int, line: str) -> np.ndarray:
    try:
        return np.array([int(tok) for tok in line.split()], dtype=np.int64)
    except ValueError as exc:
        raise InterchangeError(f"{path}:{lineno}: bad integer: {exc}") from exc


def _parse_floats(path: Path, lineno: int, line: str, expect: int) -> np.ndarray:
    try:
        arr = np.array([float(tok) for tok in line.split()], dtype=np.float64)
    except ValueError as exc:
        raise InterchangeError(f"{path}:{lineno}: bad number: {exc}") from exc
    if arr.shape[0] != expect:
        raise InterchangeError(
            f"{path}:{lineno}: expected {expect} values, found {arr.shape[0]}"
        )
    return arr


@dataclass(frozen=True)
class CorpusHeader:
    """Spec echo carried by a corpus file."""

    num_topics: int
    num_documents: int
    vocab_size: int
    stopword_fraction: float
    structure_word: float
    structure_doc: float
    seed: int

    def to_line(self) -> str:
        return (
            f"{CORPUS_MAGIC} format={FORMAT_VERSION}"
            f" K={self.num_topics} D={self.num_documents} V={self.vocab_size}"
            f" P_s={_fmt(self.stopword_fraction)}"
            f" c_w={_fmt(self.structure_word)} c_d={_fmt(self.structure_doc)}"
            f" seed={self.seed}"
        )

    @classmethod
    def from_line(cls, path: Path, line: str) -> "CorpusHeader":
        fields = _parse_magic(path, line, CORPUS_MAGIC)
        try:
            return cls(
                num_topics=int(fields["K"]),
                num_documents=int(fields["D"]),
                vocab_size=int(fields["V"]),
                stopword_fraction=float(fields["P_s"]),
                structure_word=float(fields["c_w"]),
                structure_doc=float(fields["c_d"]),
                seed=int(fields["seed"]),
            )
        except (KeyError, ValueError) as exc:
            raise InterchangeError(f"{path}: incomplete corpus header: {exc}") from exc


@dataclass(frozen=True)
class LoadedCorpus:
    """Corpus file contents: header echo plus per-document word ids."""

    header: CorpusHeader
    docs: tuple[np.ndarray, ...]

    def doc_lengths(self) -> np.ndarray:
        return np.array([doc.shape[0] for doc in self.docs], dtype=np.int64)

    @property
    def num_tokens(self) -> int:
        return int(self.doc_lengths().sum())

    def flat_words(self) -> np.ndarray:
        return np.concatenate(self.docs) if self.docs else np.empty(0, dtype=np.int64)


@dataclass(frozen=True)
class LoadedTruth:
    """Truth sidecar contents: planted structure plus the blend weights."""

    truth: GroundTruth
    structure_word: float
    structure_doc: float


@dataclass(frozen=True)
class CorpusPaths:
    corpus: Path
    labels: Path
    truth: Path


def corpus_paths(path: str | Path) -> CorpusPaths:
    """Sibling label/truth paths for a corpus path (x.txt -> x.labels.txt)."""
    p = Path(path)
    return CorpusPaths(
        corpus=p,
        labels=p.with_name(p.stem + ".labels" + p.suffix),
        truth=p.with_name(p.stem + ".truth" + p.suffix),
    )


def write_corpus_file(
    path: str | Path, header: CorpusHeader, docs: Iterable[np.ndarray]
) -> None:
    lines = [header.to_line()]
    lines.extend(_int_row(doc) for doc in docs)
    if len(lines) != header.num_documents + 1:
        raise InterchangeError(
            f"{path}: document count {len(lines) - 1} does not match header"
        )
    _write_text(Path(path), lines)


def write_label_file(path: str | Path, label_rows: Iterable[np.ndarray]) -> None:
    _write_text(Path(path), [_int_row(row) for row in label_rows])


def export_corpus(
    corpus: SyntheticCorpus, path: str | Path, with_truth: bool = True
) -> CorpusPaths:
    """Write a corpus file, plus label file and truth sidecar unless blind."""
    paths = corpus_paths(path)
    spec = corpus.spec
    header = CorpusHeader(
        num_topics=spec.num_topics,
        num_documents=spec.num_documents,
        vocab_size=spec.vocab_size,
        stopword_fraction=spec.stopword_fraction,
        structure_word=spec.structure_word,
        structure_doc=spec.structure_doc,
        seed=spec.seed,
    )
    write_corpus_file(paths.corpus, header, corpus.iter_docs())
    if with_truth:
        write_label_file(
            paths.labels, (corpus.doc_labels(d) for d in range(corpus.num_documents))
        )
        write_truth_file(
            paths.truth, corpus.truth, spec.structure_word, spec.structure_doc
        )
    return paths


def import_corpus(path: str | Path) -> LoadedCorpus:
    path = Path(path)
    lines = _read_text(path)
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise InterchangeError(f"{path}: empty file")
    header = CorpusHeader.from_line(path, lines[0])
    if len(lines) - 1 != header.num_documents:
        raise InterchangeError(
            f"{path}: header declares {header.num_documents} documents,"
            f" found {len(lines) - 1} lines"
        )
    docs = []
    for lineno, line in enumerate(lines[1:], start=2):
        doc = _parse_ints(path, lineno, line)
        if doc.size == 0:
            raise InterchangeError(f"{path}:{lineno}: empty document")
        if doc.min() < 0 or doc.max() >= header.vocab_size:
            raise InterchangeError(f"{path}:{lineno}: word id out of range")
        docs.append(doc)
    return LoadedCorpus(header=header, docs=tuple(docs))


def import_labels(
    path: str | Path,
    doc_lengths: Sequence[int] | None = None,
    num_labels: int | None = None,
) -> TokenLabeling:
    """Read a label file; validates shape against the corpus when given."""
    path = Path(path)
    lines = _read_text(path)
    if lines and lines[-1] == "":
        lines.pop()
    if doc_lengths is not None and len(lines) != len(doc_lengths):
        raise InterchangeError(
            f"{path}: {len(lines)} label lines for {len(doc_lengths)} documents"
        )
    rows = []
    for lineno, line in enumerate(lines, start=1):
        row = _parse_ints(path, lineno, line)
        if doc_lengths is not None and row.shape[0] != int(doc_lengths[lineno - 1]):
            raise InterchangeError(
                f"{path}:{lineno}: {row.shape[0]} labels for a document of"
                f" {int(doc_lengths[lineno - 1])} tokens"
            )
        rows.append(row)
    if not rows:
        raise InterchangeError(f"{path}: empty label file")
    flat = np.concatenate(rows)
    if flat.min() < 0:
        raise InterchangeError(f"{path}: negative label id")
    return TokenLabeling.from_labels(flat, num_labels)


def write_truth_file(
    path: str | Path,
    truth: GroundTruth,
    structure_word: float,
    structure_doc: float,
) -> None:
    lines = [
        f"{TRUTH_MAGIC} format={FORMAT_VERSION}"
        f" K={truth.num_topics} D={truth.num_documents} V={truth.vocab_size}"
        f" c_w={_fmt(structure_word)} c_d={_fmt(structure_doc)}",
        "word_marginal: " + _float_row(truth.word_marginal),
        "topic_marginal: " + _float_row(truth.topic_marginal),
        "word_topic_map: " + _int_row(truth.word_topic_map),
        "doc_topic_map: " + _int_row(truth.doc_topic_map),
        "topic_sizes: " + _int_row(truth.topic_sizes),
        "stopword_ids: " + _int_row(truth.stopword_ids),
    ]
    _write_text(Path(path), lines)


def _section(path: Path, lines: list[str], lineno: int, name: str) -> str:
    if lineno > len(lines):
        raise InterchangeError(f"{path}: missing section {name!r}")
    line = lines[lineno - 1]
    prefix = name + ":"
    if not line.startswith(prefix):
        raise InterchangeError(f"{path}:{lineno}: expected section {name!r}")
    return line[len(prefix) :].strip()


def import_truth(path: str | Path) -> LoadedTruth:
    path = Path(path)
    lines = _read_text(path)
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise InterchangeError(f"{path}: empty file")
    fields = _parse_magic(path, lines[0], TRUTH_MAGIC)
    try:
        k = int(fields["K"])
        d = int(fields["D"])
        v = int(fields["V"])
        c_w = float(fields["c_w"])
        c_d = float(fields["c_d"])
    except (KeyError, ValueError) as exc:
        raise InterchangeError(f"{path}: incomplete truth header: {exc}") from exc
    word_marginal = _parse_floats(path, 2, _section(path, lines, 2, "word_marginal"), v)
    topic_marginal = _parse_floats(path, 3, _section(path, lines, 3, "topic_marginal"), k)
    word_topic_map = _parse_ints(path, 4, _section(path, lines, 4, "word_topic_map"))
    doc_topic_map = _parse_ints(path, 5, _section(path, lines, 5, "doc_topic_map"))
    topic_sizes = _parse_ints(path, 6, _section(path, lines, 6, "topic_sizes"))
    stopword_ids = _parse_ints(path, 7, _section(path, lines, 7, "stopword_ids"))
    if word_topic_map.shape[0] != v:
        raise InterchangeError(f"{path}:4: word_topic_map must have {v} entries")
    if doc_topic_map.shape[0] != d:
        raise InterchangeError(f"{path}:5: doc_topic_map must have {d} entries")
    if topic_sizes.shape[0] != k:
        raise InterchangeError(f"{path}:6: topic_sizes must have {k} entries")
    declared_stop = set(int(w) for w in stopword_ids)
    mapped_stop = set(int(w) for w in np.flatnonzero(word_topic_map < 0))
    if declared_stop != mapped_stop:
        raise InterchangeError(f"{path}: stopword_ids disagree with word_topic_map")
    truth = GroundTruth(
        word_marginal=word_marginal,
        word_topic_map=word_topic_map,
        doc_topic_map=doc_topic_map,
        topic_marginal=topic_marginal,
        topic_sizes=topic_sizes,
    )
    return LoadedTruth(truth=truth, structure_word=c_w, structure_doc=c_d)


def _hyperparams_line(hyperparams: Mapping[str, object]) -> str:
    toks = []
    for key, value in hyperparams.items():
        if isinstance(value, bool):
            rendered = str(value).lower()
        elif isinstance(value, int):
            rendered = str(value)
        elif isinstance(value, float):
            rendered = _fmt(value)
        else:
            rendered = str(value)
        if any(ch.isspace() for ch in rendered) or "=" in rendered:
            raise InterchangeError(f"hyperparam {key}={rendered!r} is not serializable")
        toks.append(f"{key}={rendered}")
    return "hyperparams: " + " ".join(toks)


def _parse_hyperparams(text: str) -> dict[str, object]:
    out: dict[str, object] = {}
    for tok in text.split():
        key, _, raw = tok.partition("=")
        value: object
        try:
            value = int(raw)
        except ValueError:
            try:
                value = float(raw)
            except ValueError:
                value = raw
        out[key] = value
    return out


def export_result(result: TopicModelResult, path: str | Path, doc_offsets: np.ndarray | None = None) -> None:
    """Write a result file; labels are grouped per document when offsets given.

    Without offsets the label block is a single line (still a valid file for
    loaders that know the corpus shape is one synthetic document per line).
    """
    labels = result.token_labels.labels
    if doc_offsets is None:
        label_rows = [labels]
    else:
        label_rows = [
            labels[doc_offsets[i] : doc_offsets[i + 1]]
            for i in range(len(doc_offsets) - 1)
        ]
    lines = [
        f"{RESULT_MAGIC} format={FORMAT_VERSION}",
        f"algorithm: {result.algorithm_tag}",
        f"num_topics: {result.num_topics}",
        f"num_documents: {result.num_documents}",
        f"vocab_size: {result.vocab_size}",
        _hyperparams_line(result.hyperparams),
        "[topic_doc]",
        *(_float_row(row) for row in result.topic_doc),
        "[word_topic]",
        *(_float_row(row) for row in result.word_topic),
        "[labels]",
        *(_int_row(row) for row in label_rows),
    ]
    _write_text(Path(path), lines)


def import_result(
    path: str | Path,
    doc_lengths: Sequence[int] | None = None,
) -> TopicModelResult:
    """Read and validate a result file.

    Row-stochasticity is enforced to 1e-9 and label ids must stay below the
    declared topic count; when ``doc_lengths`` is given the label block must
    match the corpus shape exactly.  The inferred topic count is free to
    differ from the planted one.
    """
    path = Path(path)
    lines = _read_text(path)
    if lines and lines[-1] == "":
        lines.pop()
    if not lines:
        raise InterchangeError(f"{path}: empty file")
    _parse_magic(path, lines[0], RESULT_MAGIC)
    meta: dict[str, str] = {}
    lineno = 2
    while lineno <= len(lines) and not lines[lineno - 1].startswith("["):
        line = lines[lineno - 1]
        key, sep, value = line.partition(":")
        if not sep:
            raise InterchangeError(f"{path}:{lineno}: expected 'key: value'")
        meta[key.strip()] = value.strip()
        lineno += 1
    try:
        k = int(meta["num_topics"])
        d = int(meta["num_documents"])
        v = int(meta["vocab_size"])
        algorithm = meta.get("algorithm", "unknown")
    except (KeyError, ValueError) as exc:
        raise InterchangeError(f"{path}: incomplete result metadata: {exc}") from exc
    hyperparams = _parse_hyperparams(meta.get("hyperparams", ""))

    def expect_marker(name: str) -> None:
        nonlocal lineno
        if lineno > len(lines) or lines[lineno - 1] != f"[{name}]":
            raise InterchangeError(f"{path}:{lineno}: expected [{name}] block")
        lineno += 1

    def read_matrix(rows: int, cols: int, name: str) -> np.ndarray:
        nonlocal lineno
        mat = np.empty((rows, cols), dtype=np.float64)
        for i in range(rows):
            if lineno > len(lines):
                raise InterchangeError(f"{path}:{lineno}: truncated [{name}] block")
            mat[i] = _parse_floats(path, lineno, lines[lineno - 1], cols)
            lineno += 1
        return mat

    expect_marker("topic_doc")
    topic_doc = read_matrix(d, k, "topic_doc")
    expect_marker("word_topic")
    word_topic = read_matrix(k, v, "word_topic")
    expect_marker("labels")
    label_rows = []
    first_label_line = lineno
    while lineno <= len(lines):
        label_rows.append(_parse_ints(path, lineno, lines[lineno - 1]))
        lineno += 1
    if doc_lengths is not None:
        if len(label_rows) != len(doc_lengths):
            raise InterchangeError(
                f"{path}:{first_label_line}: {len(label_rows)} label lines for"
                f" {len(doc_lengths)} corpus documents"
            )
        for i, row in enumerate(label_rows):
            if row.shape[0] != int(doc_lengths[i]):
                raise InterchangeError(
                    f"{path}:{first_label_line + i}: {row.shape[0]} labels for a"
                    f" document of {int(doc_lengths[i])} tokens"
                )
    if not label_rows:
        raise InterchangeError(f"{path}: missing label rows")
    flat = np.concatenate(label_rows)
    if flat.size and (flat.min() < 0 or flat.max() >= k):
        raise InterchangeError(f"{path}: label id out of range [0, {k})")

    for name, mat in (("topic_doc", topic_doc), ("word_topic", word_topic)):
        sums = mat.sum(axis=1)
        bad = np.flatnonzero(np.abs(sums - 1.0) > TopicModelResult.ROW_SUM_TOL)
        if bad.size:
            raise InterchangeError(
                f"{path}: {name} row {bad[0]} sums to {sums[bad[0]]!r}"
            )
    return TopicModelResult(
        topic_doc=topic_doc,
        word_topic=word_topic,
        token_labels=TokenLabeling(flat, k),
        algorithm_tag=algorithm,
        hyperparams=hyperparams,
    )


def append_score_rows(path: str | Path, rows: Iterable[Mapping[str, object]]) -> None:
    """Append score rows, writing the header when the file is new or empty."""
    path = Path(path)
    fresh = not path.exists() or path.stat().st_size == 0
    try:
        with path.open("a", encoding="utf-8", newline="") as fh:
            writer = csv.DictWriter(fh, fieldnames=SCORE_COLUMNS, lineterminator="\n")
            if fresh:
                writer.writeheader()
            for row in rows:
                writer.writerow({col: row.get(col, "") for col in SCORE_COLUMNS})
    except OSError as exc:
        raise InterchangeError(f"cannot write {path}: {exc}") from exc


def read_scores(path: str | Path) -> list[dict[str, object]]:
    """Read a scores CSV back into typed dicts (numbers parsed, nan kept)."""
    path = Path(path)
    out: list[dict[str, object]] = []
    try:
        with path.open("r", encoding="utf-8", newline="") as fh:
            reader = csv.DictReader(fh)
            if reader.fieldnames is not None and tuple(reader.fieldnames) != SCORE_COLUMNS:
                raise InterchangeError(f"{path}: unexpected scores schema")
            for raw in reader:
                row: dict[str, object] = {}
                for key, value in raw.items():
                    if value is None:
                        row[key] = ""
                        continue
                    try:
                        row[key] = int(value)
                    except ValueError:
                        try:
                            row[key] = float(value)
                        except ValueError:
                            row[key] = value
                out.append(row)
    except OSError as exc:
        raise InterchangeError(f"cannot read {path}: {exc}") from exc
    return out


def score_is_complete(row: Mapping[str, object]) -> bool:
    """A row counts as done when its NMI parsed to a finite number."""
    value = row.get("nmi", "")
    return isinstance(value, (int, float)) and math.isfinite(float(value))
