"""Weighted document-by-keyword feature matrices and PCA reduction.

Four weighting schemes are supported, each in a plain and an
embedding-extended variant. The extended variant replaces every raw
keyword count with the count plus the similarity-weighted counts of the
keyword's embedding neighbors above a cosine threshold.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass

import numpy as np

from .embeddings import DEFAULT_SIMILARITY_THRESHOLD, EmbeddingTable, related_terms
from .errors import (
    DegenerateInput,
    DimensionMismatch,
    EmptyCorpus,
    EmptyLexicon,
    FormatError,
)
from .lexicon import Lexicon

SCHEMES = ("TC", "TF", "TFIDF", "BM25")

DEFAULT_BM25_K = 1.2
DEFAULT_BM25_B = 0.65
DEFAULT_PCA_DIMS = 400


@dataclass(frozen=True)
class WeightingSpec:
    """Which scheme to apply and with which parameters.

    ``idf_literal`` switches the inverse-document-frequency argument to
    the document length (the formula as literally printed) instead of
    the corpus document count.
    """

    scheme: str = "BM25"
    extended: bool = False
    k: float = DEFAULT_BM25_K
    b: float = DEFAULT_BM25_B
    similarity_threshold: float = DEFAULT_SIMILARITY_THRESHOLD
    idf_literal: bool = False

    def __post_init__(self):
        if self.scheme not in SCHEMES:
            raise ValueError(f"unknown scheme {self.scheme!r}")
        if not self.k > 0:
            raise ValueError("k must be positive")
        if not 0.0 <= self.b <= 1.0:
            raise ValueError("b must be in [0, 1]")
        if not 0.0 < self.similarity_threshold <= 1.0:
            raise ValueError("similarity threshold must be in (0, 1]")

    @property
    def name(self) -> str:
        return ("ext-" if self.extended else "") + self.scheme


@dataclass(frozen=True)
class CorpusStats:
    """Document frequencies and length statistics of one corpus."""

    doc_count: int
    avgdl: float
    df: dict
    doc_lengths: dict


@dataclass(frozen=True)
class FeatureMatrix:
    """Dense documents-by-features matrix with row and column names."""

    doc_ids: tuple[str, ...]
    feature_names: tuple[str, ...]
    values: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "doc_ids", tuple(self.doc_ids))
        object.__setattr__(self, "feature_names", tuple(self.feature_names))
        object.__setattr__(self, "values", np.asarray(self.values, dtype=float))
        if self.values.shape != (len(self.doc_ids), len(self.feature_names)):
            raise ValueError("matrix shape does not match names")
        if np.any(np.isnan(self.values)):
            raise ValueError("matrix contains NaN entries")

    def row(self, doc_id: str) -> np.ndarray:
        return self.values[self.doc_ids.index(doc_id)]

    def subset(self, doc_ids) -> "FeatureMatrix":
        index = {d: i for i, d in enumerate(self.doc_ids)}
        rows = [index[d] for d in doc_ids]
        return FeatureMatrix(
            doc_ids=tuple(doc_ids),
            feature_names=self.feature_names,
            values=self.values[rows],
        )


def corpus_stats(docs) -> CorpusStats:
    """Document frequencies (presence, not multiplicity) and mean length."""
    docs = list(docs)
    if not docs:
        raise EmptyCorpus("no documents")
    df: Counter = Counter()
    lengths = {}
    for doc in docs:
        lengths[doc.doc_id] = doc.length
        df.update(set(doc.tokens))
    return CorpusStats(
        doc_count=len(docs),
        avgdl=sum(lengths.values()) / len(docs),
        df=dict(df),
        doc_lengths=lengths,
    )


def extended_term_count(
    doc,
    term: str,
    table: EmbeddingTable | None,
    threshold: float = DEFAULT_SIMILARITY_THRESHOLD,
) -> float:
    """Raw count plus similarity-weighted counts of embedding neighbors.

    Falls back to the raw count when the term is missing from the
    vocabulary or no table is given.
    """
    counts = Counter(doc.tokens)
    base = float(counts[term])
    if table is None or term not in table:
        return base
    total = base
    for neighbor, sim in related_terms(table, term, threshold).neighbors:
        c = counts[neighbor]
        if c:
            total += sim * c
    return total


def _neighbor_lists(lexicon_terms, table, threshold):
    """term -> ((neighbor, sim), ...) for lexicon terms found in the vocabulary."""
    out = {}
    for term in lexicon_terms:
        if table is not None and term in table:
            out[term] = related_terms(table, term, threshold).neighbors
        else:
            out[term] = ()
    return out


def _count_matrix(docs, lex: Lexicon, spec: WeightingSpec, table) -> np.ndarray:
    """Per-document counts for every lexicon term, extended when requested."""
    terms = lex.entries
    col = {t: j for j, t in enumerate(terms)}
    counts = np.zeros((len(docs), len(terms)))
    neighbor_lists = (
        _neighbor_lists(terms, table, spec.similarity_threshold)
        if spec.extended
        else None
    )
    for i, doc in enumerate(docs):
        doc_counts = Counter(doc.tokens)
        for t, j in col.items():
            counts[i, j] = doc_counts.get(t, 0)
        if spec.extended:
            for t, j in col.items():
                for neighbor, sim in neighbor_lists[t]:
                    c = doc_counts.get(neighbor, 0)
                    if c:
                        counts[i, j] += sim * c
    return counts


def _weights_from_counts(
    counts: np.ndarray, docs, spec: WeightingSpec, stats: CorpusStats, lex: Lexicon
) -> np.ndarray:
    """Apply the selected scheme to a per-document count matrix."""
    tc = np.log1p(counts)
    if spec.scheme == "TC":
        return tc
    doc_lengths = np.array([stats.doc_lengths.get(d.doc_id, d.length) for d in docs], dtype=float)
    if spec.scheme in ("TF", "TFIDF"):
        norms = np.linalg.norm(tc, axis=1)
        safe = np.where(norms > 0, norms, 1.0)
        tf = tc / safe[:, None]
        if spec.scheme == "TF":
            return tf
        df = np.array([stats.df.get(t, 0) for t in lex.entries], dtype=float)
        if spec.idf_literal:
            with np.errstate(divide="ignore", invalid="ignore"):
                idf = np.log1p(np.where(df > 0, doc_lengths[:, None] / df[None, :], 0.0))
        else:
            idf = np.where(df > 0, np.log1p(stats.doc_count / np.where(df > 0, df, 1.0)), 0.0)
            idf = np.broadcast_to(idf, tf.shape)
        return np.where(df[None, :] > 0, tf * idf, 0.0)
    # BM25: saturating count with document-length normalization
    denom = (1.0 - spec.b) + spec.b * (doc_lengths / stats.avgdl) if stats.avgdl > 0 else np.ones_like(doc_lengths)
    cbar = counts / denom[:, None]
    return (spec.k + 1.0) * cbar / (spec.k + cbar)


def term_weight(
    doc,
    term: str,
    spec: WeightingSpec,
    stats: CorpusStats,
    table: EmbeddingTable | None = None,
    lex: Lexicon | None = None,
) -> float:
    """Weight of one term in one document under the given scheme.

    The TF and TFIDF schemes normalize by the Euclidean norm of the
    document's full keyword-weight vector, so they need the lexicon.
    """
    if spec.scheme in ("TF", "TFIDF") and lex is None:
        raise ValueError("TF and TFIDF need the lexicon for the document norm")
    if lex is None:
        lex = Lexicon(
            entries=(term,),
            categories={term: frozenset({"uncertainty"})},
            origin={term: "original"},
            source_of={},
        )
    if term not in lex.categories:
        raise ValueError(f"term {term!r} is not a lexicon entry")
    counts = _count_matrix([doc], lex, spec, table)
    weights = _weights_from_counts(counts, [doc], spec, stats, lex)
    return float(weights[0, lex.entries.index(term)])


def build_feature_matrix(
    docs,
    lex: Lexicon,
    spec: WeightingSpec,
    stats: CorpusStats | None = None,
    table: EmbeddingTable | None = None,
) -> FeatureMatrix:
    """One row per document, one column per lexicon entry, in lexicon order."""
    docs = list(docs)
    if not docs:
        raise EmptyCorpus("no documents")
    if not lex.entries:
        raise EmptyLexicon("lexicon has no entries")
    if stats is None:
        stats = corpus_stats(docs)
    counts = _count_matrix(docs, lex, spec, table)
    values = _weights_from_counts(counts, docs, spec, stats, lex)
    return FeatureMatrix(
        doc_ids=tuple(d.doc_id for d in docs),
        feature_names=lex.entries,
        values=values,
    )


@dataclass(frozen=True)
class PcaModel:
    """Mean vector plus an orthonormal basis of principal directions."""

    mean: np.ndarray
    components: np.ndarray
    explained_variance: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "mean", np.asarray(self.mean, dtype=float))
        object.__setattr__(self, "components", np.asarray(self.components, dtype=float))
        object.__setattr__(
            self, "explained_variance", np.asarray(self.explained_variance, dtype=float)
        )

    @property
    def n_components(self) -> int:
        return self.components.shape[0]

    @property
    def n_features(self) -> int:
        return self.components.shape[1]


def pca_fit(matrix: FeatureMatrix, n_components: int) -> PcaModel:
    """Principal components via singular value decomposition.

    Components are right-singular vectors of the mean-centered data with
    the sign flipped so each component's largest-magnitude entry is
    positive; explained variances are squared singular values over
    (rows - 1).
    """
    x = matrix.values
    rows, cols = x.shape
    if rows < 2:
        raise DegenerateInput("need at least 2 rows to fit")
    if not 1 <= n_components <= min(rows, cols):
        raise DimensionMismatch(
            f"n_components must be in [1, {min(rows, cols)}], got {n_components}"
        )
    mean = x.mean(axis=0)
    _, singular, vt = np.linalg.svd(x - mean, full_matrices=False)
    components = vt[:n_components]
    # deterministic sign: largest-|entry| coordinate is positive
    flip = np.sign(components[np.arange(len(components)),
                              np.argmax(np.abs(components), axis=1)])
    flip[flip == 0] = 1.0
    components = components * flip[:, None]
    return PcaModel(
        mean=mean,
        components=components,
        explained_variance=(singular[:n_components] ** 2) / (rows - 1),
    )


def pca_transform(model: PcaModel, matrix: FeatureMatrix) -> FeatureMatrix:
    """Project rows onto the principal directions."""
    if matrix.values.shape[1] != model.n_features:
        raise DimensionMismatch(
            f"matrix has {matrix.values.shape[1]} columns, model expects {model.n_features}"
        )
    projected = (matrix.values - model.mean) @ model.components.T
    return FeatureMatrix(
        doc_ids=matrix.doc_ids,
        feature_names=tuple(f"pc{i + 1}" for i in range(model.n_components)),
        values=projected,
    )


def save_feature_matrix(matrix: FeatureMatrix, path) -> None:
    """Tab-delimited text: header of feature names, first column doc_id."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("doc_id\t" + "\t".join(matrix.feature_names) + "\n")
        for doc_id, row in zip(matrix.doc_ids, matrix.values):
            fh.write(doc_id + "\t" + "\t".join(repr(float(v)) for v in row) + "\n")


def load_feature_matrix(path) -> FeatureMatrix:
    with open(path, encoding="utf-8") as fh:
        header = fh.readline().rstrip("\n").split("\t")
        if not header or header[0] != "doc_id":
            raise FormatError("first header column must be doc_id", line=1)
        names = tuple(header[1:])
        doc_ids = []
        rows = []
        for lineno, line in enumerate(fh, start=2):
            if not line.strip():
                continue
            cols = line.rstrip("\n").split("\t")
            if len(cols) != len(names) + 1:
                raise FormatError("row width does not match header", line=lineno)
            doc_ids.append(cols[0])
            try:
                rows.append([float(v) for v in cols[1:]])
            except ValueError:
                raise FormatError("non-numeric entry", line=lineno) from None
    return FeatureMatrix(
        doc_ids=tuple(doc_ids),
        feature_names=names,
        values=np.array(rows) if rows else np.zeros((0, len(names))),
    )


def save_pca_model(model: PcaModel, path) -> None:
    """Structured text: dimensions, mean, variances, components row-major."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(f"n_components {model.n_components}\n")
        fh.write(f"n_features {model.n_features}\n")
        fh.write("mean " + " ".join(repr(float(v)) for v in model.mean) + "\n")
        fh.write(
            "explained_variance "
            + " ".join(repr(float(v)) for v in model.explained_variance)
            + "\n"
        )
        fh.write("components\n")
        for row in model.components:
            fh.write(" ".join(repr(float(v)) for v in row) + "\n")


def load_pca_model(path) -> PcaModel:
    with open(path, encoding="utf-8") as fh:
        lines = fh.read().splitlines()
    try:
        n_components = int(lines[0].split()[1])
        n_features = int(lines[1].split()[1])
        mean = np.array([float(v) for v in lines[2].split()[1:]])
        explained = np.array([float(v) for v in lines[3].split()[1:]])
        if lines[4] != "components":
            raise FormatError("expected components block", line=5)
        components = np.array(
            [[float(v) for v in line.split()] for line in lines[5:5 + n_components]]
        )
    except (IndexError, ValueError) as exc:
        raise FormatError(f"malformed model file: {exc}") from None
    if components.shape != (n_components, n_features) or len(mean) != n_features:
        raise FormatError("model dimensions are inconsistent")
    return PcaModel(mean=mean, components=components, explained_variance=explained)
