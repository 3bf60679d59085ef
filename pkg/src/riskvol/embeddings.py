"""Pre-trained word vectors and similarity queries for lexicon expansion.

Vectors are expected over stemmed tokens, matching the token streams the
rest of the pipeline produces. Neighbor queries are exact brute-force
scans over the vocabulary.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import FormatError, UnknownTerm, ZeroVector

logger = logging.getLogger(__name__)

DEFAULT_SIMILARITY_THRESHOLD = 0.70


@dataclass(frozen=True)
class EmbeddingTable:
    """Immutable term-to-vector table with precomputed norms."""

    dim: int
    terms: tuple[str, ...]
    matrix: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "matrix", np.asarray(self.matrix, dtype=float))
        if self.matrix.shape != (len(self.terms), self.dim):
            raise ValueError("matrix shape does not match terms and dim")
        if not np.all(np.isfinite(self.matrix)):
            raise ValueError("vectors must be finite")
        object.__setattr__(self, "_index", {t: i for i, t in enumerate(self.terms)})
        if len(self._index) != len(self.terms):
            raise ValueError("terms must be unique")
        object.__setattr__(self, "_norms", np.linalg.norm(self.matrix, axis=1))

    def __contains__(self, term: str) -> bool:
        return term in self._index

    def __len__(self) -> int:
        return len(self.terms)

    def vector(self, term: str) -> np.ndarray:
        try:
            return self.matrix[self._index[term]]
        except KeyError:
            raise UnknownTerm(f"term {term!r} not in vocabulary") from None


@dataclass(frozen=True)
class NeighborSet:
    """Similarity-ranked neighbors of one term, the term itself excluded."""

    term: str
    neighbors: tuple[tuple[str, float], ...]

    def terms(self) -> tuple[str, ...]:
        return tuple(t for t, _ in self.neighbors)


def load_embeddings(path) -> EmbeddingTable:
    """Load vectors in the word2vec text interchange format.

    An optional first line may carry "count dim"; otherwise the dimension
    is inferred from the first row. Duplicate terms keep their first
    occurrence and log a warning.
    """
    terms: list[str] = []
    rows: list[np.ndarray] = []
    index: dict[str, int] = {}
    dim = None
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            parts = line.split()
            if not parts:
                continue
            if lineno == 1 and len(parts) == 2:
                try:
                    int(parts[0]), int(parts[1])
                except ValueError:
                    pass
                else:
                    dim = int(parts[1])
                    continue
            term, values = parts[0], parts[1:]
            if dim is None:
                dim = len(values)
                if dim == 0:
                    raise FormatError("first row has no vector entries", line=lineno)
            if len(values) != dim:
                raise FormatError(
                    f"expected {dim} vector entries, got {len(values)}", line=lineno
                )
            try:
                vec = np.array([float(v) for v in values])
            except ValueError:
                raise FormatError("non-numeric vector entry", line=lineno) from None
            if not np.all(np.isfinite(vec)):
                raise FormatError("non-finite vector entry", line=lineno)
            if term in index:
                logger.warning("duplicate term %r at line %d kept first occurrence", term, lineno)
                continue
            index[term] = len(terms)
            terms.append(term)
            rows.append(vec)
    if not rows:
        raise FormatError("embedding file has no vectors")
    return EmbeddingTable(dim=dim, terms=tuple(terms), matrix=np.vstack(rows))


def cosine_sim(table: EmbeddingTable, t: str, t2: str) -> float:
    """Cosine of the two term vectors, clamped to [-1, 1]."""
    v1, v2 = table.vector(t), table.vector(t2)
    n1, n2 = np.linalg.norm(v1), np.linalg.norm(v2)
    if n1 == 0.0 or n2 == 0.0:
        raise ZeroVector("cosine similarity undefined for an all-zero vector")
    value = float(np.dot(v1, v2) / (n1 * n2))
    return max(-1.0, min(1.0, value))


def _ranked_similarities(table: EmbeddingTable, t: str):
    """(term, similarity) for every other term with a nonzero vector."""
    v = table.vector(t)
    norm = np.linalg.norm(v)
    if norm == 0.0:
        raise ZeroVector(f"term {t!r} has an all-zero vector")
    norms = table._norms
    valid = norms > 0.0
    sims = np.zeros(len(table.terms))
    sims[valid] = table.matrix[valid] @ v / (norms[valid] * norm)
    np.clip(sims, -1.0, 1.0, out=sims)
    pairs = [
        (term, float(sims[i]))
        for i, term in enumerate(table.terms)
        if term != t and valid[i]
    ]
    pairs.sort(key=lambda p: (-p[1], p[0]))
    return pairs


def related_terms(
    table: EmbeddingTable, t: str, threshold: float = DEFAULT_SIMILARITY_THRESHOLD
) -> NeighborSet:
    """All other vocabulary terms with cosine similarity at or above the threshold."""
    if not 0.0 < threshold <= 1.0:
        raise ValueError("threshold must be in (0, 1]")
    pairs = _ranked_similarities(table, t)
    return NeighborSet(
        term=t, neighbors=tuple(p for p in pairs if p[1] >= threshold)
    )


def top_k_neighbors(table: EmbeddingTable, t: str, k: int) -> NeighborSet:
    """The k most similar terms (fewer when the vocabulary is smaller)."""
    if k < 0:
        raise ValueError("k must be non-negative")
    pairs = _ranked_similarities(table, t) if k else []
    return NeighborSet(term=t, neighbors=tuple(pairs[:k]))
