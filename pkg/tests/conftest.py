"""Shared fixture builders for the test suite."""

import datetime as dt
import math
import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from riskvol.embeddings import EmbeddingTable
from riskvol.filings import TokenizedDoc
from riskvol.lexicon import ORIGINAL, Lexicon


def make_doc(doc_id, tokens, company_id="", issue_date=None, sector=None):
    return TokenizedDoc(
        doc_id=doc_id,
        company_id=company_id or doc_id,
        issue_date=issue_date,
        sector=sector,
        tokens=tuple(tokens),
    )


def make_table(vectors: dict) -> EmbeddingTable:
    terms = tuple(vectors)
    matrix = np.array([vectors[t] for t in terms], dtype=float)
    return EmbeddingTable(dim=matrix.shape[1], terms=terms, matrix=matrix)


def make_lexicon(*terms, category="negative") -> Lexicon:
    return Lexicon(
        entries=tuple(terms),
        categories={t: frozenset({category}) for t in terms},
        origin={t: ORIGINAL for t in terms},
        source_of={},
    )


def unit_vector(degrees: float):
    rad = math.radians(degrees)
    return (math.cos(rad), math.sin(rad))


# Toy embedding space on the unit circle; similarities are cosines of
# angle differences, so every value below is hand-checkable.
FIXTURE_ANGLES = {
    "risk": 0.0,
    "hazard": 20.0,
    "loss": 50.0,
    "collaps": 75.0,
    "crisi": 90.0,
    "boom": 150.0,
    "growth": 160.0,
    "gain": 180.0,
}


@pytest.fixture
def fixture_table() -> EmbeddingTable:
    return make_table({t: unit_vector(a) for t, a in FIXTURE_ANGLES.items()})


FIXTURE_LEXICON_TERMS = ("risk", "loss", "crisi", "gain")


@pytest.fixture
def fixture_lexicon() -> Lexicon:
    return make_lexicon(*FIXTURE_LEXICON_TERMS)


FIXTURE_DOC_TOKENS = {
    "d1": ("risk", "risk", "hazard", "loss", "gain"),
    "d2": ("crisi", "crisi", "crisi", "collaps", "risk", "boom"),
    "d3": ("growth", "boom", "gain", "gain"),
}


@pytest.fixture
def fixture_docs():
    return [
        make_doc(doc_id, tokens, issue_date=dt.date(2014, 3, 1), sector="fin")
        for doc_id, tokens in FIXTURE_DOC_TOKENS.items()
    ]


def simulate_garch(omega, alpha, beta, n, seed, burn_in=500):
    """Simulate the (1,1) conditional-variance recursion with Gaussian shocks."""
    rng = np.random.default_rng(seed)
    total = n + burn_in
    z = rng.standard_normal(total)
    variance = omega / (1.0 - alpha - beta)
    returns = np.empty(total)
    for t in range(total):
        returns[t] = math.sqrt(variance) * z[t]
        variance = omega + alpha * returns[t] ** 2 + beta * variance
    return returns[burn_in:]


def trading_dates(start: dt.date, n: int):
    """n consecutive weekdays starting at or after start."""
    out = []
    current = start
    while len(out) < n:
        if current.weekday() < 5:
            out.append(current)
        current += dt.timedelta(days=1)
    return tuple(out)
