"""Volatility forecasting from the Risk Factors section of annual reports.

Subpackages cover filing ingestion, word-embedding queries, lexicon
handling, term-weighted features, market data and GARCH, kernel
regression, feature fusion, and the evaluation harness.
"""

from . import (
    embeddings,
    errors,
    evaluation,
    features,
    filings,
    fusion,
    learning,
    lexicon,
    market,
)

__all__ = [
    "embeddings",
    "errors",
    "evaluation",
    "features",
    "filings",
    "fusion",
    "learning",
    "lexicon",
    "market",
]

__version__ = "0.1.0"
