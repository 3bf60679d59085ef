# %% [markdown]
# # Term weighting over a toy risk-report corpus
#
# Three tiny "reports" and a four-keyword lexicon are enough to watch
# every weighting scheme at work: raw log counts (TC), length-normalized
# counts (TF), the inverse-document-frequency variant (TFIDF), and the
# saturating BM25 weight. Each scheme also has an embedding-extended
# variant in which a keyword's count is topped up by the
# similarity-weighted counts of its neighbors.

# %%
import math

import numpy as np

from riskvol.embeddings import EmbeddingTable, related_terms, top_k_neighbors
from riskvol.features import (
    WeightingSpec,
    build_feature_matrix,
    corpus_stats,
    extended_term_count,
    pca_fit,
    pca_transform,
)
from riskvol.filings import TokenizedDoc
from riskvol.lexicon import Lexicon

# %% [markdown]
# ## A corpus of three documents
#
# Tokens are already stemmed, exactly as the ingestion pipeline would
# produce them.

# %%
def doc(doc_id, tokens):
    return TokenizedDoc(
        doc_id=doc_id, company_id=doc_id, issue_date=None, sector=None,
        tokens=tuple(tokens),
    )

docs = [
    doc("d1", ["risk", "risk", "hazard", "loss", "gain"]),
    doc("d2", ["crisi", "crisi", "crisi", "collaps", "risk", "boom"]),
    doc("d3", ["growth", "boom", "gain", "gain"]),
]
keywords = ("risk", "loss", "crisi", "gain")
lexicon = Lexicon(
    entries=keywords,
    categories={t: frozenset({"negative"}) for t in keywords},
    origin={t: "original" for t in keywords},
    source_of={},
)
stats = corpus_stats(docs)
print("documents:", stats.doc_count, "| mean length:", stats.avgdl)
print("document frequencies:", {t: stats.df.get(t, 0) for t in keywords})

# %% [markdown]
# ## Word vectors on the unit circle
#
# Placing each term at a known angle makes every cosine similarity a
# cosine of an angle difference, so the numbers below are easy to check
# by hand. The neighbor threshold is 0.70.

# %%
angles = {
    "risk": 0, "hazard": 20, "loss": 50, "collaps": 75,
    "crisi": 90, "boom": 150, "growth": 160, "gain": 180,
}
table = EmbeddingTable(
    dim=2,
    terms=tuple(angles),
    matrix=np.array(
        [[math.cos(math.radians(a)), math.sin(math.radians(a))] for a in angles.values()]
    ),
)
for term in keywords:
    neighbors = related_terms(table, term, 0.70).neighbors
    print(f"R({term}) =", [(t, round(s, 4)) for t, s in neighbors])

# %% [markdown]
# ## Plain versus extended counts
#
# In d2 the keyword "loss" never appears, yet its extended count is far
# from zero: "collaps" and three occurrences of "crisi" are similar
# enough to contribute.

# %%
for term in keywords:
    plain = extended_term_count(docs[1], term, None)
    extended = extended_term_count(docs[1], term, table, 0.70)
    print(f"d2 {term:>6}: plain={plain:.0f} extended={extended:.4f}")

# %% [markdown]
# ## All eight weighting variants

# %%
for scheme in ("TC", "TF", "TFIDF", "BM25"):
    for extended in (False, True):
        spec = WeightingSpec(scheme=scheme, extended=extended)
        matrix = build_feature_matrix(docs, lexicon, spec, stats, table)
        print(f"{spec.name:>10}:")
        for doc_id, row in zip(matrix.doc_ids, matrix.values):
            print("   ", doc_id, np.round(row, 4))

# %% [markdown]
# ## Dimensionality reduction
#
# On real corpora the keyword matrix is wide and sparse; principal
# components compress it before the regressor sees it. Here two
# components already explain all the variance of the three rows.

# %%
spec = WeightingSpec(scheme="BM25", extended=True)
matrix = build_feature_matrix(docs, lexicon, spec, stats, table)
model = pca_fit(matrix, 2)
reduced = pca_transform(model, matrix)
print("explained variance:", np.round(model.explained_variance, 5))
for doc_id, row in zip(reduced.doc_ids, reduced.values):
    print(doc_id, np.round(row, 4))
