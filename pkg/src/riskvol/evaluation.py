"""Metrics and the experiment harness: cross-validation, temporal and
sector splits, centroid drift, and coefficient reports.

All train-side artifacts (corpus statistics, feature weights, PCA,
outlier thresholds in train-fold scope, models) are functions of the
training fold only; test documents never influence them.
"""

from __future__ import annotations

import math
from contextlib import contextmanager
from dataclasses import dataclass, field

import numpy as np

from .embeddings import EmbeddingTable
from .errors import (
    Empty,
    EmptySide,
    EmptyYear,
    LengthMismatch,
    RiskvolError,
    TooFewDocs,
    UnknownSector,
)
from .features import (
    FeatureMatrix,
    WeightingSpec,
    build_feature_matrix,
    corpus_stats,
    pca_fit,
    pca_transform,
)
from .fusion import early_fusion, fit_standardizer, stacking_predict, stacking_train
from .learning import KernelSpec, linreg_fit, mkl_predict, mkl_train, svr_predict, svr_train
from .lexicon import DEFAULT_EXPANSION_K, Lexicon, expand_lexicon
from .market import (
    DEFAULT_MIN_GARCH_OBS,
    MARKET_FEATURE_NAMES,
    MarketFeatures,
    PriceSeries,
    VolatilityLabels,
    filter_outliers,
    log_returns,
    market_features,
    quarterly_labels,
)

FUSIONS = ("text_only", "market_only", "garch_only", "early", "stacking", "mkl")
LEXICON_MODES = ("Lex", "LexExt")
OUTLIER_SCOPES = ("global", "train_fold")


class RSquared(float):
    """Squared correlation value carrying a zero-variance flag."""

    degenerate: bool = False

    def __new__(cls, value: float, degenerate: bool = False):
        obj = super().__new__(cls, value)
        obj.degenerate = degenerate
        return obj


def r_squared(pred, labels) -> RSquared:
    """Square of the Pearson correlation between predictions and labels.

    Zero variance on either side yields 0 with the degenerate flag set.
    """
    p = np.asarray(pred, dtype=float)
    y = np.asarray(labels, dtype=float)
    if len(p) != len(y):
        raise LengthMismatch(f"{len(p)} predictions vs {len(y)} labels")
    if len(p) == 0:
        raise Empty("no values")
    dp = p - p.mean()
    dy = y - y.mean()
    sp = math.sqrt(float(dp @ dp))
    sy = math.sqrt(float(dy @ dy))
    if sp == 0.0 or sy == 0.0:
        return RSquared(0.0, degenerate=True)
    r = float(dp @ dy) / (sp * sy)
    return RSquared(min(r * r, 1.0))


def mse(pred, labels) -> float:
    """Mean squared error."""
    p = np.asarray(pred, dtype=float)
    y = np.asarray(labels, dtype=float)
    if len(p) != len(y):
        raise LengthMismatch(f"{len(p)} predictions vs {len(y)} labels")
    if len(p) == 0:
        raise Empty("no values")
    return float(np.mean((p - y) ** 2))


@dataclass(frozen=True)
class SplitSpec:
    """How to partition documents into train and test sets."""

    kind: str = "kfold"  # kfold | temporal | sector_specific | sector_agnostic
    k: int = 5
    seed: int = 0
    test_year: int | None = None
    sector: str | None = None
    sampling_seed: int = 0

    def __post_init__(self):
        if self.kind not in ("kfold", "temporal", "sector_specific", "sector_agnostic"):
            raise ValueError(f"unknown split kind {self.kind!r}")
        if self.kind == "temporal" and self.test_year is None:
            raise ValueError("temporal split needs test_year")
        if self.kind.startswith("sector") and not self.sector:
            raise ValueError("sector split needs a sector code")


@dataclass(frozen=True)
class ExperimentSpec:
    """One full pipeline configuration."""

    scheme: WeightingSpec = field(default_factory=WeightingSpec)
    lexicon_mode: str = "Lex"
    pca_dims: int = 400
    fusion: str = "text_only"
    horizons: tuple = (1, 2, 3, 4)
    split: SplitSpec = field(default_factory=SplitSpec)

    def __post_init__(self):
        if self.lexicon_mode not in LEXICON_MODES:
            raise ValueError(f"unknown lexicon mode {self.lexicon_mode!r}")
        if self.fusion not in FUSIONS:
            raise ValueError(f"unknown fusion {self.fusion!r}")
        if self.pca_dims < 1:
            raise ValueError("pca_dims must be at least 1")
        horizons = tuple(sorted(set(self.horizons)))
        if not horizons or any(h < 1 or h > 8 for h in horizons):
            raise ValueError("horizons must be a non-empty subset of 1..8")
        object.__setattr__(self, "horizons", horizons)

    @property
    def name(self) -> str:
        return f"{self.scheme.name}_{self.lexicon_mode}_{self.fusion}"


@dataclass(frozen=True)
class EngineOptions:
    """Engine-level knobs shared by every experiment."""

    svr_c: float = 1.0
    svr_epsilon: float = 0.1
    unaveraged_loss: bool = False
    outlier_scope: str = "global"
    expansion_k: int = DEFAULT_EXPANSION_K
    min_garch_obs: int = DEFAULT_MIN_GARCH_OBS
    stacking_seed: int = 0

    def __post_init__(self):
        if self.outlier_scope not in OUTLIER_SCOPES:
            raise ValueError(f"unknown outlier scope {self.outlier_scope!r}")


@dataclass
class EvalReport:
    """Aggregated and fold-level metric values of one experiment."""

    spec_name: str
    horizons: tuple
    per_horizon: dict          # horizon -> {"r2","mse","folds_used","degenerate_folds"}
    folds: list                # fold records with per-horizon values
    first_year_r2: float | None
    first_year_mse: float | None
    outlier_drops: dict        # horizon -> dropped document count (global scope)
    per_sector: dict | None = None

    def to_dict(self) -> dict:
        return {
            "spec": self.spec_name,
            "horizons": list(self.horizons),
            "per_horizon": {
                str(k): v for k, v in sorted(self.per_horizon.items())
            },
            "folds": self.folds,
            "first_year_r2": self.first_year_r2,
            "first_year_mse": self.first_year_mse,
            "outlier_drops": {str(k): v for k, v in sorted(self.outlier_drops.items())},
            "per_sector": self.per_sector,
        }

    def format_table(self) -> str:
        lines = [f"experiment: {self.spec_name}"]
        lines.append(f"{'horizon':>8} {'r2':>10} {'mse':>10} {'folds':>6}")
        for k in self.horizons:
            row = self.per_horizon[k]
            r2 = "nan" if row["r2"] is None else f"{row['r2']:.4f}"
            m = "nan" if row["mse"] is None else f"{row['mse']:.4f}"
            lines.append(f"{k:>8} {r2:>10} {m:>10} {row['folds_used']:>6}")
        if self.first_year_r2 is not None:
            lines.append(
                f"{'year1':>8} {self.first_year_r2:>10.4f} {self.first_year_mse:>10.4f}"
            )
        return "\n".join(lines) + "\n"


def kfold_assignments(doc_ids, k: int, seed: int) -> list:
    """Round-robin folds over a seeded shuffle of the sorted ids.

    Depends only on the id set, k and the seed, never on input order.
    """
    ordered = sorted(doc_ids)
    if k < 2 or k > len(ordered):
        raise ValueError(f"k must be in [2, {len(ordered)}]")
    rng = np.random.default_rng(seed)
    shuffled = [ordered[i] for i in rng.permutation(len(ordered))]
    folds = [[] for _ in range(k)]
    for i, doc_id in enumerate(shuffled):
        folds[i % k].append(doc_id)
    return [tuple(sorted(f)) for f in folds]


def temporal_split(corpus, test_year: int):
    """Test set: documents issued in test_year; train: all earlier years."""
    train = tuple(sorted(
        d.doc_id for d in corpus
        if d.issue_date is not None and d.issue_date.year < test_year
    ))
    test = tuple(sorted(
        d.doc_id for d in corpus
        if d.issue_date is not None and d.issue_date.year == test_year
    ))
    if not test:
        raise EmptySide(f"no documents issued in {test_year}")
    if not train:
        raise EmptySide(f"no documents issued before {test_year}")
    return train, test


def sector_agnostic_split(corpus, sector_code: str, seed: int, test_ids=()) -> tuple:
    """Seeded uniform sample, sized like the sector's own training set.

    The sample is drawn without replacement from all documents outside
    the sector's test fold.
    """
    sector_ids = {d.doc_id for d in corpus if d.sector == sector_code}
    if not sector_ids:
        raise UnknownSector(f"no documents in sector {sector_code!r}")
    test_set = set(test_ids)
    pool = sorted({d.doc_id for d in corpus} - test_set)
    size = len(sector_ids - test_set)
    if size > len(pool):
        raise TooFewDocs("sample size exceeds available documents")
    rng = np.random.default_rng(seed)
    picked = rng.choice(len(pool), size=size, replace=False)
    return tuple(sorted(pool[i] for i in picked))


def _fold_pairs(spec: ExperimentSpec, docs, eligible_ids):
    """(train_ids, test_ids) pairs for the configured split."""
    split = spec.split
    if split.kind == "temporal":
        train, test = temporal_split(
            [d for d in docs if d.doc_id in eligible_ids], split.test_year
        )
        return [(train, test)]
    if split.kind == "kfold":
        folds = kfold_assignments(sorted(eligible_ids), split.k, split.seed)
        return [
            (tuple(sorted(set(eligible_ids) - set(fold))), fold)
            for fold in folds
        ]
    sector_ids = sorted(
        d.doc_id for d in docs if d.sector == split.sector and d.doc_id in eligible_ids
    )
    if len(sector_ids) < split.k:
        raise TooFewDocs(
            f"sector {split.sector!r} has {len(sector_ids)} usable documents, "
            f"needs at least {split.k}"
        )
    folds = kfold_assignments(sector_ids, split.k, split.seed)
    pairs = []
    for fold in folds:
        if split.kind == "sector_specific":
            train = tuple(sorted(set(sector_ids) - set(fold)))
        else:
            train = sector_agnostic_split(
                [d for d in docs if d.doc_id in eligible_ids],
                split.sector,
                split.sampling_seed,
                test_ids=fold,
            )
        pairs.append((train, fold))
    return pairs


def compute_market_table(corpus, prices, min_garch_obs: int = DEFAULT_MIN_GARCH_OBS):
    """Labels and market features per document from per-company price series.

    Returns (labels, market, drops) where drops maps doc_id to the
    failure reason for documents without usable histories.
    """
    labels: dict[str, VolatilityLabels] = {}
    market: dict[str, MarketFeatures] = {}
    drops: dict[str, str] = {}
    returns_cache = {}
    for doc in sorted(corpus, key=lambda d: d.doc_id):
        series = prices.get(doc.company_id)
        if series is None:
            drops[doc.doc_id] = "no price series"
            continue
        if doc.company_id not in returns_cache:
            returns_cache[doc.company_id] = log_returns(series)
        returns = returns_cache[doc.company_id]
        try:
            labels[doc.doc_id] = quarterly_labels(doc.issue_date, returns, doc_id=doc.doc_id)
            market[doc.doc_id] = market_features(
                doc.issue_date, doc.sector, returns, min_garch_obs=min_garch_obs
            )
        except Exception as exc:  # per-document failures must not abort the batch
            drops[doc.doc_id] = f"{type(exc).__name__}: {exc}"
            labels.pop(doc.doc_id, None)
    return labels, market, drops


def _market_matrix(doc_ids, market) -> FeatureMatrix:
    return FeatureMatrix(
        doc_ids=tuple(doc_ids),
        feature_names=MARKET_FEATURE_NAMES,
        values=np.array([market[d].as_vector() for d in doc_ids]),
    )


def _label_value(labels, doc_id: str, horizon: int):
    lab = labels.get(doc_id)
    if lab is None:
        return None
    return lab.y[horizon - 1]


def _global_outlier_keep(labels, doc_ids, horizons):
    """Per horizon: ids kept by the 3-sigma filter over all label values."""
    keep = {}
    drops = {}
    for k in horizons:
        pairs = [
            (d, _label_value(labels, d, k))
            for d in doc_ids
            if _label_value(labels, d, k) is not None
        ]
        if len(pairs) < 2:
            keep[k] = {d for d, _ in pairs}
            drops[k] = 0
            continue
        values = np.array([v for _, v in pairs])
        kept_idx = set(filter_outliers(values).tolist())
        keep[k] = {d for i, (d, _) in enumerate(pairs) if i in kept_idx}
        drops[k] = len(pairs) - len(keep[k])
    return keep, drops


def _train_fold_bounds(values: np.ndarray):
    mean = values.mean()
    std = values.std(ddof=1)
    return mean - 3.0 * std, mean + 3.0 * std


class _FoldModel:
    """Train-side artifacts of one fold, built from the training ids only."""

    def __init__(self, spec, options, train_docs, lex, table):
        self.spec = spec
        self.options = options
        self.stats = corpus_stats(train_docs)
        self.text_train = build_feature_matrix(
            train_docs, lex, spec.scheme, self.stats, table
        )
        dims = min(spec.pca_dims, *self.text_train.values.shape)
        self.pca = pca_fit(self.text_train, dims)
        self.text_train_pca = pca_transform(self.pca, self.text_train)
        self.lex = lex
        self.table = table

    def text_features(self, docs) -> FeatureMatrix:
        raw = build_feature_matrix(docs, self.lex, self.spec.scheme, self.stats, self.table)
        return pca_transform(self.pca, raw)


def _fit_fold(spec, options, model: _FoldModel, market_train, y_train, train_ids):
    """Train the configured fusion on one fold's training rows."""
    text = model.text_train_pca
    c, eps = options.svr_c, options.svr_epsilon
    kw = {"unaveraged_loss": options.unaveraged_loss}
    if spec.fusion == "text_only":
        fit = svr_train(text.values, y_train, c, eps, KernelSpec("rbf"), **kw)
        return ("svr_text", fit, None)
    scaler = fit_standardizer(market_train.values)
    if spec.fusion == "market_only":
        fit = svr_train(scaler.apply(market_train.values), y_train, c, eps, KernelSpec("rbf"), **kw)
        return ("svr_market", fit, scaler)
    if spec.fusion == "garch_only":
        col = market_train.feature_names.index("garch_forecast")
        sub = market_train.values[:, [col]]
        scaler = fit_standardizer(sub)
        fit = svr_train(scaler.apply(sub), y_train, c, eps, KernelSpec("rbf"), **kw)
        return ("svr_garch", fit, scaler)
    if spec.fusion == "early":
        std_market = FeatureMatrix(
            doc_ids=market_train.doc_ids,
            feature_names=market_train.feature_names,
            values=scaler.apply(market_train.values),
        )
        joined = early_fusion(text, std_market)
        fit = svr_train(joined.values, y_train, c, eps, KernelSpec("rbf"), **kw)
        return ("svr_early", fit, scaler)
    if spec.fusion == "stacking":
        y_map = dict(zip(train_ids, y_train))
        fit = stacking_train(
            text, market_train, y_map, options.stacking_seed, c, eps, **kw
        )
        return ("stacking", fit, None)
    fit = mkl_train(
        [text.values, scaler.apply(market_train.values)],
        y_train,
        [KernelSpec("rbf"), KernelSpec("rbf")],
        c,
        eps,
        **kw,
    )
    return ("mkl", fit, scaler)


def _predict_fold(kind, fit, scaler, text_test, market_test):
    if kind == "svr_text":
        return svr_predict(fit, text_test.values)
    if kind == "svr_market":
        return svr_predict(fit, scaler.apply(market_test.values))
    if kind == "svr_garch":
        col = market_test.feature_names.index("garch_forecast")
        return svr_predict(fit, scaler.apply(market_test.values[:, [col]]))
    if kind == "svr_early":
        joined = np.hstack([text_test.values, scaler.apply(market_test.values)])
        return svr_predict(fit, joined)
    if kind == "stacking":
        return stacking_predict(fit, text_test.values, market_test.values)
    return mkl_predict(fit, [text_test.values, scaler.apply(market_test.values)])


def effective_lexicon(lex, mode, table, expansion_k=DEFAULT_EXPANSION_K) -> Lexicon:
    if mode == "LexExt":
        if table is None:
            raise ValueError("LexExt mode needs an embedding table")
        return expand_lexicon(lex, table, expansion_k)
    return lex


@contextmanager
def _stage(name):
    """Annotate errors escaping a pipeline stage with the stage name."""
    try:
        yield
    except RiskvolError as exc:
        exc.args = (f"[stage {name}] {exc}",) + exc.args[1:]
        raise


def run_experiment_on_tables(
    spec: ExperimentSpec,
    corpus,
    labels: dict,
    market: dict,
    lex: Lexicon,
    table: EmbeddingTable | None = None,
    options: EngineOptions = EngineOptions(),
    track_sectors: bool = False,
) -> EvalReport:
    """Run one experiment on precomputed label and market tables."""
    docs = sorted(corpus, key=lambda d: d.doc_id)
    by_id = {d.doc_id: d for d in docs}
    needs_market = spec.fusion != "text_only"
    eligible = {
        d.doc_id
        for d in docs
        if d.doc_id in labels and (not needs_market or d.doc_id in market)
    }
    if not eligible:
        raise Empty("no documents with usable labels")
    lex_eff = effective_lexicon(lex, spec.lexicon_mode, table, options.expansion_k)
    pairs = _fold_pairs(spec, docs, eligible)

    if options.outlier_scope == "global":
        keep, outlier_drops = _global_outlier_keep(labels, sorted(eligible), spec.horizons)
    else:
        keep, outlier_drops = None, {k: 0 for k in spec.horizons}

    fold_records = []
    sector_records: dict = {}
    for fold_idx, (train_ids, test_ids) in enumerate(pairs):
        record = {"fold": fold_idx, "per_horizon": {}}
        fold_model = None
        for k in spec.horizons:
            tr = [d for d in train_ids if _label_value(labels, d, k) is not None]
            te = [d for d in test_ids if _label_value(labels, d, k) is not None]
            flagged = 0
            if options.outlier_scope == "global":
                tr = [d for d in tr if d in keep[k]]
                te = [d for d in te if d in keep[k]]
            else:
                if len(tr) >= 2:
                    lo, hi = _train_fold_bounds(
                        np.array([_label_value(labels, d, k) for d in tr])
                    )
                    tr = [d for d in tr if lo <= _label_value(labels, d, k) <= hi]
                    flagged = sum(
                        1 for d in te if not lo <= _label_value(labels, d, k) <= hi
                    )
            if len(tr) < 2 or not te:
                record["per_horizon"][str(k)] = {
                    "r2": None, "mse": None, "n_train": len(tr), "n_test": len(te),
                    "degenerate": False, "outliers_flagged": flagged,
                }
                continue
            if fold_model is None or fold_model_ids != tuple(tr):
                with _stage(f"features fold {fold_idx}"):
                    fold_model = _FoldModel(
                        spec, options, [by_id[d] for d in tr], lex_eff, table
                    )
                fold_model_ids = tuple(tr)
            y_train = np.array([_label_value(labels, d, k) for d in tr])
            y_test = np.array([_label_value(labels, d, k) for d in te])
            market_train = _market_matrix(tr, market) if needs_market else None
            with _stage(f"train fold {fold_idx} horizon {k}"):
                kind, fit, scaler = _fit_fold(
                    spec, options, fold_model, market_train, y_train, tr
                )
            with _stage(f"score fold {fold_idx} horizon {k}"):
                text_test = fold_model.text_features([by_id[d] for d in te])
                market_test = _market_matrix(te, market) if needs_market else None
                preds = _predict_fold(kind, fit, scaler, text_test, market_test)
            r2 = r_squared(preds, y_test)
            record["per_horizon"][str(k)] = {
                "r2": float(r2),
                "mse": mse(preds, y_test),
                "n_train": len(tr),
                "n_test": len(te),
                "degenerate": r2.degenerate,
                "outliers_flagged": flagged,
            }
            if track_sectors:
                for sector in sorted({by_id[d].sector for d in te}):
                    idx = [i for i, d in enumerate(te) if by_id[d].sector == sector]
                    if len(idx) < 2:
                        continue
                    s_r2 = r_squared(preds[idx], y_test[idx])
                    sector_records.setdefault(sector, {}).setdefault(k, []).append(
                        (float(s_r2), mse(preds[idx], y_test[idx]))
                    )
        fold_records.append(record)

    per_horizon = {}
    for k in spec.horizons:
        r2s = [
            rec["per_horizon"][str(k)]["r2"]
            for rec in fold_records
            if rec["per_horizon"][str(k)]["r2"] is not None
        ]
        mses = [
            rec["per_horizon"][str(k)]["mse"]
            for rec in fold_records
            if rec["per_horizon"][str(k)]["mse"] is not None
        ]
        degenerate = sum(
            1 for rec in fold_records if rec["per_horizon"][str(k)]["degenerate"]
        )
        per_horizon[k] = {
            "r2": float(np.mean(r2s)) if r2s else None,
            "mse": float(np.mean(mses)) if mses else None,
            "folds_used": len(r2s),
            "degenerate_folds": degenerate,
        }

    first_year_r2 = first_year_mse = None
    if {1, 2, 3, 4} <= set(spec.horizons):
        head = [per_horizon[k] for k in (1, 2, 3, 4)]
        if all(h["r2"] is not None for h in head):
            first_year_r2 = float(np.mean([h["r2"] for h in head]))
            first_year_mse = float(np.mean([h["mse"] for h in head]))

    per_sector = None
    if track_sectors:
        per_sector = {}
        for sector, by_horizon in sorted(sector_records.items()):
            entry = {}
            for k, values in sorted(by_horizon.items()):
                entry[str(k)] = {
                    "r2": float(np.mean([v[0] for v in values])),
                    "mse": float(np.mean([v[1] for v in values])),
                    "folds_used": len(values),
                }
            head = [entry.get(str(k)) for k in (1, 2, 3, 4)]
            if all(h is not None for h in head):
                entry["first_year_r2"] = float(np.mean([h["r2"] for h in head]))
                entry["first_year_mse"] = float(np.mean([h["mse"] for h in head]))
            per_sector[sector] = entry

    return EvalReport(
        spec_name=spec.name,
        horizons=spec.horizons,
        per_horizon=per_horizon,
        folds=fold_records,
        first_year_r2=first_year_r2,
        first_year_mse=first_year_mse,
        outlier_drops=outlier_drops,
        per_sector=per_sector,
    )


def run_experiment(
    spec: ExperimentSpec,
    corpus,
    prices,
    lex: Lexicon,
    table: EmbeddingTable | None = None,
    options: EngineOptions = EngineOptions(),
    track_sectors: bool = False,
) -> EvalReport:
    """Full pipeline from price series: labels, features, folds, metrics."""
    labels, market, _drops = compute_market_table(
        corpus, prices, min_garch_obs=options.min_garch_obs
    )
    return run_experiment_on_tables(
        spec, corpus, labels, market, lex, table, options, track_sectors
    )


def drift_matrix(yearly_matrices: dict) -> tuple:
    """Cosine similarity between yearly centroid vectors.

    Returns (years, matrix) with years sorted ascending; the diagonal is
    exactly 1 and zero centroids contribute zero similarity.
    """
    years = sorted(yearly_matrices)
    if len(years) < 2:
        raise EmptyYear("need at least two years")
    centroids = []
    for year in years:
        fm = yearly_matrices[year]
        if len(fm.doc_ids) == 0:
            raise EmptyYear(f"year {year} has no documents")
        centroids.append(fm.values.mean(axis=0))
    dim = {len(c) for c in centroids}
    if len(dim) != 1:
        raise LengthMismatch("yearly matrices disagree on feature space")
    n = len(years)
    out = np.eye(n)
    for i in range(n):
        for j in range(i + 1, n):
            ni, nj = np.linalg.norm(centroids[i]), np.linalg.norm(centroids[j])
            value = (
                float(centroids[i] @ centroids[j] / (ni * nj))
                if ni > 0 and nj > 0
                else 0.0
            )
            out[i, j] = out[j, i] = max(-1.0, min(1.0, value))
    return tuple(years), out


def yearly_feature_matrices(corpus, lex, spec, table=None) -> dict:
    """Feature matrix per issue year over a single corpus-wide statistic."""
    docs = sorted(
        (d for d in corpus if d.issue_date is not None), key=lambda d: d.doc_id
    )
    if not docs:
        raise Empty("no dated documents")
    stats = corpus_stats(docs)
    full = build_feature_matrix(docs, lex, spec, stats, table)
    out = {}
    for year in sorted({d.issue_date.year for d in docs}):
        ids = [d.doc_id for d in docs if d.issue_date.year == year]
        out[year] = full.subset(ids)
    return out


def sector_coefficient_report(
    corpus,
    labels: dict,
    lex: Lexicon,
    sector: str | None = None,
    spec: WeightingSpec = WeightingSpec(scheme="TC"),
    table: EmbeddingTable | None = None,
) -> list:
    """Terms ranked by linear-regression coefficient, most positive first.

    The regression runs on the unreduced keyword matrix of the selected
    sector (or of all documents), with first-year volatility as target.
    ``labels`` may also be a mapping of company ids to price series, in
    which case the label table is computed on the fly.
    """
    if labels and all(isinstance(v, PriceSeries) for v in labels.values()):
        labels, _, _ = compute_market_table(corpus, labels)
    docs = sorted(
        (
            d for d in corpus
            if (sector is None or d.sector == sector)
            and d.doc_id in labels
            and labels[d.doc_id].first_year is not None
        ),
        key=lambda d: d.doc_id,
    )
    if sector is not None and not any(d.sector == sector for d in corpus):
        raise UnknownSector(f"no documents in sector {sector!r}")
    if len(docs) < 2:
        raise TooFewDocs("need at least 2 documents with labels")
    stats = corpus_stats(docs)
    fm = build_feature_matrix(docs, lex, spec, stats, table)
    y = np.array([labels[d.doc_id].first_year for d in docs])
    coefs, _intercept = linreg_fit(fm.values, y)
    ranked = sorted(
        zip(fm.feature_names, coefs.tolist()), key=lambda p: (-p[1], p[0])
    )
    return ranked
