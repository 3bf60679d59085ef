"""Combining text and market feature sets: early fusion and stacking."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass

import numpy as np

from .errors import (
    DegenerateInput,
    DimensionMismatch,
    FormatError,
    RowMismatch,
    TooFewRows,
)
from .features import FeatureMatrix
from .learning import (
    KernelSpec,
    SvrModel,
    resolve_kernel,
    svr_model_from_dict,
    svr_model_to_dict,
    svr_predict,
    svr_train,
)

SPLIT_FRACTIONS = (0.7, 0.3)


def early_fusion(text: FeatureMatrix, market: FeatureMatrix) -> FeatureMatrix:
    """Column-wise concatenation, text columns first; values pass through unscaled."""
    if text.doc_ids != market.doc_ids:
        raise RowMismatch("text and market matrices disagree on documents")
    return FeatureMatrix(
        doc_ids=text.doc_ids,
        feature_names=text.feature_names + market.feature_names,
        values=np.hstack([text.values, market.values]),
    )


@dataclass(frozen=True)
class Standardizer:
    """Per-column mean/std fitted on the training portion."""

    mean: np.ndarray
    std: np.ndarray

    def apply(self, values: np.ndarray) -> np.ndarray:
        return (np.asarray(values, dtype=float) - self.mean) / self.std


def fit_standardizer(values: np.ndarray) -> Standardizer:
    values = np.asarray(values, dtype=float)
    std = values.std(axis=0)
    return Standardizer(mean=values.mean(axis=0), std=np.where(std > 0, std, 1.0))


@dataclass(frozen=True)
class StackModel:
    """Two base regressors plus a meta regressor over their outputs."""

    base_text: SvrModel
    base_market: SvrModel
    meta: SvrModel
    market_scaler: Standardizer
    split_seed: int
    base_ids: tuple[str, ...]
    meta_ids: tuple[str, ...]
    split_fractions: tuple[float, float] = SPLIT_FRACTIONS


def split_doc_ids(doc_ids, seed: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    """Seeded 70/30 split over sorted ids, independent of input order."""
    ordered = sorted(doc_ids)
    rng = np.random.default_rng(seed)
    shuffled = [ordered[i] for i in rng.permutation(len(ordered))]
    cut = math.floor(SPLIT_FRACTIONS[0] * len(shuffled))
    return tuple(shuffled[:cut]), tuple(shuffled[cut:])


def train_base_models(
    text: FeatureMatrix,
    market: FeatureMatrix,
    y: dict,
    base_ids,
    c: float,
    epsilon: float,
    unaveraged_loss: bool = False,
):
    """Fit the two base regressors on the base portion only."""
    labels = np.array([y[d] for d in base_ids])
    text_rows = text.subset(base_ids).values
    market_rows = market.subset(base_ids).values
    scaler = fit_standardizer(market_rows)
    base_text = svr_train(
        text_rows, labels, c, epsilon, KernelSpec("rbf"), unaveraged_loss=unaveraged_loss
    )
    base_market = svr_train(
        scaler.apply(market_rows), labels, c, epsilon, KernelSpec("rbf"),
        unaveraged_loss=unaveraged_loss,
    )
    return base_text, base_market, scaler


def stacking_train(
    text: FeatureMatrix,
    market: FeatureMatrix,
    y: dict,
    seed: int,
    c: float = 1.0,
    epsilon: float = 0.1,
    *,
    unaveraged_loss: bool = False,
) -> StackModel:
    """70/30 stacking: bases on the first portion, meta on their held-out outputs.

    The split shuffles document ids, not row positions, so reordering the
    input rows does not change the fitted models. Base models never see
    the meta portion's labels.
    """
    if text.doc_ids != market.doc_ids:
        raise RowMismatch("text and market matrices disagree on documents")
    if len(text.doc_ids) < 10:
        raise TooFewRows(f"need at least 10 rows, got {len(text.doc_ids)}")
    missing = [d for d in text.doc_ids if d not in y]
    if missing:
        raise RowMismatch(f"labels missing for {missing[:3]}")
    base_ids, meta_ids = split_doc_ids(text.doc_ids, seed)
    base_text, base_market, scaler = train_base_models(
        text, market, y, base_ids, c, epsilon, unaveraged_loss
    )
    meta_labels = np.array([y[d] for d in meta_ids])
    meta_features = np.column_stack([
        svr_predict(base_text, text.subset(meta_ids).values),
        svr_predict(base_market, scaler.apply(market.subset(meta_ids).values)),
    ])
    try:
        meta = svr_train(
            meta_features, meta_labels, c, epsilon, KernelSpec("rbf"),
            unaveraged_loss=unaveraged_loss,
        )
    except DegenerateInput:
        # both bases predicted a constant: the meta stage reduces to a bias
        meta = SvrModel(
            kernel=resolve_kernel(KernelSpec("rbf"), meta_features),
            support_inputs=np.zeros((0, 2)),
            dual_coefs=np.zeros(0),
            bias=float((meta_labels.max() + meta_labels.min()) / 2.0),
            c=c,
            epsilon=epsilon,
            box=c if unaveraged_loss else c / len(meta_labels),
        )
    return StackModel(
        base_text=base_text,
        base_market=base_market,
        meta=meta,
        market_scaler=scaler,
        split_seed=seed,
        base_ids=base_ids,
        meta_ids=meta_ids,
    )


def stacking_predict(model: StackModel, text_row, market_row):
    """Meta prediction on the pair of base-model outputs."""
    text_arr = np.asarray(text_row, dtype=float)
    market_arr = np.asarray(market_row, dtype=float)
    single = text_arr.ndim == 1
    text_rows = np.atleast_2d(text_arr)
    market_rows = np.atleast_2d(market_arr)
    if len(text_rows) != len(market_rows):
        raise DimensionMismatch("text and market rows disagree in count")
    meta_features = np.column_stack([
        svr_predict(model.base_text, text_rows),
        svr_predict(model.base_market, model.market_scaler.apply(market_rows)),
    ])
    out = svr_predict(model.meta, meta_features)
    return float(out[0]) if single else out


def stack_model_to_dict(model: StackModel) -> dict:
    return {
        "base_text": svr_model_to_dict(model.base_text),
        "base_market": svr_model_to_dict(model.base_market),
        "meta": svr_model_to_dict(model.meta),
        "market_scaler": {
            "mean": list(model.market_scaler.mean),
            "std": list(model.market_scaler.std),
        },
        "split_seed": model.split_seed,
        "split_manifest": (
            {d: "base" for d in model.base_ids} | {d: "meta" for d in model.meta_ids}
        ),
        "base_ids": list(model.base_ids),
        "meta_ids": list(model.meta_ids),
        "split_fractions": list(model.split_fractions),
    }


def stack_model_from_dict(data) -> StackModel:
    return StackModel(
        base_text=svr_model_from_dict(data["base_text"]),
        base_market=svr_model_from_dict(data["base_market"]),
        meta=svr_model_from_dict(data["meta"]),
        market_scaler=Standardizer(
            mean=np.array(data["market_scaler"]["mean"], dtype=float),
            std=np.array(data["market_scaler"]["std"], dtype=float),
        ),
        split_seed=data["split_seed"],
        base_ids=tuple(data["base_ids"]),
        meta_ids=tuple(data["meta_ids"]),
        split_fractions=tuple(data["split_fractions"]),
    )


def save_stack_model(model: StackModel, path) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(stack_model_to_dict(model), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_stack_model(path) -> StackModel:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(str(exc)) from None
    return stack_model_from_dict(data)
