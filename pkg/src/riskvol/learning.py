"""Kernels, support vector regression, convex kernel combination, linear regression.

The regressor solves the epsilon-insensitive dual by repeatedly
optimizing the maximal-KKT-violating pair of dual variables. The loss
term is averaged over samples, so each sample's dual box is C/N; the
``unaveraged_loss`` switch restores the C-per-sample convention of most
libraries for cross-checking.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace

import numpy as np

from .errors import DegenerateInput, DimensionMismatch, FormatError

KERNEL_KINDS = ("rbf", "linear", "cosine")

DEFAULT_C = 1.0
DEFAULT_EPSILON = 0.1
# 1e-4 keeps training-point predictions within 1e-3 of the exact dual
DEFAULT_KKT_TOL = 1e-4
DEFAULT_MAX_PASSES = 10_000


@dataclass(frozen=True)
class KernelSpec:
    """Kernel family plus parameters; gamma None means the scale heuristic."""

    kind: str = "rbf"
    gamma: float | None = None

    def __post_init__(self):
        if self.kind not in KERNEL_KINDS:
            raise ValueError(f"unknown kernel kind {self.kind!r}")
        if self.gamma is not None and not (np.isfinite(self.gamma) and self.gamma > 0):
            raise ValueError("gamma must be finite and positive")


@dataclass(frozen=True)
class BlockSpec:
    """A named, contiguous column range of a concatenated feature space."""

    name: str
    start: int
    stop: int


@dataclass(frozen=True)
class CombinedKernel:
    """Convex combination of base kernels, each acting on its own block."""

    parts: tuple  # ((KernelSpec, BlockSpec), ...)
    weights: tuple

    def __post_init__(self):
        if len(self.parts) != len(self.weights):
            raise ValueError("one weight per kernel required")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")


def scale_gamma(x: np.ndarray) -> float:
    """1 / (n_features * mean per-feature variance), with a flat-data fallback."""
    x = np.asarray(x, dtype=float)
    mean_var = float(np.mean(np.var(x, axis=0)))
    if mean_var <= 0:
        return 1.0
    return 1.0 / (x.shape[1] * mean_var)


def resolve_kernel(spec: KernelSpec, x: np.ndarray) -> KernelSpec:
    """Fill in a data-dependent gamma for rbf kernels when unset."""
    if spec.kind == "rbf" and spec.gamma is None:
        return replace(spec, gamma=scale_gamma(x))
    return spec


def kernel_matrix(spec, x, y) -> np.ndarray:
    """Gram matrix between the rows of x and the rows of y."""
    x = np.atleast_2d(np.asarray(x, dtype=float))
    y = np.atleast_2d(np.asarray(y, dtype=float))
    if x.shape[1] != y.shape[1]:
        raise DimensionMismatch(
            f"row dimensions differ: {x.shape[1]} vs {y.shape[1]}"
        )
    if isinstance(spec, CombinedKernel):
        total = np.zeros((x.shape[0], y.shape[0]))
        for (base, block), weight in zip(spec.parts, spec.weights):
            if weight:
                total += weight * kernel_matrix(
                    base, x[:, block.start:block.stop], y[:, block.start:block.stop]
                )
        return total
    if spec.kind == "linear":
        return x @ y.T
    if spec.kind == "cosine":
        xn = np.linalg.norm(x, axis=1)
        yn = np.linalg.norm(y, axis=1)
        out = x @ y.T
        safe = np.outer(np.where(xn > 0, xn, 1.0), np.where(yn > 0, yn, 1.0))
        out /= safe
        out[xn == 0, :] = 0.0
        out[:, yn == 0] = 0.0
        return out
    if spec.gamma is None:
        raise ValueError("rbf kernel needs gamma; call resolve_kernel first")
    sq = (
        np.sum(x**2, axis=1)[:, None]
        + np.sum(y**2, axis=1)[None, :]
        - 2.0 * (x @ y.T)
    )
    np.maximum(sq, 0.0, out=sq)
    return np.exp(-spec.gamma * sq)


def kernel_eval(spec, x, x2) -> float:
    """Kernel value between two vectors."""
    x = np.asarray(x, dtype=float).reshape(1, -1)
    x2 = np.asarray(x2, dtype=float).reshape(1, -1)
    return float(kernel_matrix(spec, x, x2)[0, 0])


def _solve_pairwise(gram, y, box, epsilon, tol, max_passes):
    """Minimize the dual over the box with the zero-sum constraint.

    Returns (beta, bias, n_iter, converged). beta[i] is the signed dual
    coefficient alpha_i - alpha*_i, each side bounded by ``box``.
    """
    n = len(y)
    alpha = np.zeros(n)
    alpha_star = np.zeros(n)
    gram_beta = np.zeros(n)
    iters = 0
    converged = False
    neg_inf = -np.inf
    while iters < max_passes:
        f = y - gram_beta
        crit_lo = f - epsilon  # first block (alpha side)
        crit_hi = f + epsilon  # second block (alpha* side)
        up = np.concatenate(
            [np.where(alpha < box, crit_lo, neg_inf),
             np.where(alpha_star > 0.0, crit_hi, neg_inf)]
        )
        low = np.concatenate(
            [np.where(alpha > 0.0, crit_lo, np.inf),
             np.where(alpha_star < box, crit_hi, np.inf)]
        )
        i = int(np.argmax(up))
        j = int(np.argmin(low))
        m_val, big_m_val = up[i], low[j]
        if m_val - big_m_val < tol:
            converged = True
            break
        bi, bj = i % n, j % n
        curvature = gram[bi, bi] + gram[bj, bj] - 2.0 * gram[bi, bj]
        step = (m_val - big_m_val) / max(curvature, 1e-12)
        cap_i = (box - alpha[bi]) if i < n else alpha_star[bi]
        cap_j = alpha[bj] if j < n else (box - alpha_star[bj])
        step = min(step, cap_i, cap_j)
        if step <= 0:
            converged = True
            break
        if i < n:
            alpha[bi] += step
        else:
            alpha_star[bi] -= step
        if j < n:
            alpha[bj] -= step
        else:
            alpha_star[bj] += step
        if bi != bj:
            gram_beta += step * (gram[:, bi] - gram[:, bj])
        iters += 1

    beta = alpha - alpha_star
    f = y - gram_beta
    margin = 1e-10 * box
    free_lo = (alpha > margin) & (alpha < box - margin)
    free_hi = (alpha_star > margin) & (alpha_star < box - margin)
    estimates = np.concatenate([f[free_lo] - epsilon, f[free_hi] + epsilon])
    if len(estimates):
        bias = float(estimates.mean())
    else:
        crit_lo = f - epsilon
        crit_hi = f + epsilon
        up = np.concatenate(
            [np.where(alpha < box, crit_lo, neg_inf),
             np.where(alpha_star > 0.0, crit_hi, neg_inf)]
        )
        low = np.concatenate(
            [np.where(alpha > 0.0, crit_lo, np.inf),
             np.where(alpha_star < box, crit_hi, np.inf)]
        )
        bias = float((np.max(up) + np.min(low)) / 2.0)
    return beta, bias, iters, converged


@dataclass(frozen=True)
class SvrModel:
    """Trained regressor: signed duals over retained training inputs."""

    kernel: object  # KernelSpec or CombinedKernel
    support_inputs: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    c: float
    epsilon: float
    box: float
    converged: bool = True

    def __post_init__(self):
        object.__setattr__(
            self, "support_inputs", np.asarray(self.support_inputs, dtype=float)
        )
        object.__setattr__(self, "dual_coefs", np.asarray(self.dual_coefs, dtype=float))
        if len(self.dual_coefs) != len(self.support_inputs):
            raise ValueError("one dual coefficient per support input required")
        if np.any(np.abs(self.dual_coefs) > self.box * (1 + 1e-9)):
            raise ValueError("dual coefficients exceed the box bound")


def svr_train(
    x,
    y,
    c: float = DEFAULT_C,
    epsilon: float = DEFAULT_EPSILON,
    spec: KernelSpec = KernelSpec("rbf"),
    *,
    unaveraged_loss: bool = False,
    tol: float = DEFAULT_KKT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
) -> SvrModel:
    """Fit the epsilon-insensitive regressor on rows of x."""
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise DimensionMismatch("x must be 2-D with one label per row")
    if len(y) < 2:
        raise DegenerateInput("need at least 2 training rows")
    if not np.all(np.isfinite(y)) or not np.all(np.isfinite(x)):
        raise ValueError("inputs must be finite")
    if np.all(np.all(x == x[0], axis=1)):
        raise DegenerateInput("all training rows are identical")
    spec = resolve_kernel(spec, x)
    box = c if unaveraged_loss else c / len(y)
    gram = kernel_matrix(spec, x, x)
    beta, bias, _, converged = _solve_pairwise(gram, y, box, epsilon, tol, max_passes)
    support = np.abs(beta) > 0.0
    return SvrModel(
        kernel=spec,
        support_inputs=x[support],
        dual_coefs=beta[support],
        bias=bias,
        c=c,
        epsilon=epsilon,
        box=box,
        converged=converged,
    )


def svr_predict(model: SvrModel, x):
    """Kernel expansion over the support set plus the bias.

    Accepts a single vector or a matrix of rows; returns a float or an
    array accordingly.
    """
    arr = np.asarray(x, dtype=float)
    single = arr.ndim == 1
    rows = np.atleast_2d(arr)
    if len(model.support_inputs) == 0:
        out = np.full(len(rows), model.bias)
        return float(out[0]) if single else out
    if rows.shape[1] != model.support_inputs.shape[1]:
        raise DimensionMismatch(
            f"input has {rows.shape[1]} features, model expects "
            f"{model.support_inputs.shape[1]}"
        )
    gram = kernel_matrix(model.kernel, rows, model.support_inputs)
    out = gram @ model.dual_coefs + model.bias
    return float(out[0]) if single else out


@dataclass(frozen=True)
class MklModel:
    """Convex kernel combination with the regressor trained on it."""

    base_kernels: tuple  # ((KernelSpec, BlockSpec), ...)
    weights: tuple
    inner: SvrModel

    def __post_init__(self):
        if abs(sum(self.weights) - 1.0) > 1e-9:
            raise ValueError("weights must sum to 1")
        if any(w < 0 for w in self.weights):
            raise ValueError("weights must be non-negative")


def _project_simplex(v: np.ndarray) -> np.ndarray:
    """Euclidean projection onto the probability simplex."""
    u = np.sort(v)[::-1]
    css = np.cumsum(u) - 1.0
    rho = np.nonzero(u - css / (np.arange(len(v)) + 1) > 0)[0][-1]
    theta = css[rho] / (rho + 1.0)
    return np.maximum(v - theta, 0.0)


def _dual_value(gram, y, beta, epsilon) -> float:
    """Value of the maximized dual objective at the given coefficients."""
    return float(
        -0.5 * beta @ gram @ beta - epsilon * np.sum(np.abs(beta)) + y @ beta
    )


DEFAULT_MKL_ROUNDS = 20
DEFAULT_MKL_WEIGHT_TOL = 1e-4


def mkl_train(
    feature_blocks,
    y,
    specs=None,
    c: float = DEFAULT_C,
    epsilon: float = DEFAULT_EPSILON,
    *,
    weights=None,
    unaveraged_loss: bool = False,
    tol: float = DEFAULT_KKT_TOL,
    max_passes: int = DEFAULT_MAX_PASSES,
    max_rounds: int = DEFAULT_MKL_ROUNDS,
    weight_tol: float = DEFAULT_MKL_WEIGHT_TOL,
) -> MklModel:
    """Alternate between fitting duals and reweighting the kernels.

    With the duals fixed, the weight vector takes a projected gradient
    step on the optimal-value function of the dual, staying on the
    simplex; fixed ``weights`` skip the weight search entirely.
    """
    blocks = [np.asarray(b, dtype=float) for b in feature_blocks]
    y = np.asarray(y, dtype=float)
    if not blocks:
        raise ValueError("need at least one feature block")
    n = len(blocks[0])
    if any(len(b) != n for b in blocks):
        raise DimensionMismatch("feature blocks disagree on row count")
    if len(y) != n:
        raise DimensionMismatch("labels disagree with feature rows")
    if n < 2:
        raise DegenerateInput("need at least 2 training rows")
    if specs is None:
        specs = [KernelSpec("rbf")] * len(blocks)
    specs = [resolve_kernel(s, b) for s, b in zip(specs, blocks)]
    grams = [kernel_matrix(s, b, b) for s, b in zip(specs, blocks)]
    box = c if unaveraged_loss else c / n

    m = len(blocks)
    fixed = weights is not None
    d = np.asarray(weights, dtype=float) if fixed else np.full(m, 1.0 / m)
    if fixed and (abs(d.sum() - 1.0) > 1e-9 or np.any(d < 0)):
        raise ValueError("fixed weights must lie on the simplex")

    def solve(dvec):
        combined = sum(w * g for w, g in zip(dvec, grams))
        beta, bias, _, conv = _solve_pairwise(combined, y, box, epsilon, tol, max_passes)
        return beta, bias, conv, _dual_value(combined, y, beta, epsilon)

    beta, bias, conv, value = solve(d)
    if not fixed and m > 1:
        for _ in range(max_rounds):
            grad = np.array([-0.5 * beta @ g @ beta for g in grams])
            span = np.max(np.abs(grad))
            if span <= 0:
                break
            accepted = False
            eta = 1.0 / span
            for _ in range(6):
                cand = _project_simplex(d - eta * grad)
                if np.abs(cand - d).sum() < weight_tol:
                    break
                beta_c, bias_c, conv_c, value_c = solve(cand)
                # minimizing the optimal dual value over the simplex
                if value_c < value - 1e-12:
                    moved = np.abs(cand - d).sum()
                    d, beta, bias, conv, value = cand, beta_c, bias_c, conv_c, value_c
                    accepted = True
                    break
                eta /= 2.0
            if not accepted or moved < weight_tol:
                break

    # assemble the combined kernel over concatenated columns
    parts = []
    start = 0
    for spec_m, block in zip(specs, blocks):
        stop = start + block.shape[1]
        parts.append((spec_m, BlockSpec(name=f"block{len(parts)}", start=start, stop=stop)))
        start = stop
    combined_kernel = CombinedKernel(parts=tuple(parts), weights=tuple(float(w) for w in d))
    concat = np.hstack(blocks)
    support = np.abs(beta) > 0.0
    inner = SvrModel(
        kernel=combined_kernel,
        support_inputs=concat[support],
        dual_coefs=beta[support],
        bias=bias,
        c=c,
        epsilon=epsilon,
        box=box,
        converged=conv,
    )
    return MklModel(
        base_kernels=combined_kernel.parts,
        weights=combined_kernel.weights,
        inner=inner,
    )


def mkl_predict(model: MklModel, feature_blocks):
    """Predict from per-block inputs (vectors or matrices)."""
    blocks = [np.atleast_2d(np.asarray(b, dtype=float)) for b in feature_blocks]
    single = np.asarray(feature_blocks[0]).ndim == 1
    concat = np.hstack(blocks)
    out = svr_predict(model.inner, concat)
    return float(out[0]) if single and not np.isscalar(out) else out


def linreg_fit(x, y):
    """Least squares with intercept; minimum-norm on rank deficiency.

    Returns (coefficients, intercept).
    """
    x = np.asarray(x, dtype=float)
    y = np.asarray(y, dtype=float)
    if x.ndim != 2 or len(x) != len(y):
        raise DimensionMismatch("x must be 2-D with one label per row")
    x_mean = x.mean(axis=0)
    y_mean = y.mean()
    coefs, *_ = np.linalg.lstsq(x - x_mean, y - y_mean, rcond=None)
    return coefs, float(y_mean - x_mean @ coefs)


def linreg_predict(coefs, intercept, x):
    return np.asarray(x, dtype=float) @ coefs + intercept


def _kernel_to_dict(kernel):
    if isinstance(kernel, CombinedKernel):
        return {
            "type": "combined",
            "weights": list(kernel.weights),
            "parts": [
                {
                    "kind": spec.kind,
                    "gamma": spec.gamma,
                    "name": block.name,
                    "start": block.start,
                    "stop": block.stop,
                }
                for spec, block in kernel.parts
            ],
        }
    return {"type": "base", "kind": kernel.kind, "gamma": kernel.gamma}


def _kernel_from_dict(data):
    if data["type"] == "combined":
        parts = tuple(
            (
                KernelSpec(kind=p["kind"], gamma=p["gamma"]),
                BlockSpec(name=p["name"], start=p["start"], stop=p["stop"]),
            )
            for p in data["parts"]
        )
        return CombinedKernel(parts=parts, weights=tuple(data["weights"]))
    return KernelSpec(kind=data["kind"], gamma=data["gamma"])


def svr_model_to_dict(model: SvrModel) -> dict:
    return {
        "kernel": _kernel_to_dict(model.kernel),
        "support_inputs": [list(row) for row in model.support_inputs],
        "dual_coefs": list(model.dual_coefs),
        "bias": model.bias,
        "c": model.c,
        "epsilon": model.epsilon,
        "box": model.box,
        "converged": model.converged,
    }


def svr_model_from_dict(data) -> SvrModel:
    n = len(data["dual_coefs"])
    width = len(data["support_inputs"][0]) if data["support_inputs"] else 0
    return SvrModel(
        kernel=_kernel_from_dict(data["kernel"]),
        support_inputs=np.array(data["support_inputs"], dtype=float).reshape(n, width),
        dual_coefs=np.array(data["dual_coefs"], dtype=float),
        bias=data["bias"],
        c=data["c"],
        epsilon=data["epsilon"],
        box=data["box"],
        converged=data["converged"],
    )


def save_svr_model(model: SvrModel, path) -> None:
    """JSON on disk; float repr round-trips bit-exactly."""
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        json.dump(svr_model_to_dict(model), fh, sort_keys=True, indent=1)
        fh.write("\n")


def load_svr_model(path) -> SvrModel:
    with open(path, encoding="utf-8") as fh:
        try:
            data = json.load(fh)
        except json.JSONDecodeError as exc:
            raise FormatError(str(exc)) from None
    return svr_model_from_dict(data)
