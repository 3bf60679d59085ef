"""Returns, realized-volatility labels, GARCH(1,1) fits, and market features."""

from __future__ import annotations

import datetime as dt
import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import minimize
from scipy.signal import lfilter

from .errors import (
    DegenerateInput,
    FormatError,
    InsufficientHistory,
    OutOfRange,
    TooShort,
    UnknownSector,
    ZeroVolatility,
)

# NASDAQ-style sector codes, one-hot positions in alphabetical order.
SECTOR_CODES = (
    "capt", "dur", "ene", "fin", "hlth", "ind",
    "misc", "n-dur", "pub", "serv", "tech",
)
_SECTOR_INDEX = {code: i for i, code in enumerate(SECTOR_CODES)}

TRADING_DAYS_PER_QUARTER = 64
N_QUARTERS = 8


@dataclass(frozen=True)
class PriceSeries:
    """Adjusted closing prices on strictly increasing trading dates."""

    ticker: str
    dates: tuple[dt.date, ...]
    prices: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(
            self, "prices", np.asarray(self.prices, dtype=float)
        )
        if len(self.dates) != len(self.prices):
            raise ValueError("dates and prices must have equal length")
        if np.any(self.prices <= 0):
            raise ValueError("prices must be positive")
        if any(b <= a for a, b in zip(self.dates, self.dates[1:])):
            raise ValueError("dates must be strictly increasing")


@dataclass(frozen=True)
class ReturnSeries:
    """Daily log returns, each aligned to the later of its two dates."""

    ticker: str
    dates: tuple[dt.date, ...]
    returns: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "dates", tuple(self.dates))
        object.__setattr__(
            self, "returns", np.asarray(self.returns, dtype=float)
        )
        if len(self.dates) != len(self.returns):
            raise ValueError("dates and returns must have equal length")


@dataclass(frozen=True)
class VolatilityLabels:
    """Per-quarter volatility labels after a report's issue date.

    ``y`` holds eight entries; quarters the series cannot cover are None
    and listed in ``missing``. ``first_year`` is the mean of the first
    four quarters when all of them are available.
    """

    doc_id: str
    y: tuple
    missing: tuple[int, ...]

    def __post_init__(self):
        if len(self.y) != N_QUARTERS:
            raise ValueError("y must have 8 entries")

    @property
    def first_year(self):
        head = self.y[:4]
        if any(v is None for v in head):
            return None
        return sum(head) / 4.0


@dataclass(frozen=True)
class GarchParams:
    """Fitted conditional-variance recursion parameters."""

    omega: float
    alpha: float
    beta: float
    last_variance: float
    converged: bool = True
    log_likelihood: float = float("nan")

    def __post_init__(self):
        if not self.omega > 0:
            raise ValueError("omega must be positive")
        if self.alpha < 0 or self.beta < 0:
            raise ValueError("alpha and beta must be non-negative")
        if self.alpha + self.beta >= 1:
            raise ValueError("alpha + beta must be below 1")

    @property
    def unconditional_variance(self) -> float:
        return self.omega / (1.0 - self.alpha - self.beta)


@dataclass(frozen=True)
class MarketFeatures:
    """Non-text feature vector for one report."""

    current_volatility: float
    garch_forecast: float
    sector_onehot: np.ndarray

    def as_vector(self) -> np.ndarray:
        return np.concatenate(
            ([self.current_volatility, self.garch_forecast], self.sector_onehot)
        )


MARKET_FEATURE_NAMES = ("current_volatility", "garch_forecast") + tuple(
    f"sector_{code}" for code in SECTOR_CODES
)


def log_returns(series: PriceSeries) -> ReturnSeries:
    """r_t = ln(P_t) - ln(P_{t-1}), aligned to the later date."""
    if len(series.prices) < 2:
        raise TooShort("need at least two prices")
    logs = np.log(series.prices)
    return ReturnSeries(
        ticker=series.ticker,
        dates=series.dates[1:],
        returns=np.diff(logs),
    )


def realized_volatility(returns, start: int, window: int) -> float:
    """Log of the root mean squared deviation over [start, start + window].

    The window is inclusive on both ends (window + 1 observations) and
    the divisor is ``window``, exactly as the defining formula is printed.
    """
    values = np.asarray(returns, dtype=float)
    if window < 2:
        raise OutOfRange("window must be at least 2")
    if start < 0 or start + window > len(values) - 1:
        raise OutOfRange(
            f"window [{start}, {start + window}] outside series of length {len(values)}"
        )
    segment = values[start:start + window + 1]
    deviations = segment - segment.mean()
    total = float(np.sum(deviations**2))
    if total == 0.0:
        raise ZeroVolatility("all returns in the window are identical")
    return math.log(math.sqrt(total / window))


def issue_index(returns: ReturnSeries, issue_date: dt.date) -> int:
    """Index of the first return date on or after the issue date."""
    for i, d in enumerate(returns.dates):
        if d >= issue_date:
            return i
    raise InsufficientHistory(
        f"series ends before issue date {issue_date.isoformat()}",
        missing=range(1, N_QUARTERS + 1),
    )


def quarterly_labels(
    issue_date: dt.date, returns: ReturnSeries, doc_id: str = ""
) -> VolatilityLabels:
    """Eight quarter-sized volatility windows starting at the issue date.

    Quarters the series does not cover are left as None and recorded in
    ``missing``; the error is raised only when no quarter is computable.
    """
    start = issue_index(returns, issue_date)
    y = []
    missing = []
    n = len(returns.returns)
    for k in range(1, N_QUARTERS + 1):
        lo = start + TRADING_DAYS_PER_QUARTER * (k - 1)
        hi = start + TRADING_DAYS_PER_QUARTER * k
        if hi > n - 1:
            y.append(None)
            missing.append(k)
        else:
            y.append(realized_volatility(returns.returns, lo, TRADING_DAYS_PER_QUARTER))
    if len(missing) == N_QUARTERS:
        raise InsufficientHistory(
            f"no quarter after {issue_date.isoformat()} is covered", missing=missing
        )
    return VolatilityLabels(doc_id=doc_id, y=tuple(y), missing=tuple(missing))


def current_volatility(issue_date: dt.date, returns: ReturnSeries) -> float:
    """Volatility over the quarter immediately before the issue date."""
    start = issue_index(returns, issue_date)
    if start < TRADING_DAYS_PER_QUARTER:
        raise InsufficientHistory(
            f"only {start} return days before {issue_date.isoformat()}, "
            f"need {TRADING_DAYS_PER_QUARTER}"
        )
    return realized_volatility(
        returns.returns,
        start - TRADING_DAYS_PER_QUARTER,
        TRADING_DAYS_PER_QUARTER,
    )


def _variance_path(r2: np.ndarray, omega: float, alpha: float, beta: float, s0: float):
    """sigma^2_t recursion with sigma^2_1 = s0, vectorized via a linear filter."""
    if len(r2) == 1:
        return np.array([s0])
    x = omega + alpha * r2[:-1]
    rest, _ = lfilter([1.0], [1.0, -beta], x, zi=np.array([beta * s0]))
    return np.concatenate(([s0], rest))


def _negative_log_likelihood(r: np.ndarray, r2, omega, alpha, beta, s0) -> float:
    sigma2 = _variance_path(r2, omega, alpha, beta, s0)
    if np.any(sigma2 <= 0) or not np.all(np.isfinite(sigma2)):
        return np.inf
    return 0.5 * float(np.sum(np.log(sigma2) + r2 / sigma2))


_MAX_PERSISTENCE = 0.999


def _sigmoid(x: float) -> float:
    if x >= 0:
        return 1.0 / (1.0 + math.exp(-x))
    e = math.exp(x)
    return e / (1.0 + e)


def _unpack_theta(theta):
    log_omega, p_raw, share_raw = theta
    omega = math.exp(log_omega)
    persistence = _MAX_PERSISTENCE * _sigmoid(p_raw)
    share = _sigmoid(share_raw)
    return omega, share * persistence, (1.0 - share) * persistence


DEFAULT_MIN_GARCH_OBS = 100


def garch_fit(
    returns,
    min_obs: int = DEFAULT_MIN_GARCH_OBS,
    max_iter: int = 2000,
    tol: float = 1e-8,
) -> GarchParams:
    """Maximum-likelihood fit of the (1,1) conditional-variance recursion.

    The parameters are searched over (ln omega, logit persistence, logit
    alpha-share) with a derivative-free simplex, which keeps omega > 0,
    alpha, beta >= 0 and alpha + beta <= 0.999 by construction. The
    recursion starts at the sample variance.
    """
    r = np.asarray(returns, dtype=float)
    if len(r) < min_obs:
        raise TooShort(f"need at least {min_obs} observations, got {len(r)}")
    sample_var = float(np.var(r))
    if sample_var == 0.0:
        raise DegenerateInput("returns have zero variance")
    r2 = r**2

    def objective(theta):
        omega, alpha, beta = _unpack_theta(theta)
        return _negative_log_likelihood(r, r2, omega, alpha, beta, sample_var)

    # warm start: omega = 0.1 * sample variance, alpha = 0.1, beta = 0.8
    p0 = 0.9
    start = np.array([
        math.log(0.1 * sample_var),
        math.log(p0 / _MAX_PERSISTENCE / (1.0 - p0 / _MAX_PERSISTENCE)),
        math.log((0.1 / p0) / (1.0 - 0.1 / p0)),
    ])
    result = minimize(
        objective,
        start,
        method="Nelder-Mead",
        options={"maxiter": max_iter, "xatol": tol, "fatol": tol},
    )
    omega, alpha, beta = _unpack_theta(result.x)
    sigma2 = _variance_path(r2, omega, alpha, beta, sample_var)
    return GarchParams(
        omega=omega,
        alpha=alpha,
        beta=beta,
        last_variance=float(sigma2[-1]),
        converged=bool(result.success),
        log_likelihood=-float(result.fun),
    )


def garch_forecast(params: GarchParams, horizon: int) -> float:
    """Forecast volatility ``horizon`` steps ahead, on the log-std scale.

    The variance path decays geometrically from the last in-sample value
    toward the unconditional variance.
    """
    if horizon < 0:
        raise ValueError("horizon must be non-negative")
    v = params.unconditional_variance
    variance = v + (params.alpha + params.beta) ** horizon * (params.last_variance - v)
    return math.log(math.sqrt(variance))


def garch_unconditional_volatility(params: GarchParams) -> float:
    """Long-run volatility forecast used as the quarter-ahead feature."""
    return math.log(math.sqrt(params.unconditional_variance))


def sector_onehot(sector_code: str) -> np.ndarray:
    """11-entry indicator vector at the code's alphabetical position."""
    if sector_code not in _SECTOR_INDEX:
        raise UnknownSector(f"unknown sector code {sector_code!r}")
    vec = np.zeros(len(SECTOR_CODES))
    vec[_SECTOR_INDEX[sector_code]] = 1.0
    return vec


def filter_outliers(values) -> np.ndarray:
    """Indices of values within three sample standard deviations of the mean.

    Mean and deviation are computed once over the whole input; the filter
    is not re-applied to its own output.
    """
    arr = np.asarray(values, dtype=float)
    if len(arr) < 2:
        raise TooShort("need at least 2 values")
    mean = arr.mean()
    std = arr.std(ddof=1)
    keep = np.abs(arr - mean) <= 3.0 * std
    return np.flatnonzero(keep)


def market_features(
    issue_date: dt.date,
    sector_code: str,
    returns: ReturnSeries,
    min_garch_obs: int = DEFAULT_MIN_GARCH_OBS,
) -> MarketFeatures:
    """Assemble the non-text features for one report.

    The fit uses all returns strictly before the issue date; the forecast
    entry is the long-run (unconditional) volatility.
    """
    cur = current_volatility(issue_date, returns)
    start = issue_index(returns, issue_date)
    history = returns.returns[:start]
    params = garch_fit(history, min_obs=min_garch_obs)
    return MarketFeatures(
        current_volatility=cur,
        garch_forecast=garch_unconditional_volatility(params),
        sector_onehot=sector_onehot(sector_code),
    )


def load_price_series(path, ticker: str = "") -> PriceSeries:
    """Read a delimited price file with columns date, adjusted_close."""
    dates = []
    prices = []
    with open(path, encoding="utf-8") as fh:
        for lineno, line in enumerate(fh, start=1):
            line = line.strip()
            if not line:
                continue
            cols = [c.strip() for c in (line.split("\t") if "\t" in line else line.split(","))]
            if len(cols) != 2:
                raise FormatError(f"expected 2 columns, got {len(cols)}", line=lineno)
            if lineno == 1 and cols[0].lower() in ("date", "dates"):
                continue
            try:
                dates.append(dt.date.fromisoformat(cols[0]))
                prices.append(float(cols[1]))
            except ValueError:
                raise FormatError(f"bad row {line!r}", line=lineno) from None
    if not dates:
        raise FormatError("price file is empty")
    return PriceSeries(ticker=ticker, dates=tuple(dates), prices=np.array(prices))
