"""Stability, causality, and stationarity diagnostics.

Implements the recursive-residual CUSUM test of Brown, Durbin and Evans
(1975), sum-of-squares Granger causality F-tests, an augmented
Dickey-Fuller test with AIC lag selection and MacKinnon (2010)
response-surface critical values, and small descriptive summaries.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy import stats

from .errors import (
    DegenerateStartError,
    InsufficientDataError,
    InsufficientVariationError,
    NumericalError,
    SingularDesignError,
)
from .ols import fit_ols

# Straight-line boundary scale a for the recursive CUSUM test at common
# significance levels; the 5% value is the classic 0.948 of Brown, Durbin
# and Evans (1975).
_CUSUM_BOUNDARY_SCALE = {0.01: 1.143, 0.05: 0.948, 0.10: 0.850}

# MacKinnon (2010) response-surface coefficients for Dickey-Fuller tau
# critical values: cv = b0 + b1/n + b2/n^2 + b3/n^3 with n the estimation
# sample size. Rows are the 1%, 5%, 10% levels.
_MACKINNON_TAU = {
    "constant": (
        (-3.43035, -6.5393, -16.786, -79.433),
        (-2.86154, -2.8903, -4.234, -40.04),
        (-2.56677, -1.5384, -2.809, 0.0),
    ),
    "constant_trend": (
        (-3.95877, -9.0531, -28.428, -134.155),
        (-3.41049, -4.3904, -9.036, -45.374),
        (-3.12705, -2.5856, -3.925, -22.38),
    ),
}


def recursive_residuals(y, X, start: int | None = None) -> np.ndarray:
    """Standardized one-step-ahead recursive residuals.

    The coefficient vector is estimated on the first ``start`` rows
    (default: the number of columns k) and updated one observation at a
    time with Sherman-Morrison rank-one updates; residual t is the
    prediction error at row t scaled by sqrt(1 + x_t' (X'X)^-1 x_t). Under
    a stable model with iid Gaussian errors the result is iid N(0, sigma^2).

    Returns an array of length ``len(y) - start``.

    Raises
    ------
    DegenerateStartError
        If the first ``start`` rows are rank deficient; pass a larger
        ``start`` to begin the recursion past the degenerate block.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    n, k = X.shape
    if y.shape[0] != n:
        raise ValueError(f"y has {y.shape[0]} rows but X has {n}")
    if start is None:
        start = k
    if not k <= start < n:
        raise ValueError(f"start must be in [{k}, {n}), got {start}")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
        raise ValueError("non-finite values in inputs")

    X0 = X[:start]
    gram = X0.T @ X0
    if np.linalg.matrix_rank(gram) < k:
        raise DegenerateStartError(
            f"first {start} rows are rank deficient; advance the start index"
        )
    xtx_inv = np.linalg.inv(gram)
    beta = xtx_inv @ (X0.T @ y[:start])

    w = np.empty(n - start)
    for t in range(start, n):
        x = X[t]
        vec = xtx_inv @ x
        f = 1.0 + x @ vec
        if not np.isfinite(f) or f <= 0.0:
            raise NumericalError(f"recursion lost positive definiteness at row {t}")
        err = y[t] - x @ beta
        w[t - start] = err / math.sqrt(f)
        xtx_inv -= np.outer(vec, vec) / f
        beta = beta + xtx_inv @ x * err
    return w


@dataclass(frozen=True)
class CusumResult:
    """Recursive CUSUM path against straight-line boundaries.

    ``cusum_path`` has one leading zero (the path origin at the start
    index), so ``cusum_path[j]`` pairs with ``boundaries[j]`` and
    ``first_crossing`` is the 0-based row index of the observation whose
    residual first pushed the path outside the band (None if none did).
    """

    recursive_residuals: np.ndarray
    cusum_path: np.ndarray
    boundaries: np.ndarray
    boundary_scale: float
    sigma_hat: float
    significance: float
    start: int
    n_params: int
    crossed: bool
    first_crossing: int | None


def cusum_test(y, X, significance: float = 0.05, start: int | None = None) -> CusumResult:
    """Brown-Durbin-Evans CUSUM test for coefficient instability.

    The path is the scaled cumulative sum of recursive residuals
    W_j = sum_{i<=j} w_i / sigma_hat, compared against the straight-line
    boundaries +/- a (sqrt(n) + 2 j / sqrt(n)) where n is the number of
    recursive residuals and a depends on the significance level. Any
    boundary crossing rejects parameter stability.
    """
    if significance not in _CUSUM_BOUNDARY_SCALE:
        raise ValueError(
            f"significance must be one of {sorted(_CUSUM_BOUNDARY_SCALE)}, got {significance}"
        )
    w = recursive_residuals(y, X, start=start)
    n = len(w)
    if n < 2:
        raise InsufficientDataError("need at least 2 recursive residuals")
    k = (np.asarray(X).shape[1] if np.asarray(X).ndim == 2 else 1)
    begin = start if start is not None else k
    sigma = float(np.std(w, ddof=1))
    if sigma == 0.0:
        raise InsufficientVariationError("recursive residuals are constant")

    path = np.concatenate([[0.0], np.cumsum(w) / sigma])
    a = _CUSUM_BOUNDARY_SCALE[significance]
    root_n = math.sqrt(n)
    j = np.arange(n + 1)
    boundaries = a * (root_n + 2.0 * j / root_n)

    outside = np.abs(path[1:]) > boundaries[1:]
    crossed = bool(outside.any())
    first = int(np.argmax(outside)) + begin if crossed else None
    return CusumResult(
        recursive_residuals=w,
        cusum_path=path,
        boundaries=boundaries,
        boundary_scale=a,
        sigma_hat=sigma,
        significance=significance,
        start=begin,
        n_params=k,
        crossed=crossed,
        first_crossing=first,
    )


@dataclass(frozen=True)
class GrangerResult:
    """SSR F-test of whether lags of one series help predict another."""

    f_stat: float
    p_value: float
    lags: int
    df_num: int
    df_den: int
    ssr_restricted: float
    ssr_unrestricted: float


def _lag_matrix(z: np.ndarray, lags: int, first_row: int) -> np.ndarray:
    T = len(z)
    return np.column_stack([z[first_row - i : T - i] for i in range(1, lags + 1)])


def granger_test(cause, effect, lags: int = 4) -> GrangerResult:
    """Does ``cause`` Granger-cause ``effect``?

    Compares the restricted regression of the effect on its own ``lags``
    lags (plus intercept) with the unrestricted one that adds the same
    number of cause lags, over the identical row set:

        F = [(SSR_r - SSR_u) / m] / [SSR_u / (T_eff - 2m - 1)]

    with T_eff = T - m usable rows. A constant effect series short-circuits
    to F = 0, p = 1 (its own lags are collinear with the intercept and both
    residual sums vanish; there is nothing to predict).
    """
    cause = np.asarray(cause, dtype=float).ravel()
    effect = np.asarray(effect, dtype=float).ravel()
    if cause.shape != effect.shape:
        raise ValueError("cause and effect must have equal length")
    if not (np.all(np.isfinite(cause)) and np.all(np.isfinite(effect))):
        raise ValueError("non-finite values in inputs")
    if lags < 1:
        raise ValueError(f"lags must be >= 1, got {lags}")
    T = len(effect)
    m = lags
    t_eff = T - m
    df_den = t_eff - 2 * m - 1
    if df_den < 1:
        raise InsufficientDataError(
            f"series length {T} leaves {df_den} denominator df with {m} lags"
        )

    if np.ptp(effect) == 0.0:
        return GrangerResult(0.0, 1.0, m, m, df_den, 0.0, 0.0)

    target = effect[m:]
    own = _lag_matrix(effect, m, m)
    other = _lag_matrix(cause, m, m)
    ones = np.ones(t_eff)
    restricted = fit_ols(target, np.column_stack([ones, own]))
    unrestricted = fit_ols(target, np.column_stack([ones, own, other]))
    ssr_r, ssr_u = restricted.ssr, unrestricted.ssr

    if ssr_u <= 0.0:
        if ssr_r <= 1e-300:
            return GrangerResult(0.0, 1.0, m, m, df_den, ssr_r, ssr_u)
        return GrangerResult(math.inf, 0.0, m, m, df_den, ssr_r, ssr_u)
    f = max(ssr_r - ssr_u, 0.0) / m / (ssr_u / df_den)
    p = float(stats.f.sf(f, m, df_den))
    return GrangerResult(float(f), p, m, m, df_den, ssr_r, ssr_u)


@dataclass(frozen=True)
class AdfResult:
    """Augmented Dickey-Fuller test summary.

    ``critical_values`` is keyed "1%", "5%", "10%";
    ``reject_unit_root`` applies the 5% value (left tail).
    """

    t_stat: float
    critical_values: dict[str, float]
    lags: int
    n_obs: int
    regression: str
    reject_unit_root: bool


def default_adf_max_lags(n: int) -> int:
    """Schwert's rule: floor(12 * (n / 100)^(1/4))."""
    return int(math.floor(12.0 * (n / 100.0) ** 0.25))


def _mackinnon_critical_values(regression: str, n: int) -> dict[str, float]:
    table = _MACKINNON_TAU[regression]
    out = {}
    for label, row in zip(("1%", "5%", "10%"), table):
        b0, b1, b2, b3 = row
        out[label] = b0 + b1 / n + b2 / n**2 + b3 / n**3
    return out


def adf_test(series, max_lags: int | None = None, regression: str = "constant") -> AdfResult:
    """Unit-root test with data-dependent lag augmentation.

    Fits ``dy_t = c (+ d t) + rho * y_{t-1} + sum phi_i dy_{t-i} + u_t`` and
    reports the t-statistic on rho. The augmentation order is chosen by AIC
    over 0..max_lags (default Schwert's rule), comparing candidates on the
    common sample trimmed to the largest candidate, then refitting the
    winner on its own full sample. Critical values come from the MacKinnon
    (2010) response surface at the final sample size; candidates whose
    design is singular are skipped.
    """
    y = np.asarray(series, dtype=float).ravel()
    T = len(y)
    if T < 25:
        raise InsufficientDataError(f"need at least 25 observations, got {T}")
    if not np.all(np.isfinite(y)):
        raise ValueError("non-finite values in input")
    if np.ptp(y) == 0.0:
        raise InsufficientVariationError("series is constant")
    if regression not in _MACKINNON_TAU:
        raise ValueError(f"regression must be one of {sorted(_MACKINNON_TAU)}")
    ndet = 1 if regression == "constant" else 2

    if max_lags is None:
        max_lags = default_adf_max_lags(T)
    feasible_cap = (T - 3 - ndet) // 2 - 2
    max_lags = max(0, min(max_lags, feasible_cap))

    dy = np.diff(y)

    def build(p: int, trim: int):
        # rows are dy indices trim..T-2; regressand dy[i] pairs with level
        # y[i] and lagged differences dy[i-1..i-p]
        target = dy[trim:]
        n = len(target)
        cols = [np.ones(n)]
        if ndet == 2:
            cols.append(np.arange(n, dtype=float))
        cols.append(y[trim : T - 1])
        for i in range(1, p + 1):
            cols.append(dy[trim - i : T - 1 - i])
        return target, np.column_stack(cols)

    best_p = None
    best_aic = math.inf
    for p in range(max_lags + 1):
        target, design = build(p, max_lags)
        try:
            fit = fit_ols(target, design)
        except SingularDesignError:
            continue
        n = len(target)
        ssr = max(fit.ssr, 1e-300)
        aic = n * math.log(ssr / n) + 2.0 * design.shape[1]
        if aic < best_aic:
            best_aic = aic
            best_p = p
    if best_p is None:
        raise SingularDesignError("every candidate lag order produced a singular design")

    target, design = build(best_p, best_p)
    fit = fit_ols(target, design)
    t_stat = float(fit.t_stats[ndet])
    n_final = len(target)
    cvs = _mackinnon_critical_values(regression, n_final)
    return AdfResult(
        t_stat=t_stat,
        critical_values=cvs,
        lags=best_p,
        n_obs=n_final,
        regression=regression,
        reject_unit_root=bool(t_stat < cvs["5%"]),
    )


@dataclass(frozen=True)
class StatsSummary:
    """Descriptive summary of one series."""

    mean: float
    std: float
    min: float
    p25: float
    p50: float
    p75: float
    max: float
    n: int


def describe(values) -> StatsSummary:
    """Mean, sample (n-1) std, extrema, and linearly interpolated quartiles.

    A single observation has std 0 by convention.
    """
    x = np.asarray(values, dtype=float).ravel()
    if x.size == 0:
        raise InsufficientDataError("empty input")
    if not np.all(np.isfinite(x)):
        raise ValueError("non-finite values in input")
    std = float(np.std(x, ddof=1)) if x.size > 1 else 0.0
    q25, q50, q75 = np.percentile(x, [25.0, 50.0, 75.0])
    return StatsSummary(
        mean=float(np.mean(x)),
        std=std,
        min=float(np.min(x)),
        p25=float(q25),
        p50=float(q50),
        p75=float(q75),
        max=float(np.max(x)),
        n=int(x.size),
    )
