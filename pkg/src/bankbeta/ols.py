"""Constant-coefficient regressions on decile rate-change panels.

The central objects are the per-decile income and expense equations

    d_int_inc_t = alpha + beta0 * d_ff_t + beta1 * d_ff_{t-1} + e_t

and the analogous expense equation. Reported "betas" are always the sum
beta0 + beta1 (the cumulative response to a rate change after one quarter),
and the net-margin beta is the income sum minus the expense sum.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy import linalg, stats

from .errors import InsufficientDataError, SingularDesignError
from .panel import DecilePanel


@dataclass(frozen=True)
class RegressionResult:
    """OLS fit summary.

    Attributes
    ----------
    coefficients : np.ndarray, shape (k,)
    coef_covariance : np.ndarray, shape (k, k)
        Either the spherical estimate ``s^2 (X'X)^{-1}`` or, when fitted with
        ``hac_lags``, the Newey-West estimate.
    stderrs, t_stats, p_values : np.ndarray, shape (k,)
        Two-sided p-values from Student's t with ``n_obs - n_params`` df.
    residuals : np.ndarray, shape (n,)
    ssr : float
    adj_r2 : float
        Zero by convention when the centered total sum of squares is zero.
    n_obs, n_params : int
    """

    coefficients: np.ndarray
    coef_covariance: np.ndarray
    stderrs: np.ndarray
    t_stats: np.ndarray
    p_values: np.ndarray
    residuals: np.ndarray
    ssr: float
    adj_r2: float
    n_obs: int
    n_params: int


def fit_ols(y, X, add_intercept: bool = False, hac_lags: int | None = None) -> RegressionResult:
    """Fit ordinary least squares via rank-revealing QR.

    Parameters
    ----------
    y : array_like, shape (n,)
    X : array_like, shape (n, k)
        Design matrix. Pass ``add_intercept=True`` to prepend a ones column.
    hac_lags : int, optional
        When given, the coefficient covariance is the Newey-West HAC
        estimator with a Bartlett kernel of this many lags (0 reduces to
        White's heteroskedasticity-robust estimator). Point estimates are
        unchanged; stderrs, t-stats and p-values use the robust covariance.

    Raises
    ------
    SingularDesignError
        If the design is rank deficient.
    InsufficientDataError
        If there are not more observations than parameters.
    """
    y = np.asarray(y, dtype=float).ravel()
    X = np.asarray(X, dtype=float)
    if X.ndim == 1:
        X = X[:, None]
    if add_intercept:
        X = np.column_stack([np.ones(X.shape[0]), X])
    n, k = X.shape
    if y.shape[0] != n:
        raise ValueError(f"y has {y.shape[0]} rows but X has {n}")
    if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
        raise ValueError("non-finite values in regression inputs")
    if n <= k:
        raise InsufficientDataError(f"need more than {k} observations, got {n}")

    Q, R, piv = linalg.qr(X, mode="economic", pivoting=True)
    diag = np.abs(np.diag(R))
    tol = max(n, k) * np.finfo(float).eps * (diag[0] if diag.size else 0.0)
    rank = int(np.sum(diag > tol))
    if rank < k:
        raise SingularDesignError(f"design matrix rank {rank} < {k} columns")

    z = linalg.solve_triangular(R, Q.T @ y, lower=False)
    coef = np.empty(k)
    coef[piv] = z

    residuals = y - X @ coef
    ssr = float(residuals @ residuals)
    dof = n - k
    s2 = ssr / dof

    rinv = linalg.solve_triangular(R, np.eye(k), lower=False)
    xtx_inv = np.empty((k, k))
    xtx_inv[np.ix_(piv, piv)] = rinv @ rinv.T

    if hac_lags is None:
        cov = s2 * xtx_inv
    else:
        if hac_lags < 0:
            raise ValueError("hac_lags must be nonnegative")
        xe = X * residuals[:, None]
        S = xe.T @ xe
        for lag in range(1, hac_lags + 1):
            w = 1.0 - lag / (hac_lags + 1.0)
            gamma = xe[lag:].T @ xe[:-lag]
            S += w * (gamma + gamma.T)
        cov = xtx_inv @ S @ xtx_inv

    stderrs = np.sqrt(np.diag(cov))
    with np.errstate(divide="ignore", invalid="ignore"):
        t_stats = np.where(stderrs > 0, coef / stderrs, np.inf * np.sign(coef))
    p_values = 2.0 * stats.t.sf(np.abs(t_stats), dof)

    sst = float(np.sum((y - y.mean()) ** 2))
    if sst <= 0.0:
        adj_r2 = 0.0
    else:
        adj_r2 = 1.0 - (ssr / dof) / (sst / (n - 1))

    return RegressionResult(
        coefficients=coef,
        coef_covariance=cov,
        stderrs=stderrs,
        t_stats=t_stats,
        p_values=p_values,
        residuals=residuals,
        ssr=ssr,
        adj_r2=adj_r2,
        n_obs=n,
        n_params=k,
    )


@dataclass(frozen=True)
class BetaEstimate:
    """Rate-sensitivity summary for one equation.

    ``beta_sum`` is ``beta0 + beta1`` and ``sum_stderr`` its standard error,
    ``sqrt(var(b0) + var(b1) + 2 cov(b0, b1))``.
    """

    beta0: float
    beta1: float
    beta_sum: float
    sum_stderr: float

    @classmethod
    def from_regression(cls, result: RegressionResult, i0: int = 1, i1: int = 2) -> "BetaEstimate":
        b0 = float(result.coefficients[i0])
        b1 = float(result.coefficients[i1])
        cov = result.coef_covariance
        var_sum = cov[i0, i0] + cov[i1, i1] + 2.0 * cov[i0, i1]
        return cls(beta0=b0, beta1=b1, beta_sum=b0 + b1, sum_stderr=float(np.sqrt(max(var_sum, 0.0))))


_MIN_EQUATION_OBS = 10


def _decile_equation(panel: DecilePanel, decile: int, y: np.ndarray):
    if len(y) < _MIN_EQUATION_OBS:
        raise InsufficientDataError(
            f"decile {decile}: {len(y)} aligned quarters, need at least {_MIN_EQUATION_OBS}"
        )
    X = panel.design_matrix(decile)
    result = fit_ols(y, X)
    return BetaEstimate.from_regression(result), result


def estimate_income_beta(panel: DecilePanel, decile: int):
    """Income equation for one decile.

    Returns
    -------
    (BetaEstimate, RegressionResult)
    """
    return _decile_equation(panel, decile, panel.series(decile).d_int_inc)


def estimate_expense_beta(panel: DecilePanel, decile: int):
    """Expense equation for one decile; same shape as :func:`estimate_income_beta`."""
    return _decile_equation(panel, decile, panel.series(decile).d_int_exp)


def nim_beta(income: BetaEstimate, expense: BetaEstimate) -> float:
    """Net-interest-margin beta: income sum minus expense sum."""
    return income.beta_sum - expense.beta_sum


def pricing_regression(xlf_ret, d_cv_expense, d_cv_income, mkt_ret) -> RegressionResult:
    """Regress sector returns on volatility changes and the market return.

    Design is ``[1, d_cv_expense, d_cv_income, mkt_ret]`` so coefficient
    order matches (intercept, expense-uncertainty, income-uncertainty,
    market).
    """
    xlf_ret = np.asarray(xlf_ret, dtype=float)
    X = np.column_stack([
        np.ones(xlf_ret.shape[0]),
        np.asarray(d_cv_expense, dtype=float),
        np.asarray(d_cv_income, dtype=float),
        np.asarray(mkt_ret, dtype=float),
    ])
    return fit_ols(xlf_ret, X)


def shock_effect(coefficient: float, shock_sd: float, base_value: float | None = None):
    """Translate a pricing coefficient into a per-shock return effect.

    Returns the fractional effect ``coefficient * shock_sd`` and, when
    ``base_value`` is given, the currency effect on that base.
    """
    fraction = coefficient * shock_sd
    if base_value is None:
        return fraction, None
    return fraction, fraction * base_value


def significance_stars(p_value: float) -> str:
    """Table-footnote star convention: ****, ***, **, * at 0.1/1/5/10%."""
    if p_value <= 0.001:
        return "****"
    if p_value <= 0.01:
        return "***"
    if p_value <= 0.05:
        return "**"
    if p_value <= 0.10:
        return "*"
    return ""
