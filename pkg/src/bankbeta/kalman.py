"""Time-varying-coefficient regression via the Kalman filter.

The model is a linear-Gaussian state space whose state is the coefficient
vector of a regression with known regressors:

    y_t = x_t' beta_t + e_t,          e_t   ~ N(0, r)
    beta_t = mu + Gamma beta_{t-1} + v_t,   v_t ~ N(0, Q)

with diagonal Gamma and Q. The default transition is a random walk
(mu = 0, Gamma = I), which leaves all persistence to the data; an "ar1"
mode accepts caller-supplied per-state (mu_i, gamma_i). States are
initialized diffusely (zero mean, covariance kappa * I with kappa large
relative to the data scale) and the first ``burn_in`` observations are
excluded from the log-likelihood so the diffuse prior cannot dominate it.

``innovation_variance[t]`` is H_t = x_t' P_{t|t-1} x_t + r, the conditional
variance of the one-step forecast error given information through t-1; its
square root is the conditional forecast-error volatility series used
throughout the diagnostics and pricing layers.

Hyperparameters (state innovation variances and the observation variance)
are estimated by maximizing the Gaussian likelihood in log-variance space
with multi-start Nelder-Mead. State variances at a boundary are snapped to
(effectively) zero when that costs no likelihood, which resolves the usual
variance pile-up ambiguity deterministically.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from numba import njit
from scipy import optimize

from .errors import (
    CovarianceDegeneracyError,
    InsufficientDataError,
    NumericalError,
    OptimizationError,
)
from .rng import StableRng, child_seed

_LN_2PI = math.log(2.0 * math.pi)
_H_FLOOR = 1e-12
_DIFFUSE_SCALE = 1e6
_LOG_VAR_MIN = -46.0  # exp(-46) ~ 1e-20
_LOG_VAR_MAX = 46.0
_SNAP_TOLERANCE = 1e-9
_MIN_MLE_OBS = 20


@dataclass(frozen=True)
class StateSpaceSpec:
    """Inputs and hyperparameters for one filter run.

    Attributes
    ----------
    y : np.ndarray, shape (T,)
    X : np.ndarray, shape (T, k)
        Regressor rows; row t enters observation t.
    state_var : np.ndarray, shape (k,)
        Diagonal of Q, all >= 0.
    obs_var : float
        Observation noise variance, > 0.
    transition : str
        "random_walk" (mu=0, gamma=1) or "ar1" (per-state mu, gamma given).
    trans_mu, trans_gamma : np.ndarray or None
        Required for "ar1", ignored for "random_walk".
    initial_state : np.ndarray or None
        Prior mean, default zeros.
    initial_cov_scale : float or None
        kappa in P_0 = kappa * I. Default ``1e6 * var(y)`` (diffuse).
    burn_in : int
        Observations excluded from the log-likelihood, default 8.
    """

    y: np.ndarray
    X: np.ndarray
    state_var: np.ndarray
    obs_var: float
    transition: str = "random_walk"
    trans_mu: np.ndarray | None = None
    trans_gamma: np.ndarray | None = None
    initial_state: np.ndarray | None = None
    initial_cov_scale: float | None = None
    burn_in: int = 8

    def __post_init__(self):
        y = np.ascontiguousarray(self.y, dtype=float).ravel()
        X = np.ascontiguousarray(self.X, dtype=float)
        if X.ndim == 1:
            X = np.ascontiguousarray(X[:, None])
        if X.shape[0] != y.shape[0]:
            raise ValueError(f"y has {y.shape[0]} rows but X has {X.shape[0]}")
        if y.shape[0] == 0:
            raise ValueError("empty series")
        if not (np.all(np.isfinite(y)) and np.all(np.isfinite(X))):
            raise ValueError("non-finite values in filter inputs")
        q = np.ascontiguousarray(self.state_var, dtype=float).ravel()
        if q.shape[0] != X.shape[1]:
            raise ValueError(f"state_var has {q.shape[0]} entries for {X.shape[1]} states")
        if np.any(q < 0.0) or not np.all(np.isfinite(q)):
            raise ValueError("state variances must be finite and nonnegative")
        if not (np.isfinite(self.obs_var) and self.obs_var > 0.0):
            raise ValueError("observation variance must be positive")
        if self.transition not in ("random_walk", "ar1"):
            raise ValueError(f"unknown transition {self.transition!r}")
        if self.transition == "ar1":
            if self.trans_mu is None or self.trans_gamma is None:
                raise ValueError("ar1 transition requires trans_mu and trans_gamma")
            mu = np.ascontiguousarray(self.trans_mu, dtype=float).ravel()
            gamma = np.ascontiguousarray(self.trans_gamma, dtype=float).ravel()
            if mu.shape[0] != q.shape[0] or gamma.shape[0] != q.shape[0]:
                raise ValueError("transition parameter lengths must match the state dimension")
            object.__setattr__(self, "trans_mu", mu)
            object.__setattr__(self, "trans_gamma", gamma)
        if self.initial_state is not None:
            a0 = np.ascontiguousarray(self.initial_state, dtype=float).ravel()
            if a0.shape[0] != q.shape[0]:
                raise ValueError("initial_state length must match the state dimension")
            object.__setattr__(self, "initial_state", a0)
        if self.initial_cov_scale is not None and not (
            np.isfinite(self.initial_cov_scale) and self.initial_cov_scale >= 0.0
        ):
            raise ValueError("initial_cov_scale must be finite and nonnegative")
        if not 0 <= self.burn_in < y.shape[0]:
            raise ValueError(f"burn_in must be in [0, {y.shape[0]}), got {self.burn_in}")
        object.__setattr__(self, "y", y)
        object.__setattr__(self, "X", X)
        object.__setattr__(self, "state_var", q)

    @property
    def n_obs(self) -> int:
        return self.y.shape[0]

    @property
    def n_states(self) -> int:
        return self.X.shape[1]


@dataclass(frozen=True)
class KalmanOutput:
    """Full filter pass: one-step predictions, filtered states, innovations."""

    spec: StateSpaceSpec
    predicted_state: np.ndarray  # (T, k), a_{t|t-1}
    predicted_cov: np.ndarray  # (T, k, k), P_{t|t-1}
    filtered_state: np.ndarray  # (T, k), a_{t|t}
    filtered_cov: np.ndarray  # (T, k, k), P_{t|t}
    innovations: np.ndarray  # (T,), y_t - x_t' a_{t|t-1}
    innovation_variance: np.ndarray  # (T,), H_t
    log_likelihood: float

    @property
    def burn_in(self) -> int:
        return self.spec.burn_in


@njit(cache=True)
def _filter_core(y, X, mu, gamma, q, r, a0, P0, burn_in, h_floor):
    T, k = X.shape
    a = a0.copy()
    P = P0.copy()
    a_pred = np.empty((T, k))
    P_pred = np.empty((T, k, k))
    a_filt = np.empty((T, k))
    P_filt = np.empty((T, k, k))
    eta = np.empty(T)
    H = np.empty(T)
    ll = 0.0
    first_clamp = -1
    for t in range(T):
        for i in range(k):
            a[i] = mu[i] + gamma[i] * a[i]
        for i in range(k):
            for j in range(k):
                P[i, j] = gamma[i] * gamma[j] * P[i, j]
        for i in range(k):
            P[i, i] += q[i]
        a_pred[t, :] = a
        P_pred[t, :, :] = P
        x = X[t]
        Px = np.dot(P, x)
        h = np.dot(x, Px) + r
        if h < h_floor:
            h = h_floor
            if first_clamp < 0 and t >= burn_in:
                first_clamp = t
        e = y[t] - np.dot(x, a)
        for i in range(k):
            ki = Px[i] / h
            a[i] += ki * e
        for i in range(k):
            for j in range(k):
                P[i, j] -= (Px[i] / h) * Px[j]
        for i in range(k):
            for j in range(i + 1, k):
                s = 0.5 * (P[i, j] + P[j, i])
                P[i, j] = s
                P[j, i] = s
        a_filt[t, :] = a
        P_filt[t, :, :] = P
        eta[t] = e
        H[t] = h
        if t >= burn_in:
            ll += -0.5 * (_LN_2PI + np.log(h) + e * e / h)
    return a_pred, P_pred, a_filt, P_filt, eta, H, ll, first_clamp


@njit(cache=True)
def _loglik_core(y, X, mu, gamma, q, r, a0, P0, burn_in, h_floor):
    T, k = X.shape
    a = a0.copy()
    P = P0.copy()
    Px = np.empty(k)
    ll = 0.0
    degenerate = False
    for t in range(T):
        for i in range(k):
            a[i] = mu[i] + gamma[i] * a[i]
        for i in range(k):
            for j in range(k):
                P[i, j] = gamma[i] * gamma[j] * P[i, j]
        for i in range(k):
            P[i, i] += q[i]
        x = X[t]
        h = r
        for i in range(k):
            s = 0.0
            for j in range(k):
                s += P[i, j] * x[j]
            Px[i] = s
            h += x[i] * s
        if h < h_floor:
            h = h_floor
            if t >= burn_in:
                degenerate = True
        e = y[t]
        for i in range(k):
            e -= x[i] * a[i]
        for i in range(k):
            a[i] += (Px[i] / h) * e
        for i in range(k):
            for j in range(k):
                P[i, j] -= (Px[i] / h) * Px[j]
        for i in range(k):
            for j in range(i + 1, k):
                s = 0.5 * (P[i, j] + P[j, i])
                P[i, j] = s
                P[j, i] = s
        if t >= burn_in:
            ll += -0.5 * (_LN_2PI + np.log(h) + e * e / h)
    return ll, degenerate


def _transition_arrays(spec: StateSpaceSpec) -> tuple[np.ndarray, np.ndarray]:
    k = spec.n_states
    if spec.transition == "random_walk":
        return np.zeros(k), np.ones(k)
    return spec.trans_mu, spec.trans_gamma


def _initial_conditions(spec: StateSpaceSpec) -> tuple[np.ndarray, np.ndarray]:
    k = spec.n_states
    a0 = spec.initial_state if spec.initial_state is not None else np.zeros(k)
    if spec.initial_cov_scale is not None:
        kappa = spec.initial_cov_scale
    else:
        vy = float(np.var(spec.y))
        kappa = _DIFFUSE_SCALE * (vy if vy > 0.0 else 1.0)
    return a0.copy(), kappa * np.eye(k)


def kalman_filter(spec: StateSpaceSpec) -> KalmanOutput:
    """Run the filter over the full sample.

    Raises
    ------
    CovarianceDegeneracyError
        If the innovation variance hits its floor (1e-12) at or after the
        burn-in index, which means the hyperparameters describe a
        numerically degenerate model.
    """
    mu, gamma = _transition_arrays(spec)
    a0, P0 = _initial_conditions(spec)
    a_pred, P_pred, a_filt, P_filt, eta, H, ll, first_clamp = _filter_core(
        spec.y, spec.X, mu, gamma, spec.state_var, float(spec.obs_var),
        a0, P0, spec.burn_in, _H_FLOOR,
    )
    if first_clamp >= 0:
        raise CovarianceDegeneracyError(
            f"innovation variance hit the {_H_FLOOR} floor at observation {first_clamp}"
        )
    if not np.isfinite(ll):
        raise NumericalError("non-finite log-likelihood")
    return KalmanOutput(
        spec=spec,
        predicted_state=a_pred,
        predicted_cov=P_pred,
        filtered_state=a_filt,
        filtered_cov=P_filt,
        innovations=eta,
        innovation_variance=H,
        log_likelihood=float(ll),
    )


def conditional_volatility(output: KalmanOutput) -> np.ndarray:
    """Per-quarter conditional forecast-error volatility, sqrt(H_t).

    The regressor row indexed with observation t is the one entering the
    t-th forecast, so vol[t] is the uncertainty about y_t given information
    through t-1. Values are bounded below by sqrt(obs_var).
    """
    return np.sqrt(output.innovation_variance)


@dataclass(frozen=True)
class TvpBetaSeries:
    """Filtered cumulative rate sensitivity with its forecast volatility."""

    quarters: tuple
    beta_sum: np.ndarray
    cond_vol: np.ndarray


def tvp_beta_series(output: KalmanOutput, quarters=None) -> TvpBetaSeries:
    """Summarize a 3-state (intercept, beta0, beta1) filter run.

    ``beta_sum[t]`` is the filtered beta0 + beta1 at t; ``cond_vol`` is
    :func:`conditional_volatility`. ``quarters`` defaults to 0..T-1.
    """
    if output.filtered_state.shape[1] != 3:
        raise ValueError(
            f"expected a 3-dimensional state, got {output.filtered_state.shape[1]}"
        )
    T = output.filtered_state.shape[0]
    if quarters is None:
        quarters = tuple(range(T))
    else:
        quarters = tuple(quarters)
        if len(quarters) != T:
            raise ValueError(f"{len(quarters)} quarter labels for {T} observations")
    beta_sum = output.filtered_state[:, 1] + output.filtered_state[:, 2]
    return TvpBetaSeries(quarters=quarters, beta_sum=beta_sum, cond_vol=conditional_volatility(output))


@dataclass(frozen=True)
class HyperparameterFit:
    """Multi-start MLE result.

    ``start_variances``/``start_logliks`` record every start point (variance
    space, [q_1..q_k, r]) and its initial log-likelihood so a fit can be
    audited or resumed; ``log_likelihood`` is the value at the fitted point
    and is never below any entry of ``start_logliks``.
    """

    spec: StateSpaceSpec
    log_likelihood: float
    start_variances: tuple = field(repr=False)
    start_logliks: tuple = field(repr=False)
    n_converged: int = 0


def estimate_hyperparameters(
    y,
    X,
    transition: str = "random_walk",
    trans_mu=None,
    trans_gamma=None,
    burn_in: int = 8,
    starts: int = 8,
    seed: int = 0,
    max_fun_evals: int = 2000,
) -> HyperparameterFit:
    """Estimate (state_var, obs_var) by Gaussian MLE.

    Optimizes in log-variance space with Nelder-Mead from ``starts`` points:
    one deterministic start at the OLS residual variance (state variances a
    factor 1e-3 smaller) plus seeded random log-scale perturbations. After
    the best start wins, each state variance is probed at the lower bound
    and kept there when the log-likelihood gives up no more than 1e-9, so
    data generated by constant coefficients comes back with state variances
    at numerical zero instead of an arbitrary pile-up value.

    Raises
    ------
    OptimizationError
        If no start converges; the best point found is attached.
    """
    y = np.ascontiguousarray(y, dtype=float).ravel()
    X = np.ascontiguousarray(X, dtype=float)
    if X.ndim == 1:
        X = np.ascontiguousarray(X[:, None])
    T, k = X.shape
    if y.shape[0] != T:
        raise ValueError(f"y has {y.shape[0]} rows but X has {T}")
    if T < _MIN_MLE_OBS:
        raise InsufficientDataError(f"need at least {_MIN_MLE_OBS} observations, got {T}")
    if starts < 1:
        raise ValueError("starts must be at least 1")

    probe = StateSpaceSpec(
        y=y, X=X, state_var=np.ones(k), obs_var=1.0,
        transition=transition, trans_mu=trans_mu, trans_gamma=trans_gamma,
        burn_in=burn_in,
    )
    mu, gamma = _transition_arrays(probe)
    a0, P0 = _initial_conditions(probe)

    coef, ssr_arr, rank, _ = np.linalg.lstsq(X, y, rcond=None)
    if rank == k and T > k and ssr_arr.size:
        s2 = float(ssr_arr[0]) / (T - k)
    else:
        resid = y - X @ coef
        s2 = float(resid @ resid) / max(T - k, 1)
    if not np.isfinite(s2) or s2 <= 0.0:
        vy = float(np.var(y))
        s2 = vy if vy > 0.0 else 1.0
    log_s2 = math.log(s2)

    def objective(theta: np.ndarray) -> float:
        theta = np.clip(theta, _LOG_VAR_MIN, _LOG_VAR_MAX)
        q = np.exp(theta[:k])
        r = float(np.exp(theta[k]))
        ll, degenerate = _loglik_core(y, X, mu, gamma, q, r, a0, P0, burn_in, _H_FLOOR)
        if degenerate or not np.isfinite(ll):
            return 1e300
        return -ll

    start_thetas = []
    theta0 = np.full(k + 1, log_s2)
    theta0[:k] += math.log(1e-3)
    start_thetas.append(theta0)
    for j in range(1, starts):
        rng = StableRng(child_seed(seed, j))
        theta = np.empty(k + 1)
        theta[:k] = log_s2 - math.log(10.0) * (1.0 + 4.0 * rng.uniform(k))
        theta[k] = log_s2 + math.log(10.0) * (rng.uniform(1)[0] - 0.5)
        start_thetas.append(theta)

    start_fs = [objective(t) for t in start_thetas]
    best_theta = None
    best_f = np.inf
    n_converged = 0
    for theta in start_thetas:
        res = optimize.minimize(
            objective,
            theta,
            method="Nelder-Mead",
            options={"maxfev": max_fun_evals, "xatol": 1e-6, "fatol": 1e-9},
        )
        if res.success:
            n_converged += 1
        if res.fun < best_f:
            best_f = float(res.fun)
            best_theta = np.clip(res.x, _LOG_VAR_MIN, _LOG_VAR_MAX)

    start_variances = tuple(np.exp(np.clip(t, _LOG_VAR_MIN, _LOG_VAR_MAX)) for t in start_thetas)
    start_logliks = tuple(-f for f in start_fs)

    def build_fit(theta: np.ndarray, f: float) -> HyperparameterFit:
        fitted = StateSpaceSpec(
            y=y, X=X,
            state_var=np.exp(theta[:k]), obs_var=float(np.exp(theta[k])),
            transition=transition, trans_mu=trans_mu, trans_gamma=trans_gamma,
            burn_in=burn_in,
        )
        return HyperparameterFit(
            spec=fitted,
            log_likelihood=-f,
            start_variances=start_variances,
            start_logliks=start_logliks,
            n_converged=n_converged,
        )

    if best_theta is None or not np.isfinite(best_f):
        raise OptimizationError("no optimizer start produced a finite objective", best=None)
    if n_converged == 0:
        raise OptimizationError(
            f"none of {starts} starts converged within {max_fun_evals} evaluations",
            best=build_fit(best_theta, best_f),
        )

    min_start_f = min(start_fs)
    for i in range(k):
        if best_theta[i] <= _LOG_VAR_MIN:
            continue
        trial = best_theta.copy()
        trial[i] = _LOG_VAR_MIN
        f_trial = objective(trial)
        if f_trial <= best_f + _SNAP_TOLERANCE and f_trial <= min_start_f:
            best_theta = trial
            best_f = float(f_trial)

    return build_fit(best_theta, best_f)
