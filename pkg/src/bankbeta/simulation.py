"""Synthetic data generation and Monte Carlo experiment harness.

All randomness flows through :class:`bankbeta.rng.StableRng`, so any recorded
seed reproduces its draws bitwise across platforms and library versions.
Monte Carlo reps get independent streams via :func:`bankbeta.rng.child_seed`.
"""

from __future__ import annotations

from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import InsufficientDataError
from .panel import (
    BankQuarterRecord,
    write_call_report_csv,
    write_market_csv,
    write_rate_csv,
)
from .quarters import Quarter
from .rng import StableRng, child_seed


@dataclass(frozen=True)
class TvpSimConfig:
    """Generating process for one time-varying-beta sample.

    The regressor rows are ``[1, d_t, d_{t-1}]`` where d is a simulated
    rate-change process; states follow the configured transition law with
    innovation variances ``state_var`` and observations add noise with
    variance ``obs_var``. Zero variances are allowed (degenerate cases are
    useful fixtures).
    """

    n_obs: int
    state_var: tuple[float, float, float]
    obs_var: float
    initial_state: tuple[float, float, float] = (0.0, 0.2, 0.1)
    transition: str = "random_walk"
    trans_mu: tuple[float, float, float] | None = None
    trans_gamma: tuple[float, float, float] | None = None
    rate_process: str = "ar1"
    rate_ar_coef: float = 0.8
    rate_innov_sd: float = 0.5
    seed: int = 0

    def __post_init__(self):
        if self.n_obs < 2:
            raise ValueError("n_obs must be at least 2")
        if len(self.state_var) != 3 or any(v < 0 for v in self.state_var):
            raise ValueError("state_var must be 3 nonnegative variances")
        if self.obs_var < 0:
            raise ValueError("obs_var must be nonnegative")
        if len(self.initial_state) != 3:
            raise ValueError("initial_state must have 3 entries")
        if self.transition not in ("random_walk", "ar1"):
            raise ValueError(f"unknown transition {self.transition!r}")
        if self.transition == "ar1" and (self.trans_mu is None or self.trans_gamma is None):
            raise ValueError("ar1 transition requires trans_mu and trans_gamma")
        if self.rate_process not in ("ar1", "iid_normal"):
            raise ValueError(f"unknown rate_process {self.rate_process!r}")
        if not abs(self.rate_ar_coef) < 1.0:
            raise ValueError("rate_ar_coef must lie in (-1, 1)")
        if self.rate_innov_sd <= 0:
            raise ValueError("rate_innov_sd must be positive")


@dataclass(frozen=True)
class SimulatedTvp:
    """One simulated sample: observations, design, and the true state paths."""

    y: np.ndarray  # (T,)
    X: np.ndarray  # (T, 3)
    states: np.ndarray  # (T, 3), beta_t actually generating y_t
    rate_changes: np.ndarray  # (T + 1,), d_{-1}..d_{T-1}


def simulate_tvp(config: TvpSimConfig) -> SimulatedTvp:
    """Draw one sample from the configured process.

    Draw order is fixed (rate innovations, then state innovations, then
    observation noise) so outputs are a pure function of the config.
    The first observation uses ``initial_state`` unchanged; transition noise
    enters from the second observation on.
    """
    rng = StableRng(config.seed)
    T = config.n_obs

    shocks = rng.normal(T + 1) * config.rate_innov_sd
    if config.rate_process == "ar1":
        d = np.empty(T + 1)
        d[0] = shocks[0]
        for t in range(1, T + 1):
            d[t] = config.rate_ar_coef * d[t - 1] + shocks[t]
    else:
        d = shocks
    X = np.column_stack([np.ones(T), d[1:], d[:-1]])

    sd = np.sqrt(np.asarray(config.state_var))
    if config.transition == "random_walk":
        mu = np.zeros(3)
        gamma = np.ones(3)
    else:
        mu = np.asarray(config.trans_mu, dtype=float)
        gamma = np.asarray(config.trans_gamma, dtype=float)
    noise = rng.normal((T - 1) * 3).reshape(T - 1, 3) * sd
    states = np.empty((T, 3))
    states[0] = config.initial_state
    for t in range(1, T):
        states[t] = mu + gamma * states[t - 1] + noise[t - 1]

    eps = rng.normal(T) * np.sqrt(config.obs_var)
    y = np.einsum("tk,tk->t", X, states) + eps
    return SimulatedTvp(y=y, X=X, states=states, rate_changes=d)


@dataclass(frozen=True)
class MonteCarloReport:
    """Per-rep statistics with enough provenance to replay any rep.

    ``values[i]`` is NaN when rep i failed; ``failures`` records (rep,
    message) pairs. For indicator statistics ``rejection_rate`` is the mean
    over successful reps.
    """

    n_reps: int
    seed: int
    seeds: tuple[int, ...]
    values: np.ndarray
    failures: tuple[tuple[int, str], ...]

    @property
    def n_failed(self) -> int:
        return len(self.failures)

    @property
    def rejection_rate(self) -> float:
        return float(np.nanmean(self.values))

    @property
    def mean(self) -> float:
        return float(np.nanmean(self.values))

    @property
    def median(self) -> float:
        return float(np.nanmedian(self.values))


def mc_experiment(generator, statistic, n_reps: int, seed: int = 0) -> MonteCarloReport:
    """Run ``statistic(generator(seed_i))`` over derived per-rep seeds.

    A failing rep (any exception from the generator or statistic) is
    recorded and skipped, never aborting the run. Rep i's seed is
    ``child_seed(seed, i)``; rerunning with the same arguments reproduces
    every value exactly.
    """
    if n_reps < 1:
        raise ValueError("n_reps must be at least 1")
    seeds = tuple(child_seed(seed, i) for i in range(n_reps))
    values = np.full(n_reps, np.nan)
    failures: list[tuple[int, str]] = []
    for i, s in enumerate(seeds):
        try:
            values[i] = float(statistic(generator(s)))
        except Exception as exc:  # noqa: BLE001 - reps must not abort the run
            failures.append((i, f"{type(exc).__name__}: {exc}"))
    return MonteCarloReport(
        n_reps=n_reps, seed=seed, seeds=seeds, values=values, failures=tuple(failures)
    )


def replay_rep(report: MonteCarloReport, generator, statistic, rep: int) -> float:
    """Recompute one rep of a report from its recorded seed."""
    return float(statistic(generator(report.seeds[rep])))


def generate_fixture_files(
    out_dir: str | Path,
    seed: int = 0,
    n_banks: int = 30,
    n_quarters: int = 48,
    start: Quarter = Quarter(1999, 1),
) -> dict[str, Path]:
    """Write a synthetic call report, rate file, and market file.

    The files use exactly the schemas the ingestion layer consumes, so the
    full pipeline can run end to end on them. Banks have constant assets
    spread over ten size deciles; each decile's income and expense ratios
    respond to simulated rate changes through slowly drifting coefficients,
    expense ratios are re-cumulated within calendar years to mimic the raw
    reporting convention, and the rate file carries three observations per
    quarter (so quarterly collapsing is exercised).

    Returns a dict with keys ``call_report``, ``rates``, ``market``.
    """
    if n_banks < 10:
        raise InsufficientDataError("need at least 10 banks for deciles")
    if n_quarters < 16:
        raise InsufficientDataError("need at least 16 quarters")
    if start.q != 1:
        raise ValueError("fixture must start at a Q1 so expense de-cumulation is defined")
    out_dir = Path(out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    rate_rng = StableRng(child_seed(seed, 1))
    income_rng = StableRng(child_seed(seed, 2))
    expense_rng = StableRng(child_seed(seed, 3))
    market_rng = StableRng(child_seed(seed, 4))

    quarters = [start.shift(i) for i in range(n_quarters)]
    rate_quarters = [start.prev()] + quarters  # one leading quarter of coverage

    n_rq = len(rate_quarters)
    shocks = rate_rng.normal(n_rq) * 0.35
    changes = np.empty(n_rq)
    changes[0] = shocks[0]
    for t in range(1, n_rq):
        changes[t] = 0.5 * changes[t - 1] + shocks[t]
    levels = 4.0 + np.cumsum(changes)
    intra = rate_rng.normal(2 * n_rq) * 0.05
    rate_rows: list[tuple[str, float]] = []
    for i, q in enumerate(rate_quarters):
        months = (q.q * 3 - 2, q.q * 3 - 1)
        for j, m in enumerate(months):
            rate_rows.append((f"{q.year:04d}-{m:02d}-15", float(levels[i] + intra[2 * i + j])))
        rate_rows.append((q.end_date().isoformat(), float(levels[i])))

    # decile-level ratio paths: levels accumulate beta-weighted rate changes;
    # changes[t + 1] is the rate change in quarters[t] (index 0 is the lead)
    inc_paths = np.empty((10, n_quarters))
    exp_paths = np.empty((10, n_quarters))
    for d in range(10):
        b_inc = 0.0008 + 0.0002 * (d + 1)
        b_exp = 0.0012 + 0.00025 * (d + 1)
        inc_noise = income_rng.normal(n_quarters) * 0.0002
        exp_noise = expense_rng.normal(n_quarters) * 0.00015
        inc = 0.011 + 0.0004 * (d + 1)
        exp = 0.0075 + 0.0003 * (d + 1)
        for t in range(n_quarters):
            i = t + 1
            if t > 0:
                inc += 0.6 * b_inc * changes[i] + 0.4 * b_inc * changes[i - 1] + inc_noise[t]
                exp += 0.7 * b_exp * changes[i] + 0.3 * b_exp * changes[i - 1] + exp_noise[t]
            inc_paths[d, t] = inc
            exp_paths[d, t] = exp

    assets = np.array([1.0e8 * 1.35**b for b in range(n_banks)])
    inc_idio = income_rng.normal(n_banks * n_quarters).reshape(n_banks, n_quarters) * 0.0003
    exp_idio = expense_rng.normal(n_banks * n_quarters).reshape(n_banks, n_quarters) * 0.0002

    records: list[BankQuarterRecord] = []
    for b in range(n_banks):
        decile = b * 10 // n_banks
        cert = f"B{b:04d}"
        cum = 0.0
        for t, q in enumerate(quarters):
            if q.q == 1:
                cum = 0.0
            inc_ratio = max(inc_paths[decile, t] + inc_idio[b, t], 1e-5)
            exp_ratio = max(exp_paths[decile, t] + exp_idio[b, t], 1e-5)
            cum += exp_ratio * assets[b]
            records.append(
                BankQuarterRecord(
                    institution_id=cert,
                    quarter=q,
                    int_income_ratio=4.0 * inc_ratio,
                    cum_int_expense=cum,
                    assets=float(assets[b]),
                )
            )

    spy = 0.015 + market_rng.normal(n_quarters) * 0.05
    xlf = 0.004 + 1.05 * spy + market_rng.normal(n_quarters) * 0.012
    market_rows = [
        (q.end_date().isoformat(), float(xlf[t]), float(spy[t]))
        for t, q in enumerate(quarters)
    ]

    paths = {
        "call_report": out_dir / "call_report.csv",
        "rates": out_dir / "rates.csv",
        "market": out_dir / "market.csv",
    }
    write_call_report_csv(paths["call_report"], records)
    write_rate_csv(paths["rates"], rate_rows)
    write_market_csv(paths["market"], market_rows)
    return paths
