"""Time-varying interest-rate sensitivity toolkit for bank panel data.

Layers, bottom to top: ingestion of call-report/rate/market CSVs into an
aligned decile panel; constant-coefficient rate-sensitivity regressions;
Kalman-filtered time-varying coefficients with MLE hyperparameters and
conditional forecast-error volatility; stability/causality/unit-root
diagnostics; a deterministic simulation and Monte Carlo harness; and a
batch pipeline with a CLI that turns input files into tables, figures, and
a run manifest.
"""

from .diagnostics import (
    AdfResult,
    CusumResult,
    GrangerResult,
    StatsSummary,
    adf_test,
    cusum_test,
    describe,
    granger_test,
    recursive_residuals,
)
from .errors import (
    AlignmentError,
    BankBetaError,
    ConfigError,
    CovarianceDegeneracyError,
    DataError,
    DegenerateStartError,
    InsufficientDataError,
    InsufficientVariationError,
    NumericalError,
    OptimizationError,
    SchemaError,
    SingularDesignError,
)
from .kalman import (
    HyperparameterFit,
    KalmanOutput,
    StateSpaceSpec,
    TvpBetaSeries,
    conditional_volatility,
    estimate_hyperparameters,
    kalman_filter,
    tvp_beta_series,
)
from .ols import (
    BetaEstimate,
    RegressionResult,
    estimate_expense_beta,
    estimate_income_beta,
    fit_ols,
    nim_beta,
    pricing_regression,
    shock_effect,
    significance_stars,
)
from .panel import (
    BankQuarterRecord,
    CallReportParse,
    DecilePanel,
    DecileSeries,
    MarketSeries,
    ParseIssue,
    assign_deciles,
    build_decile_panel,
    deannualize_expense,
    parse_call_report,
    parse_market_csv,
)
from .pipeline import PipelineConfig, RunManifest, run_pipeline
from .quarters import Quarter, RateSeries, parse_rate_csv
from .rng import StableRng, child_seed
from .simulation import (
    MonteCarloReport,
    SimulatedTvp,
    TvpSimConfig,
    generate_fixture_files,
    mc_experiment,
    replay_rep,
    simulate_tvp,
)

__version__ = "0.1.0"

__all__ = [
    "AdfResult",
    "AlignmentError",
    "BankBetaError",
    "BankQuarterRecord",
    "BetaEstimate",
    "CallReportParse",
    "ConfigError",
    "CovarianceDegeneracyError",
    "CusumResult",
    "DataError",
    "DecilePanel",
    "DecileSeries",
    "DegenerateStartError",
    "GrangerResult",
    "HyperparameterFit",
    "InsufficientDataError",
    "InsufficientVariationError",
    "KalmanOutput",
    "MarketSeries",
    "MonteCarloReport",
    "NumericalError",
    "OptimizationError",
    "ParseIssue",
    "PipelineConfig",
    "Quarter",
    "RateSeries",
    "RegressionResult",
    "RunManifest",
    "SchemaError",
    "SimulatedTvp",
    "SingularDesignError",
    "StableRng",
    "StateSpaceSpec",
    "StatsSummary",
    "TvpBetaSeries",
    "TvpSimConfig",
    "adf_test",
    "assign_deciles",
    "build_decile_panel",
    "child_seed",
    "conditional_volatility",
    "cusum_test",
    "deannualize_expense",
    "describe",
    "estimate_expense_beta",
    "estimate_hyperparameters",
    "estimate_income_beta",
    "fit_ols",
    "generate_fixture_files",
    "granger_test",
    "kalman_filter",
    "mc_experiment",
    "nim_beta",
    "parse_call_report",
    "parse_market_csv",
    "parse_rate_csv",
    "pricing_regression",
    "recursive_residuals",
    "replay_rep",
    "run_pipeline",
    "shock_effect",
    "significance_stars",
    "simulate_tvp",
    "tvp_beta_series",
]
