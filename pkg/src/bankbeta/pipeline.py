"""Batch pipeline: files in, tables/figures/manifest out.

A run is a pure function of the input files and the configuration: parsing,
panel construction, estimation, diagnostics and emission are all
deterministic (optimizer starts are seeded from the config). Every output
file except the manifest is byte-reproducible; the manifest records content
digests of inputs and outputs plus stage wall-clock timings, which are the
only non-reproducible values.

Numbers in emitted tables carry 6 significant digits. When
``full_precision`` is set, each table gets a ``*.full.csv`` sidecar with
shortest round-trip float repr. The table1 net-margin column is derived
from the printed income/expense strings by exact decimal subtraction, so
the identity nim = income - expense holds for any reader of the file, not
just at full precision.
"""

from __future__ import annotations

import hashlib
import json
import time
from dataclasses import dataclass, field
from decimal import Decimal
from pathlib import Path

import numpy as np

from . import figures
from .diagnostics import adf_test, cusum_test, describe, granger_test
from .errors import BankBetaError, ConfigError, InsufficientDataError
from .kalman import TvpBetaSeries, estimate_hyperparameters, kalman_filter, tvp_beta_series
from .ols import (
    BetaEstimate,
    estimate_expense_beta,
    estimate_income_beta,
    nim_beta,
    pricing_regression,
    shock_effect,
)
from .panel import (
    DecilePanel,
    DecileSeries,
    build_decile_panel,
    parse_call_report,
    parse_market_csv,
    write_error_report,
)
from .quarters import Quarter, parse_rate_csv
from .rng import child_seed

_VERSION = "0.1.0"

SUBCOMMANDS = ("ingest", "betas", "tvp", "tests", "pricing", "all")

_CONFIG_DEFAULTS: dict[str, object] = {
    "call_report": None,
    "rates": None,
    "market": None,
    "weighting": "equal",
    "rate_sampling": "last",
    "burn_in": 8,
    "granger_lags": 4,
    "optimizer_starts": 8,
    "seed": 0,
    "market_cap_base": 2.0e12,
    "full_precision": False,
    "beta_fig_ymin": -0.2,
    "beta_fig_ymax": 0.4,
}

_INT_KEYS = ("burn_in", "granger_lags", "optimizer_starts", "seed")
_FLOAT_KEYS = ("market_cap_base", "beta_fig_ymin", "beta_fig_ymax")
_BOOL_KEYS = ("full_precision",)


@dataclass
class PipelineConfig:
    """Resolved run configuration.

    ``out_dir`` is where outputs land; every other field is a config key
    that can come from a ``key=value`` file and be overridden by a
    same-named CLI flag.
    """

    out_dir: Path
    call_report: Path | None = None
    rates: Path | None = None
    market: Path | None = None
    weighting: str = "equal"
    rate_sampling: str = "last"
    burn_in: int = 8
    granger_lags: int = 4
    optimizer_starts: int = 8
    seed: int = 0
    market_cap_base: float = 2.0e12
    full_precision: bool = False
    beta_fig_ymin: float = -0.2
    beta_fig_ymax: float = 0.4

    @classmethod
    def from_sources(
        cls,
        out_dir: str | Path,
        config_file: str | Path | None = None,
        overrides: dict[str, str] | None = None,
    ) -> "PipelineConfig":
        """Merge defaults, an optional config file, and flag overrides."""
        values = dict(_CONFIG_DEFAULTS)
        if config_file is not None:
            for key, raw in _read_config_file(Path(config_file)).items():
                values[key] = raw
        for key, raw in (overrides or {}).items():
            if key not in _CONFIG_DEFAULTS:
                raise ConfigError(f"unknown config key {key!r}")
            values[key] = raw
        kwargs: dict[str, object] = {}
        for key, value in values.items():
            if value is None:
                kwargs[key] = None
                continue
            try:
                if key in _INT_KEYS:
                    kwargs[key] = int(value)
                elif key in _FLOAT_KEYS:
                    kwargs[key] = float(value)
                elif key in _BOOL_KEYS:
                    kwargs[key] = _parse_bool(value)
                elif key in ("call_report", "rates", "market"):
                    kwargs[key] = Path(value)
                else:
                    kwargs[key] = str(value)
            except (TypeError, ValueError) as exc:
                raise ConfigError(f"config key {key}: {exc}") from None
        return cls(out_dir=Path(out_dir), **kwargs)

    def validate(self, need_market: bool) -> None:
        if self.call_report is None:
            raise ConfigError("call_report is required")
        if self.rates is None:
            raise ConfigError("rates is required")
        for name in ("call_report", "rates") + (("market",) if need_market else ()):
            p = getattr(self, name)
            if p is None:
                raise ConfigError(f"{name} is required for this subcommand")
            if not Path(p).is_file():
                raise ConfigError(f"{name} file not found: {p}")
        if self.weighting not in ("equal", "asset"):
            raise ConfigError(f"weighting must be equal or asset, got {self.weighting!r}")
        if self.rate_sampling not in ("last", "mean"):
            raise ConfigError(f"rate_sampling must be last or mean, got {self.rate_sampling!r}")
        if self.burn_in < 0:
            raise ConfigError("burn_in must be nonnegative")
        if self.granger_lags < 1:
            raise ConfigError("granger_lags must be at least 1")
        if self.optimizer_starts < 1:
            raise ConfigError("optimizer_starts must be at least 1")
        if self.market_cap_base <= 0:
            raise ConfigError("market_cap_base must be positive")
        if self.beta_fig_ymin >= self.beta_fig_ymax:
            raise ConfigError("beta_fig_ymin must be below beta_fig_ymax")

    def config_hash(self) -> str:
        """sha256 over the canonical key=value serialization (out_dir excluded)."""
        lines = []
        for key in sorted(_CONFIG_DEFAULTS):
            value = getattr(self, key)
            lines.append(f"{key}={'' if value is None else value}")
        return hashlib.sha256("\n".join(lines).encode()).hexdigest()


def _parse_bool(value: object) -> bool:
    if isinstance(value, bool):
        return value
    text = str(value).strip().lower()
    if text in ("true", "1", "yes"):
        return True
    if text in ("false", "0", "no"):
        return False
    raise ValueError(f"not a boolean: {value!r}")


def _read_config_file(path: Path) -> dict[str, str]:
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    out: dict[str, str] = {}
    for lineno, line in enumerate(path.read_text().splitlines(), start=1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        if "=" not in text:
            raise ConfigError(f"{path}:{lineno}: expected key=value, got {line!r}")
        key, _, value = text.partition("=")
        key = key.strip()
        if key not in _CONFIG_DEFAULTS:
            raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
        out[key] = value.strip()
    return out


@dataclass
class RunManifest:
    """Machine-readable record of one pipeline run."""

    version: str
    subcommand: str
    config_hash: str
    config: dict[str, str]
    input_digests: dict[str, str]
    output_digests: dict[str, str] = field(default_factory=dict)
    stage_seconds: dict[str, float] = field(default_factory=dict)
    warnings: list[str] = field(default_factory=list)
    failure: dict | None = None

    def to_json(self) -> str:
        payload = {
            "version": self.version,
            "subcommand": self.subcommand,
            "config_hash": self.config_hash,
            "config": self.config,
            "input_digests": self.input_digests,
            "output_digests": self.output_digests,
            "stage_seconds": self.stage_seconds,
            "warnings": self.warnings,
            "failure": self.failure,
        }
        return json.dumps(payload, indent=2, sort_keys=True) + "\n"

    def write(self, path: Path) -> None:
        path.write_text(self.to_json())


def _sha256(path: Path) -> str:
    h = hashlib.sha256()
    with path.open("rb") as fh:
        for chunk in iter(lambda: fh.read(65536), b""):
            h.update(chunk)
    return h.hexdigest()


def fmt6(value: float) -> str:
    """6-significant-digit decimal rendering used by all emitted tables."""
    return f"{float(value):.6g}"


class _Emitter:
    """Writes CSV/text outputs, tracking paths for the manifest."""

    def __init__(self, out_dir: Path, full_precision: bool):
        self.out_dir = out_dir
        self.full_precision = full_precision
        self.written: list[Path] = []

    def csv(self, name: str, header: list[str], rows: list[list[object]]) -> Path:
        """Write one table. Floats get 6 significant digits; str cells pass
        through; when enabled a ``*.full.csv`` sidecar keeps full precision."""
        return self.csv_pair(name, header, rows, rows)

    def csv_pair(
        self, name: str, header: list[str], rows: list[list[object]], full_rows: list[list[object]]
    ) -> Path:
        """Like :meth:`csv`, but with distinct rows for the sidecar (used when
        the display rows carry pre-formatted strings)."""
        path = self.out_dir / name
        self._write_rows(path, header, rows, fmt6)
        self.written.append(path)
        if self.full_precision:
            full = self.out_dir / (name[: -len(".csv")] + ".full.csv")
            self._write_rows(full, header, full_rows, repr)
            self.written.append(full)
        return path

    @staticmethod
    def _write_rows(path: Path, header: list[str], rows, float_fmt) -> None:
        lines = [",".join(header)]
        for row in rows:
            cells = []
            for cell in row:
                if isinstance(cell, str):
                    cells.append(cell)
                elif isinstance(cell, (bool, np.bool_)):
                    cells.append("true" if cell else "false")
                elif isinstance(cell, (int, np.integer)):
                    cells.append(str(int(cell)))
                else:
                    cells.append(float_fmt(float(cell)))
            lines.append(",".join(cells))
        path.write_text("\n".join(lines) + "\n")

    def text(self, name: str, content: str) -> Path:
        path = self.out_dir / name
        path.write_text(content)
        self.written.append(path)
        return path


class _RunContext:
    """Lazily computed, cached intermediate results shared across stages."""

    def __init__(self, config: PipelineConfig):
        self.config = config
        self._cache: dict[str, object] = {}

    def _get(self, key: str, build):
        if key not in self._cache:
            self._cache[key] = build()
        return self._cache[key]

    @property
    def call_report(self):
        return self._get("call_report", lambda: parse_call_report(self.config.call_report))

    @property
    def rates(self):
        return self._get(
            "rates",
            lambda: parse_rate_csv(self.config.rates, sampling=self.config.rate_sampling),
        )

    @property
    def market(self):
        return self._get("market", lambda: parse_market_csv(self.config.market))

    @property
    def panel(self) -> DecilePanel:
        def build():
            records = self.call_report.records
            rates, _ = self.rates
            return build_decile_panel(records, rates, weighting=self.config.weighting)

        return self._get("panel", build)

    @property
    def constant_betas(self) -> dict[int, dict[str, object]]:
        def build():
            out = {}
            for d in range(1, 11):
                inc_est, inc_reg = estimate_income_beta(self.panel, d)
                exp_est, exp_reg = estimate_expense_beta(self.panel, d)
                out[d] = {
                    "income": inc_est,
                    "income_reg": inc_reg,
                    "expense": exp_est,
                    "expense_reg": exp_reg,
                    "nim": nim_beta(inc_est, exp_est),
                }
            return out

        return self._get("constant_betas", build)

    def _tvp_fit(self, side: str, decile: int):
        key = f"tvp_{side}_{decile}"

        def build():
            panel = self.panel
            series = panel.series(decile)
            y = series.d_int_inc if side == "income" else series.d_int_exp
            X = panel.design_matrix(decile)
            seed_index = decile if side == "income" else 100 + decile
            fit = estimate_hyperparameters(
                y,
                X,
                burn_in=self.config.burn_in,
                starts=self.config.optimizer_starts,
                seed=child_seed(self.config.seed, seed_index),
            )
            output = kalman_filter(fit.spec)
            series_out = tvp_beta_series(output, quarters=panel.quarters)
            return fit, output, series_out

        return self._get(key, build)

    def tvp(self, side: str, decile: int):
        return self._tvp_fit(side, decile)

    def post_burn_in(self, side: str, decile: int):
        """(quarters, beta_sum, cond_vol) with the burn-in window removed."""
        _, _, series = self.tvp(side, decile)
        b = self.config.burn_in
        return series.quarters[b:], series.beta_sum[b:], series.cond_vol[b:]

    @property
    def pricing(self):
        def build():
            market, _ = self.market
            q_inc, _, vol_inc = self.post_burn_in("income", 10)
            _, _, vol_exp = self.post_burn_in("expense", 10)
            dcv = {
                q: (vol_inc[i] - vol_inc[i - 1], vol_exp[i] - vol_exp[i - 1])
                for i, q in enumerate(q_inc)
                if i > 0
            }
            mkt = {q: (market.xlf_ret[i], market.spy_ret[i]) for i, q in enumerate(market.quarters)}
            common = sorted(set(dcv) & set(mkt), key=lambda q: q.index())
            if len(common) < 8:
                raise InsufficientDataError(
                    f"only {len(common)} quarters align between volatility changes "
                    f"and market returns, need at least 8"
                )
            d_cv_inc = np.array([dcv[q][0] for q in common])
            d_cv_exp = np.array([dcv[q][1] for q in common])
            xlf = np.array([mkt[q][0] for q in common])
            spy = np.array([mkt[q][1] for q in common])
            result = pricing_regression(xlf, d_cv_exp, d_cv_inc, spy)
            return result, common, d_cv_exp
        return self._get("pricing", build)


def _quarter_label(q) -> str:
    return q.label() if isinstance(q, Quarter) else str(q)


def _emit_ingest(ctx: _RunContext, em: _Emitter, warnings: list[str]) -> None:
    issues = list(ctx.call_report.issues)
    issues += ctx.rates[1]
    if ctx.config.market is not None and Path(ctx.config.market).is_file():
        issues += ctx.market[1]
    write_error_report(em.out_dir / "ingest_errors.jsonl", issues)
    em.written.append(em.out_dir / "ingest_errors.jsonl")
    if issues:
        warnings.append(f"{len(issues)} input rows rejected; see ingest_errors.jsonl")

    panel = ctx.panel
    rows: list[list[object]] = []
    for d in range(1, 11):
        s = panel.series(d)
        for i, q in enumerate(panel.quarters):
            rows.append(
                [d, _quarter_label(q), s.d_int_inc[i], s.d_int_exp[i], s.d_ff[i], s.d_ff_lag[i]]
            )
    em.csv("panel.csv", ["decile", "quarter", "d_int_inc", "d_int_exp", "d_ff", "d_ff_lag"], rows)


def _emit_betas(ctx: _RunContext, em: _Emitter, warnings: list[str]) -> None:
    rows = []
    full_rows = []
    for d in range(1, 11):
        entry = ctx.constant_betas[d]
        inc: BetaEstimate = entry["income"]
        exp: BetaEstimate = entry["expense"]
        inc_s, exp_s = fmt6(inc.beta_sum), fmt6(exp.beta_sum)
        # derive the printed nim from the printed operands so the emitted
        # identity is exact in decimal, not just at full precision
        nim_s = str(Decimal(inc_s) - Decimal(exp_s))
        rows.append([d, inc_s, exp_s, nim_s])
        full_rows.append([d, inc.beta_sum, exp.beta_sum, entry["nim"]])
    header = ["decile", "income_beta", "expense_beta", "nim_beta"]
    em.csv_pair("table1.csv", header, rows, full_rows)


def _emit_tvp(ctx: _RunContext, em: _Emitter, warnings: list[str]) -> None:
    for side in ("income", "expense"):
        stats_columns: dict[int, object] = {}
        for d in range(1, 11):
            fit, output, series = ctx.tvp(side, d)
            rows = []
            for i, q in enumerate(series.quarters):
                rows.append(
                    [
                        _quarter_label(q),
                        output.filtered_state[i, 1],
                        output.filtered_state[i, 2],
                        series.beta_sum[i],
                        series.cond_vol[i],
                    ]
                )
            name = f"tvp_{side}_d{d}.csv"
            em.csv(name, ["quarter", "beta0", "beta1", "beta_sum", "cond_vol"], rows)

            spec = fit.spec
            lines = [f"state_var_{i + 1}={float(spec.state_var[i])!r}" for i in range(3)]
            lines += [
                f"obs_var={float(spec.obs_var)!r}",
                f"log_likelihood={float(fit.log_likelihood)!r}",
                f"burn_in={spec.burn_in}",
                f"transition={spec.transition}",
                f"starts={len(fit.start_variances)}",
                f"n_converged={fit.n_converged}",
            ]
            em.text(f"tvp_{side}_d{d}.params", "\n".join(lines) + "\n")

            _, _, vol = ctx.post_burn_in(side, d)
            stats_columns[d] = describe(vol)

        stat_rows = []
        for stat in ("mean", "std", "min", "p25", "p50", "p75", "max", "n"):
            row: list[object] = [stat]
            for d in range(1, 11):
                value = getattr(stats_columns[d], stat)
                row.append(int(value) if stat == "n" else value)
            stat_rows.append(row)
        em.csv(
            f"vol_{side}_stats.csv",
            ["stat"] + [f"d{d}" for d in range(1, 11)],
            stat_rows,
        )


def _emit_tests(ctx: _RunContext, em: _Emitter, warnings: list[str]) -> None:
    panel = ctx.panel
    cusum_rows = []
    for d in range(1, 11):
        X = panel.design_matrix(d)
        s = panel.series(d)
        for side, y in (("income", s.d_int_inc), ("expense", s.d_int_exp)):
            result = cusum_test(y, X)
            crossing = (
                _quarter_label(panel.quarters[result.first_crossing])
                if result.first_crossing is not None
                else ""
            )
            cusum_rows.append([d, side, result.crossed, crossing, result.sigma_hat])
    em.csv(
        "cusum.csv",
        ["decile", "series", "crossed", "first_crossing", "sigma_hat"],
        cusum_rows,
    )

    def granger_rows(kind: str) -> tuple[list[list[object]], list[list[object]]]:
        display: list[list[object]] = []
        full: list[list[object]] = []
        for d in range(1, 11):
            _, beta_inc, vol_inc = ctx.post_burn_in("income", d)
            _, beta_exp, vol_exp = ctx.post_burn_in("expense", d)
            inc, exp = (beta_inc, beta_exp) if kind == "beta" else (vol_inc, vol_exp)
            fwd = granger_test(inc, exp, lags=ctx.config.granger_lags)
            rev = granger_test(exp, inc, lags=ctx.config.granger_lags)
            display.append(
                [d, fwd.f_stat, f"{fwd.p_value:.4f}", rev.f_stat, f"{rev.p_value:.4f}"]
            )
            full.append([d, fwd.f_stat, fwd.p_value, rev.f_stat, rev.p_value])
        return display, full

    header = ["decile", "f_ii_to_ie", "p_ii_to_ie", "f_ie_to_ii", "p_ie_to_ii"]
    em.csv_pair("granger_betas.csv", header, *granger_rows("beta"))
    em.csv_pair("granger_vol.csv", header, *granger_rows("vol"))

    adf_rows = []
    for d in range(1, 11):
        for side in ("income", "expense"):
            _, beta, _ = ctx.post_burn_in(side, d)
            result = adf_test(beta)
            adf_rows.append(
                [
                    d,
                    side,
                    result.t_stat,
                    result.critical_values["5%"],
                    result.lags,
                    result.reject_unit_root,
                ]
            )
    em.csv(
        "adf_betas.csv",
        ["decile", "series", "t_stat", "cv_5pct", "lags", "reject_5pct"],
        adf_rows,
    )


def _emit_pricing(ctx: _RunContext, em: _Emitter, warnings: list[str]) -> None:
    result, _, d_cv_exp = ctx.pricing
    rows: list[list[object]] = []
    for i in range(4):
        rows.append([f"gamma{i}", result.coefficients[i], result.p_values[i]])
    rows.append(["adj_r2", result.adj_r2, ""])
    em.csv("pricing.csv", ["param", "coefficient", "p_value"], rows)

    shock_sd = float(np.std(d_cv_exp, ddof=1))
    fraction, currency = shock_effect(
        float(result.coefficients[1]), shock_sd, ctx.config.market_cap_base
    )
    lines = [
        f"coefficient_expense_vol={fmt6(result.coefficients[1])}",
        f"shock_sd_expense_vol={fmt6(shock_sd)}",
        f"fractional_effect={fmt6(fraction)}",
        f"base_value={fmt6(ctx.config.market_cap_base)}",
        f"currency_effect={fmt6(currency)}",
    ]
    em.text("effect_size.txt", "\n".join(lines) + "\n")


def _emit_figures(ctx: _RunContext, em: _Emitter, warnings: list[str]) -> None:
    income = {}
    expense = {}
    for d in range(1, 11):
        q, beta, vol = ctx.post_burn_in("income", d)
        income[d] = TvpBetaSeries(quarters=tuple(q), beta_sum=beta, cond_vol=vol)
        q, beta, vol = ctx.post_burn_in("expense", d)
        expense[d] = TvpBetaSeries(quarters=tuple(q), beta_sum=beta, cond_vol=vol)
    written, fig_warnings = figures.emit_figures(
        em.out_dir,
        income,
        expense,
        beta_ylim=(ctx.config.beta_fig_ymin, ctx.config.beta_fig_ymax),
    )
    em.written.extend(written)
    warnings.extend(fig_warnings)


_STAGES: dict[str, tuple] = {
    "ingest": (("ingest", _emit_ingest),),
    "betas": (("betas", _emit_betas),),
    "tvp": (("tvp", _emit_tvp),),
    "tests": (("tests", _emit_tests),),
    "pricing": (("pricing", _emit_pricing),),
    "all": (
        ("ingest", _emit_ingest),
        ("betas", _emit_betas),
        ("tvp", _emit_tvp),
        ("tests", _emit_tests),
        ("pricing", _emit_pricing),
        ("figures", _emit_figures),
    ),
}


def run_pipeline(config: PipelineConfig, subcommand: str = "all") -> RunManifest:
    """Execute one subcommand's stages and write its outputs plus a manifest.

    Configuration is validated before anything is written, so a config error
    leaves no trace on disk. A stage failure still writes the manifest (with
    the failure point recorded and partial outputs digested) and re-raises.
    """
    if subcommand not in SUBCOMMANDS:
        raise ConfigError(f"unknown subcommand {subcommand!r}")
    need_market = subcommand in ("pricing", "all")
    config.validate(need_market)

    out_dir = Path(config.out_dir)
    out_dir.mkdir(parents=True, exist_ok=True)

    input_digests = {}
    for name in ("call_report", "rates", "market"):
        p = getattr(config, name)
        if p is not None and Path(p).is_file():
            input_digests[name] = _sha256(Path(p))

    manifest = RunManifest(
        version=_VERSION,
        subcommand=subcommand,
        config_hash=config.config_hash(),
        config={
            key: str("" if getattr(config, key) is None else getattr(config, key))
            for key in sorted(_CONFIG_DEFAULTS)
        },
        input_digests=input_digests,
    )

    ctx = _RunContext(config)
    em = _Emitter(out_dir, config.full_precision)
    try:
        for stage_name, stage_fn in _STAGES[subcommand]:
            started = time.perf_counter()
            stage_fn(ctx, em, manifest.warnings)
            manifest.stage_seconds[stage_name] = time.perf_counter() - started
    except BankBetaError as exc:
        manifest.failure = {
            "stage": stage_name,
            "error": type(exc).__name__,
            "message": str(exc),
        }
        manifest.output_digests = {p.name: _sha256(p) for p in em.written if p.is_file()}
        manifest.write(out_dir / "manifest.json")
        raise
    manifest.output_digests = {p.name: _sha256(p) for p in em.written if p.is_file()}
    manifest.write(out_dir / "manifest.json")
    return manifest


# ---------------------------------------------------------------------------
# Readers for the emitted tables, so every output is machine-consumable by
# the toolkit itself (round-trip property).


def _read_csv_rows(path: str | Path) -> tuple[list[str], list[list[str]]]:
    import csv as _csv

    with Path(path).open(newline="") as fh:
        reader = _csv.reader(fh)
        header = next(reader)
        return header, [row for row in reader if row]


def read_table1_csv(path: str | Path) -> list[dict]:
    header, rows = _read_csv_rows(path)
    if header != ["decile", "income_beta", "expense_beta", "nim_beta"]:
        raise ValueError(f"unexpected table1 header: {header}")
    return [
        {
            "decile": int(r[0]),
            "income_beta": float(r[1]),
            "expense_beta": float(r[2]),
            "nim_beta": float(r[3]),
        }
        for r in rows
    ]


def read_panel_csv(path: str | Path) -> DecilePanel:
    header, rows = _read_csv_rows(path)
    if header != ["decile", "quarter", "d_int_inc", "d_int_exp", "d_ff", "d_ff_lag"]:
        raise ValueError(f"unexpected panel header: {header}")
    by_decile: dict[int, list[list[str]]] = {}
    for r in rows:
        by_decile.setdefault(int(r[0]), []).append(r)
    quarters: tuple[Quarter, ...] | None = None
    deciles = {}
    for d, drows in sorted(by_decile.items()):
        q = tuple(Quarter.parse(r[1]) for r in drows)
        if quarters is None:
            quarters = q
        elif q != quarters:
            raise ValueError(f"decile {d} quarters disagree with decile 1")
        deciles[d] = DecileSeries(
            d_int_inc=np.array([float(r[2]) for r in drows]),
            d_int_exp=np.array([float(r[3]) for r in drows]),
            d_ff=np.array([float(r[4]) for r in drows]),
            d_ff_lag=np.array([float(r[5]) for r in drows]),
        )
    if quarters is None:
        raise ValueError("empty panel file")
    return DecilePanel(quarters=quarters, deciles=deciles)


def read_tvp_csv(path: str | Path) -> dict[str, object]:
    header, rows = _read_csv_rows(path)
    if header != ["quarter", "beta0", "beta1", "beta_sum", "cond_vol"]:
        raise ValueError(f"unexpected tvp header: {header}")
    return {
        "quarters": tuple(Quarter.parse(r[0]) for r in rows),
        "beta0": np.array([float(r[1]) for r in rows]),
        "beta1": np.array([float(r[2]) for r in rows]),
        "beta_sum": np.array([float(r[3]) for r in rows]),
        "cond_vol": np.array([float(r[4]) for r in rows]),
    }


def read_stats_csv(path: str | Path) -> dict[str, dict[str, float]]:
    header, rows = _read_csv_rows(path)
    if header[0] != "stat" or header[1:] != [f"d{d}" for d in range(1, 11)]:
        raise ValueError(f"unexpected stats header: {header}")
    return {r[0]: {col: float(v) for col, v in zip(header[1:], r[1:])} for r in rows}


def read_granger_csv(path: str | Path) -> list[dict]:
    header, rows = _read_csv_rows(path)
    if header != ["decile", "f_ii_to_ie", "p_ii_to_ie", "f_ie_to_ii", "p_ie_to_ii"]:
        raise ValueError(f"unexpected granger header: {header}")
    return [
        {
            "decile": int(r[0]),
            "f_ii_to_ie": float(r[1]),
            "p_ii_to_ie": float(r[2]),
            "f_ie_to_ii": float(r[3]),
            "p_ie_to_ii": float(r[4]),
        }
        for r in rows
    ]


def read_cusum_csv(path: str | Path) -> list[dict]:
    header, rows = _read_csv_rows(path)
    if header != ["decile", "series", "crossed", "first_crossing", "sigma_hat"]:
        raise ValueError(f"unexpected cusum header: {header}")
    return [
        {
            "decile": int(r[0]),
            "series": r[1],
            "crossed": r[2] == "true",
            "first_crossing": Quarter.parse(r[3]) if r[3] else None,
            "sigma_hat": float(r[4]),
        }
        for r in rows
    ]


def read_adf_csv(path: str | Path) -> list[dict]:
    header, rows = _read_csv_rows(path)
    if header != ["decile", "series", "t_stat", "cv_5pct", "lags", "reject_5pct"]:
        raise ValueError(f"unexpected adf header: {header}")
    return [
        {
            "decile": int(r[0]),
            "series": r[1],
            "t_stat": float(r[2]),
            "cv_5pct": float(r[3]),
            "lags": int(r[4]),
            "reject_5pct": r[5] == "true",
        }
        for r in rows
    ]


def read_pricing_csv(path: str | Path) -> dict[str, tuple[float, float | None]]:
    header, rows = _read_csv_rows(path)
    if header != ["param", "coefficient", "p_value"]:
        raise ValueError(f"unexpected pricing header: {header}")
    return {r[0]: (float(r[1]), float(r[2]) if r[2] != "" else None) for r in rows}


def read_params_file(path: str | Path) -> dict[str, str]:
    out = {}
    for line in Path(path).read_text().splitlines():
        if not line.strip():
            continue
        key, _, value = line.partition("=")
        out[key] = value
    return out


def read_effect_size(path: str | Path) -> dict[str, float]:
    return {k: float(v) for k, v in read_params_file(path).items()}
