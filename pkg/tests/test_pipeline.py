"""End-to-end tests for the batch pipeline and its CLI."""

from __future__ import annotations

import json
import math
import re
from decimal import Decimal
from pathlib import Path

import numpy as np
import pytest

from bankbeta import cli
from bankbeta.errors import ConfigError
from bankbeta.pipeline import (
    PipelineConfig,
    _Emitter,
    fmt6,
    read_adf_csv,
    read_cusum_csv,
    read_granger_csv,
    read_panel_csv,
    read_stats_csv,
    read_table1_csv,
    read_tvp_csv,
    run_pipeline,
)


@pytest.fixture(scope="module")
def inputs(tmp_path_factory) -> dict[str, Path]:
    base = tmp_path_factory.mktemp("inputs")
    rc = cli.main(["simulate", "--out", str(base), "--seed", "0"])
    assert rc == 0
    return {
        "call_report": base / "call_report.csv",
        "rates": base / "rates.csv",
        "market": base / "market.csv",
        "conf": base / "pipeline.conf",
    }


def run_args(inputs, out: Path, *extra: str) -> list[str]:
    return [
        "--call-report", str(inputs["call_report"]),
        "--rates", str(inputs["rates"]),
        "--market", str(inputs["market"]),
        "--out", str(out),
        *extra,
    ]


@pytest.fixture(scope="module")
def all_run(inputs, tmp_path_factory) -> Path:
    """One full-precision `all` run shared by the output-inspection tests."""
    out = tmp_path_factory.mktemp("all_run")
    rc = cli.main(["all", *run_args(inputs, out, "--full-precision")])
    assert rc == 0
    return out


def read_params(path: Path) -> dict[str, str]:
    return dict(line.split("=", 1) for line in path.read_text().splitlines())


class TestConfig:
    def test_defaults(self, tmp_path):
        cfg = PipelineConfig.from_sources(tmp_path)
        assert cfg.weighting == "equal"
        assert cfg.burn_in == 8
        assert cfg.optimizer_starts == 8
        assert cfg.market_cap_base == 2.0e12
        assert cfg.full_precision is False

    def test_file_then_override_precedence(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text(
            "# comment line\n"
            "\n"
            "seed = 5\n"
            "weighting=asset\n"
        )
        cfg = PipelineConfig.from_sources(tmp_path, conf, overrides={"seed": "9"})
        assert cfg.seed == 9
        assert cfg.weighting == "asset"

    def test_unknown_file_key_reports_line(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("seed=1\nbogus=2\n")
        with pytest.raises(ConfigError, match=r":2: unknown config key 'bogus'"):
            PipelineConfig.from_sources(tmp_path, conf)

    def test_malformed_line_rejected(self, tmp_path):
        conf = tmp_path / "run.conf"
        conf.write_text("just some words\n")
        with pytest.raises(ConfigError, match="key=value"):
            PipelineConfig.from_sources(tmp_path, conf)

    def test_missing_config_file(self, tmp_path):
        with pytest.raises(ConfigError, match="not found"):
            PipelineConfig.from_sources(tmp_path, tmp_path / "nope.conf")

    def test_unknown_override_key(self, tmp_path):
        with pytest.raises(ConfigError, match="unknown config key"):
            PipelineConfig.from_sources(tmp_path, overrides={"bad_key": "1"})

    def test_type_errors_become_config_errors(self, tmp_path):
        with pytest.raises(ConfigError, match="seed"):
            PipelineConfig.from_sources(tmp_path, overrides={"seed": "not-a-number"})
        with pytest.raises(ConfigError, match="full_precision"):
            PipelineConfig.from_sources(tmp_path, overrides={"full_precision": "maybe"})

    def test_bool_spellings(self, tmp_path):
        for text, expected in (("true", True), ("1", True), ("no", False), ("0", False)):
            cfg = PipelineConfig.from_sources(tmp_path, overrides={"full_precision": text})
            assert cfg.full_precision is expected

    def test_hash_excludes_out_dir(self, tmp_path):
        a = PipelineConfig.from_sources(tmp_path / "a", overrides={"seed": "3"})
        b = PipelineConfig.from_sources(tmp_path / "b", overrides={"seed": "3"})
        c = PipelineConfig.from_sources(tmp_path / "a", overrides={"seed": "4"})
        assert a.config_hash() == b.config_hash()
        assert a.config_hash() != c.config_hash()

    def test_validate_requires_inputs(self, tmp_path, inputs):
        cfg = PipelineConfig.from_sources(tmp_path)
        with pytest.raises(ConfigError, match="call_report is required"):
            cfg.validate(need_market=False)
        cfg = PipelineConfig.from_sources(
            tmp_path,
            overrides={
                "call_report": str(inputs["call_report"]),
                "rates": str(tmp_path / "missing.csv"),
            },
        )
        with pytest.raises(ConfigError, match="not found"):
            cfg.validate(need_market=False)

    def test_validate_market_only_when_needed(self, tmp_path, inputs):
        cfg = PipelineConfig.from_sources(
            tmp_path,
            overrides={
                "call_report": str(inputs["call_report"]),
                "rates": str(inputs["rates"]),
            },
        )
        cfg.validate(need_market=False)
        with pytest.raises(ConfigError, match="market is required"):
            cfg.validate(need_market=True)

    def test_validate_value_ranges(self, tmp_path, inputs):
        base = {
            "call_report": str(inputs["call_report"]),
            "rates": str(inputs["rates"]),
        }
        for bad in (
            {"weighting": "sqrt"},
            {"rate_sampling": "first"},
            {"burn_in": "-1"},
            {"granger_lags": "0"},
            {"optimizer_starts": "0"},
            {"market_cap_base": "0"},
            {"beta_fig_ymin": "0.5", "beta_fig_ymax": "0.4"},
        ):
            cfg = PipelineConfig.from_sources(tmp_path, overrides={**base, **bad})
            with pytest.raises(ConfigError):
                cfg.validate(need_market=False)


class TestEmitter:
    def test_fmt6_examples(self):
        assert fmt6(0.123456789) == "0.123457"
        assert fmt6(1234567.0) == "1.23457e+06"
        assert fmt6(-0.000012345678) == "-1.23457e-05"
        assert fmt6(2.0) == "2"

    def test_cell_types(self, tmp_path):
        em = _Emitter(tmp_path, full_precision=True)
        em.csv(
            "t.csv",
            ["a", "b", "c", "d"],
            [[1, 0.123456789, True, "raw,text"], [2, float(np.float64(0.5)), False, ""]],
        )
        text = (tmp_path / "t.csv").read_text()
        assert text.splitlines() == [
            "a,b,c,d",
            "1,0.123457,true,raw,text",
            "2,0.5,false,",
        ]
        full = (tmp_path / "t.full.csv").read_text()
        assert "0.123456789" in full
        assert em.written == [tmp_path / "t.csv", tmp_path / "t.full.csv"]

    def test_no_sidecar_without_full_precision(self, tmp_path):
        em = _Emitter(tmp_path, full_precision=False)
        em.csv("t.csv", ["a"], [[1.5]])
        assert not (tmp_path / "t.full.csv").exists()


class TestAllRunOutputs:
    def test_every_expected_file_exists(self, all_run):
        names = {p.name for p in all_run.iterdir()}
        expected = {"ingest_errors.jsonl", "panel.csv", "table1.csv", "manifest.json"}
        expected |= {"cusum.csv", "granger_betas.csv", "granger_vol.csv", "adf_betas.csv"}
        expected |= {"pricing.csv", "effect_size.txt"}
        expected |= {"vol_income_stats.csv", "vol_expense_stats.csv"}
        expected |= {f"fig{i}.svg" for i in range(1, 11)}
        for side in ("income", "expense"):
            for d in range(1, 11):
                expected |= {f"tvp_{side}_d{d}.csv", f"tvp_{side}_d{d}.params"}
        assert expected <= names
        # full-precision sidecars for every emitted table
        for name in list(names):
            if name.endswith(".csv") and not name.endswith(".full.csv"):
                assert name[:-4] + ".full.csv" in names

    def test_manifest_contents(self, all_run):
        manifest = json.loads((all_run / "manifest.json").read_text())
        assert manifest["subcommand"] == "all"
        assert manifest["failure"] is None
        assert set(manifest["input_digests"]) == {"call_report", "rates", "market"}
        assert set(manifest["stage_seconds"]) == {
            "ingest", "betas", "tvp", "tests", "pricing", "figures",
        }
        assert all(t >= 0 for t in manifest["stage_seconds"].values())
        on_disk = {p.name for p in all_run.iterdir()} - {"manifest.json"}
        assert set(manifest["output_digests"]) == on_disk
        cfg = PipelineConfig.from_sources(
            all_run, overrides={k: v for k, v in manifest["config"].items() if v != ""}
        )
        assert cfg.config_hash() == manifest["config_hash"]

    def test_table1_identity_holds_in_printed_decimals(self, all_run):
        lines = (all_run / "table1.csv").read_text().splitlines()
        assert lines[0] == "decile,income_beta,expense_beta,nim_beta"
        assert len(lines) == 11
        for line in lines[1:]:
            _, inc, exp, nim = line.split(",")
            assert Decimal(inc) - Decimal(exp) == Decimal(nim)

    def test_table1_reader_round_trip(self, all_run):
        rows = read_table1_csv(all_run / "table1.csv")
        assert [r["decile"] for r in rows] == list(range(1, 11))
        full = read_table1_csv(all_run / "table1.full.csv")
        for r6, rf in zip(rows, full):
            assert r6["income_beta"] == pytest.approx(rf["income_beta"], rel=1e-5)

    def test_panel_reader_round_trip(self, all_run):
        panel = read_panel_csv(all_run / "panel.full.csv")
        assert sorted(panel.deciles) == list(range(1, 11))
        assert panel.n_quarters == 47
        display = read_panel_csv(all_run / "panel.csv")
        assert display.quarters == panel.quarters
        for d in range(1, 11):
            assert display.series(d).d_ff == pytest.approx(panel.series(d).d_ff, rel=1e-5)

    def test_tvp_outputs_are_consistent(self, all_run):
        for side in ("income", "expense"):
            for d in range(1, 11):
                data = read_tvp_csv(all_run / f"tvp_{side}_d{d}.full.csv")
                params = read_params(all_run / f"tvp_{side}_d{d}.params")
                assert len(data["quarters"]) == 47
                assert data["beta_sum"] == pytest.approx(
                    data["beta0"] + data["beta1"], abs=1e-12
                )
                r = float(params["obs_var"])
                assert r > 0
                assert np.all(data["cond_vol"] >= np.sqrt(r) - 1e-12)
                assert int(params["n_converged"]) >= 1
                assert int(params["starts"]) == 8
                assert int(params["burn_in"]) == 8
                # every numeric entry must be a plain parseable float,
                # including the snapped-to-tiny state variances
                for key in ("state_var_1", "state_var_2", "state_var_3",
                            "obs_var", "log_likelihood"):
                    value = float(params[key])
                    assert math.isfinite(value)

    def test_vol_stats_describe_post_burn_in_window(self, all_run):
        for side in ("income", "expense"):
            stats = read_stats_csv(all_run / f"vol_{side}_stats.csv")
            assert set(stats) == {"mean", "std", "min", "p25", "p50", "p75", "max", "n"}
            for d in range(1, 11):
                col = f"d{d}"
                assert stats["n"][col] == 47 - 8
                assert stats["min"][col] <= stats["p50"][col] <= stats["max"][col]
                data = read_tvp_csv(all_run / f"tvp_{side}_d{d}.full.csv")
                assert stats["max"][col] == pytest.approx(
                    np.max(data["cond_vol"][8:]), rel=1e-5
                )

    def test_cusum_table(self, all_run):
        rows = read_cusum_csv(all_run / "cusum.csv")
        assert len(rows) == 20
        panel = read_panel_csv(all_run / "panel.csv")
        for r in rows:
            assert r["series"] in ("income", "expense")
            assert r["sigma_hat"] > 0
            if r["crossed"]:
                assert r["first_crossing"] in panel.quarters
            else:
                assert r["first_crossing"] is None

    def test_granger_tables(self, all_run):
        for name in ("granger_betas.csv", "granger_vol.csv"):
            rows = read_granger_csv(all_run / name)
            assert [r["decile"] for r in rows] == list(range(1, 11))
            for r in rows:
                assert 0.0 <= r["p_ii_to_ie"] <= 1.0
                assert 0.0 <= r["p_ie_to_ii"] <= 1.0
                assert r["f_ii_to_ie"] >= 0.0
            # displayed p-values carry exactly four decimals
            for line in (all_run / name).read_text().splitlines()[1:]:
                cells = line.split(",")
                assert re.fullmatch(r"\d\.\d{4}", cells[2]), cells[2]
                assert re.fullmatch(r"\d\.\d{4}", cells[4]), cells[4]

    def test_adf_table(self, all_run):
        rows = read_adf_csv(all_run / "adf_betas.full.csv")
        assert len(rows) == 20
        for r in rows:
            assert r["cv_5pct"] < 0
            assert r["lags"] >= 0
            assert r["reject_5pct"] == (r["t_stat"] < r["cv_5pct"])

    def test_pricing_outputs(self, all_run):
        lines = (all_run / "pricing.csv").read_text().splitlines()
        assert lines[0] == "param,coefficient,p_value"
        params = [line.split(",")[0] for line in lines[1:]]
        assert params == ["gamma0", "gamma1", "gamma2", "gamma3", "adj_r2"]
        assert lines[5].endswith(",")  # adj_r2 has no p-value
        effect = read_params(all_run / "effect_size.txt")
        assert set(effect) == {
            "coefficient_expense_vol",
            "shock_sd_expense_vol",
            "fractional_effect",
            "base_value",
            "currency_effect",
        }
        assert float(effect["shock_sd_expense_vol"]) > 0
        assert float(effect["base_value"]) == 2.0e12

    def test_ingest_error_report_is_jsonl(self, all_run):
        lines = (all_run / "ingest_errors.jsonl").read_text().splitlines()
        for line in lines:
            record = json.loads(line)
            assert {"line", "column", "reason"} <= set(record)


class TestDeterminism:
    def test_rerun_reproduces_every_output_digest(self, inputs, all_run, tmp_path):
        rc = cli.main(["all", *run_args(inputs, tmp_path, "--full-precision")])
        assert rc == 0
        first = json.loads((all_run / "manifest.json").read_text())
        second = json.loads((tmp_path / "manifest.json").read_text())
        assert first["output_digests"] == second["output_digests"]
        assert first["config_hash"] == second["config_hash"]
        assert first["input_digests"] == second["input_digests"]

    def test_seed_change_alters_tvp_outputs_only_within_tolerance(self, inputs, all_run, tmp_path):
        """A different optimizer seed may land on a different start basin, but
        the deterministic tables (panel, table1) must not move at all."""
        rc = cli.main(["all", *run_args(inputs, tmp_path, "--full-precision", "--seed", "1")])
        assert rc == 0
        for name in ("panel.full.csv", "table1.full.csv", "cusum.full.csv"):
            assert (tmp_path / name).read_bytes() == (all_run / name).read_bytes()


class TestStageSubcommands:
    def test_betas_writes_only_its_tables(self, inputs, tmp_path):
        rc = cli.main(["betas", *run_args(inputs, tmp_path)])
        assert rc == 0
        names = {p.name for p in tmp_path.iterdir()}
        assert names == {"table1.csv", "manifest.json"}
        manifest = json.loads((tmp_path / "manifest.json").read_text())
        assert manifest["subcommand"] == "betas"
        assert set(manifest["stage_seconds"]) == {"betas"}

    def test_ingest_writes_panel_and_error_report(self, inputs, tmp_path):
        rc = cli.main(["ingest", *run_args(inputs, tmp_path)])
        assert rc == 0
        names = {p.name for p in tmp_path.iterdir()}
        assert names == {"ingest_errors.jsonl", "panel.csv", "manifest.json"}

    def test_market_not_required_for_betas(self, inputs, tmp_path):
        rc = cli.main([
            "betas",
            "--call-report", str(inputs["call_report"]),
            "--rates", str(inputs["rates"]),
            "--out", str(tmp_path),
        ])
        assert rc == 0

    def test_config_file_from_simulate_drives_a_run(self, inputs, tmp_path):
        rc = cli.main(["betas", "--config", str(inputs["conf"]), "--out", str(tmp_path)])
        assert rc == 0
        assert (tmp_path / "table1.csv").exists()


class TestFailureHandling:
    def test_missing_required_input_exits_2_without_outputs(self, inputs, tmp_path, capsys):
        out = tmp_path / "never"
        rc = cli.main([
            "betas",
            "--call-report", str(inputs["call_report"]),
            "--out", str(out),
        ])
        assert rc == 2
        assert "config error" in capsys.readouterr().err
        assert not out.exists()

    def test_nonexistent_input_file_exits_2(self, inputs, tmp_path, capsys):
        rc = cli.main([
            "betas",
            "--call-report", str(tmp_path / "ghost.csv"),
            "--rates", str(inputs["rates"]),
            "--out", str(tmp_path / "out"),
        ])
        assert rc == 2
        assert "not found" in capsys.readouterr().err

    def test_mid_run_data_failure_keeps_partial_outputs_and_manifest(
        self, inputs, tmp_path, capsys
    ):
        # a market file overlapping too few quarters breaks the pricing stage
        market = tmp_path / "market_short.csv"
        lines = inputs["market"].read_text().splitlines()
        market.write_text("\n".join(lines[:5]) + "\n")
        out = tmp_path / "out"
        rc = cli.main([
            "all",
            "--call-report", str(inputs["call_report"]),
            "--rates", str(inputs["rates"]),
            "--market", str(market),
            "--out", str(out),
        ])
        assert rc == 3
        assert "data error" in capsys.readouterr().err
        manifest = json.loads((out / "manifest.json").read_text())
        assert manifest["failure"]["stage"] == "pricing"
        assert manifest["failure"]["error"] == "InsufficientDataError"
        assert "quarters align" in manifest["failure"]["message"]
        # stages before the failure still wrote and digested their outputs
        names = {p.name for p in out.iterdir()}
        assert {"panel.csv", "table1.csv", "cusum.csv"} <= names
        assert "pricing.csv" not in names
        assert set(manifest["output_digests"]) == names - {"manifest.json"}

    def test_unreadable_config_value_exits_2(self, inputs, tmp_path, capsys):
        rc = cli.main(["betas", *run_args(inputs, tmp_path / "out", "--burn-in", "-3")])
        assert rc == 2
        assert "burn_in" in capsys.readouterr().err


class TestOutResolution:
    def test_env_var_fallback(self, inputs, tmp_path, monkeypatch):
        monkeypatch.setenv("BANKBETA_OUT", str(tmp_path / "env_out"))
        rc = cli.main(["betas", *[
            "--call-report", str(inputs["call_report"]),
            "--rates", str(inputs["rates"]),
        ]])
        assert rc == 0
        assert (tmp_path / "env_out" / "table1.csv").exists()

    def test_flag_beats_env_var(self, inputs, tmp_path, monkeypatch):
        monkeypatch.setenv("BANKBETA_OUT", str(tmp_path / "env_out"))
        rc = cli.main(["betas", *run_args(inputs, tmp_path / "flag_out")])
        assert rc == 0
        assert (tmp_path / "flag_out" / "table1.csv").exists()
        assert not (tmp_path / "env_out").exists()

    def test_no_out_anywhere_exits_2(self, inputs, monkeypatch, capsys):
        monkeypatch.delenv("BANKBETA_OUT", raising=False)
        rc = cli.main(["betas", *[
            "--call-report", str(inputs["call_report"]),
            "--rates", str(inputs["rates"]),
        ]])
        assert rc == 2
        assert "--out is required" in capsys.readouterr().err


class TestSimulateSubcommand:
    def test_writes_inputs_and_conf(self, tmp_path):
        rc = cli.main([
            "simulate", "--out", str(tmp_path), "--seed", "3",
            "--banks", "12", "--quarters", "20",
        ])
        assert rc == 0
        names = {p.name for p in tmp_path.iterdir()}
        assert names == {"call_report.csv", "rates.csv", "market.csv", "pipeline.conf"}
        conf = (tmp_path / "pipeline.conf").read_text()
        assert "call_report=" in conf and "rates=" in conf and "market=" in conf

    def test_too_few_banks_exits_3(self, tmp_path, capsys):
        rc = cli.main(["simulate", "--out", str(tmp_path), "--banks", "5"])
        assert rc == 3
        assert "data error" in capsys.readouterr().err
