"""CLI behaviors: CSV ingestion, config handling, reports, determinism."""
import json
import math

import numpy as np
import pytest

from ideaflow.cli import ingest_csv, main, run
from ideaflow.errors import (ConfigError, IncreasingOutputError, ParseError,
                             SpanError)
from ideaflow.law import JonesParams, simulate_deterministic
from ideaflow.mlfit import ModelClass
from ideaflow.series import InputPath, TimeSeries
from ideaflow.stochastic.laws import simulate_path


def _write_csv(path, times, values) -> str:
    with open(path, "w", newline="") as fh:
        fh.write("t,value\n")
        for t, v in zip(times, values):
            fh.write(f"{float(t)!r},{float(v)!r}\n")
    return str(path)


def _write_text(path, text) -> str:
    with open(path, "w", newline="") as fh:
        fh.write(text)
    return str(path)


@pytest.fixture(scope="module")
def noisy_data(tmp_path_factory):
    """Feller-simulated observations plus their exponential input path."""
    root = tmp_path_factory.mktemp("noisy")
    years = np.linspace(1900.0, 1960.0, 61)
    ivals = np.exp(0.02 * (years - 1900.0))
    path = InputPath(TimeSeries(years, ivals))
    model = ModelClass("feller").build(0.05, 0.5, 0.4, 0.15)
    sim = simulate_path(model, 1.0, path, years,
                        np.random.default_rng([3, 0]))
    return (_write_csv(root / "a.csv", sim.times, sim.values),
            _write_csv(root / "i.csv", years, ivals))


@pytest.fixture(scope="module")
def smooth_data(tmp_path_factory):
    """Noise-free trajectory on a bent (non-collinear) input path."""
    root = tmp_path_factory.mktemp("smooth")
    years = np.linspace(0.0, 40.0, 41)
    ivals = np.exp(0.03 * years + 0.001 * years ** 2)
    path = InputPath(TimeSeries(years, ivals))
    det = simulate_deterministic(JonesParams(0.05, 0.5, 0.4), 1.0, path,
                                 years)
    return (_write_csv(root / "a.csv", det.times, det.values),
            _write_csv(root / "i.csv", years, ivals))


class TestIngestCsv:
    def test_minimal_two_point_file(self, tmp_path):
        f = _write_text(tmp_path / "m.csv", "t,value\n1948,1.0\n1949,1.0141\n")
        ts = ingest_csv(f)
        assert ts.times.tolist() == [1948.0, 1949.0]
        assert ts.values.tolist() == [1.0, 1.0141]

    def test_iso_date_mid_year(self, tmp_path):
        f = _write_text(tmp_path / "m.csv",
                        "t,value\n1948-01-01,1.0\n1948-07-02,2.0\n")
        ts = ingest_csv(f)
        assert ts.times[0] == 1948.0
        assert ts.times[1] == pytest.approx(1948.5, abs=0.003)

    def test_negative_value_names_line_3(self, tmp_path):
        f = _write_text(tmp_path / "m.csv",
                        "t,value\n1948,1.0\n1949,-2.0\n1950,3.0\n")
        with pytest.raises(ParseError, match="line 3") as err:
            ingest_csv(f)
        assert err.value.line == 3

    def test_bad_header(self, tmp_path):
        f = _write_text(tmp_path / "m.csv", "year,count\n1948,1.0\n1949,2.0\n")
        with pytest.raises(ParseError, match="line 1"):
            ingest_csv(f)

    def test_wrong_field_count(self, tmp_path):
        f = _write_text(tmp_path / "m.csv", "t,value\n1948,1.0\n1949\n")
        with pytest.raises(ParseError, match="line 3"):
            ingest_csv(f)

    def test_non_numeric_value(self, tmp_path):
        f = _write_text(tmp_path / "m.csv", "t,value\n1948,one\n1949,2.0\n")
        with pytest.raises(ParseError, match="line 2"):
            ingest_csv(f)

    def test_bad_time_token(self, tmp_path):
        f = _write_text(tmp_path / "m.csv", "t,value\n19xx,1.0\n1949,2.0\n")
        with pytest.raises(ParseError, match="neither a decimal year"):
            ingest_csv(f)

    def test_duplicate_timestamp(self, tmp_path):
        f = _write_text(tmp_path / "m.csv", "t,value\n1948,1.0\n1948,2.0\n")
        with pytest.raises(ParseError, match="duplicate") as err:
            ingest_csv(f)
        assert err.value.line == 3

    def test_out_of_order_rows(self, tmp_path):
        f = _write_text(tmp_path / "m.csv",
                        "t,value\n1950,1.0\n1948,2.0\n")
        with pytest.raises(ParseError, match="out of order"):
            ingest_csv(f)

    def test_crlf_and_bom_accepted(self, tmp_path):
        f = tmp_path / "m.csv"
        f.write_bytes(b"\xef\xbb\xbft,value\r\n1948,1.0\r\n1949,2.0\r\n")
        ts = ingest_csv(str(f))
        assert ts.values.tolist() == [1.0, 2.0]

    def test_single_row_rejected(self, tmp_path):
        f = _write_text(tmp_path / "m.csv", "t,value\n1948,1.0\n")
        with pytest.raises(ParseError, match="at least 2"):
            ingest_csv(f)


class TestConfigValidation:
    def test_unknown_key(self, tmp_path):
        with pytest.raises(ConfigError, match="typo"):
            run("naive", {"ga": 0.1, "gi": 0.2, "typo": 1,
                          "outputs": str(tmp_path)})

    def test_missing_required(self, tmp_path):
        with pytest.raises(ConfigError, match="--gi"):
            run("naive", {"ga": 0.1, "outputs": str(tmp_path)})

    def test_wrong_value_type(self, tmp_path):
        with pytest.raises(ConfigError, match="ga must be a number"):
            run("naive", {"ga": "big", "gi": 0.2, "outputs": str(tmp_path)})

    def test_unknown_command(self):
        with pytest.raises(ConfigError, match="unknown command"):
            run("estimate-everything", {})

    def test_seed_must_be_unsigned_64_bit(self, tmp_path):
        base = {"ga": 0.1, "gi": 0.2, "outputs": str(tmp_path)}
        with pytest.raises(ConfigError, match="seed"):
            run("naive", {**base, "seed": -1})
        with pytest.raises(ConfigError, match="seed"):
            run("naive", {**base, "seed": 2 ** 64})

    def test_threads_validated_and_resolved(self, tmp_path):
        base = {"ga": 0.1, "gi": 0.2, "outputs": str(tmp_path)}
        with pytest.raises(ConfigError, match="threads"):
            run("naive", {**base, "threads": -2})
        report = run("naive", {**base, "threads": 0})
        assert report["config"]["threads"] >= 1

    def test_interpolation_choice(self, tmp_path):
        with pytest.raises(ConfigError, match="interpolation"):
            run("naive", {"ga": 0.1, "gi": 0.2, "interpolation": "cubic",
                          "outputs": str(tmp_path)})


class TestReports:
    def test_naive_value_and_schema(self, tmp_path):
        report = run("naive", {"ga": 0.0141, "gi": 0.0515,
                               "outputs": str(tmp_path)})
        assert report["estimates"]["r"] == pytest.approx(0.274, abs=1e-3)
        for key in ("schema_version", "command", "config", "seed",
                    "estimates", "stderrs", "percentiles", "diagnostics"):
            assert key in report
        on_disk = json.loads((tmp_path / "report.json").read_text())
        assert on_disk == report

    def test_prior_tables_reference_numbers(self, tmp_path):
        report = run("prior-tables", {"outputs": str(tmp_path)})
        half = report["percentiles"]["half_cauchy"]
        ratio = report["percentiles"]["prior_r"]
        assert half["p05"] == pytest.approx(0.0787, rel=5e-3)
        assert half["p95"] == pytest.approx(12.7, rel=5e-3)
        assert ratio["p05"] == pytest.approx(0.0267, rel=1e-2)
        assert ratio["p50"] == 1.0
        assert ratio["p95"] == pytest.approx(37.5, rel=1e-2)

    def test_bracket_steady_state_bounds(self, tmp_path):
        years = np.linspace(0.0, 50.0, 51)
        i_csv = _write_csv(tmp_path / "i.csv", years, np.exp(0.05 * years))
        report = run("bracket", {
            "inputs": [i_csv], "t1": 0.0, "ts": 20.0, "t2": 50.0,
            "g1": 0.025, "gbar": 0.025, "lambda_range": "0.25:1",
            "outputs": str(tmp_path)})
        assert report["estimates"]["r_lo"] == pytest.approx(0.5, abs=1e-3)
        assert report["estimates"]["r_hi"] == pytest.approx(0.5, abs=1e-3)

    def test_fit_ols_recovers_noise_free(self, smooth_data, tmp_path):
        a_csv, i_csv = smooth_data
        report = run("fit-ols", {"inputs": [a_csv, i_csv],
                                 "outputs": str(tmp_path)})
        est = report["estimates"]
        assert est["beta"] == pytest.approx(0.5, rel=0.05)
        assert est["lambda"] == pytest.approx(0.4, rel=0.05)
        assert est["r"] == pytest.approx(0.8, rel=0.05)
        diag = report["diagnostics"]
        assert diag["effective_n"] <= diag["n_windows"]
        assert set(report["stderrs"]) == {"log_theta", "beta", "lambda"}

    def test_fit_ols_surfaces_module_error(self, tmp_path):
        a_csv = _write_csv(tmp_path / "a.csv", range(6),
                           [1.0, 1.2, 1.1, 1.3, 1.5, 1.6])
        i_csv = _write_csv(tmp_path / "i.csv", range(6), np.ones(6) * 2.0)
        with pytest.raises(IncreasingOutputError, match="nonincreasing"):
            run("fit-ols", {"inputs": [a_csv, i_csv],
                            "outputs": str(tmp_path)})

    def test_fit_mle_end_to_end(self, noisy_data, tmp_path):
        a_csv, i_csv = noisy_data
        report = run("fit-mle", {"inputs": [a_csv, i_csv], "restarts": 2,
                                 "outputs": str(tmp_path)})
        est = report["estimates"]
        assert set(est) == {"theta", "beta", "lambda", "lambda_raw",
                            "noise", "r"}
        assert est["beta"] > 0.0 and est["noise"] > 0.0
        assert report["diagnostics"]["converged"] is True
        assert math.isfinite(report["diagnostics"]["loglik"])

    def test_lrt_report(self, noisy_data, tmp_path):
        a_csv, i_csv = noisy_data
        report = run("lrt", {"inputs": [a_csv, i_csv], "restarts": 2,
                             "outputs": str(tmp_path)})
        diag = report["diagnostics"]
        assert diag["stat"] >= 0.0
        assert 0.0 <= diag["p_value"] <= 1.0
        assert diag["df"] == 1

    def test_cv_report(self, noisy_data, tmp_path):
        a_csv, i_csv = noisy_data
        report = run("cv", {"inputs": [a_csv, i_csv], "restarts": 2,
                            "outputs": str(tmp_path)})
        table = report["diagnostics"]["held_out_loglik"]
        assert set(table) == {"independent-levy", "feller"}
        assert report["diagnostics"]["best"] in table

    def test_bootstrap_report_and_scatter(self, noisy_data, tmp_path):
        a_csv, i_csv = noisy_data
        report = run("bootstrap", {
            "inputs": [a_csv, i_csv], "restarts": 2, "nboot": 6,
            "refit_restarts": 1, "plots": True, "outputs": str(tmp_path)})
        assert set(report["stderrs"]) == {"theta", "beta", "lambda",
                                          "noise", "r"}
        diag = report["diagnostics"]
        assert diag["n_replicates"] == 6
        assert diag["conditional_r"]["n"] <= 6
        svg = (tmp_path / "bootstrap_scatter.svg").read_text()
        assert "<svg" in svg

    def test_bayes_report_and_violins(self, tmp_path):
        years = np.arange(2012.0, 2023.0)
        i_csv = _write_csv(tmp_path / "i.csv", years,
                           np.exp(0.4 * (years - 2012.0)))
        report = run("bayes", {
            "inputs": [i_csv], "doubling_time": 0.75,
            "period": "2012:2022", "iterations": 1200, "seed": 2,
            "plots": True, "outputs": str(tmp_path)})
        pct = report["percentiles"]
        assert set(pct) == {"lambda", "beta", "r"}
        assert pct["r"]["p05"] < pct["r"]["p50"] < pct["r"]["p95"]
        assert report["estimates"]["r"] == pct["r"]["p50"]
        assert set(report["diagnostics"]["split_rhat"]) == {
            "lambda", "beta", "sigma_s", "theta_s_excess"}
        assert "<svg" in (tmp_path / "posterior_violins.svg").read_text()

    def test_simulate_series_and_overlay(self, noisy_data, tmp_path):
        _, i_csv = noisy_data
        report = run("simulate", {"inputs": [i_csv], "seed": 5,
                                  "plots": True, "outputs": str(tmp_path)})
        series = report["series"]
        assert len(series["t"]) == len(series["value"]) == 61
        assert all(v > 0.0 for v in series["value"])
        assert report["diagnostics"]["terminal_level"] == series["value"][-1]
        assert "<svg" in (tmp_path / "trajectory.svg").read_text()

    def test_simulate_byte_identical_and_seed_sensitive(self, noisy_data,
                                                        tmp_path):
        _, i_csv = noisy_data
        cfg = {"inputs": [i_csv], "seed": 7, "outputs": str(tmp_path)}
        run("simulate", cfg)
        first = (tmp_path / "report.json").read_bytes()
        run("simulate", cfg)
        assert (tmp_path / "report.json").read_bytes() == first
        other = run("simulate", {**cfg, "seed": 8})
        assert other["series"]["value"] != json.loads(first)["series"]["value"]

    def test_replay_from_config_echo(self, noisy_data, tmp_path):
        _, i_csv = noisy_data
        report = run("simulate", {"inputs": [i_csv], "seed": 11,
                                  "outputs": str(tmp_path)})
        first = (tmp_path / "report.json").read_bytes()
        repl = run(report["command"], report["config"])
        assert (tmp_path / "report.json").read_bytes() == first
        assert repl == report

    def test_out_of_span_window_surfaces(self, noisy_data, tmp_path):
        _, i_csv = noisy_data
        with pytest.raises(SpanError):
            run("bayes", {"inputs": [i_csv], "doubling_time": 1.0,
                          "period": "1800:1900", "iterations": 100,
                          "outputs": str(tmp_path)})


class TestMain:
    def test_naive_exit_zero(self, tmp_path):
        rc = main(["naive", "--ga", "0.0141", "--gi", "0.0515",
                   "--outputs", str(tmp_path)])
        assert rc == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["estimates"]["r"] == pytest.approx(0.274, abs=1e-3)

    def test_module_error_exit_one(self, tmp_path, capsys):
        a_csv = _write_csv(tmp_path / "a.csv", range(6),
                           [1.0, 1.2, 1.1, 1.3, 1.5, 1.6])
        i_csv = _write_csv(tmp_path / "i.csv", range(6), np.ones(6) * 2.0)
        rc = main(["fit-ols", "--inputs", a_csv, i_csv,
                   "--outputs", str(tmp_path)])
        assert rc == 1
        assert "nonincreasing" in capsys.readouterr().err

    def test_missing_input_file_exit_one(self, tmp_path, capsys):
        rc = main(["simulate", "--inputs", str(tmp_path / "nope.csv"),
                   "--outputs", str(tmp_path)])
        assert rc == 1
        assert "nope.csv" in capsys.readouterr().err

    def test_config_file_defaults_and_cli_override(self, noisy_data,
                                                   tmp_path):
        _, i_csv = noisy_data
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"inputs": [i_csv], "seed": 7,
                                        "beta": 0.25}))
        assert main(["simulate", "--config", str(cfg_file),
                     "--outputs", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["config"]["beta"] == 0.25
        assert report["seed"] == 7
        assert main(["simulate", "--config", str(cfg_file), "--seed", "9",
                     "--outputs", str(tmp_path)]) == 0
        report = json.loads((tmp_path / "report.json").read_text())
        assert report["seed"] == 9
        assert report["config"]["beta"] == 0.25

    def test_config_file_unknown_key_exit_one(self, tmp_path, capsys):
        cfg_file = tmp_path / "cfg.json"
        cfg_file.write_text(json.dumps({"ga": 0.1, "gi": 0.2, "typo_key": 1}))
        rc = main(["naive", "--config", str(cfg_file),
                   "--outputs", str(tmp_path)])
        assert rc == 1
        assert "typo_key" in capsys.readouterr().err

    def test_unknown_flag_exits_two(self):
        with pytest.raises(SystemExit) as err:
            main(["naive", "--no-such-flag", "1"])
        assert err.value.code == 2
