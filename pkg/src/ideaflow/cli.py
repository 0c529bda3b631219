"""Command-line front end: CSV ingestion, estimator dispatch, reports.

Every run writes ``report.json`` (schema version 1) into the output
directory: estimates, standard errors, percentile tables, diagnostics,
the seed, and a config echo from which the run can be replayed byte for
byte.  Optional SVG figures (``--plots``) accompany the report; they are
illustrative and excluded from the byte-identity contract.

Data files are UTF-8 CSV with header ``t,value``; ``t`` is a decimal
year or an ISO date (converted at day resolution).  Commands fitting the
law take ``--inputs OUTPUT_CSV INPUT_CSV`` (observed efficiency levels
first, the research-input series second); commands needing only the
input series take a single file.
"""
from __future__ import annotations

import argparse
import csv
import datetime
import json
import logging
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Mapping, Sequence

import numpy as np

from . import __version__
from .bayes import (PERCENTILE_GRID, bayes_fit, halfcauchy_quantile,
                    prior_r_quantiles)
from .classical import (BracketProblem, bracket_phi, bracket_r_bounds,
                        naive_r, ols_fit)
from .errors import ConfigError, IdeaflowError, ParseError
from .law import simulate_deterministic
from .mlfit import (ModelClass, cross_validate, lrt_lambda_zero, mle_fit,
                    parametric_bootstrap)
from .series import InputPath, ObservationSet, TimeSeries
from .stochastic.laws import STRUCTURES, simulate_path

_LOG = logging.getLogger("ideaflow.cli")

SCHEMA_VERSION = 1
REPORT_NAME = "report.json"

_INTERPOLATION_NAMES = {"step": "step-left", "linear": "linear",
                        "loglinear": "log-linear"}
# Report tables use the spelled-out name for the input elasticity.
_PUBLIC = {"lam": "lambda"}


# ---------------------------------------------------------------------------
# CSV ingestion


def _decimal_year(token: str, line: int) -> float:
    """Decimal year from a year number or an ISO date (day resolution)."""
    try:
        value = float(token)
    except ValueError:
        try:
            date = datetime.date.fromisoformat(token)
        except ValueError:
            raise ParseError(
                f"line {line}: time {token!r} is neither a decimal year "
                f"nor an ISO date", line=line) from None
        return date.year + (date.timetuple().tm_yday - 1) / 365.25
    if not math.isfinite(value):
        raise ParseError(f"line {line}: time must be finite, got {token!r}",
                         line=line)
    return value


def ingest_csv(file: str | os.PathLike) -> TimeSeries:
    """Read a ``t,value`` CSV into a validated series.

    Values must be positive and rows strictly increasing in time; every
    rejection names the 1-based offending line.
    """
    with open(file, encoding="utf-8-sig", newline="") as fh:
        rows = list(csv.reader(fh))
    if not rows:
        raise ParseError("line 1: empty file, expected header 't,value'",
                         line=1)
    header = [cell.strip().lower() for cell in rows[0]]
    if header != ["t", "value"]:
        raise ParseError(
            f"line 1: expected header 't,value', got {','.join(rows[0])!r}",
            line=1)
    times: list[float] = []
    values: list[float] = []
    for line, row in enumerate(rows[1:], start=2):
        if len(row) != 2:
            raise ParseError(
                f"line {line}: expected 2 fields, got {len(row)}", line=line)
        t = _decimal_year(row[0].strip(), line)
        token = row[1].strip()
        try:
            value = float(token)
        except ValueError:
            raise ParseError(
                f"line {line}: value {token!r} is not a number",
                line=line) from None
        if not math.isfinite(value) or value <= 0.0:
            raise ParseError(
                f"line {line}: value must be positive and finite, "
                f"got {token}", line=line)
        if times and t <= times[-1]:
            kind = ("duplicate timestamp" if t == times[-1]
                    else "timestamps out of order")
            raise ParseError(f"line {line}: {kind} ({row[0].strip()})",
                             line=line)
        times.append(t)
        values.append(value)
    if len(times) < 2:
        raise ParseError(f"need at least 2 data rows, found {len(times)}")
    return TimeSeries(np.asarray(times), np.asarray(values))


# ---------------------------------------------------------------------------
# Option table (shared by argparse, config files, and run())


@dataclass(frozen=True)
class _Flag:
    name: str
    kind: str  # float | int | str | choice | paths | bool
    default: object = None
    required: bool = False
    choices: tuple[str, ...] | None = None
    help: str = ""


_COMMON_FLAGS = (
    _Flag("inputs", "paths", (), help="input CSV file(s); see module help "
          "for the per-command order"),
    _Flag("outputs", "str", ".", help="directory receiving report.json "
          "and plots"),
    _Flag("seed", "int", 0, help="seed driving every stochastic step"),
    _Flag("threads", "int", 0, help="worker cap for parallel estimators; "
          "0 = machine parallelism (results never depend on it)"),
    _Flag("interpolation", "choice", "loglinear",
          choices=("step", "linear", "loglinear"),
          help="input-path interpolation rule"),
    _Flag("plots", "bool", False, help="also write SVG figures"),
)

_SHAPE_FLAGS = (
    _Flag("structure", "choice", "feller", choices=STRUCTURES,
          help="noise structure"),
    _Flag("alpha", "float", 2.0, help="stability index of the stable "
          "structures (ignored by feller)"),
    _Flag("skew", "float", 0.0, help="skewness of the stable structures"),
)

_MLE_FLAGS = _SHAPE_FLAGS + (
    _Flag("restarts", "int", 8, help="optimizer restarts"),
    _Flag("tolerance", "float", 1e-7, help="optimizer tolerance"),
    _Flag("lambda_range", "str", None,
          help="LO:HI box constraint on the input elasticity"),
)

_COMMANDS: dict[str, tuple[_Flag, ...]] = {
    "naive": (
        _Flag("ga", "float", required=True,
              help="average output growth rate per year"),
        _Flag("gi", "float", required=True,
              help="average input growth rate per year"),
    ),
    "bracket": (
        _Flag("t1", "float", required=True,
              help="time of the initial growth observation"),
        _Flag("ts", "float", required=True,
              help="start of the averaged growth window"),
        _Flag("t2", "float", required=True,
              help="end of the averaged growth window"),
        _Flag("g1", "float", required=True,
              help="output growth rate at t1"),
        _Flag("gbar", "float", required=True,
              help="average output growth over [ts, t2]"),
        _Flag("lambda_range", "str", "0:1",
              help="LO:HI elasticity range swept for the bounds"),
    ),
    "fit-ols": (),
    "fit-mle": _MLE_FLAGS,
    "bootstrap": _MLE_FLAGS + (
        _Flag("nboot", "int", 100, help="bootstrap replicates"),
        _Flag("refit_restarts", "int", 2,
              help="optimizer restarts per replicate"),
    ),
    "lrt": _SHAPE_FLAGS + (
        _Flag("restarts", "int", 6, help="optimizer restarts per arm"),
    ),
    "cv": (
        _Flag("structures", "str", "independent-levy,feller",
              help="comma-separated noise structures to compare"),
        _Flag("alpha", "float", 2.0, help="stability index of the stable "
              "structures"),
        _Flag("skew", "float", 0.0, help="skewness of the stable structures"),
        _Flag("split", "float", 0.8,
              help="training fraction of the chronological split"),
        _Flag("restarts", "int", 6, help="optimizer restarts"),
    ),
    "bayes": (
        _Flag("doubling_time", "float", required=True,
              help="observed doubling time of the output level (inf = flat)"),
        _Flag("period", "str", required=True,
              help="START:END observation period (decimal years)"),
        _Flag("chains", "int", 12, help="sampler chains"),
        _Flag("iterations", "int", 20000, help="sampler iterations"),
        _Flag("burn_in", "int", None,
              help="discarded iterations (default: half)"),
        _Flag("fixed_lambda", "float", None,
              help="pin the likelihood's input elasticity"),
    ),
    "simulate": _SHAPE_FLAGS + (
        _Flag("theta", "float", 0.05, help="production rate"),
        _Flag("beta", "float", 0.5, help="diminishing-returns exponent"),
        _Flag("lam", "float", 0.4, help="input elasticity"),
        _Flag("noise", "float", 0.1, help="noise scale"),
        _Flag("a0", "float", 1.0, help="initial level"),
    ),
    "prior-tables": (),
}

_HELP = {
    "naive": "growth-rate ratio estimate of the returns r",
    "bracket": "bounds on r from coarse growth observations",
    "fit-ols": "approximate log-linear regression fit",
    "fit-mle": "maximum-likelihood fit of a stochastic law",
    "bootstrap": "MLE fit plus parametric-bootstrap standard errors",
    "lrt": "likelihood-ratio test of zero input elasticity",
    "cv": "held-out likelihood comparison of noise structures",
    "bayes": "posterior over (lambda, beta, r) from one doubling time",
    "simulate": "sample one stochastic trajectory on the input grid",
    "prior-tables": "reference quantiles of the half-Cauchy priors",
}


def _flags_for(command: str) -> tuple[_Flag, ...]:
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r}; choose one of "
                          f"{', '.join(sorted(_COMMANDS))}")
    return _COMMON_FLAGS + _COMMANDS[command]


def _coerce(flag: _Flag, value: object) -> object:
    name = flag.name
    if flag.kind == "float":
        if isinstance(value, bool) or not isinstance(value, (int, float)):
            raise ConfigError(f"{name} must be a number, got {value!r}")
        return float(value)
    if flag.kind == "int":
        if isinstance(value, bool) or not isinstance(value, int):
            raise ConfigError(f"{name} must be an integer, got {value!r}")
        return int(value)
    if flag.kind == "bool":
        if not isinstance(value, bool):
            raise ConfigError(f"{name} must be true or false, got {value!r}")
        return value
    if flag.kind == "paths":
        if isinstance(value, (str, os.PathLike)):
            return (os.fspath(value),)
        if not (isinstance(value, (list, tuple))
                and all(isinstance(v, (str, os.PathLike)) for v in value)):
            raise ConfigError(f"{name} must be a list of file paths, "
                              f"got {value!r}")
        return tuple(os.fspath(v) for v in value)
    if not isinstance(value, str):
        raise ConfigError(f"{name} must be a string, got {value!r}")
    if flag.choices is not None and value not in flag.choices:
        raise ConfigError(f"{name} must be one of "
                          f"{', '.join(flag.choices)}, got {value!r}")
    return value


def _resolve(command: str, config: Mapping[str, object]) -> dict:
    """Validate a config mapping against the command's option table."""
    flags = _flags_for(command)
    by_name = {f.name: f for f in flags}
    unknown = sorted(set(config) - set(by_name))
    if unknown:
        raise ConfigError(f"unknown config keys for {command}: "
                          f"{', '.join(unknown)}")
    out: dict[str, object] = {}
    for flag in flags:
        value = config.get(flag.name)
        if value is None:
            value = flag.default
        if value is None:
            if flag.required:
                raise ConfigError(
                    f"{command} requires --{flag.name.replace('_', '-')}")
            out[flag.name] = None
        else:
            out[flag.name] = _coerce(flag, value)
    if not 0 <= out["seed"] < 2 ** 64:
        raise ConfigError(f"seed must be a 64-bit unsigned integer, "
                          f"got {out['seed']}")
    if out["threads"] == 0:
        out["threads"] = os.cpu_count() or 1
    if out["threads"] < 1:
        raise ConfigError("threads must be >= 1, or 0 for machine "
                          f"parallelism, got {out['threads']}")
    return out


def _parse_pair(text: str, name: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) == 2:
        try:
            return float(parts[0]), float(parts[1])
        except ValueError:
            pass
    raise ConfigError(f"{name} expects 'LO:HI' numbers, got {text!r}")


def _input_only(cfg: Mapping, command: str) -> InputPath:
    inputs = cfg["inputs"]
    if len(inputs) != 1:
        raise ConfigError(f"{command} expects --inputs INPUT_CSV, "
                          f"got {len(inputs)} file(s)")
    return InputPath(ingest_csv(inputs[0]),
                     _INTERPOLATION_NAMES[cfg["interpolation"]])


def _dataset(cfg: Mapping, command: str) -> tuple[ObservationSet, InputPath]:
    inputs = cfg["inputs"]
    if len(inputs) != 2:
        raise ConfigError(f"{command} expects --inputs OUTPUT_CSV INPUT_CSV, "
                          f"got {len(inputs)} file(s)")
    observed = ingest_csv(inputs[0])
    path = InputPath(ingest_csv(inputs[1]),
                     _INTERPOLATION_NAMES[cfg["interpolation"]])
    return ObservationSet(observed.times, observed.values), path


# ---------------------------------------------------------------------------
# Command bodies: each returns (report body, plot jobs)

PlotJob = tuple[str, str, dict]


def _run_naive(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    return {"estimates": {"r": naive_r(cfg["ga"], cfg["gi"])}}, ()


def _run_bracket(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    path = _input_only(cfg, "bracket")
    problem = BracketProblem(path, cfg["t1"], cfg["ts"], cfg["t2"],
                             cfg["g1"], cfg["gbar"])
    lo, hi = _parse_pair(cfg["lambda_range"], "lambda-range")
    r_lo, r_hi = bracket_r_bounds(problem, lo, hi)
    body = {
        "estimates": {"r_lo": r_lo, "r_hi": r_hi},
        "diagnostics": {"lambda_lo": lo, "lambda_hi": hi,
                        "phi_at_lambda_lo": bracket_phi(problem, lo),
                        "phi_at_lambda_hi": bracket_phi(problem, hi)},
    }
    return body, ()


def _run_fit_ols(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    obs, path = _dataset(cfg, "fit-ols")
    fit = ols_fit(obs, path)
    body = {
        "estimates": {"theta": fit.theta_hat, "beta": fit.beta_hat,
                      "lambda": fit.lambda_hat,
                      "r": (fit.lambda_hat / fit.beta_hat
                            if fit.beta_hat != 0 else None)},
        "stderrs": dict(fit.stderrs),
        "diagnostics": {"rho": fit.rho, "effective_n": fit.effective_n,
                        "residual_variance": fit.residual_variance,
                        "n_windows": fit.n_windows},
    }
    return body, ()


def _mle_from(cfg: Mapping, obs: ObservationSet, path: InputPath):
    cls = ModelClass(cfg["structure"], cfg["alpha"], cfg["skew"])
    bounds = None
    if cfg["lambda_range"] is not None:
        bounds = {"lam": _parse_pair(cfg["lambda_range"], "lambda-range")}
    fit = mle_fit(cls, obs, path, restarts=cfg["restarts"],
                  tolerance=cfg["tolerance"], bounds=bounds,
                  seed=cfg["seed"])
    return cls, fit


def _fit_tables(fit) -> tuple[dict, dict, dict]:
    p = fit.params
    estimates = {
        "theta": p["theta"], "beta": p["beta"], "lambda": p["lam"],
        "noise": p["noise"], "lambda_raw": fit.lambda_raw,
        "r": None if math.isnan(fit.r) else fit.r,
    }
    fisher = ({} if fit.fisher_se is None
              else {_PUBLIC.get(k, k): v for k, v in fit.fisher_se.items()})
    diagnostics = {"loglik": fit.loglik, "converged": fit.converged,
                   "n_restarts_used": fit.n_restarts_used}
    return estimates, fisher, diagnostics


def _trajectory_job(fit, obs: ObservationSet,
                    path: InputPath) -> tuple[PlotJob, ...]:
    try:
        det = simulate_deterministic(fit.model.jones, float(obs.levels[0]),
                                     path, obs.times)
    except IdeaflowError:
        return ()
    curves = [("observed", obs.times, obs.levels, "points"),
              ("fitted deterministic path", det.times, det.values, "line")]
    return (("trajectory.svg", "trajectory_overlay", {"curves": curves}),)


def _run_fit_mle(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    obs, path = _dataset(cfg, "fit-mle")
    _, fit = _mle_from(cfg, obs, path)
    estimates, fisher, diagnostics = _fit_tables(fit)
    body = {"estimates": estimates, "stderrs": fisher,
            "diagnostics": {**diagnostics, "n_observations": len(obs)}}
    jobs = _trajectory_job(fit, obs, path) if cfg["plots"] else ()
    return body, jobs


def _run_bootstrap(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    obs, path = _dataset(cfg, "bootstrap")
    _, fit = _mle_from(cfg, obs, path)
    boot = parametric_bootstrap(fit, obs, path, n=cfg["nboot"],
                                seed=cfg["seed"],
                                restarts=cfg["refit_restarts"])
    estimates, fisher, diagnostics = _fit_tables(fit)
    body = {
        "estimates": estimates,
        "stderrs": {_PUBLIC.get(k, k): v for k, v in boot.se.items()},
        "diagnostics": {**diagnostics,
                        "fisher_se": fisher,
                        "conditional_r": dict(boot.conditional_r),
                        "n_lambda_negative": boot.n_lambda_negative,
                        "n_replicates": cfg["nboot"]},
    }
    jobs: tuple[PlotJob, ...] = ()
    if cfg["plots"]:
        jobs = _trajectory_job(fit, obs, path) + (
            ("bootstrap_scatter.svg", "bootstrap_scatter",
             {"betas": boot.draws[:, 1], "lams": boot.draws[:, 0],
              "center": (fit.params["beta"], fit.lambda_raw)}),)
    return body, jobs


def _run_lrt(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    obs, path = _dataset(cfg, "lrt")
    cls = ModelClass(cfg["structure"], cfg["alpha"], cfg["skew"])
    res = lrt_lambda_zero(obs, path, cls, restarts=cfg["restarts"],
                          seed=cfg["seed"])
    body = {"diagnostics": {"stat": res["stat"], "p_value": res["p_value"],
                            "df": 1, "null": "lambda = 0"}}
    return body, ()


def _run_cv(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    obs, path = _dataset(cfg, "cv")
    names = [s.strip() for s in cfg["structures"].split(",") if s.strip()]
    if not names:
        raise ConfigError("structures must name at least one noise structure")
    classes = tuple(ModelClass(name, cfg["alpha"], cfg["skew"])
                    for name in names)
    scores = cross_validate(obs, path, cfg["split"], classes,
                            restarts=cfg["restarts"], seed=cfg["seed"])
    table = {cls.structure: value for cls, value in scores.items()}
    body = {"diagnostics": {
        "held_out_loglik": table,
        "best": max(table, key=table.__getitem__),
        "split": cfg["split"],
        "n_train": int(math.floor(cfg["split"] * len(obs))),
        "n_total": len(obs),
    }}
    return body, ()


def _run_bayes(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    path = _input_only(cfg, "bayes")
    start, end = _parse_pair(cfg["period"], "period")
    res = bayes_fit(cfg["doubling_time"], (start, end), path,
                    chains=cfg["chains"], iterations=cfg["iterations"],
                    burn_in=cfg["burn_in"], seed=cfg["seed"],
                    fixed_lam=cfg["fixed_lambda"])
    percentiles = {_PUBLIC.get(name, name):
                   {f"p{q:02d}": value for q, value in row.items()}
                   for name, row in res.percentiles.items()}
    post = res.posterior
    body = {
        "estimates": {name: row["p50"] for name, row in percentiles.items()},
        "percentiles": percentiles,
        "diagnostics": {
            "split_rhat": {_PUBLIC.get(k, k): v
                           for k, v in post.split_rhat.items()},
            "acceptance_mean": float(np.mean(post.acceptance)),
            "acceptance_min": float(np.min(post.acceptance)),
            "chains": post.chains,
            "warnings": list(post.warnings),
            "input_growth_rate": res.anchors.g_input,
        },
    }
    jobs: tuple[PlotJob, ...] = ()
    if cfg["plots"]:
        lam, beta = post.draws[:, 0], post.draws[:, 1]
        jobs = (("posterior_violins.svg", "posterior_violins",
                 {"names": ("lambda", "beta", "r"),
                  "columns": (lam, beta, lam / beta)}),)
    return body, jobs


def _run_simulate(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    path = _input_only(cfg, "simulate")
    cls = ModelClass(cfg["structure"], cfg["alpha"], cfg["skew"])
    model = cls.build(cfg["theta"], cfg["beta"], cfg["lam"], cfg["noise"])
    grid = path.series.times
    sim = simulate_path(model, cfg["a0"], path, grid,
                        np.random.default_rng(cfg["seed"]))
    body = {
        "series": {"t": sim.times, "value": sim.values},
        "diagnostics": {"n_points": int(sim.times.size),
                        "terminal_level": float(sim.values[-1]),
                        "structure": cfg["structure"]},
    }
    jobs: tuple[PlotJob, ...] = ()
    if cfg["plots"]:
        det = simulate_deterministic(model.jones, cfg["a0"], path, grid)
        curves = [("simulated", sim.times, sim.values, "line"),
                  ("deterministic", det.times, det.values, "line")]
        jobs = (("trajectory.svg", "trajectory_overlay", {"curves": curves}),)
    return body, jobs


def _run_prior_tables(cfg: Mapping) -> tuple[dict, tuple[PlotJob, ...]]:
    fractions = tuple(p / 100.0 for p in PERCENTILE_GRID)
    half = {f"p{p:02d}": halfcauchy_quantile(q)
            for p, q in zip(PERCENTILE_GRID, fractions)}
    ratio = {f"p{p:02d}": value
             for p, value in zip(PERCENTILE_GRID,
                                 prior_r_quantiles(fractions))}
    return {"percentiles": {"half_cauchy": half, "prior_r": ratio}}, ()


_HANDLERS: dict[str, Callable[[Mapping], tuple[dict, tuple[PlotJob, ...]]]] = {
    "naive": _run_naive,
    "bracket": _run_bracket,
    "fit-ols": _run_fit_ols,
    "fit-mle": _run_fit_mle,
    "bootstrap": _run_bootstrap,
    "lrt": _run_lrt,
    "cv": _run_cv,
    "bayes": _run_bayes,
    "simulate": _run_simulate,
    "prior-tables": _run_prior_tables,
}


# ---------------------------------------------------------------------------
# Report emission


def _jsonable(value):
    """Deterministic JSON form: numpy unwrapped, non-finite floats -> null."""
    if isinstance(value, dict):
        return {str(k): _jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(v) for v in value]
    if isinstance(value, np.ndarray):
        return [_jsonable(v) for v in value.tolist()]
    if isinstance(value, (bool, np.bool_)):
        return bool(value)
    if isinstance(value, (float, np.floating)):
        f = float(value)
        return f if math.isfinite(f) else None
    if isinstance(value, np.integer):
        return int(value)
    return value


def run(command: str, config: Mapping[str, object]) -> dict:
    """Execute one subcommand and write its report files.

    ``config`` maps option names (see ``ideaflow COMMAND --help``) to
    values; unknown keys are rejected.  Returns the report document.
    Re-running with the document's embedded ``config`` echo reproduces
    report.json byte for byte.
    """
    cfg = _resolve(command, config)
    if command not in _HANDLERS:
        raise ConfigError(f"unknown command {command!r}")
    body, jobs = _HANDLERS[command](cfg)
    report = _jsonable({"schema_version": SCHEMA_VERSION, "command": command,
                        "seed": cfg["seed"], "config": cfg, "estimates": {},
                        "stderrs": {}, "percentiles": {}, "diagnostics": {},
                        **body})
    outdir = Path(cfg["outputs"])
    outdir.mkdir(parents=True, exist_ok=True)
    payload = json.dumps(report, sort_keys=True, indent=2,
                         allow_nan=False) + "\n"
    (outdir / REPORT_NAME).write_text(payload, encoding="utf-8")
    _LOG.info("wrote %s", outdir / REPORT_NAME)
    if jobs:
        from . import plots
        for filename, maker, kwargs in jobs:
            written = getattr(plots, maker)(outdir / filename, **kwargs)
            _LOG.info("wrote %s", written)
    return report


# ---------------------------------------------------------------------------
# argparse front end


def _add_flag(sp: argparse.ArgumentParser, flag: _Flag) -> None:
    option = "--" + flag.name.replace("_", "-")
    if flag.kind == "bool":
        sp.add_argument(option, action="store_true", default=False,
                        help=flag.help)
    elif flag.kind == "paths":
        sp.add_argument(option, nargs="+", default=[], metavar="CSV",
                        help=flag.help)
    elif flag.kind == "choice":
        sp.add_argument(option, default=flag.default, choices=flag.choices,
                        help=flag.help)
    elif flag.kind == "float":
        sp.add_argument(option, type=float, default=flag.default,
                        help=flag.help)
    elif flag.kind == "int":
        sp.add_argument(option, type=int, default=flag.default,
                        help=flag.help)
    else:
        sp.add_argument(option, default=flag.default, help=flag.help)


def _build_parser() -> tuple[argparse.ArgumentParser,
                             dict[str, argparse.ArgumentParser]]:
    parser = argparse.ArgumentParser(
        prog="ideaflow",
        description="Estimators for the idea-production law of motion: "
                    "closed forms, likelihood fits, bootstrap, and "
                    "Bayesian inference, with reproducible JSON reports.")
    parser.add_argument("--version", action="version",
                        version=f"%(prog)s {__version__}")
    subparsers = parser.add_subparsers(dest="command", required=True,
                                       metavar="command")
    registry = {}
    for command, extra in _COMMANDS.items():
        sp = subparsers.add_parser(command, help=_HELP[command])
        sp.add_argument("--config", default=None, metavar="JSON",
                        help="JSON file supplying option defaults "
                             "(command-line flags win)")
        for flag in _COMMON_FLAGS + extra:
            _add_flag(sp, flag)
        registry[command] = sp
    return parser, registry


def _load_config_file(path: str, command: str) -> dict:
    try:
        with open(path, encoding="utf-8") as fh:
            raw = json.load(fh)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"config file {path}: invalid JSON ({exc})") \
            from None
    if not isinstance(raw, dict):
        raise ConfigError(f"config file {path}: top level must be a JSON "
                          "object")
    by_name = {f.name: f for f in _flags_for(command)}
    unknown = sorted(set(raw) - set(by_name))
    if unknown:
        raise ConfigError(f"config file {path}: unknown keys for {command}: "
                          f"{', '.join(unknown)}")
    return {name: _coerce(by_name[name], value)
            for name, value in raw.items() if value is not None}


def _setup_logging() -> None:
    name = os.environ.get("IDEAFLOW_LOG", "WARNING").upper()
    level = getattr(logging, name, None)
    if not isinstance(level, int):
        level = logging.WARNING
    logging.basicConfig(level=level,
                        format="%(levelname)s %(name)s: %(message)s")


def main(argv: Sequence[str] | None = None) -> int:
    _setup_logging()
    parser, registry = _build_parser()
    args = parser.parse_args(argv)
    command = args.command
    try:
        if args.config is not None:
            registry[command].set_defaults(
                **_load_config_file(args.config, command))
            args = parser.parse_args(argv)
        run(command, {flag.name: getattr(args, flag.name)
                      for flag in _flags_for(command)})
    except (IdeaflowError, OSError) as exc:
        print(f"ideaflow {command}: error: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
