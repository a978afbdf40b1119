"""Command-line front end: data ingestion, inference commands, study runner.

Commands
--------
eval      statistic of a method at a given theta, with containment verdict
region    1-d confidence interval endpoints
contour   2-d radial confidence contour as CSV/JSON polyline data
coverage  Monte Carlo coverage study driven by a JSON config file
bartlett  bootstrap estimate of the Bartlett constant

Exit codes: 0 success, 2 validation error, 3 solver failure.  Output goes to
--out or stdout; rerunning with identical flags and seed is byte-identical.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
from dataclasses import dataclass
from pathlib import Path

from .core import load_two_sample
from .eel import estimate_bartlett_bootstrap
from .errors import ELError
from .regions import (
    Method,
    MethodKind,
    chisq_quantile,
    contour_2d,
    interval_1d,
    method_statistic,
    polyline_to_csv,
    region_to_json_dict,
)
from .simulate import coverage_study, study_config_from_json_dict

__all__ = ["CliConfig", "parse_args", "run", "main", "main_entry"]

_EXIT_OK = 0
_EXIT_VALIDATION = 2
_EXIT_SOLVER = 3


@dataclass
class CliConfig:
    command: str
    x_path: str | None = None
    y_path: str | None = None
    theta: tuple[float, ...] | None = None
    alpha: float = 0.05
    method: str = "eel1"
    eta: float | None = None
    delta: float | None = None
    bootstrap_B: int = 400
    reps: int | None = None
    seed: int = 0
    angles: int = 360
    out: str | None = None
    format: str = "json"
    config_path: str | None = None


def _parse_theta(text: str) -> tuple[float, ...]:
    try:
        return tuple(float(part) for part in text.split(","))
    except ValueError as exc:
        raise ValueError(f"could not parse theta {text!r}: expected comma-separated numbers") from exc


def parse_args(argv) -> CliConfig:
    parser = argparse.ArgumentParser(
        prog="twosample-el",
        description="Two-sample empirical likelihood inference for mean differences",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p, with_method=True):
        p.add_argument("--x", dest="x_path", required=True, help="CSV file of sample one (one row per observation)")
        p.add_argument("--y", dest="y_path", required=True, help="CSV file of sample two")
        p.add_argument("--alpha", type=float, default=0.05)
        if with_method:
            p.add_argument("--method", choices=["oel", "eel1", "bel", "eel2"], default="eel1")
            p.add_argument("--eta", type=float, default=None, help="Bartlett constant for bel/eel2 (bootstrap-estimated when omitted)")
            p.add_argument("--delta", type=float, default=None, help="exponent for eel2 (default min(m,n)**-0.5)")
        p.add_argument("--bootstrap-b", dest="bootstrap_B", type=int, default=400)
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--out", default=None)
        p.add_argument("--format", choices=["json", "csv"], default="json")

    p_eval = sub.add_parser("eval", help="evaluate a method statistic at theta")
    add_common(p_eval)
    p_eval.add_argument(
        "--theta", type=_parse_theta, required=True,
        help="comma-separated coordinates; use --theta=-1,-2 for negative values",
    )

    p_region = sub.add_parser("region", help="confidence interval (d=1)")
    add_common(p_region)

    p_contour = sub.add_parser("contour", help="confidence contour polyline (d=2)")
    add_common(p_contour)
    p_contour.add_argument("--angles", type=int, default=360)

    p_cov = sub.add_parser("coverage", help="coverage study from a JSON config file")
    p_cov.add_argument("--config", dest="config_path", required=True)
    p_cov.add_argument("--reps", type=int, default=None, help="override the config file's replicate count")
    p_cov.add_argument("--out", default=None)
    p_cov.add_argument("--format", choices=["json", "csv"], default="json")

    p_bart = sub.add_parser("bartlett", help="bootstrap Bartlett constant")
    add_common(p_bart, with_method=False)

    ns = parser.parse_args(argv)
    cfg = CliConfig(command=ns.command)
    for name in vars(ns):
        if hasattr(cfg, name):
            setattr(cfg, name, getattr(ns, name))
    return cfg


def _json_value(v):
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return v


def _dump_json(payload: dict) -> str:
    return json.dumps({k: _json_value(v) for k, v in payload.items()}, sort_keys=True, indent=2) + "\n"


def _build_method(config: CliConfig, data):
    """Resolve the method flag, bootstrapping eta for bel/eel2 when not supplied."""
    eta = config.eta
    if config.method in ("bel", "eel2") and eta is None:
        eta = estimate_bartlett_bootstrap(data, config.bootstrap_B, config.seed).eta
    if config.method == "oel":
        return Method.oel(), None
    if config.method == "eel1":
        return Method.eel1(), None
    if config.method == "bel":
        return Method.bel(eta), eta
    return Method.eel2(eta, config.delta), eta


def _emit(text: str, out_path: str | None) -> None:
    if out_path is None:
        sys.stdout.write(text)
    else:
        Path(out_path).write_text(text, encoding="utf-8")


def _run_eval(config: CliConfig) -> int:
    data = load_two_sample(config.x_path, config.y_path)
    if config.theta is None:
        raise ValueError("eval requires --theta")
    if len(config.theta) != data.d:
        raise ValueError(f"theta has {len(config.theta)} coordinates but the data is {data.d}-dimensional")
    method, eta = _build_method(config, data)
    stat = method_statistic(data, config.theta, method)
    threshold = chisq_quantile(data.d, 1.0 - config.alpha)
    payload = {
        "statistic": stat,
        "threshold": threshold,
        "contained": bool(stat <= threshold),
        "method": method.name,
        "alpha": config.alpha,
        "eta": eta,
        "seed": config.seed,
    }
    if config.format == "csv":
        text = "statistic,threshold,contained,method,alpha,eta,seed\n" + ",".join(
            str(_json_value(payload[k])) for k in ("statistic", "threshold", "contained", "method", "alpha", "eta", "seed")
        ) + "\n"
    else:
        text = _dump_json(payload)
    _emit(text, config.out)
    return _EXIT_OK


def _run_region(config: CliConfig) -> int:
    data = load_two_sample(config.x_path, config.y_path)
    if data.d != 1:
        raise ValueError(f"region requires 1-dimensional data, got d={data.d}")
    method, eta = _build_method(config, data)
    region = interval_1d(data, config.alpha, method)
    payload = region_to_json_dict(region)
    payload["seed"] = config.seed
    payload["eta"] = eta
    if config.format == "csv":
        text = "method,alpha,threshold,lo,hi\n" + ",".join(
            str(v) for v in (method.name, config.alpha, region.threshold, *region.d1_interval)
        ) + "\n"
    else:
        text = _dump_json(payload)
    _emit(text, config.out)
    return _EXIT_OK


def _run_contour(config: CliConfig) -> int:
    data = load_two_sample(config.x_path, config.y_path)
    if data.d != 2:
        raise ValueError(f"contour requires 2-dimensional data, got d={data.d}")
    method, eta = _build_method(config, data)
    level = chisq_quantile(2, 1.0 - config.alpha)
    region = contour_2d(data, level, method, n_angles=config.angles)
    if config.format == "csv":
        text = polyline_to_csv(region)
    else:
        payload = region_to_json_dict(region)
        payload["seed"] = config.seed
        payload["eta"] = eta
        payload["alpha"] = config.alpha
        text = _dump_json(payload)
    _emit(text, config.out)
    return _EXIT_OK


def _run_coverage(config: CliConfig) -> int:
    raw = json.loads(Path(config.config_path).read_text(encoding="utf-8"))
    study = study_config_from_json_dict(raw)
    if config.reps is not None:
        from dataclasses import replace

        study = replace(study, reps=config.reps)
    table = coverage_study(study)
    if config.format == "csv":
        text = table.to_csv_text()
    else:
        text = json.dumps(
            {
                "alpha": table.alpha,
                "reps": table.reps,
                "seed": table.seed,
                "cells": [
                    {
                        "m": c.m,
                        "n": c.n,
                        "method": c.method,
                        "coverage": c.coverage,
                        "mc_se": c.mc_se,
                        "failures": c.failures,
                    }
                    for c in table.cells
                ],
            },
            sort_keys=True,
            indent=2,
        ) + "\n"
    _emit(text, config.out)
    return _EXIT_OK


def _run_bartlett(config: CliConfig) -> int:
    data = load_two_sample(config.x_path, config.y_path)
    est = estimate_bartlett_bootstrap(data, config.bootstrap_B, config.seed)
    payload = {
        "eta": est.eta,
        "raw_eta": est.raw_eta,
        "clamped": est.clamped,
        "discarded": est.discarded,
        "used": est.used,
        "B": est.B,
        "seed": config.seed,
    }
    if config.format == "csv":
        text = "eta,raw_eta,clamped,discarded,used,B,seed\n" + ",".join(
            str(payload[k]) for k in ("eta", "raw_eta", "clamped", "discarded", "used", "B", "seed")
        ) + "\n"
    else:
        text = _dump_json(payload)
    _emit(text, config.out)
    return _EXIT_OK


_RUNNERS = {
    "eval": _run_eval,
    "region": _run_region,
    "contour": _run_contour,
    "coverage": _run_coverage,
    "bartlett": _run_bartlett,
}


def run(config: CliConfig) -> int:
    """Execute a parsed command; returns the process exit code."""
    try:
        return _RUNNERS[config.command](config)
    except ELError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_SOLVER
    except (ValueError, KeyError, OSError, json.JSONDecodeError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return _EXIT_VALIDATION


def main(argv=None) -> int:
    try:
        config = parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else _EXIT_OK
    return run(config)


def main_entry() -> None:
    sys.exit(main())
