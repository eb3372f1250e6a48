"""Config-driven command line front end.

    ulln-lab <command> <config.json> [--out DIR] [--seed N] [--threads K]

Commands: simulate, audit, tailcheck, taylor.  All artifacts land under the
output directory with deterministic names `{command}.{format}`; repeated runs
of the same config produce byte-identical files regardless of --threads.
Exit status is 0 iff every verdict in the command's scope is non-failing.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import math
import os
import sys
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

import numpy as np

from .auditor import AuditSettings, audit_conditions
from .distributions import (DistributionSpec, draw_sample, median_tail_bound_holds,
                            VIOLATED)
from .engine import (L1Curve, SimulationPlan, convergence_study,
                     sup_l1_curve, taylor_residual)
from .estimators import available_estimator_ids, estimate, get_estimator
from .hfuncs import EnvelopeParams, available_h_ids, get_h
from .rng import mix64

_FORMATS = ("csv", "json", "svg")
_COMMANDS = ("simulate", "audit", "tailcheck", "taylor")
_TAYLOR_TAG = 0x7A1


class ConfigError(ValueError):
    """Invalid experiment configuration; message carries the key path."""


@dataclass(frozen=True)
class TailcheckSettings:
    n_min: int = 8
    n_max: int = 200
    t_min: float = 8.0
    t_max: float = 30.0
    t_step: float = 1.0


@dataclass(frozen=True)
class TaylorSettings:
    samples: int = 100
    n: int = 51
    quad_tol: float = 1e-8


@dataclass(frozen=True)
class ExperimentConfig:
    plan: SimulationPlan
    output_dir: str
    report_formats: tuple[str, ...]
    audit: bool
    commands: tuple[str, ...]
    audit_settings: AuditSettings
    tailcheck: TailcheckSettings
    taylor: TaylorSettings

    def with_seed(self, seed: int) -> "ExperimentConfig":
        plan = dataclasses.replace(self.plan, master_seed=int(seed))
        return dataclasses.replace(self, plan=plan)


def _ctx(path: str, key: str) -> str:
    return f"{path}: {key}"


def _check_keys(obj: dict, allowed: set[str], required: set[str], path: str, where: str) -> None:
    unknown = set(obj) - allowed
    if unknown:
        raise ConfigError(f"{_ctx(path, where)}: unknown keys {sorted(unknown)} "
                          f"(allowed: {sorted(allowed)})")
    missing = required - set(obj)
    if missing:
        raise ConfigError(f"{_ctx(path, where)}: missing required keys {sorted(missing)}")


def _number(obj, path: str, key: str) -> float:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ConfigError(f"{_ctx(path, key)}: expected a number, got {v!r}")
    return float(v)


def _int(obj, path: str, key: str) -> int:
    v = obj[key]
    if isinstance(v, bool) or not isinstance(v, int):
        raise ConfigError(f"{_ctx(path, key)}: expected an integer, got {v!r}")
    return v


def parse_config(path: str | Path) -> ExperimentConfig:
    """Load and strictly validate a JSON experiment config.

    Unknown keys anywhere in the document are rejected: silent misspellings
    of condition parameters (gamma, beta0, ...) are exactly the failure mode
    strictness exists to catch.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"config file not found: {path}")
    try:
        raw = json.loads(path.read_text())
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}: malformed JSON: {exc}") from None
    if not isinstance(raw, dict):
        raise ConfigError(f"{path}: top level must be an object")
    p = str(path)

    allowed = {"distribution", "h", "estimator", "theta", "n_grid", "v_grid",
               "replicates", "master_seed", "target", "output_dir",
               "report_formats", "audit", "commands", "envelope",
               "audit_settings", "tailcheck", "taylor"}
    required = {"distribution", "h", "estimator", "theta", "n_grid", "v_grid",
                "replicates", "master_seed"}
    _check_keys(raw, allowed, required, p, "top level")

    dist_raw = raw["distribution"]
    if not isinstance(dist_raw, dict):
        raise ConfigError(f"{_ctx(p, 'distribution')}: expected an object")
    _check_keys(dist_raw, {"family", "mu", "sigma"}, {"family", "mu", "sigma"},
                p, "distribution")
    try:
        dist = DistributionSpec(family=dist_raw["family"],
                                mu=_number(dist_raw, p, "mu"),
                                sigma=_number(dist_raw, p, "sigma"))
    except ValueError as exc:
        raise ConfigError(f"{_ctx(p, 'distribution')}: {exc}") from None

    h_id = raw["h"]
    if h_id not in available_h_ids():
        raise ConfigError(f"{_ctx(p, 'h')}: unknown id {h_id!r} "
                          f"(known: {available_h_ids()})")
    h = get_h(h_id, sigma=dist.sigma)

    theta = _number(raw, p, "theta")
    est_id = raw["estimator"]
    if est_id not in available_estimator_ids():
        raise ConfigError(f"{_ctx(p, 'estimator')}: unknown id {est_id!r} "
                          f"(known: {available_estimator_ids()})")
    estimator = get_estimator(est_id, sigma=dist.sigma, theta=theta)

    if "envelope" in raw:
        env_raw = raw["envelope"]
        if not isinstance(env_raw, dict):
            raise ConfigError(f"{_ctx(p, 'envelope')}: expected an object")
        _check_keys(env_raw, {"gamma", "beta0", "p", "alpha0", "C"},
                    {"gamma", "beta0"}, p, "envelope")
        try:
            env = EnvelopeParams(
                gamma=_number(env_raw, p, "gamma"),
                beta0=_number(env_raw, p, "beta0"),
                p=_number(env_raw, p, "p") if "p" in env_raw else 1.0,
                alpha0=_number(env_raw, p, "alpha0") if "alpha0" in env_raw else 1.0,
                C=_number(env_raw, p, "C") if "C" in env_raw else 1.0)
        except ValueError as exc:
            raise ConfigError(f"{_ctx(p, 'envelope')}: {exc}") from None
        h = h.with_envelope(env)

    n_grid = raw["n_grid"]
    v_grid = raw["v_grid"]
    if not isinstance(n_grid, list) or not all(isinstance(n, int) and not isinstance(n, bool) for n in n_grid):
        raise ConfigError(f"{_ctx(p, 'n_grid')}: expected a list of integers")
    if not isinstance(v_grid, list) or not all(isinstance(v, (int, float)) and not isinstance(v, bool) for v in v_grid):
        raise ConfigError(f"{_ctx(p, 'v_grid')}: expected a list of numbers")
    if not v_grid or float(v_grid[0]) != 0.0 or float(v_grid[-1]) != 1.0:
        raise ConfigError(f"{_ctx(p, 'v_grid')}: grid must contain the endpoints 0 and 1")
    replicates = _int(raw, p, "replicates")
    if replicates < 2:
        raise ConfigError(f"{_ctx(p, 'replicates')}: at least 2 replicates required")
    master_seed = _int(raw, p, "master_seed")
    target = raw.get("target", "quadrature")
    if isinstance(target, bool) or not isinstance(target, (int, float, str)):
        raise ConfigError(f"{_ctx(p, 'target')}: expected a number or 'quadrature'")
    if isinstance(target, str) and target != "quadrature":
        raise ConfigError(f"{_ctx(p, 'target')}: expected a number or 'quadrature'")

    try:
        plan = SimulationPlan(dist=dist, h=h, estimator=estimator, theta=theta,
                              n_grid=tuple(n_grid), v_grid=tuple(float(v) for v in v_grid),
                              replicates=replicates, master_seed=master_seed,
                              target=target if isinstance(target, str) else float(target))
    except ValueError as exc:
        raise ConfigError(f"{p}: invalid grid: {exc}") from None

    formats = raw.get("report_formats", list(_FORMATS))
    if (not isinstance(formats, list) or not formats
            or any(f not in _FORMATS for f in formats)):
        raise ConfigError(f"{_ctx(p, 'report_formats')}: expected a non-empty subset "
                          f"of {list(_FORMATS)}")
    audit_flag = raw.get("audit", False)
    if not isinstance(audit_flag, bool):
        raise ConfigError(f"{_ctx(p, 'audit')}: expected a boolean")
    commands = raw.get("commands", list(_COMMANDS))
    if (not isinstance(commands, list) or not commands
            or any(c not in _COMMANDS for c in commands)):
        raise ConfigError(f"{_ctx(p, 'commands')}: expected a non-empty subset "
                          f"of {list(_COMMANDS)}")

    audit_settings = AuditSettings()
    if "audit_settings" in raw:
        s_raw = raw["audit_settings"]
        if not isinstance(s_raw, dict):
            raise ConfigError(f"{_ctx(p, 'audit_settings')}: expected an object")
        fields = {f.name for f in dataclasses.fields(AuditSettings)}
        _check_keys(s_raw, fields, set(), p, "audit_settings")
        kwargs = {}
        for k, v in s_raw.items():
            if isinstance(v, list):
                v = tuple(v)
            kwargs[k] = v
        try:
            audit_settings = AuditSettings(**kwargs)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{_ctx(p, 'audit_settings')}: {exc}") from None

    tailcheck = TailcheckSettings()
    if "tailcheck" in raw:
        t_raw = raw["tailcheck"]
        if not isinstance(t_raw, dict):
            raise ConfigError(f"{_ctx(p, 'tailcheck')}: expected an object")
        fields = {f.name for f in dataclasses.fields(TailcheckSettings)}
        _check_keys(t_raw, fields, set(), p, "tailcheck")
        tailcheck = TailcheckSettings(**{k: t_raw[k] for k in t_raw})

    taylor = TaylorSettings()
    if "taylor" in raw:
        t_raw = raw["taylor"]
        if not isinstance(t_raw, dict):
            raise ConfigError(f"{_ctx(p, 'taylor')}: expected an object")
        fields = {f.name for f in dataclasses.fields(TaylorSettings)}
        _check_keys(t_raw, fields, set(), p, "taylor")
        taylor = TaylorSettings(**{k: t_raw[k] for k in t_raw})

    return ExperimentConfig(plan=plan, output_dir=raw.get("output_dir", "out"),
                            report_formats=tuple(formats), audit=audit_flag,
                            commands=tuple(commands), audit_settings=audit_settings,
                            tailcheck=tailcheck, taylor=taylor)


# --- report writers -----------------------------------------------------------


def _fmt(x) -> str:
    return repr(float(x)) if isinstance(x, (float, np.floating)) else str(x)


def _plan_echo(plan: SimulationPlan) -> dict:
    return {
        "distribution": {"family": plan.dist.family, "mu": plan.dist.mu,
                         "sigma": plan.dist.sigma},
        "h": plan.h.id,
        "estimator": plan.estimator.id,
        "theta": plan.theta,
        "n_grid": list(plan.n_grid),
        "v_grid": list(plan.v_grid),
        "replicates": plan.replicates,
        "master_seed": plan.master_seed,
        "target": plan.target,
    }


def _write_json(path: Path, obj: dict) -> None:
    path.write_text(json.dumps(obj, indent=2, sort_keys=True) + "\n")


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    lines = [",".join(header)]
    lines.extend(",".join(_fmt(c) for c in row) for row in rows)
    path.write_text("\n".join(lines) + "\n")


def _curve_csv_rows(curve: L1Curve) -> list[list]:
    rows: list[list] = []
    for pt in curve.points:
        rows.append([pt.n, pt.v, pt.estimate, pt.se, pt.replicates])
    for s in curve.sups:
        rows.append([s.n, "sup", s.sup, s.se_at_argmax,
                     curve.points[0].replicates if curve.points else 0])
    return rows


def run(command: str, config: ExperimentConfig, out_dir: str | None = None,
        threads: int = 1) -> int:
    """Execute one command; write artifacts; return the exit status."""
    if command not in _COMMANDS:
        raise ConfigError(f"unknown command {command!r} (known: {list(_COMMANDS)})")
    if command not in config.commands:
        raise ConfigError(f"command {command!r} not enabled by this config "
                          f"(commands: {list(config.commands)})")
    out = Path(out_dir if out_dir is not None else config.output_dir)
    out.mkdir(parents=True, exist_ok=True)
    plan = config.plan
    formats = config.report_formats

    if command == "simulate":
        curve = sup_l1_curve(plan, threads=threads)
        study = convergence_study(plan, threads=threads) if len(plan.n_grid) >= 3 else None
        if "csv" in formats:
            _write_csv(out / "simulate.csv",
                       ["n", "v", "l1_estimate", "l1_se", "replicates"],
                       _curve_csv_rows(curve))
        if "json" in formats:
            doc = {
                "command": "simulate",
                "plan": _plan_echo(plan),
                "target": curve.target,
                "note": curve.note,
                "single_replicate": curve.single_replicate,
                "points": [{"n": p.n, "v": p.v, "l1_estimate": p.estimate,
                            "l1_se": p.se, "replicates": p.replicates}
                           for p in curve.points],
                "sup": [{"n": s.n, "sup": s.sup, "argmax_v": s.argmax_v,
                         "se_at_argmax": s.se_at_argmax} for s in curve.sups],
            }
            if study is not None:
                doc["convergence"] = {
                    "verdict": study.verdict,
                    "rows": [{"n": r.n, "sup": r.sup, "argmax_v": r.argmax_v,
                              "se": r.se} for r in study.rows],
                }
            _write_json(out / "simulate.json", doc)
        if "svg" in formats:
            from .plots import render_curve_svg
            title = (f"{plan.dist.family}(mu={plan.dist.mu:g}, sigma={plan.dist.sigma:g}), "
                     f"h={plan.h.id}, est={plan.estimator.id}")
            render_curve_svg(curve, title, out / "simulate.svg")
        return 0 if (study is None or study.decreasing) else 1

    if command == "audit":
        report = audit_conditions(plan.dist, plan.h, plan.estimator, plan,
                                  config.audit_settings)
        if "json" in formats:
            doc = {"command": "audit", "plan": _plan_echo(plan),
                   "settings": dataclasses.asdict(config.audit_settings)}
            doc.update(report.to_json_dict())
            _write_json(out / "audit.json", doc)
        (out / "audit.txt").write_text(report.human_summary())
        return 0 if report.overall_ok else 1

    if command == "tailcheck":
        tc = config.tailcheck
        rows: list[list] = []
        n_violated = 0
        t_count = int(math.floor((tc.t_max - tc.t_min) / tc.t_step)) + 1
        for n in range(tc.n_min, tc.n_max + 1):
            for k in range(t_count):
                t = tc.t_min + k * tc.t_step
                verdict = median_tail_bound_holds(n, t, plan.dist.sigma)
                rows.append([n, t, plan.dist.sigma, verdict])
                if verdict == VIOLATED:
                    n_violated += 1
        if "csv" in formats:
            _write_csv(out / "tailcheck.csv", ["n", "t", "sigma", "verdict"], rows)
        if "json" in formats:
            _write_json(out / "tailcheck.json", {
                "command": "tailcheck", "plan": _plan_echo(plan),
                "sweep": dataclasses.asdict(tc),
                "cells": len(rows), "violated": n_violated,
            })
        return 0 if n_violated == 0 else 1

    # taylor
    ts = config.taylor
    rows = []
    n_fail = 0
    bound = 10.0 * ts.quad_tol
    for k in range(ts.samples):
        seed = mix64(plan.master_seed, _TAYLOR_TAG, k)
        s = draw_sample(plan.dist, ts.n, seed)
        th_star = estimate(s, plan.estimator)
        res = taylor_residual(s, plan.theta, th_star, plan.h, ts.quad_tol)
        ok = res < bound
        if not ok:
            n_fail += 1
        rows.append([k, ts.n, th_star, res, bound, "pass" if ok else "fail"])
    if "csv" in formats:
        _write_csv(out / "taylor.csv",
                   ["index", "n", "theta_star", "residual", "bound", "verdict"], rows)
    if "json" in formats:
        _write_json(out / "taylor.json", {
            "command": "taylor", "plan": _plan_echo(plan),
            "settings": dataclasses.asdict(ts),
            "samples": ts.samples, "failed": n_fail,
            "max_residual": max((r[3] for r in rows), default=0.0),
        })
    return 0 if n_fail == 0 else 1


def main(argv: Optional[list[str]] = None) -> int:
    parser = argparse.ArgumentParser(
        prog="ulln-lab",
        description="simulate and audit translated empirical sums with singular summands")
    parser.add_argument("command", choices=_COMMANDS)
    parser.add_argument("config", help="path to a JSON experiment config")
    parser.add_argument("--out", default=None, help="output directory override")
    parser.add_argument("--seed", type=int, default=None, help="master seed override")
    parser.add_argument("--threads", type=int, default=None,
                        help="worker threads (fallback: env ULLN_LAB_THREADS, then 1)")
    args = parser.parse_args(argv)

    threads = args.threads
    if threads is None:
        threads = int(os.environ.get("ULLN_LAB_THREADS", "1"))
    if threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2

    try:
        config = parse_config(args.config)
        if args.seed is not None:
            config = config.with_seed(args.seed)
        return run(args.command, config, out_dir=args.out, threads=threads)
    except ConfigError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
