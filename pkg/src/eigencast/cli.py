"""Command-line interface.

Exit codes: 0 success, 1 validation failure, 2 configuration error.
"""
from __future__ import annotations

import argparse
import copy
import json
import sys

import numpy as np

from . import figures
from .analytics import validate_moments
from .config import ConfigError, ExperimentConfig, build_hamiltonian, resolve_spectrum
from .harness import estimate_suppression, run_trajectories
from .io import FORMATS, emit, write_table
from .spectral import SpinChainSpec, diagonalize, shift_energy
from .validation import cross_validate

EXIT_OK, EXIT_VALIDATION, EXIT_CONFIG = 0, 1, 2


def _common(p: argparse.ArgumentParser, config_required: bool = False):
    p.add_argument("--config", required=config_required, help="JSON experiment configuration")
    p.add_argument("--seed", type=int)
    p.add_argument("--trajectories", type=int)
    p.add_argument("--out", default="-", help="output path ('-' for stdout)")
    p.add_argument("--format", choices=FORMATS, default="csv")
    p.add_argument("--threads", type=int, help="worker threads (results do not depend on it)")


def _chain_args(p: argparse.ArgumentParser, n=3, zz=1.0):
    p.add_argument("--n", type=int, default=n)
    p.add_argument("--zz", type=float, default=zz, help="ZZ coupling J")
    p.add_argument("--x-field", type=float, default=1.0)
    p.add_argument("--z-field", type=float, default=1.0)
    p.add_argument("--boundary", choices=("periodic", "open"), default="periodic")


def _chain(a) -> SpinChainSpec:
    return SpinChainSpec(a.n, a.zz, a.x_field, a.z_field, a.boundary)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _load(a, default: ExperimentConfig | None = None) -> ExperimentConfig:
    cfg = ExperimentConfig.load(a.config) if a.config else default
    if cfg is None:
        raise ConfigError("--config is required")
    return cfg.with_overrides(seed=a.seed, trajectories=a.trajectories, workers=a.threads)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="eigencast", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("spectrum", help="eigenvalues and gap as CSV")
    p.add_argument("--config")
    _chain_args(p)
    p.add_argument("--offset", type=float, default=0.0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("run", help="simulate trajectories from a config")
    _common(p, config_required=True)
    p.add_argument("--summary", help="write aggregate statistics (JSON) here instead of stdout")

    p = sub.add_parser("sweep", help="summary statistics over a parameter grid")
    _common(p, config_required=True)
    p.add_argument("--param", required=True, help="dotted config key, e.g. initial.gamma_sq")
    p.add_argument("--values", required=True, help="comma-separated JSON values")

    p = sub.add_parser("qaa", help="adiabatic sweep infidelity versus total time")
    _chain_args(p, n=5, zz=7.0)
    p.add_argument("--times", default="2,4,8,16,32")
    p.add_argument("--steps-per-time", type=float, default=10.0)
    p.add_argument("--schedule", choices=("linear", "smoothstep"), default="smoothstep")
    p.add_argument("--out", default="-")
    p.add_argument("--format", choices=FORMATS, default="csv")

    p = sub.add_parser("validate", help="cross-check the eigenbasis engine against circuit simulation")
    p.add_argument("--n", type=int, default=2)
    p.add_argument("--rounds", type=int, default=2)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--tol", type=float, default=1e-9)
    p.add_argument("--out", default="-")

    p = sub.add_parser("validate-moments", help="closed-form moments against the Monte Carlo oracle")
    p.add_argument("--samples", type=int, default=10**6)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--out", default="-")

    p = sub.add_parser("reproduce", help="emit figure data tables")
    p.add_argument("figure", choices=("fig2b", "fig3b", "fig4"))
    _common(p)
    return ap


def cmd_spectrum(a) -> int:
    if a.config:
        cfg = ExperimentConfig.load(a.config)
        _, ed = resolve_spectrum(cfg)
    else:
        h = build_hamiltonian({"n": a.n, "zz_coupling": a.zz, "x_field": a.x_field,
                               "z_field": a.z_field, "boundary": a.boundary})
        ed = diagonalize(shift_energy(h, a.offset) if a.offset else h)
    rows = [{"index": i, "eigenvalue": float(v)} for i, v in enumerate(ed.eigenvalues)]
    rows.append({"index": "gap", "eigenvalue": ed.gap})
    write_table(rows, ["index", "eigenvalue"], "csv", a.out)
    return EXIT_OK


def _summary(cfg: ExperimentConfig, rs) -> dict:
    st = estimate_suppression(rs, cfg.near_convergent_threshold, cfg.convergence_tol, seed=cfg.seed)
    return st.to_dict()


def cmd_run(a) -> int:
    cfg = _load(a)
    rs = run_trajectories(cfg)
    if a.out != "-" or a.summary:
        emit(rs, a.format, a.out)
    try:
        summary = _summary(cfg, rs)
    except ValueError as exc:
        summary = {"error": str(exc)}
    text = json.dumps(summary, indent=2, sort_keys=True) + "\n"
    if a.summary:
        with open(a.summary, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return EXIT_OK


def _set_dotted(d: dict, key: str, value):
    parts = key.split(".")
    cur = d
    for p in parts[:-1]:
        if not isinstance(cur.get(p), dict):
            raise ConfigError(f"cannot set {key}: {p} is not an object")
        cur = cur[p]
    cur[parts[-1]] = value


def cmd_sweep(a) -> int:
    base = _load(a).to_dict()
    rows = []
    for raw in a.values.split(","):
        try:
            value = json.loads(raw)
        except json.JSONDecodeError:
            value = raw
        d = copy.deepcopy(base)
        _set_dotted(d, a.param, value)
        cfg = ExperimentConfig.from_dict(d)
        rs = run_trajectories(cfg)
        row = {"param": a.param, "value": raw}
        try:
            st = estimate_suppression(rs, cfg.near_convergent_threshold, cfg.convergence_tol, seed=cfg.seed)
            row.update(
                suppression=st.suppression.geometric_mean,
                ci_low=st.suppression.ci_low,
                ci_high=st.suppression.ci_high,
                rounds=st.suppression.rounds,
                converged_target=st.convergence_fractions.get(rs.meta["target"], 0.0),
                herald_failure_frequency=st.herald_failure_frequency,
                ever_failed_fraction=st.ever_failed_fraction,
            )
        except ValueError:
            row.update(suppression=np.nan, ci_low=np.nan, ci_high=np.nan, rounds=0)
        rows.append(row)
    columns = ["param", "value", "suppression", "ci_low", "ci_high", "rounds", "converged_target",
               "herald_failure_frequency", "ever_failed_fraction"]
    write_table(rows, columns, a.format, a.out)
    return EXIT_OK


def cmd_qaa(a) -> int:
    rows = figures.qaa_table(_chain(a), _floats(a.times), a.steps_per_time, a.schedule)
    write_table(rows, ["T", "infidelity", "wall_time"], a.format, a.out)
    return EXIT_OK


def cmd_validate(a) -> int:
    reports = cross_validate(a.n, a.rounds, a.seed)
    rows = [
        {**r._asdict(), "pass": int(r.passed(a.tol))}
        for r in reports
    ]
    write_table(rows, None, "csv", a.out)
    return EXIT_OK if all(r["pass"] for r in rows) else EXIT_VALIDATION


def cmd_validate_moments(a) -> int:
    rows = [
        {"quantity": q, "closed_form": cf, "mc_estimate": m, "std_error": se, "pass": "pass" if ok else "fail"}
        for q, cf, m, se, ok in validate_moments(a.samples, a.seed)
    ]
    write_table(rows, None, "csv", a.out)
    return EXIT_OK if all(r["pass"] == "pass" for r in rows) else EXIT_VALIDATION


def cmd_reproduce(a) -> int:
    if a.figure == "fig2b":
        rows = figures.fig2b(_load(a, figures.FIG2B_DEFAULT))
    elif a.figure == "fig3b":
        rows = figures.fig3b(_load(a, figures.FIG3B_DEFAULT))
    else:
        kw = {"seed": a.seed or 0, "workers": a.threads or 1}
        if a.trajectories:
            kw["trajectories"] = a.trajectories
        if a.config:
            cfg = ExperimentConfig.load(a.config)
            from .config import chain_spec

            kw["chain"] = chain_spec(cfg.hamiltonian)
        rows = figures.fig4(**kw)
    write_table(rows, None, a.format, a.out)
    return EXIT_OK


COMMANDS = {
    "spectrum": cmd_spectrum,
    "run": cmd_run,
    "sweep": cmd_sweep,
    "qaa": cmd_qaa,
    "validate": cmd_validate,
    "validate-moments": cmd_validate_moments,
    "reproduce": cmd_reproduce,
}


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return COMMANDS[args.command](args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
