#!/usr/bin/env python3
# chaosmap/cli.py
"""
Command-line entry point.

  chaosmap equilibria --alpha 1 --sigma 1
  chaosmap simulate   --alpha 1 --sigma 1 --state 0,0,1,2 --t-end 50 --sample 0.5
  chaosmap poincare   --alpha 1 --sigma 1 --energy 20 --theta1 0.3 --p1 0 --crossings 500
  chaosmap sample     --alpha 1 --sigma 1 --energy 20 --n 1000 --seed 7
  chaosmap ld-grid    --alpha 1 --sigma 1 --energy 20 --n 1000 --seed 7 --out ld.csv
  chaosmap classify   --in ld.csv --indicator s --calibration calibration.json --labels labels.csv
  chaosmap sweep      --plan plan.yaml --out runs/demo --resume
  chaosmap fit        --in runs/demo/curve_a1_s8.csv --regime decay --model exp
  chaosmap plot       --kind curve --in runs/demo/curve_a1_s8.csv --out curve.svg
  chaosmap warehouse  --config warehouse.yaml

CSV/JSON goes to --out when given, stdout otherwise; logs go to stderr.
Exit codes: 0 ok, 1 domain or input error, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import re
import shlex
import sys
from collections.abc import Iterable
from dataclasses import asdict, dataclass, replace
from datetime import datetime, timezone
from pathlib import Path

import numpy as np
import polars as pl

from chaosmap import __version__
from chaosmap.constants import (
    CALIBRATION_DECADES,
    LD_P_EXPONENT,
    LD_TAU,
    NEIGHBOR_SIGMA,
    ODE_TOLERANCE,
    SECTION_THETA1_RANGE,
    default_threads,
)
from chaosmap.lib.classify import (
    IndicatorHistogram,
    RegularReference,
    build_histogram,
    classify_logs,
    log_indicator,
)
from chaosmap.lib.dynamics import ModelParams, PhaseState, equilibria, hamiltonian, wrap_angle
from chaosmap.lib.errors import ChaosMapError, DomainError, IntegrationError, SchemaMismatch
from chaosmap.lib.fit import fit_regime
from chaosmap.lib.frames import csv_text, read_csv, read_json, write_csv, write_json
from chaosmap.lib.integrate import IntegratorConfig, integrate, poincare_crossings
from chaosmap.lib.ld import Direction, Indicator, LdConfig, ensemble_indicators
from chaosmap.lib.section import SectionSpec, lift_point, sample_section
from chaosmap.lib.sweep import (
    CURVE_COLUMNS,
    SURFACE_COLUMNS,
    curve_from_frame,
    load_plan,
    run_sweep,
)

log = logging.getLogger("chaosmap")

FULL_THETA1_RANGE = (-math.pi, math.pi)
LD_GRID_COLUMNS = ["theta1", "p1", "ld", "log10_d", "log10_r", "log10_c", "log10_s", "status"]
_PAIR_IN_NAME = re.compile(r"_a([-+0-9.eE]+)_s([-+0-9.eE]+)\.csv$")


# ------------------------------ manifest ------------------------------

@dataclass(frozen=True)
class RunManifest:
    tool_version: str
    invocation: str
    master_seed: int
    timestamp: str
    config_digest: str

    @classmethod
    def capture(cls, argv: Iterable[str], master_seed: int, config_digest: str) -> RunManifest:
        return cls(
            tool_version=__version__,
            invocation=shlex.join(["chaosmap", *argv]),
            master_seed=master_seed,
            timestamp=datetime.now(timezone.utc).strftime("%Y-%m-%dT%H:%M:%SZ"),
            config_digest=config_digest,
        )


# ------------------------------ helpers ------------------------------

def _state_arg(text: str) -> PhaseState:
    parts = text.split(",")
    if len(parts) != 4:
        raise argparse.ArgumentTypeError(f"expected theta1,theta2,p1,p2; got {text!r}")
    try:
        return PhaseState(*(float(p) for p in parts))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from exc


def _emit_csv(df: pl.DataFrame, out: str | None) -> None:
    if out:
        write_csv(df, out)
        log.info(f"{df.height:,} rows → {out}")
    else:
        sys.stdout.write(csv_text(df))


def _emit_json(payload, out: str | None) -> None:
    if out:
        write_json(payload, out)
        log.info(f"json → {out}")
    else:
        sys.stdout.write(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def _params(args: argparse.Namespace) -> ModelParams:
    return ModelParams(args.alpha, args.sigma)


def _integrator(args: argparse.Namespace) -> IntegratorConfig:
    return IntegratorConfig(abs_tol=args.tol, rel_tol=args.tol)


def _theta1_range(args: argparse.Namespace) -> tuple[float, float]:
    return FULL_THETA1_RANGE if args.full_range else SECTION_THETA1_RANGE


def _pair_for(args: argparse.Namespace) -> tuple[float, float]:
    """(alpha, sigma) from the flags, else from a curve_a<alpha>_s<sigma>.csv file name."""
    if args.alpha is not None and args.sigma is not None:
        return args.alpha, args.sigma
    match = _PAIR_IN_NAME.search(Path(args.input).name)
    if match is None:
        raise DomainError(f"pass --alpha and --sigma; they cannot be read from {Path(args.input).name!r}")
    return float(match.group(1)), float(match.group(2))


def _read_curve(args: argparse.Namespace):
    df = read_csv(args.input, CURVE_COLUMNS, "curve table",
                  {"energy": pl.Float64, "fraction": pl.Float64, "threshold": pl.Float64,
                   "unclassified": pl.Int64})
    alpha, sigma = _pair_for(args)
    return curve_from_frame(df, alpha, sigma), ModelParams(alpha, sigma)


def _load_calibration(path: str) -> RegularReference:
    if not Path(path).exists():
        raise FileNotFoundError(f"input not found: {path}")
    payload = read_json(path)
    # sweep checkpoints wrap the reference in {"plan_digest", "result"}
    if isinstance(payload, dict) and "result" in payload:
        payload = payload["result"]
    try:
        return RegularReference.from_dict(payload)
    except (KeyError, TypeError, ValueError) as exc:
        raise SchemaMismatch(f"{path} is not a calibration reference ({exc})") from exc


# ------------------------------ commands ------------------------------

def cmd_equilibria(args: argparse.Namespace) -> int:
    _emit_json([eq.to_dict() for eq in equilibria(_params(args))], args.out)
    return 0


def cmd_simulate(args: argparse.Namespace) -> int:
    params = _params(args)
    try:
        traj = integrate(
            params,
            args.state,
            args.t_end,
            _integrator(args),
            sample_every=args.sample,
            ld_exponent=args.p_exponent if args.ld else None,
        )
    except IntegrationError as exc:
        if exc.partial is not None:
            log.error(f"integration stopped after {len(exc.partial):,} samples: {exc.diagnostic}")
        raise
    log.info(f"{traj.steps:,} steps, max |H - H0| = {traj.energy_drift:.3g}")
    _emit_csv(traj.to_frame(params), args.out)
    return 0


def cmd_poincare(args: argparse.Namespace) -> int:
    params = _params(args)
    spec = SectionSpec(params, args.energy, FULL_THETA1_RANGE)
    start = lift_point(spec, args.theta1, args.p1)
    events = poincare_crossings(params, start.state, args.crossings, _integrator(args), t_max=args.t_max)
    if len(events) < args.crossings:
        log.warning(f"only {len(events):,} of {args.crossings:,} crossings before t = {args.t_max:g}")
    worst = max((abs(hamiltonian(params, e.state) - args.energy) for e in events), default=0.0)
    log.info(f"{len(events):,} crossings, max |H - H0| = {worst:.3g}")
    df = pl.DataFrame(
        {
            "t": [e.time for e in events],
            "theta1": [wrap_angle(e.state.theta1) for e in events],
            "p1": [e.state.p1 for e in events],
        },
        schema={"t": pl.Float64, "theta1": pl.Float64, "p1": pl.Float64},
    )
    _emit_csv(df, args.out)
    return 0


def cmd_sample(args: argparse.Namespace) -> int:
    spec = SectionSpec(_params(args), args.energy, _theta1_range(args))
    points = sample_section(spec, args.n, args.seed, stencil_sigma=args.neighbor_sigma)
    df = pl.DataFrame(
        [(p.theta1, p.p1, p.p2) for p in points],
        schema=[("theta1", pl.Float64), ("p1", pl.Float64), ("p2", pl.Float64)],
        orient="row",
    )
    _emit_csv(df, args.out)
    return 0


def cmd_ld_grid(args: argparse.Namespace) -> int:
    params = _params(args)
    spec = SectionSpec(params, args.energy, _theta1_range(args))
    cfg = LdConfig(
        tau=args.tau,
        p_exponent=args.p_exponent,
        sigma_i=args.neighbor_sigma,
        direction=args.direction,
        integrator=_integrator(args),
    )
    points = sample_section(spec, args.n, args.seed, stencil_sigma=cfg.sigma_i)
    found = ensemble_indicators(params, points, spec, cfg, workers=args.threads)
    logs = {ind: log_indicator(found, ind) for ind in Indicator}
    df = pl.DataFrame(
        {
            "theta1": [p.theta1 for p in points],
            "p1": [p.p1 for p in points],
            "ld": [None if f is None else f.ld_center for f in found],
            **{f"log10_{ind.value}": logs[ind] for ind in Indicator},
            "status": ["unclassifiable" if f is None else "ok" for f in found],
        },
        schema={**{c: pl.Float64 for c in LD_GRID_COLUMNS[:-1]}, "status": pl.Utf8},
    ).with_columns(pl.col(pl.Float64).fill_nan(None))
    chosen = Indicator(args.indicator)
    summary = df[f"log10_{chosen.value}"].drop_nulls()
    log.info(
        f"{df.height:,} points, {df.filter(pl.col('status') == 'ok').height:,} ok; "
        f"log10 {chosen.value} spans [{summary.min():.3g}, {summary.max():.3g}]"
        if summary.len() else f"{df.height:,} points, none classifiable"
    )
    _emit_csv(df, args.out)
    return 0


def cmd_classify(args: argparse.Namespace) -> int:
    column = f"log10_{args.indicator}"
    df = read_csv(args.input, ["theta1", "p1", column], "ld-grid table", {column: pl.Float64})
    logs = df[column].fill_null(float("nan")).to_numpy()

    calibration = None
    if args.calibration:
        calibration = _load_calibration(args.calibration)
    elif args.cutoff is not None:
        calibration = RegularReference(energy=float("nan"), peak=args.cutoff - CALIBRATION_DECADES, cutoff=args.cutoff)

    if args.save_calibration:
        if args.energy is None:
            raise DomainError("--save-calibration needs --energy, the energy of this ensemble")
        finite = logs[np.isfinite(logs)]
        reference = RegularReference.from_histogram(build_histogram(finite, args.bins), args.energy)
        write_json(reference.to_dict(), args.save_calibration)
        log.info(f"calibration peak {reference.peak:.4g}, cutoff {reference.cutoff:.4g} → {args.save_calibration}")
        calibration = calibration or reference

    report = classify_logs(logs, calibration, args.bins)
    log.info(f"{report.decision.scenario.value}: chaotic fraction {report.fraction:.4g}")
    if args.labels:
        labelled = df.select("theta1", "p1", pl.col(column).alias("log10_value")).with_columns(
            pl.Series("label", [label.value for label in report.labels], dtype=pl.Utf8)
        )
        write_csv(labelled, args.labels)
        log.info(f"{labelled.height:,} labels → {args.labels}")
    _emit_json(report.to_dict(), args.out)
    return 0


def cmd_sweep(args: argparse.Namespace, argv: list[str]) -> int:
    plan = load_plan(args.plan)
    if args.seed is not None:
        plan = replace(plan, master_seed=args.seed)
    out = Path(args.out)
    report = run_sweep(plan, out / "checkpoints", out_dir=out, workers=args.threads, resume=args.resume)
    manifest = RunManifest.capture(argv, plan.master_seed, plan.digest())
    write_json(asdict(manifest), out / "manifest.json")
    summary = {
        "computed": report.computed,
        "reused": report.reused,
        "failed": report.failed,
        "curves": len(report.curves),
    }
    sys.stdout.write(json.dumps(summary, indent=2, sort_keys=True) + "\n")
    if report.failed and not report.cells:
        log.error("every cell failed")
        return 1
    return 0


def cmd_fit(args: argparse.Namespace) -> int:
    curve, params = _read_curve(args)
    result = fit_regime(curve, params, args.regime, args.model)
    if not result.converged:
        log.warning("fit did not converge; reporting the starting estimate")
    _emit_json(result.to_dict(), args.out)
    return 0


def cmd_plot(args: argparse.Namespace) -> int:
    from chaosmap.lib import plotting

    if args.kind == "section":
        fig = plotting.section_figure(
            read_csv(args.input, plotting.SECTION_COLUMNS, "section table",
                     {"theta1": pl.Float64, "p1": pl.Float64})
        )
    elif args.kind == "curve":
        curve, _ = _read_curve(args)
        fig = plotting.curve_figure(curve)
    elif args.kind == "histogram":
        if not Path(args.input).exists():
            raise FileNotFoundError(f"input not found: {args.input}")
        payload = read_json(args.input)
        if not isinstance(payload, dict) or "histogram" not in payload:
            raise SchemaMismatch(f"{args.input} is not a classify report (no histogram)")
        fig = plotting.histogram_figure(IndicatorHistogram.from_dict(payload["histogram"]), payload.get("threshold"))
    else:
        fig = plotting.surface_figure(
            read_csv(args.input, SURFACE_COLUMNS, "surface table", {c: pl.Float64 for c in SURFACE_COLUMNS})
        )
    plotting.save_svg(fig, args.out)
    return 0


def cmd_warehouse(args: argparse.Namespace) -> int:
    from chaosmap.lib.warehouse import build_warehouse, load_config, select_tables

    cfg = load_config(args.config)
    only = {s.strip() for s in args.only.split(",") if s.strip()} or None
    if args.list:
        selected = select_tables(cfg, only)
        if not selected:
            print("No tables matched (or no study output present).")
        for table, pattern, kind in selected:
            print(f"  - {table:40s} [{kind:4s}] ← {pattern}")
        return 0
    build_warehouse(cfg, as_tables=args.as_tables, only=only)
    return 0


# ------------------------------ CLI ------------------------------

def parse_args(argv: Iterable[str]) -> argparse.Namespace:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--threads", type=int, default=None,
                        help="Worker processes (default: $CHAOSMAP_THREADS or 1)")
    common.add_argument("-v", "--verbose", action="store_true", help="Verbose logging")

    model = argparse.ArgumentParser(add_help=False)
    model.add_argument("--alpha", type=float, required=True, help="Length ratio l1/l2")
    model.add_argument("--sigma", type=float, required=True, help="Mass ratio m1/m2")

    tol = argparse.ArgumentParser(add_help=False)
    tol.add_argument("--tol", type=float, default=ODE_TOLERANCE, help="Absolute and relative tolerance")

    section = argparse.ArgumentParser(add_help=False)
    section.add_argument("--energy", type=float, required=True, help="Section energy H0")
    section.add_argument("--n", type=int, required=True, help="Number of points")
    section.add_argument("--seed", type=int, required=True, help="Seed of the ensemble")
    section.add_argument("--full-range", action="store_true", help="Sample theta1 over (-pi, pi] instead of [0, pi]")

    out = argparse.ArgumentParser(add_help=False)
    out.add_argument("--out", type=str, default=None, help="Output file (default: stdout)")

    p = argparse.ArgumentParser(
        prog="chaosmap",
        description="Chaos indicators and parametric studies of the double pendulum.",
    )
    p.add_argument("--version", action="version", version=f"chaosmap {__version__}")
    sub = p.add_subparsers(dest="command", required=True, metavar="COMMAND")

    sub.add_parser("equilibria", parents=[common, model, out], help="Equilibria, energies and stability (JSON)")

    s = sub.add_parser("simulate", parents=[common, model, tol, out], help="Integrate one trajectory (CSV)")
    s.add_argument("--state", type=_state_arg, required=True, help="theta1,theta2,p1,p2")
    s.add_argument("--t-end", type=float, required=True, help="Final time (negative for backward)")
    s.add_argument("--sample", type=float, default=None, help="Sampling interval (default: every step)")
    s.add_argument("--ld", action="store_true", help="Carry the Lagrangian descriptor as a column")
    s.add_argument("--p-exponent", type=float, default=LD_P_EXPONENT, help="LD p-norm exponent")

    s = sub.add_parser("poincare", parents=[common, model, tol, out], help="Section crossings of one orbit (CSV)")
    s.add_argument("--energy", type=float, required=True, help="Energy H0")
    s.add_argument("--theta1", type=float, required=True)
    s.add_argument("--p1", type=float, required=True)
    s.add_argument("--crossings", type=int, required=True, help="Number of crossings to record")
    s.add_argument("--t-max", type=float, default=1e4, help="Give up after this much time")

    s = sub.add_parser("sample", parents=[common, model, section, out], help="Uniform section ensemble (CSV)")
    s.add_argument("--neighbor-sigma", type=float, default=None,
                   help="Redraw centres whose stencil at this distance leaves the surface")

    s = sub.add_parser("ld-grid", parents=[common, model, section, tol, out], help="Indicators of an ensemble (CSV)")
    s.add_argument("--tau", type=float, default=LD_TAU, help="LD horizon")
    s.add_argument("--p-exponent", type=float, default=LD_P_EXPONENT)
    s.add_argument("--neighbor-sigma", type=float, default=NEIGHBOR_SIGMA)
    s.add_argument("--direction", choices=[d.value for d in Direction], default=Direction.FORWARD.value)
    s.add_argument("--indicator", choices=[i.value for i in Indicator], default="s",
                   help="Indicator summarised in the log")

    s = sub.add_parser("classify", parents=[common, out], help="Threshold and labels of an ld-grid (JSON)")
    s.add_argument("--in", dest="input", required=True, help="ld-grid CSV")
    s.add_argument("--indicator", choices=[i.value for i in Indicator], default="s")
    s.add_argument("--bins", type=int, default=None)
    g = s.add_mutually_exclusive_group()
    g.add_argument("--calibration", type=str, default=None, help="Calibration JSON (from a sweep or --save-calibration)")
    g.add_argument("--cutoff", type=float, default=None, help="log10 cutoff between regular and chaotic single peaks")
    s.add_argument("--save-calibration", type=str, default=None,
                   help="Treat this ensemble as the regular reference and write it here")
    s.add_argument("--energy", type=float, default=None, help="Energy of the ensemble (with --save-calibration)")
    s.add_argument("--labels", type=str, default=None, help="Write per-point labels to this CSV")

    s = sub.add_parser("sweep", parents=[common], help="Run a study plan with checkpoints")
    s.add_argument("--plan", required=True, help="Plan file (YAML or JSON)")
    s.add_argument("--out", required=True, help="Output directory")
    s.add_argument("--resume", action="store_true", help="Reuse checkpoints of the same plan")
    s.add_argument("--seed", type=int, default=None, help="Override the plan's master seed")

    s = sub.add_parser("fit", parents=[common, out], help="Fit a regime of a fraction curve (JSON)")
    s.add_argument("--in", dest="input", required=True, help="Curve CSV")
    s.add_argument("--regime", choices=["growth", "decay"], required=True)
    s.add_argument("--model", choices=["exp", "linear"], default="exp")
    s.add_argument("--alpha", type=float, default=None, help="Default: read from the file name")
    s.add_argument("--sigma", type=float, default=None, help="Default: read from the file name")

    s = sub.add_parser("plot", parents=[common], help="SVG figure of a CLI output")
    s.add_argument("--kind", choices=["section", "curve", "histogram", "surface"], required=True)
    s.add_argument("--in", dest="input", required=True)
    s.add_argument("--out", required=True, help="SVG path")
    s.add_argument("--alpha", type=float, default=None, help="Curve plots: default from the file name")
    s.add_argument("--sigma", type=float, default=None, help="Curve plots: default from the file name")

    s = sub.add_parser("warehouse", parents=[common], help="Register study outputs in DuckDB")
    s.add_argument("-c", "--config", type=str, default="warehouse.yaml", help="Warehouse YAML")
    s.add_argument("--as-tables", action="store_true", help="Create TABLEs instead of VIEWs")
    s.add_argument("--only", type=str, default="", help="Comma-separated exact table names to include")
    s.add_argument("--list", action="store_true", help="List what would be registered; do not write DB")

    return p.parse_args(list(argv))


COMMANDS = {
    "equilibria": cmd_equilibria,
    "simulate": cmd_simulate,
    "poincare": cmd_poincare,
    "sample": cmd_sample,
    "ld-grid": cmd_ld_grid,
    "classify": cmd_classify,
    "fit": cmd_fit,
    "plot": cmd_plot,
    "warehouse": cmd_warehouse,
}


def main(argv: Iterable[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    try:
        args = parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else 2

    logging.basicConfig(
        level=logging.DEBUG if args.verbose else logging.INFO,
        format="%(asctime)s — %(levelname)s — %(message)s",
    )
    args.threads = max(1, args.threads) if args.threads is not None else default_threads()

    try:
        if args.command == "sweep":
            return cmd_sweep(args, argv)
        return COMMANDS[args.command](args)
    except (ChaosMapError, FileNotFoundError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main(sys.argv[1:]))
