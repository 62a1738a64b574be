"""Command-line entry point: ``purejump <subcommand> ...``.

Exit status signals operational failure only; test decisions are data.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import sys
import warnings

import numpy as np

from . import __version__
from .aj import AjSpec, aj_test
from .config import load_plan, load_yaml, model_from_dict
from .data import analyze_day, day_csv, day_summary, delta_grid, fixed_grid, load_ticks, regularize
from .errors import ConsistencyWarning, PureJumpError
from .experiments import (noisy_models, histogram_export, mc_rejection_rate, summaries_csv, sweep,
                          sweep_csv, table1_csv, table1_demo)
from .preavg import PreAvgSpec, preaverage_blocks, v_bar
from .sim import Brownian, ModelSpec, SamplePath, Stable, h0_model, h1_model, heston_model, simulate
from .teststat import ThresholdSpec, run_test

log = logging.getLogger("purejump")


def _write(text: str, path):
    if path in (None, "-"):
        sys.stdout.write(text)
    else:
        with open(path, "w", encoding="utf-8", newline="\n") as fh:
            fh.write(text)


def _plain(v):
    if isinstance(v, (bool, np.bool_)):
        return bool(v)
    if isinstance(v, (int, np.integer)):
        return int(v)
    if isinstance(v, (float, np.floating)):
        return float(v)
    return v


def _record_out(rec: dict, fmt: str) -> str:
    rec = {k: _plain(v) for k, v in rec.items()}
    if fmt == "json":
        return json.dumps(rec, default=float) + "\n"
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=list(rec), lineterminator="\n")
    w.writeheader()
    w.writerow({k: repr(v) if isinstance(v, float) else v for k, v in rec.items()})
    return buf.getvalue()


def _read_path(path) -> SamplePath:
    if path in (None, "-"):
        return SamplePath.from_csv(sys.stdin.read())
    with open(path, encoding="utf-8") as fh:
        return SamplePath.from_csv(fh.read())


def _threshold(args) -> ThresholdSpec:
    if args.alpha is not None:
        return ThresholdSpec.direct(args.alpha, varpi=args.varpi, k=args.k)
    return ThresholdSpec.scaled(args.delta, args.kappa, args.varpi, args.k)


def _model(args) -> ModelSpec:
    if args.config:
        return model_from_dict(load_yaml(args.config))
    if args.model == "h0":
        m = h0_model(args.beta, args.jump_scale if args.jump_scale is not None else 0.5)
    elif args.model == "h1":
        m = h1_model(args.beta, args.gamma, args.jump_scale if args.jump_scale is not None else 0.5)
    elif args.model == "heston":
        m = heston_model(args.beta, args.jump_scale if args.jump_scale is not None else 0.25)
    elif args.model == "brownian":
        m = ModelSpec(diffusion=Brownian(args.sigma))
    elif args.model == "stable":
        m = ModelSpec(jump=Stable(args.beta, args.jump_scale if args.jump_scale is not None else 1.0))
    else:
        m = ModelSpec(diffusion=Brownian(args.sigma),
                      jump=Stable(args.beta, args.jump_scale if args.jump_scale is not None else 1.0))
    if args.noise_sd:
        m = ModelSpec(m.diffusion, m.drift, m.jump, args.noise_sd)
    return m


# ---------------------------------------------------------------------------
# Subcommands
# ---------------------------------------------------------------------------

def cmd_simulate(args):
    path = simulate(_model(args), args.n, args.T, args.seed)
    _write(path.to_csv(), args.out)


def cmd_test(args):
    path = _read_path(args.inp)
    if args.family == "aj":
        spec = AjSpec(p=args.p, alpha_u=args.alpha_u, rho=args.rho, k=args.k,
                      calibration_c=args.aj_c if args.aj_c is not None else "monte-carlo")
        rep = aj_test(path, spec, args.theta)
    else:
        rep = run_test(path, _threshold(args), args.theta)
    _write(_record_out(rep.to_record(), args.format), args.out)


def cmd_mc(args):
    plan = load_plan(args.plan)
    if args.reps is not None:
        plan.replications = args.reps
    if args.seed is not None:
        plan.master_seed = args.seed
    if args.sweep:
        name, _, values = args.sweep.partition("=")
        vals = [float(v) for v in values.split(",") if v]
        _write(sweep_csv(sweep(plan, name, vals, args.workers), name), args.out)
    else:
        _write(summaries_csv(mc_rejection_rate(plan, args.workers), ["model", "n"]), args.out)


def cmd_preavg(args):
    path = _read_path(args.inp)
    th = ThresholdSpec.direct(args.alpha, varpi=args.varpi, k=2)
    spec = PreAvgSpec(block_size=args.block_size, gap=args.gap, threshold=th)
    if args.series_out:
        _write(preaverage_blocks(path, spec).to_csv(), args.series_out)
    _write(_record_out(v_bar(path, spec), args.format), args.out)


def cmd_analyze(args):
    with open(args.inp, "rb") as fh:
        ticks = load_ticks(fh)
    path = regularize(ticks, args.interval, (args.open, args.close))
    if args.grid:
        lo, hi, step = args.grid
        grid = fixed_grid(path, lo, hi, step, args.kappa, args.varpi)
    else:
        grid = delta_grid(path, args.kappa, args.varpi, args.step)
    if grid.empty:
        raise PureJumpError("delta grid is empty (sigma* is zero or too small for the first step)")
    results = analyze_day(path, grid, args.theta)
    _write(day_csv(results), args.out)
    sys.stdout.write(json.dumps(day_summary(path, results)) + "\n")


def cmd_table1(args):
    _write(table1_csv(table1_demo(args.seed, args.reps, workers=args.workers)), args.out)


def cmd_hist(args):
    if args.preset == "fig5":
        models = noisy_models()
        out = []
        for name, m in models.items():
            h = histogram_export(m, 23_400, "v_bar", args.bins, args.reps, args.seed, workers=args.workers)
            out.append(f"# {name} mean={h.mean!r} size={h.size}\n" + h.to_csv())
        _write("".join(out), args.out)
        return
    h = histogram_export(_model(args), args.n, args.statistic, args.bins, args.reps, args.seed,
                         T=args.T, workers=args.workers)
    _write(h.to_csv(), args.out)


# ---------------------------------------------------------------------------
# Parser
# ---------------------------------------------------------------------------

def _model_args(p):
    p.add_argument("--model", choices=["h0", "h1", "heston", "brownian", "stable", "mixture"], default="h0")
    p.add_argument("--config", help="YAML model description (overrides --model)")
    p.add_argument("--beta", type=float, default=1.5)
    p.add_argument("--jump-scale", type=float, default=None, help="stable scale (theta')")
    p.add_argument("--sigma", type=float, default=1.0)
    p.add_argument("--gamma", type=float, default=None, help="drift decay rate for h1")
    p.add_argument("--noise-sd", type=float, default=0.0)
    p.add_argument("--n", type=int, default=23_400)
    p.add_argument("--T", type=float, default=1.0)
    p.add_argument("--seed", type=int, default=0)


def _threshold_args(p):
    p.add_argument("--delta", type=float, default=2.0)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--varpi", type=float, default=1.5)
    p.add_argument("--alpha", type=float, default=None, help="direct threshold constant (overrides delta/kappa)")
    p.add_argument("--k", type=int, default=2)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="purejump", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("simulate", help="simulate a path and write time,value CSV")
    _model_args(p)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("test", help="run the count test (or the AJ baseline) on a path CSV")
    p.add_argument("--in", dest="inp", default="-")
    _threshold_args(p)
    p.add_argument("--theta", type=float, default=0.05)
    p.add_argument("--family", choices=["vtilde", "aj"], default="vtilde")
    p.add_argument("--p", type=float, default=AjSpec.p)
    p.add_argument("--rho", type=float, default=AjSpec.rho)
    p.add_argument("--alpha-u", type=float, default=AjSpec.alpha_u)
    p.add_argument("--aj-c", type=float, default=None, help="studentizing constant (default: calibrate)")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_test)

    p = sub.add_parser("mc", help="Monte Carlo size/power table from a YAML plan")
    p.add_argument("--plan", required=True)
    p.add_argument("--seed", type=int, default=None)
    p.add_argument("--reps", type=int, default=None)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--sweep", help="NAME=v1,v2,... with NAME in jump_scale, delta, noise_sd")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_mc)

    p = sub.add_parser("preavg", help="pre-averaged count ratio on a noisy path CSV")
    p.add_argument("--in", dest="inp", default="-")
    p.add_argument("--block-size", type=int, default=PreAvgSpec.block_size)
    p.add_argument("--gap", type=int, default=PreAvgSpec.gap)
    p.add_argument("--alpha", type=float, default=9.0)
    p.add_argument("--varpi", type=float, default=1.5)
    p.add_argument("--series-out", default=None, help="write the block averages as CSV")
    p.add_argument("--format", choices=["csv", "json"], default="csv")
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_preavg)

    p = sub.add_parser("analyze", help="tick CSV -> per-delta test statistics for one day")
    p.add_argument("--in", dest="inp", required=True)
    p.add_argument("--interval", type=float, default=10.0)
    p.add_argument("--open", type=float, default=9.5 * 3600)
    p.add_argument("--close", type=float, default=16.0 * 3600)
    p.add_argument("--kappa", type=float, default=2.0)
    p.add_argument("--varpi", type=float, default=1.5)
    p.add_argument("--step", type=float, default=0.1)
    p.add_argument("--grid", type=float, nargs=3, metavar=("LO", "HI", "STEP"),
                   help="explicit delta grid instead of the admissible one")
    p.add_argument("--theta", type=float, default=0.05)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_analyze)

    p = sub.add_parser("table1", help="average small-increment counts for Y, W and S")
    p.add_argument("--seed", type=int, default=1)
    p.add_argument("--reps", type=int, default=500)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_table1)

    p = sub.add_parser("hist", help="histogram of a per-path statistic as CSV")
    _model_args(p)
    p.add_argument("--preset", choices=["fig5"], default=None)
    p.add_argument("--statistic", default="v_tilde")
    p.add_argument("--bins", type=int, default=50)
    p.add_argument("--reps", type=int, default=1000)
    p.add_argument("--workers", type=int, default=1)
    p.add_argument("--out", default="-")
    p.set_defaults(func=cmd_hist)
    return ap


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        with warnings.catch_warnings():
            if not args.verbose:
                warnings.simplefilter("ignore", ConsistencyWarning)
            args.func(args)
    except (PureJumpError, OSError, KeyError, TypeError, ValueError) as exc:
        print(f"purejump {args.command}: {exc}", file=sys.stderr)
        return 1
    return 0


def main():
    sys.exit(run())
