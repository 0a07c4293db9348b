"""Command-line front end.

Exit codes: 0 success, 2 usage error (bad flags, unknown method, missing
config file), 3 invalid configuration, 4 estimator failure at run time.
Data goes to stdout and files; diagnostics go to stderr.
"""

from __future__ import annotations

import argparse
import csv
import dataclasses
import json
import math
import sys
from pathlib import Path

import numpy as np

from . import __version__
from .bench import (
    METHODS,
    error_metrics,
    fit_scale,
    ground_truth,
    radius_sweep,
    risk_density_matrix,
    run_benchmark,
)
from .config import DEFAULT_CONFIG, load_config
from .errors import ConfigError, PathRiskError
from .estimators import (
    Scenario,
    grid_estimate,
    mc_ground_truth,
    naive_param_h3,
    risk_density_estimate,
    stagewise_estimate,
    volterra_h2,
)

EXIT_OK, EXIT_USAGE, EXIT_CONFIG, EXIT_RUNTIME = 0, 2, 3, 4


class UsageError(Exception):
    pass


def fmt(v) -> str:
    """17 significant digits: enough for an exact float round trip."""
    return f"{float(v):.17g}"


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, np.ndarray):
        return v.tolist()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


def _parse_methods(text):
    if text is None:
        return None
    methods = tuple(m.strip() for m in text.split(",") if m.strip())
    bad = [m for m in methods if m not in METHODS]
    if bad or not methods:
        raise UsageError(f"unknown method(s) {bad}; available: {', '.join(METHODS)}")
    return methods


def _emit(args) -> set:
    kinds = set()
    for item in args.emit or ["csv"]:
        kinds.update(k.strip() for k in item.split(",") if k.strip())
    bad = kinds - {"csv", "svg"}
    if bad:
        raise UsageError(f"--emit accepts csv and svg, got {sorted(bad)}")
    return kinds


def _run_config(args):
    rc = load_config(args.config)
    over = {}
    if args.seed is not None:
        over["mc_seed"] = args.seed
    if args.trials is not None:
        over["mc_trials"] = args.trials
    if args.waypoints is not None:
        over["stagewise_N"] = args.waypoints
    if args.cells is not None:
        over["grid_cell_sizes"] = (args.cells,)
    methods = _parse_methods(getattr(args, "methods", None))
    if methods is not None:
        over["methods"] = methods
    cache = getattr(args, "cache", None)
    if cache is not None:
        over["cache_dir"] = str(cache)
    if over:
        rc = dataclasses.replace(rc, bench=dataclasses.replace(rc.bench, **over))
    return rc


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _write_rows(path: Path, header, rows):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        w.writerows(rows)


def _write_heatmap(path: Path, names, sigmas, matrix):
    _write_rows(path, ["trajectory"] + [fmt(s) for s in sigmas],
                [[n] + [fmt(v) for v in row] for n, row in zip(names, matrix)])


# ------------------------------------------------------------------- commands

def cmd_estimate(args) -> int:
    rc = _run_config(args)
    cfg = rc.bench
    method = args.method or rc.estimate.method
    if method not in METHODS:
        raise UsageError(f"unknown method {method!r}; available: {', '.join(METHODS)}")
    name = args.trajectory or rc.estimate.trajectory
    if name not in cfg.names:
        raise UsageError(f"unknown trajectory {name!r}; available: {', '.join(cfg.names)}")
    sigma = rc.estimate.sigma if args.sigma is None else args.sigma
    if not sigma > 0:
        raise UsageError("--sigma must be positive")
    traj = cfg.trajectories[cfg.names.index(name)]
    sc = Scenario.isotropic(traj, cfg.obstacle_mean, cfg.radius, sigma)
    q = cfg.quadrature
    if method == "montecarlo":
        est = mc_ground_truth(sc, cfg.mc_trials, cfg.ds_max(), seed=cfg.mc_seed,
                              workers=cfg.mc_workers)
    elif method == "stagewise":
        est = stagewise_estimate(sc, cfg.stagewise_N, cfg.stagewise_mode)
    elif method == "parametrization":
        est = naive_param_h3(sc, q)
    elif method == "volterra":
        est = volterra_h2(sc, q)
    elif method == "risk_density":
        est = risk_density_estimate(sc, q=q)
    else:
        est = grid_estimate(sc, cfg.grid_cell_sizes[0])
    record = {"method": est.method, "trajectory": name, "sigma": sigma, "value": est.value,
              "raw": est.raw, "wall_time": est.wall_time,
              "meta": {k: _jsonable(v) for k, v in est.meta.items()}}
    print(json.dumps(record))
    print(f"{name} sigma={sigma:g} {est.method}: value={est.value:.6g} raw={est.raw:.6g} "
          f"({est.wall_time * 1e3:.3g} ms)", file=sys.stderr)
    return EXIT_OK


def cmd_bench(args) -> int:
    rc = _run_config(args)
    out = _out_dir(args)
    emit = _emit(args)
    cfg = rc.bench
    if cfg.cache_dir is None:
        cfg = dataclasses.replace(cfg, cache_dir=str(out / "cache"))

    def progress(tag, secs):
        print(f"[bench] {tag}: {secs:.2f} s", file=sys.stderr)

    res = run_benchmark(cfg, progress)
    names, sigmas = cfg.names, cfg.sigma_values
    tables = {"montecarlo": (res.truth, res.truth, res.truth_seconds)}
    for tag, m in res.methods.items():
        tables[tag] = (m.values, m.raw, m.seconds)
        for (i, j), msg in sorted(m.failures.items()):
            print(f"[bench] {tag} failed at {names[i]} sigma={sigmas[j]:g}: {msg}", file=sys.stderr)
    summary = []
    for tag, (vals, raw, secs) in tables.items():
        rows = [[tag, names[i], fmt(sigmas[j]), fmt(vals[i, j]), fmt(raw[i, j]), fmt(secs[i, j])]
                for i in range(len(names)) for j in range(len(sigmas))]
        _write_rows(out / f"values_{tag}.csv",
                    ["method", "trajectory", "sigma", "value", "raw", "seconds"], rows)
        err, fro, mx = error_metrics(res.truth, vals, tag)
        _write_rows(out / f"errors_{tag}.csv", ["trajectory", "sigma", "error"],
                    [[names[i], fmt(sigmas[j]), fmt(err.entries[i, j])]
                     for i in range(len(names)) for j in range(len(sigmas))])
        _write_heatmap(out / f"heatmap_{tag}.csv", names, sigmas, vals)
        _write_heatmap(out / f"heatmap_errors_{tag}.csv", names, sigmas, err.entries)
        summary.append([tag, fmt(fro), fmt(mx), fmt(float(np.nansum(secs)))])
        if "svg" in emit:
            from .plotting import render_heatmap
            render_heatmap(out / f"heatmap_{tag}.csv", out / f"heatmap_{tag}.svg", f"{tag}: value")
            render_heatmap(out / f"heatmap_errors_{tag}.csv", out / f"heatmap_errors_{tag}.svg",
                           f"{tag}: Monte Carlo minus estimate", diverging=True)
    _write_rows(out / "summary.csv", ["method", "frobenius", "max_abs", "seconds"], summary)
    for row in summary:
        print(",".join(row))
    return EXIT_OK


def cmd_radius_sweep(args) -> int:
    rc = _run_config(args)
    out = _out_dir(args)
    emit = _emit(args)
    cfg = rc.bench
    blocks = radius_sweep(cfg)
    cols = ("sensitivity", "risk_density")
    for b in blocks:
        stem = f"sweep_{b.name}_sigma{b.sigma:g}"
        rows = []
        for k, r in enumerate(b.radii):
            dT = b.dT[k - 1] if k else 0.0
            row = [fmt(r), fmt(dT), fmt(b.mc[k]), fmt(b.sensitivity[k]), fmt(b.risk_density[k])]
            for c in cols:
                row.append(fmt(abs(getattr(b, c)[k] - b.mc[k])))
            for c in cols:
                rel = abs(getattr(b, c)[k] - b.mc[k]) / b.mc[k] if b.mc[k] > 0 else math.nan
                row.append(fmt(rel))
            rows.append(row)
        _write_rows(out / f"{stem}.csv",
                    ["radius", "dT", "montecarlo", "sensitivity", "risk_density",
                     "abs_err_sensitivity", "abs_err_risk_density",
                     "rel_err_sensitivity", "rel_err_risk_density"], rows)
        if "svg" in emit:
            from .plotting import render_sweep
            render_sweep(out / f"{stem}.csv", out / f"{stem}.svg", f"{b.name}, sigma={b.sigma:g}")
    sig = list(dict.fromkeys(b.sigma for b in blocks))
    names = list(dict.fromkeys(b.name for b in blocks))
    by_key = {(b.name, b.sigma): b for b in blocks}
    header = ["trajectory"] + [f"{c}_{s:g}" for s in sig for c in ("risk_density", "sensitivity")]
    for kind, fname in (("abs", "sweep_mean_abs_error_pct.csv"),
                        ("rel", "sweep_mean_rel_error_pct.csv")):
        rows = []
        for n in names:
            row = [n]
            for s in sig:
                b = by_key[(n, s)]
                f = b.mean_abs if kind == "abs" else b.mean_rel
                row += [fmt(100 * f("risk_density")), fmt(100 * f("sensitivity"))]
            rows.append(row)
        _write_rows(out / fname, header, rows)
        print(f"# mean {kind} error (%), risk_density / sensitivity")
        for row in rows:
            print(row[0] + "  " + "  ".join(f"{float(a):6.2f}/{float(b):6.2f}"
                                            for a, b in zip(row[1::2], row[2::2])))
    return EXIT_OK


def cmd_fit_scale(args) -> int:
    rc = _run_config(args)
    out = _out_dir(args)
    cfg = rc.bench
    if cfg.cache_dir is None:
        cfg = dataclasses.replace(cfg, cache_dir=str(out / "cache"))
    truth, _, _ = ground_truth(cfg)
    fit = fit_scale(truth, risk_density_matrix(cfg), default=cfg.radius)
    _write_rows(out / "fit_scale.csv", ["r_opt", "frobenius", "frobenius_at_radius"],
                [[fmt(fit.r_opt), fmt(fit.frobenius), fmt(fit.frobenius_at_default)]])
    print(f"r_opt={fit.r_opt:.6g} frobenius={fit.frobenius:.6g} "
          f"frobenius_at_r={fit.frobenius_at_default:.6g}")
    return EXIT_OK


def cmd_print_default_config(args) -> int:
    sys.stdout.write(DEFAULT_CONFIG)
    return EXIT_OK


# --------------------------------------------------------------------- parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", type=Path, help="TOML config (default: built-in benchmark)")
    common.add_argument("--out", default="results", help="output directory")
    common.add_argument("--seed", type=int, help="Monte Carlo seed override")
    common.add_argument("--trials", type=int, help="Monte Carlo trial count override")
    common.add_argument("--waypoints", type=int, help="stage-wise waypoint count override")
    common.add_argument("--cells", type=float, help="grid cell size override")
    common.add_argument("--emit", action="append", metavar="csv|svg",
                        help="outputs to write; repeat or comma-separate (default csv)")

    p = argparse.ArgumentParser(prog="pathrisk", description="Collision probability along paths.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--print-default-config", action="store_true",
                   help="print the built-in benchmark config and exit")
    sub = p.add_subparsers(dest="command")

    e = sub.add_parser("estimate", parents=[common], help="run one estimator on one scenario")
    e.add_argument("--method", help=f"one of {', '.join(METHODS)}")
    e.add_argument("--trajectory", help="trajectory name from the config")
    e.add_argument("--sigma", type=float, help="isotropic variance of the relative position")
    e.set_defaults(func=cmd_estimate)

    b = sub.add_parser("bench", parents=[common], help="full benchmark with error norms")
    b.add_argument("--methods", help="comma-separated method list")
    b.add_argument("--cache", type=Path, help="Monte Carlo cache directory")
    b.set_defaults(func=cmd_bench)

    r = sub.add_parser("radius-sweep", parents=[common], help="first-order updates over radii")
    r.set_defaults(func=cmd_radius_sweep)

    f = sub.add_parser("fit-scale", parents=[common], help="fit the risk-density scale")
    f.add_argument("--cache", type=Path, help="Monte Carlo cache directory")
    f.set_defaults(func=cmd_fit_scale)

    d = sub.add_parser("print-default-config", help="print the built-in benchmark config")
    d.set_defaults(func=cmd_print_default_config)
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.print_default_config:
        return cmd_print_default_config(args)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"pathrisk: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except FileNotFoundError as exc:
        print(f"pathrisk: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except ConfigError as exc:
        print(f"pathrisk: config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except PathRiskError as exc:
        print(f"pathrisk: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
