"""Command-line entry points: run, diagnose, rates, sweep.

Exit statuses: 0 converged/ok, 2 not converged by t_max, 3 blow-up,
4 configuration error, 5 I/O or format error.
"""

import argparse
import concurrent.futures
import os
import sys

import numpy as np

from . import config as config_mod
from . import diagnostics, geometry, io, recipes
from .bundle import make_bundle
from .errors import (BlowUpError, ConfigurationError, FormatError,
                     GlflowError, InsufficientDataError, SolvabilityError)
from .flow import StepPolicy, run as flow_run
from .geometry import make_geometry

EXIT_OK = 0
EXIT_TMAX = 2
EXIT_BLOWUP = 3
EXIT_CONFIG = 4
EXIT_IO = 5


def _parse_set(values):
    pairs = []
    for item in values or ():
        if "=" not in item:
            raise ConfigurationError(f"--set expects key=value, got {item!r}")
        key, value = item.split("=", 1)
        pairs.append((key.strip(), value.strip()))
    return pairs


def _load_config(args):
    try:
        with open(args.config) as f:
            text = f.read()
    except OSError as exc:
        raise FormatError(f"cannot read config: {exc}") from exc
    overrides = _parse_set(args.set)
    if getattr(args, "seed", None) is not None:
        overrides.append(("init.seed", str(args.seed)))
    return config_mod.parse_config(text, overrides)


def _out_path(args, path):
    if os.path.isabs(path) or not getattr(args, "out_dir", None):
        return path
    return os.path.join(args.out_dir, path)


def _build_problem(cfg):
    rho = config_mod.build_rho(cfg)
    geom = make_geometry(cfg.L1, cfg.L2, cfg.n1, cfg.n2, rho)
    bundle = make_bundle(cfg.N, geom)
    return geom, bundle


def _policy(cfg):
    return StepPolicy(scheme=cfg.scheme, dt=cfg.dt, safety=cfg.safety,
                      t_max=cfg.t_max, grad_tol=cfg.grad_tol,
                      record_every=cfg.record_every)


def _fit_or_nan(t, values, floor=None):
    try:
        return diagnostics.fit_rate(t, values, floor=floor)
    except (InsufficientDataError, ValueError):
        return None


def _summary(cfg, geom, bundle, result, quiet):
    reg = geometry.regime(cfg.N, geom)
    vmin = geometry.v_min(cfg.N, geom)
    last = result.records[-1]
    t = np.array([r.t for r in result.records])
    if reg.subcritical or reg.critical:
        cols = ("phi_l2", "y_l2")
    else:
        cols = ("eta_l2", "v_l2")
    fits = []
    for col in cols:
        vals = np.array([getattr(r, col) for r in result.records])
        fit = _fit_or_nan(t, vals)
        fits.append(f"delta[{col}]={fit.delta:.4g} (R2={fit.r2:.3f})"
                    if fit else f"delta[{col}]=n/a")
    if not quiet:
        print(f"regime={reg.kind} gap={reg.gap:.6g} v_min={vmin:.12g}")
        print(f"status={result.status} steps={result.steps} t={last.t:.6g} "
              f"repairs={result.repairs}")
        print(f"final: V={last.energy:.12g} eta_l2={last.eta_l2:.6g} "
              f"v_l2={last.v_l2:.6g} phi_l2={last.phi_l2:.6g} "
              f"vortex_total={last.vortex_total}")
        print(" ".join(fits))


def cmd_run(args):
    cfg = _load_config(args)
    for w in cfg.warnings:
        if not args.quiet:
            print(f"warning: {w}", file=sys.stderr)
    geom, bundle = _build_problem(cfg)
    init = recipes.build_initial_state(
        cfg.recipe, geom, bundle, cfg.seed,
        phi_amplitude=cfg.phi_amplitude, a_amplitude=cfg.a_amplitude,
        smoothing=cfg.smoothing, target_epsilon0=cfg.target_epsilon0)
    snap_dir = _out_path(args, cfg.snapshot_dir) if cfg.snapshot_dir else None
    if snap_dir:
        os.makedirs(snap_dir, exist_ok=True)

    def on_record(state, rec, index):
        if snap_dir and cfg.snapshot_every and index % cfg.snapshot_every == 0:
            io.write_snapshot(os.path.join(snap_dir, f"snap_r{index:06d}.snap"),
                              state, geom, cfg.N)

    result = flow_run(init, _policy(cfg), geom, bundle, on_record=on_record)
    series_path = _out_path(args, cfg.series_path)
    parent = os.path.dirname(series_path)
    if parent:
        os.makedirs(parent, exist_ok=True)
    io.write_series(series_path, result.records)
    if snap_dir:
        io.write_snapshot(os.path.join(snap_dir, "final.snap"),
                          result.final, geom, cfg.N)
    _summary(cfg, geom, bundle, result, args.quiet)
    return EXIT_OK if result.status == "converged" else EXIT_TMAX


def cmd_diagnose(args):
    geom, N, state = io.read_snapshot(args.snapshot)
    bundle = make_bundle(N, geom)
    rec = diagnostics.record_from_state(state, geom, bundle)
    for name in diagnostics.CSV_FIELDS:
        val = getattr(rec, name)
        text = str(val) if name == "vortex_total" else io.fmt(val)
        print(f"{name} = {text}")
    return EXIT_OK


def cmd_rates(args):
    data = io.read_series(args.series)
    if args.column not in data:
        raise FormatError(f"series has no column '{args.column}'")
    fit = diagnostics.fit_rate(data["t"], np.asarray(data[args.column], float),
                               floor=args.floor)
    span = fit.delta * (fit.t_end - fit.t_start)
    print(f"column={args.column} delta={io.fmt(fit.delta)} r2={fit.r2:.6f} "
          f"window=[{fit.t_start:.6g},{fit.t_end:.6g}] n={fit.n_samples}")
    if fit.delta <= 0 or span < 0.05:
        print("note: column is non-decaying over the fitted window")
    return EXIT_OK


def _sweep_one(task):
    index, text, overrides, out_dir, quiet = task
    try:
        cfg = config_mod.parse_config(text, overrides)
        geom, bundle = _build_problem(cfg)
        init = recipes.build_initial_state(
            cfg.recipe, geom, bundle, cfg.seed,
            phi_amplitude=cfg.phi_amplitude, a_amplitude=cfg.a_amplitude,
            smoothing=cfg.smoothing, target_epsilon0=cfg.target_epsilon0)
        result = flow_run(init, _policy(cfg), geom, bundle)
        run_dir = os.path.join(out_dir, f"run_{index:03d}")
        os.makedirs(run_dir, exist_ok=True)
        io.write_series(os.path.join(run_dir, "series.csv"), result.records)
        reg = geometry.regime(cfg.N, geom)
        last = result.records[-1]
        t = np.array([r.t for r in result.records])
        col = "phi_l2" if (reg.subcritical or reg.critical) else "eta_l2"
        fit = _fit_or_nan(t, np.array([getattr(r, col) for r in result.records]))
        return {"index": index, "area": geom.area,
                "threshold": 4 * np.pi * cfg.N, "regime": reg.kind,
                "status": result.status, "final_energy": last.energy,
                "v_min": geometry.v_min(cfg.N, geom),
                "delta": fit.delta if fit else float("nan"),
                "vortex_total": last.vortex_total}
    except GlflowError as exc:
        return {"index": index, "status": f"error: {exc}"}


def cmd_sweep(args):
    try:
        with open(args.config) as f:
            text = f.read()
    except OSError as exc:
        raise FormatError(f"cannot read config: {exc}") from exc
    base_overrides = _parse_set(args.set)
    values = [v.strip() for v in args.values.split(",") if v.strip()]
    if not values:
        raise ConfigurationError("--values is empty")
    base_seed = args.seed if args.seed is not None else None
    out_dir = args.out_dir or "."
    os.makedirs(out_dir, exist_ok=True)
    tasks = []
    for index, value in enumerate(values):
        overrides = list(base_overrides)
        if args.param == "L":
            overrides += [("geometry.L1", value), ("geometry.L2", value)]
        elif args.param == "N":
            overrides += [("bundle.N", value)]
        else:
            raise ConfigurationError(f"unknown sweep parameter '{args.param}'")
        seed = (base_seed if base_seed is not None
                else config_mod.parse_config(text, base_overrides).seed)
        overrides.append(("init.seed", str(seed + index)))
        tasks.append((index, text, overrides, out_dir, args.quiet))
    workers = min(len(tasks), os.cpu_count() or 1)
    if workers > 1:
        with concurrent.futures.ProcessPoolExecutor(max_workers=workers) as ex:
            rows = list(ex.map(_sweep_one, tasks))
    else:
        rows = [_sweep_one(t) for t in tasks]
    rows.sort(key=lambda r: r["index"])
    header = ("index,value,area,threshold,regime,status,final_energy,"
              "v_min,delta,vortex_total")
    lines = [header]
    failed = False
    for row, value in zip(rows, values):
        if row["status"].startswith("error"):
            failed = True
            lines.append(f"{row['index']},{value},,,,\"{row['status']}\",,,,")
            continue
        lines.append(
            f"{row['index']},{value},{io.fmt(row['area'])},"
            f"{io.fmt(row['threshold'])},{row['regime']},{row['status']},"
            f"{io.fmt(row['final_energy'])},{io.fmt(row['v_min'])},"
            f"{io.fmt(row['delta'])},{row['vortex_total']}")
        failed = failed or row["status"] not in ("converged", "t_max")
    out = "\n".join(lines) + "\n"
    with open(os.path.join(out_dir, "sweep.csv"), "w") as f:
        f.write(out)
    if not args.quiet:
        print(out, end="")
    return EXIT_IO if failed else EXIT_OK


def _make_parser():
    p = argparse.ArgumentParser(
        prog="glflow",
        description="Gauged Ginzburg-Landau gradient flow on a flat torus")
    sub = p.add_subparsers(dest="command", required=True)

    pr = sub.add_parser("run", help="run one flow from a config file")
    pr.add_argument("--config", required=True)
    pr.add_argument("--set", action="append", metavar="KEY=VALUE")
    pr.add_argument("--out-dir")
    pr.add_argument("--seed", type=int)
    pr.add_argument("--quiet", action="store_true")
    pr.set_defaults(func=cmd_run)

    pd = sub.add_parser("diagnose", help="recompute diagnostics from a snapshot")
    pd.add_argument("snapshot")
    pd.set_defaults(func=cmd_diagnose)

    pt = sub.add_parser("rates", help="fit an exponential rate to a series column")
    pt.add_argument("series")
    pt.add_argument("column")
    pt.add_argument("--floor", type=float)
    pt.set_defaults(func=cmd_rates)

    ps = sub.add_parser("sweep", help="run a parameter grid")
    ps.add_argument("--config", required=True)
    ps.add_argument("--param", required=True, choices=("L", "N"))
    ps.add_argument("--values", required=True,
                    help="comma-separated parameter values")
    ps.add_argument("--set", action="append", metavar="KEY=VALUE")
    ps.add_argument("--out-dir")
    ps.add_argument("--seed", type=int)
    ps.add_argument("--quiet", action="store_true")
    ps.set_defaults(func=cmd_sweep)
    return p


def main(argv=None):
    parser = _make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except BlowUpError as exc:
        print(f"blow-up: {exc}", file=sys.stderr)
        return EXIT_BLOWUP
    except (ConfigurationError, SolvabilityError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (FormatError, InsufficientDataError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_IO
    except OSError as exc:
        print(f"i/o error: {exc}", file=sys.stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
