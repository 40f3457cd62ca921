"""Command-line orchestration: N-sweeps, reference management, slope tables.

Subcommands:
  run        run a scenario over an N sweep and write convergence/slope CSVs
  reference  build and persist a high-resolution reference solution
  table      render the strategy-by-quantity slope matrix from CSVs

Output defaults to $FPRQMC_OUTDIR or ./out.  Identical invocations produce
byte-identical files.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import scenarios, stats
from .strategies import STRATEGY_NAMES


_CONFIG_TYPES = {
    "reps": int, "steps": int, "cells": int, "seed": int, "workers": int,
    "nref": int, "rref": int, "dt": float,
    "trajectories": lambda v: v.lower() in ("1", "true", "yes"),
}


def read_config_file(path) -> dict:
    """Parse ``key = value`` lines; ``#`` starts a comment.

    Keys mirror the CLI flag names (scenario, strategy, particles, reps,
    steps, dt, cells, seed, workers, out, reference, fit-window, rate,
    trajectories, nref, rref).  CLI flags take precedence over file values.
    """
    values = {}
    for raw in Path(path).read_text().splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise SystemExit(f"bad config line (want key = value): {raw!r}")
        key, val = (s.strip() for s in line.split("=", 1))
        values[key.replace("-", "_")] = val
    return values


def apply_config_file(args) -> None:
    """Fill unset argument fields from the config file, typed per key."""
    if not getattr(args, "config", None):
        return
    for key, val in read_config_file(args.config).items():
        if not hasattr(args, key):
            raise SystemExit(f"unknown config key {key!r}")
        if getattr(args, key) in (None, False):
            setattr(args, key, _CONFIG_TYPES.get(key, str)(val))


def parse_particles(spec: str) -> list[int]:
    """Either ``a..b`` (powers of two, inclusive) or a comma list."""
    if ".." in spec:
        lo_s, hi_s = spec.split("..", 1)
        lo, hi = int(lo_s), int(hi_s)
        if lo < 1 or hi < lo:
            raise ValueError(f"bad particle range {spec!r}")
        for v in (lo, hi):
            if v & (v - 1):
                raise ValueError(f"range endpoints must be powers of two: {v}")
        vals = []
        n = lo
        while n <= hi:
            vals.append(n)
            n *= 2
        return vals
    return [int(v) for v in spec.split(",")]


def _out_dir(args) -> Path:
    out = Path(args.out or os.environ.get("FPRQMC_OUTDIR", "out"))
    out.mkdir(parents=True, exist_ok=True)
    return out


def _require_scenario(args) -> None:
    if not args.scenario:
        raise SystemExit("a scenario is required (--scenario or a config file entry)")
    if args.scenario not in scenarios.SCENARIOS:
        raise SystemExit(f"unknown scenario {args.scenario!r}; "
                         f"choose from {', '.join(scenarios.SCENARIOS)}")


def _base_config(args) -> scenarios.ScenarioConfig:
    overrides = {}
    for key in ("reps", "steps", "dt", "cells", "seed", "workers"):
        val = getattr(args, key)
        if val is not None:
            overrides[{"reps": "n_reps", "steps": "n_steps",
                       "cells": "n_cells"}.get(key, key)] = val
    return scenarios.make_config(args.scenario, **overrides)


def _reference_for(args, config):
    if config.scenario == "relax-const":
        return scenarios.reference_relax_const(config, rate=args.rate)
    if config.scenario == "relax-mckean":
        return scenarios.reference_relax_mckean(config, rate=args.rate)
    if not args.reference:
        raise SystemExit(f"scenario {config.scenario!r} needs a persisted reference; "
                         f"build one with: fprqmc reference --scenario {config.scenario}")
    try:
        return scenarios.load_reference(args.reference, config)
    except scenarios.StaleReferenceError as exc:
        raise SystemExit(f"stale reference {args.reference}: {exc}")


def cmd_run(args) -> int:
    apply_config_file(args)
    _require_scenario(args)
    args.particles = args.particles or "64..4096"
    args.fit_window = args.fit_window or "full"
    args.rate = args.rate or "ou"
    out = _out_dir(args)
    config = _base_config(args)
    try:
        n_values = parse_particles(args.particles)
    except ValueError as exc:
        raise SystemExit(f"bad --particles value: {exc}")
    names = args.strategy.split(",") if args.strategy else list(STRATEGY_NAMES)
    if config.scenario != "relax-const" and "control-variate" in names:
        if args.strategy:
            raise SystemExit("control-variate runs only in relax-const")
        names.remove("control-variate")

    if config.scenario == "uniform-demo":
        records = scenarios.run_uniform_demo(n_values, repetitions=config.n_reps,
                                             seed=config.seed, window=args.fit_window)
        meta = {"scenario": "uniform-demo", "repetitions": config.n_reps,
                "seed": config.seed, "n_values": n_values}
        stats.write_convergence_csv(out / "uniform-demo_convergence.csv", records, meta)
        stats.write_slopes_csv(out / "uniform-demo_slopes.csv", records, meta)
        print(stats.slope_table(records, [f"moment{k}" for k in range(1, 5)]))
        return 0

    reference = _reference_for(args, config)
    meta = config.to_meta()
    meta["n_values"] = n_values
    meta["strategies"] = names
    if args.trajectories:
        for name in names:
            for n in n_values:
                cfg = replace(config, strategy=name, n_particles=n)
                runs = scenarios.run_scenario(cfg)
                m = cfg.to_meta()
                path = out / f"{config.scenario}_{name}_n{n}_trajectories.csv"
                stats.write_trajectories_csv(path, runs, scenarios.QUANTITIES, m)
    records = scenarios.convergence_sweep(config, names, n_values, reference,
                                          window=args.fit_window)
    stats.write_convergence_csv(out / f"{config.scenario}_convergence.csv", records, meta)
    stats.write_slopes_csv(out / f"{config.scenario}_slopes.csv", records, meta)
    print(stats.slope_table(records, list(scenarios.TABLE_QUANTITIES)))
    return 0


def cmd_reference(args) -> int:
    apply_config_file(args)
    _require_scenario(args)
    out = _out_dir(args)
    config = _base_config(args)
    if config.scenario not in ("couette", "heatflux"):
        raise SystemExit("references are built for couette and heatflux only")
    ref = scenarios.build_reference_inhomogeneous(config, n_ref=args.nref,
                                                  r_ref=args.rref, seed=config.seed,
                                                  workers=config.workers)
    path = Path(args.reference) if args.reference else out / f"{config.scenario}_reference.csv"
    scenarios.save_reference(path, ref)
    floors = ", ".join(f"{q}={ref.noise_floor[i]:.3e}"
                       for i, q in enumerate(scenarios.QUANTITIES)
                       if q in scenarios.TABLE_QUANTITIES)
    print(f"reference written to {path}")
    print(f"noise floor (averaged standard error): {floors}")
    return 0


def cmd_table(args) -> int:
    paths = [Path(p) for p in args.csv]
    if not paths:
        out = _out_dir(args)
        paths = sorted(out.glob("*_convergence.csv"))
    if not paths:
        raise SystemExit("no convergence CSVs found; expected *_convergence.csv "
                         f"under {args.out or os.environ.get('FPRQMC_OUTDIR', 'out')}")
    for path in paths:
        if not path.exists():
            raise SystemExit(f"missing convergence CSV: {path}")
        meta, rows = stats.read_convergence_csv(path)
        records = stats.records_from_rows(rows, window=args.fit_window)
        quantities = []
        for _, q, _, _ in rows:
            if q not in quantities:
                quantities.append(q)
        print(f"== {path}")
        print(stats.slope_table(records, quantities))
    return 0


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="fprqmc",
                                     description=__doc__,
                                     formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--scenario", choices=scenarios.SCENARIOS)
        p.add_argument("--config", default=None,
                       help="key = value file; flags override its entries")
        p.add_argument("--reps", type=int, default=None)
        p.add_argument("--steps", type=int, default=None)
        p.add_argument("--dt", type=float, default=None)
        p.add_argument("--cells", type=int, default=None)
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--workers", type=int, default=None)
        p.add_argument("--out", default=None, help="output directory")
        p.add_argument("--reference", default=None, help="reference CSV path")

    p_run = sub.add_parser("run", help="run an N sweep and write convergence CSVs")
    common(p_run)
    p_run.add_argument("--strategy", default=None,
                       help="comma-separated strategy names (default: all applicable)")
    p_run.add_argument("--particles", default=None,
                       help="N sweep, e.g. 64..16384 (powers of two) or 64,128")
    p_run.add_argument("--fit-window", choices=("full", "asymptotic"), default=None)
    p_run.add_argument("--rate", choices=("ou", "1tau"), default=None,
                       help="relaxation-rate convention for analytic references")
    p_run.add_argument("--trajectories", action="store_true",
                       help="also write per-(strategy, N) trajectory CSVs")

    p_ref = sub.add_parser("reference", help="build and persist a reference solution")
    common(p_ref)
    p_ref.add_argument("--nref", type=int, default=100_000)
    p_ref.add_argument("--rref", type=int, default=20)

    p_tab = sub.add_parser("table", help="render slope tables from convergence CSVs")
    p_tab.add_argument("csv", nargs="*", help="convergence CSV paths")
    p_tab.add_argument("--out", default=None)
    p_tab.add_argument("--fit-window", choices=("full", "asymptotic"), default="full")
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handlers = {"run": cmd_run, "reference": cmd_reference, "table": cmd_table}
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
