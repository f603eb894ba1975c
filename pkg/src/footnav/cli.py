"""Command-line interface: run filters over logs, simulate, compare, sweep.

Exit codes: 0 success, 1 input parse/validation failure, 2 numeric failure
(the filter state went non-finite).
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import replace
from pathlib import Path

import numpy as np

from .detector import StanceDetector
from .ekf import run_ekf
from .inekf import FilterNumericError, run_filter
from .io import (
    ConfigError,
    ImuLogError,
    dump_config,
    load_config,
    parse_imu_log,
    parse_trajectory,
    write_imu_log,
    write_trajectory,
)
from .metrics import compute_report
from .sim import GAIT_PRESETS, corrupt, generate_gait, inverse_imu
from .sweep import load_sweep_spec, run_sweep, write_sweep_table
from .types import ImuBias

_RUNNERS = {"inekf": run_filter, "ekf": run_ekf}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="footnav",
        description="Foot-mounted inertial dead reckoning with zero-velocity updates.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    run = sub.add_parser("run", help="run one filter over an IMU log")
    run.add_argument("log", help="IMU log CSV (t,wx,wy,wz,ax,ay,az)")
    run.add_argument("--config", help="config file (defaults used when omitted)")
    run.add_argument("--filter", default="inekf", help="inekf or ekf")
    run.add_argument("--out", required=True, help="output trajectory CSV")
    run.add_argument("--gt", help="ground-truth trajectory CSV for metrics")

    simulate = sub.add_parser("simulate", help="generate a synthetic scenario")
    simulate.add_argument("--scenario", required=True,
                          help=", ".join(sorted(GAIT_PRESETS)))
    simulate.add_argument("--config", help="config file (noise model)")
    simulate.add_argument("--out", required=True, help="output directory")
    simulate.add_argument("--seed", type=int, default=0, help="noise seed")

    compare = sub.add_parser("compare", help="run both filters on the same log")
    compare.add_argument("log")
    compare.add_argument("--config")
    compare.add_argument("--out", required=True, help="output directory")
    compare.add_argument("--gt", help="ground-truth trajectory CSV")

    sweep = sub.add_parser("sweep", help="noise-sensitivity sweep")
    sweep.add_argument("spec", help="sweep spec file ([sweep] section)")
    sweep.add_argument("--config", help="base config file")
    sweep.add_argument("--out", required=True, help="output CSV table")
    sweep.add_argument("--jobs", type=int, default=1, help="parallel workers")

    printcfg = sub.add_parser("print-config", help="echo the effective configuration")
    printcfg.add_argument("--config")
    return parser


def _make_detector(rc) -> StanceDetector | None:
    if not rc.zupt_enabled:
        return None
    return StanceDetector(rc.detector, float(np.linalg.norm(rc.noise.gravity)))


def _cmd_run(args) -> int:
    if args.filter not in _RUNNERS:
        print(f"unknown filter {args.filter!r} (valid choices: inekf, ekf)",
              file=sys.stderr)
        return 1
    rc = load_config(args.config)
    samples = parse_imu_log(args.log)
    points = _RUNNERS[args.filter](
        samples, rc.noise, _make_detector(rc), rc.init_window,
        cov0_diag=rc.cov0_diag(), reorth_interval=rc.reorth_interval,
    )
    write_trajectory(points, args.out)
    if args.gt:
        gt = parse_trajectory(args.gt)
        print(compute_report(points, gt).to_text())
    return 0


def _cmd_simulate(args) -> int:
    if args.scenario not in GAIT_PRESETS:
        print(f"unknown scenario {args.scenario!r} "
              f"(valid choices: {', '.join(sorted(GAIT_PRESETS))})", file=sys.stderr)
        return 1
    rc = load_config(args.config)
    spec = replace(GAIT_PRESETS[args.scenario], rng_seed=args.seed)
    gt = generate_gait(spec, 100.0)
    ideal = inverse_imu(gt, rc.noise.gravity)
    samples = corrupt(ideal, rc.noise, ImuBias.zero(), spec.rng_seed)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    write_imu_log(samples, out / "imu.csv")
    write_trajectory(gt.to_points(), out / "gt.csv")
    print(f"wrote {out / 'imu.csv'} and {out / 'gt.csv'} "
          f"({gt.t.size} samples, {spec.n_steps} steps)")
    return 0


def _cmd_compare(args) -> int:
    rc = load_config(args.config)
    samples = parse_imu_log(args.log)
    gt = parse_trajectory(args.gt) if args.gt else None
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    for name in ("inekf", "ekf"):
        points = _RUNNERS[name](
            samples, rc.noise, _make_detector(rc), rc.init_window,
            cov0_diag=rc.cov0_diag(), reorth_interval=rc.reorth_interval,
        )
        write_trajectory(points, out / f"{name}.csv")
        print(f"[{name}]")
        print(compute_report(points, gt).to_text())
        print()
    return 0


def _cmd_sweep(args) -> int:
    rc = load_config(args.config)
    spec = load_sweep_spec(args.spec)
    rows = run_sweep(spec, rc, jobs=max(1, args.jobs))
    write_sweep_table(rows, args.out)
    # Success requires at least one good repetition in every (filter, factor) cell.
    cells: dict[tuple, int] = {}
    for row in rows:
        key = (row.filter, row.target, row.factor)
        cells[key] = cells.get(key, 0) + (0 if row.failed else 1)
    n_failed = sum(1 for row in rows if row.failed)
    print(f"wrote {args.out} ({len(rows)} rows, {n_failed} failed)")
    if any(count == 0 for count in cells.values()):
        print("at least one sweep cell has no successful run", file=sys.stderr)
        return 1
    return 0


def _cmd_print_config(args) -> int:
    print(dump_config(load_config(args.config)), end="")
    return 0


_HANDLERS = {
    "run": _cmd_run,
    "simulate": _cmd_simulate,
    "compare": _cmd_compare,
    "sweep": _cmd_sweep,
    "print-config": _cmd_print_config,
}


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        return _HANDLERS[args.command](args)
    except FilterNumericError as exc:
        print(f"numeric failure: {exc}", file=sys.stderr)
        return 2
    except (ImuLogError, ConfigError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1
    except FileNotFoundError as exc:
        print(f"error: file not found: {exc.filename}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    raise SystemExit(main())
