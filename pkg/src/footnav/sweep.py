"""Process-noise sensitivity sweep: detune filter sigma values, score the drift.

Each cell (filter, target, factor, seed) simulates the scenario with the
true noise configuration, then runs the filter with ``sigma_g`` and/or
``sigma_a`` scaled by the factor, and records trajectory metrics against
the simulator ground truth.  The data a given seed produces is identical
across filters and factors, so comparisons are paired.  Cells are
independent and may run in parallel; results are byte-identical for any
worker count.
"""

from __future__ import annotations

from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, replace

import numpy as np

from .detector import StanceDetector
from .ekf import run_ekf
from .inekf import run_filter
from .io import ConfigError, RunConfig, _as_float, _as_int, _read_kv_sections
from .metrics import compute_report
from .sim import GAIT_PRESETS, GaitSpec, corrupt, generate_gait, inverse_imu
from .types import ImuBias

VALID_TARGETS = ("gyro", "accel", "both")
VALID_FILTERS = ("inekf", "ekf")

TABLE_HEADER = "filter,target,factor,seed,ate_rmse,loop_err,loop_pct,yaw_drift"


@dataclass(frozen=True)
class SweepSpec:
    """One sensitivity experiment: which sigmas to scale, by what, on what walk.

    ``turn_on_bias`` gives per-axis standard deviations (gyro rad/s, accel
    m/s^2) of a constant sensor bias drawn once per repetition and applied to
    the generated data.  Zero (the default) simulates perfectly calibrated
    sensors; low-cost hardware always carries a turn-on bias, and without one
    neither filter degrades under detuning on synthetic data.
    """

    scale_factors: tuple
    target: str
    scenario: GaitSpec
    filters: tuple = VALID_FILTERS
    repetitions: int = 20
    base_seed: int = 0
    turn_on_bias: tuple = (0.0, 0.0)

    def __post_init__(self):
        factors = tuple(float(f) for f in self.scale_factors)
        object.__setattr__(self, "scale_factors", factors)
        object.__setattr__(self, "filters", tuple(self.filters))
        object.__setattr__(self, "turn_on_bias",
                           tuple(float(b) for b in self.turn_on_bias))
        if not factors:
            raise ValueError("scale_factors must not be empty")
        if any(f <= 0.0 for f in factors):
            raise ValueError("scale_factors must all be positive")
        if self.target not in VALID_TARGETS:
            raise ValueError(f"target must be one of {VALID_TARGETS}, got {self.target!r}")
        unknown = [f for f in self.filters if f not in VALID_FILTERS]
        if unknown or not self.filters:
            raise ValueError(f"filters must be a non-empty subset of {VALID_FILTERS}")
        if self.repetitions < 1:
            raise ValueError("repetitions must be at least 1")
        if len(self.turn_on_bias) != 2 or any(b < 0.0 for b in self.turn_on_bias):
            raise ValueError("turn_on_bias takes two non-negative std devs (gyro, accel)")


@dataclass(frozen=True)
class SweepRow:
    """One output row; metric fields are None when the run failed."""

    filter: str
    target: str
    factor: float
    seed: int
    ate_rmse: float | None
    loop_err: float | None
    loop_pct: float | None
    yaw_drift: float | None
    error: str | None = None

    @property
    def failed(self) -> bool:
        return self.error is not None


def _scale_pair(target: str, factor: float) -> tuple[float, float]:
    gyro_scale = factor if target in ("gyro", "both") else 1.0
    accel_scale = factor if target in ("accel", "both") else 1.0
    return gyro_scale, accel_scale


def _turn_on_bias(seed: int, mag_gyro: float, mag_accel: float) -> ImuBias:
    """Per-repetition constant sensor bias of fixed magnitude, random direction.

    Fixing the magnitude keeps every repetition equally stressed (a Gaussian
    draw would make the medians hostage to bias-magnitude luck); the stream
    is offset from the noise seed so the draws never alias.
    """
    rng = np.random.default_rng(0x7B1A5 + seed)
    def unit():
        u = rng.standard_normal(3)
        return u / np.linalg.norm(u)
    return ImuBias(unit() * mag_gyro, unit() * mag_accel)


def _run_cell(args):
    """Worker: one (filter, sigma scales, seed) cell. Must stay picklable."""
    (filter_name, gyro_scale, accel_scale, seed, scenario, run_config,
     rate_hz, bias_sigmas) = args
    try:
        gt = generate_gait(scenario, rate_hz)
        ideal = inverse_imu(gt, run_config.noise.gravity)
        bias0 = _turn_on_bias(seed, *bias_sigmas)
        samples = corrupt(ideal, run_config.noise, bias0, seed)
        detuned = replace(
            run_config.noise,
            sigma_g=run_config.noise.sigma_g * gyro_scale,
            sigma_a=run_config.noise.sigma_a * accel_scale,
        )
        detector = StanceDetector(run_config.detector,
                                  float(np.linalg.norm(run_config.noise.gravity)))
        runner = run_filter if filter_name == "inekf" else run_ekf
        points = runner(samples, detuned, detector, run_config.init_window,
                        cov0_diag=run_config.cov0_diag(),
                        reorth_interval=run_config.reorth_interval)
        report = compute_report(points, gt.to_points())
        return (report.ate_rmse, report.final_loop_error,
                report.loop_error_pct_path, report.yaw_drift, None)
    except Exception as exc:  # per-run failures become flagged rows
        return (None, None, None, None, f"{type(exc).__name__}: {exc}")


def run_sweep(spec: SweepSpec, run_config: RunConfig, rate_hz: float = 100.0,
              jobs: int = 1) -> list[SweepRow]:
    """Execute every (filter, factor, repetition) cell of a sweep.

    Identical sigma scalings are computed once and fanned out to all rows
    that share them (a factor of 1 is the same run regardless of target).
    Rows come back sorted by (filter, factor, seed).
    """
    cells = [
        (name, factor, spec.base_seed + rep)
        for name in spec.filters
        for factor in spec.scale_factors
        for rep in range(spec.repetitions)
    ]
    work_keys = []
    for name, factor, seed in cells:
        gyro_scale, accel_scale = _scale_pair(spec.target, factor)
        key = (name, gyro_scale, accel_scale, seed)
        if key not in work_keys:
            work_keys.append(key)
    work_args = [
        (name, gs, as_, seed, spec.scenario, run_config, rate_hz, spec.turn_on_bias)
        for name, gs, as_, seed in work_keys
    ]
    if jobs > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            results = list(pool.map(_run_cell, work_args))
    else:
        results = [_run_cell(args) for args in work_args]
    by_key = dict(zip(work_keys, results))

    rows = []
    for name, factor, seed in cells:
        key = (name, *_scale_pair(spec.target, factor), seed)
        ate, loop_err, loop_pct, yaw, error = by_key[key]
        rows.append(SweepRow(name, spec.target, factor, seed,
                             ate, loop_err, loop_pct, yaw, error))
    rows.sort(key=lambda r: (r.filter, r.factor, r.seed))
    return rows


def write_sweep_table(rows, path) -> None:
    """Write the sweep CSV; failed runs carry 'failed' in their metric cells."""
    lines = [TABLE_HEADER]
    for r in rows:
        if r.failed:
            metric_cells = ["failed"] * 4
        else:
            metric_cells = [format(x, ".12g") for x in
                            (r.ate_rmse, r.loop_err, r.loop_pct, r.yaw_drift)]
        lines.append(",".join([r.filter, r.target, format(r.factor, ".12g"),
                               str(r.seed)] + metric_cells))
    from pathlib import Path

    Path(path).write_text("\n".join(lines) + "\n", encoding="utf-8")


def load_sweep_spec(path) -> SweepSpec:
    """Parse a sweep spec file: a single [sweep] section in config format.

    Keys: factors (comma list), target, scenario (preset name), filters
    (comma list), repetitions, seed.
    """
    sections = _read_kv_sections(path)
    unknown_sections = [s for s in sections if s != "sweep"]
    if unknown_sections:
        raise ConfigError(f"{path}: unknown section [{unknown_sections[0]}]")
    entries = sections.get("sweep", {})
    known = ("factors", "target", "scenario", "filters", "repetitions", "seed",
             "turn_on_gyro_bias", "turn_on_accel_bias")
    for key, (_, line_no) in entries.items():
        if key not in known:
            raise ConfigError(f"{path}:{line_no}: unknown key {key!r} in [sweep]")

    def require(key):
        if key not in entries:
            raise ConfigError(f"{path}: [sweep] is missing required key {key!r}")
        return entries[key]

    factors_raw, factors_line = require("factors")
    factors = tuple(_as_float("factors", cell.strip(), path, factors_line)
                    for cell in factors_raw.split(","))
    target = require("target")[0]
    scenario_name = require("scenario")[0]
    if scenario_name not in GAIT_PRESETS:
        raise ConfigError(
            f"{path}: unknown scenario {scenario_name!r} "
            f"(valid: {', '.join(sorted(GAIT_PRESETS))})"
        )
    filters: tuple = VALID_FILTERS
    if "filters" in entries:
        filters = tuple(cell.strip() for cell in entries["filters"][0].split(","))
    repetitions = 20
    if "repetitions" in entries:
        value, line_no = entries["repetitions"]
        repetitions = _as_int("repetitions", value, path, line_no)
    base_seed = 0
    if "seed" in entries:
        value, line_no = entries["seed"]
        base_seed = _as_int("seed", value, path, line_no)
    bias = [0.0, 0.0]
    for i, key in enumerate(("turn_on_gyro_bias", "turn_on_accel_bias")):
        if key in entries:
            value, line_no = entries[key]
            bias[i] = _as_float(key, value, path, line_no)
    try:
        return SweepSpec(scale_factors=factors, target=target,
                         scenario=GAIT_PRESETS[scenario_name], filters=filters,
                         repetitions=repetitions, base_seed=base_seed,
                         turn_on_bias=tuple(bias))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from None
