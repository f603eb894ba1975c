"""Synthetic gait simulator: analytic trajectories and their ideal IMU signals.

Trajectories alternate stance segments (the foot planted, exactly zero
velocity) with smooth polynomial swing segments, so position, velocity and
acceleration
are continuous and the zero-velocity assumption holds exactly on simulated
data.  :func:`inverse_imu` turns a trajectory into the body-frame gyro and
specific-force signals an ideal IMU would have measured, and
:func:`corrupt` applies the white-noise-plus-bias-random-walk sensor model.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .types import ImuBias, ImuSample, NoiseConfig, TrajectoryPoint


@dataclass(frozen=True)
class GaitSpec:
    """Parameters of a synthetic walk.

    ``heading_profile`` gives the yaw (rad) of each step's displacement;
    yaw is interpolated toward it during the step's swing phase.  A spec with
    ``n_steps == 0`` produces a static hold of ``step_duration`` seconds.
    """

    step_length: float = 0.7        # m
    step_duration: float = 0.7      # s per step cycle
    stance_fraction: float = 0.6    # fraction of the cycle spent planted
    n_steps: int = 20
    heading_profile: tuple = field(default_factory=tuple)
    step_height: float = 0.0        # vertical drop per step (stairs), m
    rng_seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "heading_profile",
                           tuple(float(h) for h in self.heading_profile))
        if self.step_length <= 0.0 or self.step_duration <= 0.0:
            raise ValueError("step_length and step_duration must be positive")
        if not 0.1 < self.stance_fraction < 0.9:
            raise ValueError("stance_fraction must lie in (0.1, 0.9)")
        if self.n_steps < 0:
            raise ValueError("n_steps must be non-negative")
        if self.step_height < 0.0:
            raise ValueError("step_height must be non-negative")
        if len(self.heading_profile) != self.n_steps:
            raise ValueError(
                f"heading_profile has {len(self.heading_profile)} entries "
                f"for {self.n_steps} steps"
            )


@dataclass(frozen=True)
class GroundTruth:
    """Sampled true trajectory, with analytic rates when generated here.

    ``ang_vel`` (body frame) and ``acc`` (world-frame dv/dt) are optional;
    they are populated by :func:`generate_gait` and let :func:`inverse_imu`
    skip finite differencing.
    """

    t: np.ndarray          # (N,)
    rot: np.ndarray        # (N, 3, 3)
    vel: np.ndarray        # (N, 3)
    pos: np.ndarray        # (N, 3)
    stance: np.ndarray     # (N,) bool
    ang_vel: np.ndarray | None = None   # (N, 3)
    acc: np.ndarray | None = None       # (N, 3)

    def to_points(self) -> list[TrajectoryPoint]:
        return [
            TrajectoryPoint(self.t[k], self.pos[k], self.vel[k],
                            self.rot[k], bool(self.stance[k]))
            for k in range(self.t.size)
        ]


def _swing_blend(sigma: np.ndarray) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """Septic minimum-snap profile and its first two derivatives w.r.t. sigma.

    Velocity, acceleration AND jerk vanish at both ends.  Zero boundary jerk
    is required: a jerk discontinuity at the stance/swing boundary leaves the
    discrete strapdown integration with an O(dt^2) position bias per step
    (boundary term of the quadrature), which would swamp the round-trip
    fidelity budget.
    """
    s = sigma**4 * (35.0 - 84.0 * sigma + 70.0 * sigma**2 - 20.0 * sigma**3)
    ds = 140.0 * sigma**3 * (1.0 - sigma) ** 3
    dds = 420.0 * sigma**2 * (1.0 - sigma) ** 2 * (1.0 - 2.0 * sigma)
    return s, ds, dds


def _yaw_matrices(yaw: np.ndarray) -> np.ndarray:
    c, s = np.cos(yaw), np.sin(yaw)
    R = np.zeros((yaw.size, 3, 3))
    R[:, 0, 0] = c
    R[:, 0, 1] = -s
    R[:, 1, 0] = s
    R[:, 1, 1] = c
    R[:, 2, 2] = 1.0
    return R


def generate_gait(spec: GaitSpec, rate_hz: float) -> GroundTruth:
    """Sample an analytic gait trajectory at ``rate_hz``.

    Each step cycle is stance-then-swing; a trailing stance segment closes
    the walk so it both starts and ends planted.  Pitch and roll stay zero;
    yaw follows the heading profile during swing with the same smooth blend
    as the translation (sharing the profile makes the leading yaw/accel
    coupling integrate to zero over each swing).
    """
    if rate_hz < 20.0:
        raise ValueError("sample rate must be at least 20 Hz")
    n = spec.n_steps
    T = spec.step_duration
    t_stance = spec.stance_fraction * T
    t_swing = T - t_stance

    duration = n * T + t_stance if n > 0 else T
    N = int(round(duration * rate_hz)) + 1
    t = np.arange(N) / rate_hz

    # Footfall positions and the yaw held at the start of each step.
    footfalls = np.zeros((n + 1, 3))
    for i, psi in enumerate(spec.heading_profile):
        footfalls[i + 1] = footfalls[i] + [
            spec.step_length * math.cos(psi),
            spec.step_length * math.sin(psi),
            -spec.step_height,
        ]
    yaw_before = np.zeros(n)
    if n > 0:
        yaw_before[0] = spec.heading_profile[0]
        yaw_before[1:] = spec.heading_profile[:-1]

    pos = np.zeros((N, 3))
    vel = np.zeros((N, 3))
    acc = np.zeros((N, 3))
    yaw = np.zeros(N)
    yaw_rate = np.zeros(N)
    stance = np.ones(N, dtype=bool)
    if n > 0:
        yaw[:] = spec.heading_profile[-1]  # trailing region; overwritten below
        pos[:] = footfalls[-1]

    for i in range(n):
        t0 = i * T
        in_stance = (t >= t0) & (t < t0 + t_stance)
        pos[in_stance] = footfalls[i]
        yaw[in_stance] = yaw_before[i]

        in_swing = (t >= t0 + t_stance) & (t < t0 + T)
        sigma = (t[in_swing] - t0 - t_stance) / t_swing
        s, ds, dds = _swing_blend(sigma)
        delta = footfalls[i + 1] - footfalls[i]
        pos[in_swing] = footfalls[i] + s[:, None] * delta
        vel[in_swing] = (ds / t_swing)[:, None] * delta
        acc[in_swing] = (dds / t_swing**2)[:, None] * delta
        dpsi = spec.heading_profile[i] - yaw_before[i]
        yaw[in_swing] = yaw_before[i] + s * dpsi
        yaw_rate[in_swing] = ds / t_swing * dpsi
        stance[in_swing] = False

    ang_vel = np.zeros((N, 3))
    ang_vel[:, 2] = yaw_rate
    return GroundTruth(t=t, rot=_yaw_matrices(yaw), vel=vel, pos=pos,
                       stance=stance, ang_vel=ang_vel, acc=acc)


def inverse_imu(gt: GroundTruth, gravity: np.ndarray) -> list[ImuSample]:
    """Ideal body-frame IMU signals for a trajectory.

    Inverts the strapdown kinematics: gyro = vee(R^T dR/dt) and specific
    force = R^T (dv/dt - g).  Uses the trajectory's analytic rates when
    present, otherwise central differences (one-sided at the endpoints).
    """
    g = np.asarray(gravity, dtype=float).reshape(3)
    if gt.ang_vel is not None and gt.acc is not None:
        omega = gt.ang_vel
        vdot = gt.acc
    else:
        vdot = np.gradient(gt.vel, gt.t, axis=0)
        rdot = np.gradient(gt.rot, gt.t, axis=0)
        W = np.einsum("nji,njk->nik", gt.rot, rdot)
        W = (W - np.transpose(W, (0, 2, 1))) / 2.0
        omega = np.stack([W[:, 2, 1], W[:, 0, 2], W[:, 1, 0]], axis=1)
    accel = np.einsum("nji,nj->ni", gt.rot, vdot - g)
    return [ImuSample(gt.t[k], omega[k], accel[k]) for k in range(gt.t.size)]


def corrupt(samples, cfg: NoiseConfig, bias0: ImuBias, seed: int) -> list[ImuSample]:
    """Apply white measurement noise and bias random walks to ideal samples.

    Measurement noise is drawn per sample with per-axis std ``sigma_g`` /
    ``sigma_a``; biases start at ``bias0`` and random-walk with per-step std
    ``sigma_b* * sqrt(dt)``.  Deterministic for a given seed (the draw order
    is fixed: gyro noise, accel noise, gyro bias steps, accel bias steps).
    """
    rng = np.random.default_rng(seed)
    t = np.array([s.t for s in samples], dtype=float)
    N = t.size
    w_g = rng.standard_normal((N, 3)) * cfg.sigma_g
    w_a = rng.standard_normal((N, 3)) * cfg.sigma_a
    sqrt_dt = np.sqrt(np.diff(t))[:, None]
    b_g = bias0.gyro_bias + np.vstack(
        [np.zeros(3), np.cumsum(rng.standard_normal((N - 1, 3)) * cfg.sigma_bg * sqrt_dt, axis=0)]
    )
    b_a = bias0.accel_bias + np.vstack(
        [np.zeros(3), np.cumsum(rng.standard_normal((N - 1, 3)) * cfg.sigma_ba * sqrt_dt, axis=0)]
    )
    return [
        ImuSample(s.t, s.gyro + b_g[k] + w_g[k], s.accel + b_a[k] + w_a[k])
        for k, s in enumerate(samples)
    ]


def dead_reckon(samples, rot0: np.ndarray, gravity: np.ndarray,
                vel0: np.ndarray | None = None,
                pos0: np.ndarray | None = None) -> list[TrajectoryPoint]:
    """Open-loop strapdown integration of an IMU log (zero bias, no updates).

    Shares the filters' discrete propagation step, so on noise-free
    simulator output it measures pure integrator truncation error.
    """
    from ._kernels import mean_step

    g = np.asarray(gravity, dtype=float).reshape(3)
    R = np.asarray(rot0, dtype=float).copy()
    v = np.zeros(3) if vel0 is None else np.asarray(vel0, dtype=float).copy()
    p = np.zeros(3) if pos0 is None else np.asarray(pos0, dtype=float).copy()
    zero = np.zeros(3)
    out = [TrajectoryPoint(samples[0].t, p, v, R, False)]
    for k in range(1, len(samples)):
        s = samples[k]
        dt = s.t - samples[k - 1].t
        R, v, p = mean_step(R, v, p, zero, zero, s.gyro, s.accel, dt, g)
        out.append(TrajectoryPoint(s.t, p, v, R, False))
    return out


def _loop_headings(steps_per_side: int) -> tuple:
    """Closed-loop heading profile: four sides with the turn spread over steps.

    Each side repeats the previous pattern rotated by 90 degrees, so the four
    side displacement sums cancel exactly (sum of the four rotations of any
    fixed vector is zero) and the loop closes by construction.  The last two
    steps of a side split the turn into thirds, which keeps the foot's yaw
    rate during a turning swing at a humanlike level.
    """
    side = [0.0] * (steps_per_side - 2) + [math.pi / 6, math.pi / 3]
    return tuple(h + quarter * math.pi / 2 for quarter in range(4) for h in side)


#: Canonical desk-scale scenarios used by the CLI and the test suite.
GAIT_PRESETS: dict[str, GaitSpec] = {
    "static": GaitSpec(step_duration=60.0, n_steps=0, heading_profile=()),
    "line": GaitSpec(n_steps=20, heading_profile=(0.0,) * 20),
    "square_loop": GaitSpec(n_steps=40, heading_profile=_loop_headings(10)),
    "stairs": GaitSpec(step_length=0.3, step_duration=0.8, n_steps=12,
                       heading_profile=(0.0,) * 12, step_height=0.17),
    # ~3 Hz step rate, the high-frequency end of bipedal gaits.  The phase
    # boundaries stay on 100 Hz sample instants (17 + 17 samples per cycle).
    "robot_gait": GaitSpec(step_length=0.2, step_duration=0.34,
                           stance_fraction=0.5, n_steps=60,
                           heading_profile=(0.0,) * 60),
}
