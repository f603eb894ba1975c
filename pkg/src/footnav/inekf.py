"""Right-invariant extended Kalman filter for foot-mounted dead reckoning.

State: orientation/velocity/position on SE2(3) plus gyro and accel biases,
with a 15x15 covariance over the error coordinates
[attitude, velocity, position, gyro bias, accel bias].  Prediction is
IMU-driven strapdown integration; the only measurement is the stance-phase
zero-velocity pseudo-measurement, applied in right-invariant form.

Filter state is a plain :class:`~footnav.types.FilterBelief` value;
:func:`predict` and :func:`zupt_update` are pure functions, and
:func:`run_filter` drives the compiled per-sample loop over a whole log.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from . import _kernels as _k
from .detector import StanceDetector
from .lie import SE23
from .types import (
    FilterBelief,
    ImuBias,
    NoiseConfig,
    TrajectoryPoint,
    default_cov0_diag,
    validate_log,
)

# Zero-velocity pseudo-measurement constants.  B selects the velocity column
# of the inverse state matrix; H picks the velocity error block; PI truncates
# a 5-vector innovation to its leading 3 components.
B_ZUPT = np.array([0.0, 0.0, 0.0, -1.0, 0.0])
H_ZUPT = np.zeros((3, 15))
H_ZUPT[:, 3:6] = np.eye(3)
PI_ZUPT = np.hstack([np.eye(3), np.zeros((3, 2))])

#: Innovation covariances with a larger eigenvalue ratio are treated as
#: numerically singular and the update is skipped.
COND_LIMIT = 1e12

#: Re-orthonormalize the attitude estimate every this many prediction steps.
REORTH_INTERVAL = 1000


class NotStaticError(ValueError):
    """The initialization window does not look like a static hold."""


class FilterNumericError(RuntimeError):
    """The filter state became non-finite."""


class DegenerateUpdateWarning(RuntimeWarning):
    """A zero-velocity update was skipped due to a singular innovation covariance."""


@dataclass(frozen=True)
class ProcessMatrices:
    """Linearized prediction-step matrices (all 15x15)."""

    A: np.ndarray        # continuous-time error dynamics
    Phi: np.ndarray      # state transition exp(A dt)
    Q: np.ndarray        # discrete process noise covariance
    AdExt: np.ndarray    # extended adjoint: blockdiag(Ad_X, I6)


def _expm(M: np.ndarray, terms: int = 10) -> np.ndarray:
    """Matrix exponential of a 15x15 matrix (scaling-and-squaring series)."""
    return _k.expm15(np.ascontiguousarray(M, dtype=float), terms)


def _sig15(cfg: NoiseConfig) -> np.ndarray:
    return np.array([cfg.sigma_g] * 3 + [cfg.sigma_a] * 3 + [0.0] * 3
                    + [cfg.sigma_bg] * 3 + [cfg.sigma_ba] * 3)


def _sig12(cfg: NoiseConfig) -> np.ndarray:
    return np.array([cfg.sigma_g] * 3 + [cfg.sigma_a] * 3
                    + [cfg.sigma_bg] * 3 + [cfg.sigma_ba] * 3)


def init_from_static(samples, gravity: np.ndarray) -> np.ndarray:
    """Roll/pitch attitude from averaged specific force over a static window.

    Yaw is fixed to zero (unobservable from the accelerometer), so the
    navigation frame is anchored to the initial heading.

    Raises
    ------
    NotStaticError
        If the averaged specific-force magnitude is more than 20% away from
        |gravity|, i.e. the device was moving during the window.
    """
    if len(samples) < 1:
        raise ValueError("attitude initialization needs at least one sample")
    g_mag = float(np.linalg.norm(np.asarray(gravity, dtype=float)))
    a_mean = np.mean([s.accel for s in samples], axis=0)
    a_mag = float(np.linalg.norm(a_mean))
    if abs(a_mag - g_mag) > 0.2 * g_mag:
        raise NotStaticError(
            f"mean specific force {a_mag:.3f} m/s^2 is {abs(a_mag - g_mag) / g_mag:.0%} "
            f"away from |g| = {g_mag:.3f}; device not static during init window"
        )
    roll = math.atan2(a_mean[1], a_mean[2])
    pitch = -math.asin(float(np.clip(a_mean[0] / g_mag, -1.0, 1.0)))
    cr, sr = math.cos(roll), math.sin(roll)
    cp, sp = math.cos(pitch), math.sin(pitch)
    return np.array([
        [cp, sr * sp, cr * sp],
        [0.0, cr, -sr],
        [-sp, sr * cp, cr * cp],
    ])


def build_A(belief: FilterBelief, gravity: np.ndarray) -> np.ndarray:
    """Continuous-time error dynamics matrix at the current belief.

    The top-left 9x9 block depends only on gravity, which is what makes the
    invariant error propagation estimate-independent; the bias columns carry
    the current estimate.
    """
    nav = belief.nav
    return _k.build_a_inekf(nav.rot, nav.vel, nav.pos,
                            np.asarray(gravity, dtype=float).reshape(3))


def build_process_matrices(belief: FilterBelief, dt: float,
                           cfg: NoiseConfig) -> ProcessMatrices:
    """Assemble the prediction-step matrices at the current belief."""
    nav = belief.nav
    A = build_A(belief, cfg.gravity)
    return ProcessMatrices(
        A=A,
        Phi=_expm(A * dt),
        Q=np.diag((_sig15(cfg) * dt) ** 2),
        AdExt=_k.adjoint_ext(nav.rot, nav.vel, nav.pos),
    )


def predict(belief: FilterBelief, sample, dt: float, cfg: NoiseConfig) -> FilterBelief:
    """IMU-driven prediction of the full belief over one interval ``dt``.

    The mean follows the discrete strapdown equations (biases held
    constant); the covariance follows the invariant Riccati step with the
    process noise mapped through the extended adjoint.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    nav, bias = belief.nav, belief.bias
    R2, v2, p2, Sig2 = _k.predict_inekf(
        nav.rot, nav.vel, nav.pos, bias.gyro_bias, bias.accel_bias,
        belief.cov, sample.gyro, sample.accel, dt, _sig15(cfg), cfg.gravity,
    )
    if not (np.isfinite(v2).all() and np.isfinite(p2).all()):
        raise FilterNumericError(f"non-finite state after predict at t={belief.t + dt}")
    return FilterBelief(SE23(R2, v2, p2), bias, Sig2, belief.t + dt)


def zupt_update(belief: FilterBelief, cfg: NoiseConfig) -> FilterBelief:
    """Right-invariant zero-velocity update (call only while in stance).

    The navigation state is corrected multiplicatively on the group, the
    biases additively; the covariance uses the optimal-gain form
    ``(I - K H) Sigma``.  If the innovation covariance is numerically
    singular the update is skipped with :class:`DegenerateUpdateWarning`
    and the belief is returned unchanged.
    """
    nav, bias = belief.nav, belief.bias
    ok, R2, v2, p2, bg2, ba2, Sig2 = _k.zupt_inekf(
        nav.rot, nav.vel, nav.pos, bias.gyro_bias, bias.accel_bias,
        belief.cov, cfg.slip_cov, COND_LIMIT,
    )
    if not ok:
        warnings.warn(
            "zero-velocity update skipped: innovation covariance is "
            "numerically singular",
            DegenerateUpdateWarning,
            stacklevel=2,
        )
        return belief
    return FilterBelief(SE23(R2, v2, p2), ImuBias(bg2, ba2), Sig2, belief.t)


@dataclass(frozen=True)
class FilterRun:
    """Full output of a filter pass over a log."""

    points: list
    final: FilterBelief
    bias_history: np.ndarray   # (N, 6): gyro bias then accel bias
    stance: np.ndarray         # (N,) bool


def _run_loop(samples, cfg, detector, init_window, cov0_diag, reorth_interval,
              use_ekf):
    validate_log(samples)
    if init_window < 1:
        raise ValueError("init_window must be at least 1")
    if len(samples) <= init_window:
        raise ValueError(
            f"log has {len(samples)} samples, not enough beyond the "
            f"init window of {init_window}"
        )
    diag = default_cov0_diag() if cov0_diag is None else np.asarray(cov0_diag, float)
    if diag.shape != (15,) or (diag < 0.0).any():
        raise ValueError("cov0_diag must be 15 non-negative variances")

    t = np.array([s.t for s in samples])
    gyro = np.stack([s.gyro for s in samples])
    accel = np.stack([s.accel for s in samples])
    # The detector is causal and filter-independent, so its flags can be
    # computed up front for the whole log.
    if detector is not None:
        detector.reset()
        stance = np.array([detector.update(s) for s in samples], dtype=bool)
    else:
        stance = np.zeros(t.size, dtype=bool)

    R0 = init_from_static(samples[:init_window], cfg.gravity)
    rot, vel, pos, bias, Sig, skipped, bad_index = _k.filter_loop(
        t, gyro, accel, stance, init_window, R0, np.diag(diag),
        _sig15(cfg), _sig12(cfg), cfg.slip_cov, cfg.gravity,
        reorth_interval, COND_LIMIT, use_ekf,
    )
    if bad_index >= 0:
        raise FilterNumericError(f"non-finite filter state at t={t[bad_index]}")
    if skipped:
        warnings.warn(
            f"{skipped} zero-velocity update(s) skipped: innovation "
            "covariance numerically singular",
            DegenerateUpdateWarning,
            stacklevel=3,
        )
    points = [
        TrajectoryPoint(t[init_window + i], pos[i], vel[i], rot[i],
                        bool(stance[init_window + i]))
        for i in range(t.size - init_window)
    ]
    final = FilterBelief(SE23(rot[-1], vel[-1], pos[-1]),
                         ImuBias(bias[-1, :3], bias[-1, 3:]), Sig, float(t[-1]))
    return FilterRun(points=points, final=final, bias_history=bias,
                     stance=stance[init_window:])


def run_filter_full(samples, cfg: NoiseConfig, detector: StanceDetector | None,
                    init_window: int = 20, *, cov0_diag=None,
                    reorth_interval: int = REORTH_INTERVAL) -> FilterRun:
    """Like :func:`run_filter`, also returning the final belief and bias history."""
    return _run_loop(samples, cfg, detector, init_window, cov0_diag,
                     reorth_interval, use_ekf=False)


def run_filter(samples, cfg: NoiseConfig, detector: StanceDetector | None,
               init_window: int = 20, *, cov0_diag=None,
               reorth_interval: int = REORTH_INTERVAL) -> list:
    """Run the invariant filter over a validated IMU log.

    The first ``init_window`` samples initialize roll/pitch from the static
    hold; every later sample triggers a prediction, plus a zero-velocity
    update whenever ``detector`` reports stance (pass ``None`` to disable
    updates entirely).  Returns one :class:`TrajectoryPoint` per processed
    sample.
    """
    return run_filter_full(samples, cfg, detector, init_window,
                           cov0_diag=cov0_diag,
                           reorth_interval=reorth_interval).points
