"""Conventional error-state EKF baseline with the same state and measurement.

Identical state content and mean propagation as the invariant filter; the
difference is the error parameterization.  Errors live in Euclidean
coordinates (multiplicative body-frame attitude error ``dtheta``, additive
velocity/position/bias errors) and the Jacobian is linearized about the
current estimate, so covariance propagation depends on the estimated
attitude and on the measured signals.  The zero-velocity residual is the
plain world-frame ``0 - v_hat`` and the slip covariance enters the
innovation covariance unrotated.
"""

from __future__ import annotations

import warnings

import numpy as np

from . import _kernels as _k
from .detector import StanceDetector
from .inekf import (
    COND_LIMIT,
    REORTH_INTERVAL,
    DegenerateUpdateWarning,
    FilterNumericError,
    FilterRun,
    _run_loop,
    _sig12,
)
from .lie import SE23
from .types import FilterBelief, ImuBias, NoiseConfig

# Same fields as FilterBelief; the covariance blocks are body-frame error
# coordinates [dtheta, dv, dp, dbg, dba] instead of invariant ones.
EkfBelief = FilterBelief


def ekf_predict(belief: EkfBelief, sample, dt: float, cfg: NoiseConfig) -> EkfBelief:
    """One EKF prediction step.

    Mean propagation is the exact same strapdown step as the invariant
    filter; the covariance uses ``F = exp(F_c dt)`` with the
    estimate-dependent Jacobian and ``Q_d = G diag(sigma^2) G^T dt``.
    """
    if not dt > 0.0:
        raise ValueError("dt must be positive")
    nav, bias = belief.nav, belief.bias
    R2, v2, p2, Sig2 = _k.predict_ekf(
        nav.rot, nav.vel, nav.pos, bias.gyro_bias, bias.accel_bias,
        belief.cov, sample.gyro, sample.accel, dt, _sig12(cfg), cfg.gravity,
    )
    if not (np.isfinite(v2).all() and np.isfinite(p2).all()):
        raise FilterNumericError(f"non-finite state after predict at t={belief.t + dt}")
    return EkfBelief(SE23(R2, v2, p2), bias, Sig2, belief.t + dt)


def ekf_zupt_update(belief: EkfBelief, cfg: NoiseConfig) -> EkfBelief:
    """Zero-velocity update with residual ``0 - v_hat`` in Euclidean coordinates."""
    nav, bias = belief.nav, belief.bias
    ok, R2, v2, p2, bg2, ba2, Sig2 = _k.zupt_ekf(
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
    return EkfBelief(SE23(R2, v2, p2), ImuBias(bg2, ba2), Sig2, belief.t)


def run_ekf_full(samples, cfg: NoiseConfig, detector: StanceDetector | None,
                 init_window: int = 20, *, cov0_diag=None,
                 reorth_interval: int = REORTH_INTERVAL) -> FilterRun:
    """Like :func:`run_ekf`, also returning the final belief and bias history."""
    return _run_loop(samples, cfg, detector, init_window, cov0_diag,
                     reorth_interval, use_ekf=True)


def run_ekf(samples, cfg: NoiseConfig, detector: StanceDetector | None,
            init_window: int = 20, *, cov0_diag=None,
            reorth_interval: int = REORTH_INTERVAL) -> list:
    """Run the error-state EKF over a log; same contract as ``run_filter``."""
    return run_ekf_full(samples, cfg, detector, init_window,
                        cov0_diag=cov0_diag,
                        reorth_interval=reorth_interval).points
