"""Compiled numeric cores shared by both filters.

Everything here operates on plain float64 arrays (no package types) so the
whole per-sample loop can run under numba.  The public modules wrap these
kernels; there is exactly one implementation of each formula, and the mean
propagation step is shared by the invariant and error-state filters.
"""

from __future__ import annotations

import math

import numpy as np
from numba import njit

# Below this rotation angle (rad) series expansions replace the closed forms;
# must match footnav.lie.SMALL_ANGLE.
_SMALL_ANGLE_SQ = 1e-16


@njit(cache=True)
def skew3(w):
    K = np.empty((3, 3))
    K[0, 0] = 0.0
    K[0, 1] = -w[2]
    K[0, 2] = w[1]
    K[1, 0] = w[2]
    K[1, 1] = 0.0
    K[1, 2] = -w[0]
    K[2, 0] = -w[1]
    K[2, 1] = w[0]
    K[2, 2] = 0.0
    return K


@njit(cache=True)
def rodrigues(wdt):
    """SO(3) exponential of a rotation vector; returns (R, K, K @ K, |wdt|^2)."""
    K = skew3(wdt)
    K2 = K @ K
    th2 = wdt[0] * wdt[0] + wdt[1] * wdt[1] + wdt[2] * wdt[2]
    if th2 < _SMALL_ANGLE_SQ:
        R = np.eye(3) + K + 0.5 * K2
    else:
        th = math.sqrt(th2)
        a = math.sin(th) / th
        b = (1.0 - math.cos(th)) / th2
        R = np.eye(3) + a * K + b * K2
    return R, K, K2, th2


@njit(cache=True)
def left_jacobian(K, K2, th2):
    """SO(3) left Jacobian from precomputed skew products."""
    if th2 < _SMALL_ANGLE_SQ:
        return np.eye(3) + 0.5 * K + K2 / 6.0
    th = math.sqrt(th2)
    a = (1.0 - math.cos(th)) / th2
    b = (th - math.sin(th)) / (th2 * th)
    return np.eye(3) + a * K + b * K2


@njit(cache=True)
def mean_step(R, v, p, bg, ba, gyro, accel, dt, g):
    """One forward-Euler strapdown step (the only mean-propagation path)."""
    acc_world = R @ (accel - ba)
    dR, _, _, _ = rodrigues((gyro - bg) * dt)
    R_next = R @ dR
    v_next = v + acc_world * dt + g * dt
    p_next = p + v * dt + 0.5 * dt * dt * (acc_world + g)
    return R_next, v_next, p_next


@njit(cache=True)
def expm15(M, terms):
    """Matrix exponential by scaling-and-squaring over a truncated series.

    Stops early once a term vanishes exactly, so nilpotent inputs are exact.
    """
    norm = np.abs(M).max()
    s = 0
    while norm > 0.5:
        norm /= 2.0
        s += 1
    X = M / (2.0**s)
    out = np.eye(15)
    term = np.eye(15)
    for k in range(1, terms + 1):
        term = (term @ X) / k
        if np.abs(term).max() == 0.0:
            break
        out = out + term
    for _ in range(s):
        out = out @ out
    return out


@njit(cache=True)
def build_a_inekf(R, v, p, g):
    """Invariant error dynamics matrix.

    The 9x9 navigation block depends only on gravity; the bias columns carry
    the estimate.  An accel bias error perturbs the velocity error rate only
    (it must not appear in the position row, where it would manufacture
    position/bias correlations that let the position-blind zero-velocity
    update drag the position estimate).
    """
    A = np.zeros((15, 15))
    A[3:6, 0:3] = skew3(g)
    for i in range(3):
        A[6 + i, 3 + i] = 1.0
    A[0:3, 9:12] = -R
    A[3:6, 9:12] = -(skew3(v) @ R)
    A[6:9, 9:12] = -(skew3(p) @ R)
    A[3:6, 12:15] = -R
    return A


@njit(cache=True)
def adjoint_ext(R, v, p):
    Ad = np.eye(15)
    Ad[0:3, 0:3] = R
    Ad[3:6, 3:6] = R
    Ad[6:9, 6:9] = R
    Ad[3:6, 0:3] = skew3(v) @ R
    Ad[6:9, 0:3] = skew3(p) @ R
    return Ad


@njit(cache=True)
def predict_inekf(R, v, p, bg, ba, Sig, gyro, accel, dt, sig15, g):
    M = build_a_inekf(R, v, p, g) * dt
    # A is nilpotent (A^4 = 0): the cubic polynomial IS exp(A dt), exactly.
    M2 = M @ M
    Phi = np.eye(15) + M + 0.5 * M2 + (M2 @ M) / 6.0
    Ad = adjoint_ext(R, v, p)
    q = (sig15 * dt) ** 2
    # Phi (Sig + Ad Q Ad^T dt) Phi^T; Q diagonal, so Ad Q Ad^T row-scales.
    mid = Sig + ((Ad * q) @ Ad.T) * dt
    Sig_next = Phi @ mid @ Phi.T
    Sig_next = (Sig_next + Sig_next.T) / 2.0
    R2, v2, p2 = mean_step(R, v, p, bg, ba, gyro, accel, dt, g)
    return R2, v2, p2, Sig_next


@njit(cache=True)
def zupt_inekf(R, v, p, bg, ba, Sig, slip_cov, cond_limit):
    """Right-invariant zero-velocity update; ok=False when S is degenerate."""
    S = Sig[3:6, 3:6] + R @ slip_cov @ R.T
    eig = np.linalg.eigvalsh(np.ascontiguousarray(S))
    if eig[0] <= 0.0 or eig[2] / eig[0] > cond_limit:
        return False, R, v, p, bg, ba, Sig
    # The innovation X_hat (z - z_hat) of the v = 0 pseudo-measurement
    # reduces to -v_hat in its leading three components.
    piv = -v
    PHt = np.ascontiguousarray(Sig[:, 3:6])
    K = np.linalg.solve(S, PHt.T).T
    dx = K @ piv
    dR, Kx, Kx2, th2 = rodrigues(dx[:3])
    J = left_jacobian(Kx, Kx2, th2)
    dv = J @ dx[3:6]
    dp = J @ dx[6:9]
    # Left-multiplied group correction: it acts in the world frame.
    R2 = dR @ R
    v2 = dR @ v + dv
    p2 = dR @ p + dp
    Sig2 = Sig - K @ np.ascontiguousarray(Sig[3:6, :])
    Sig2 = (Sig2 + Sig2.T) / 2.0
    return True, R2, v2, p2, bg + dx[9:12], ba + dx[12:15], Sig2


@njit(cache=True)
def predict_ekf(R, v, p, bg, ba, Sig, gyro, accel, dt, sig12, g):
    """EKF covariance prediction: estimate-dependent Jacobian, same mean step."""
    w = gyro - bg
    a = accel - ba
    Fc = np.zeros((15, 15))
    Fc[0:3, 0:3] = -skew3(w)
    for i in range(3):
        Fc[i, 9 + i] = -1.0
        Fc[6 + i, 3 + i] = 1.0
    Fc[3:6, 0:3] = -(R @ skew3(a))
    Fc[3:6, 12:15] = -R
    F = expm15(Fc * dt, 10)
    # Q_d = G diag(sig^2) G^T dt with G carrying [-I, -R] noise input blocks.
    G = np.zeros((15, 12))
    for i in range(3):
        G[i, i] = -1.0
        G[9 + i, 6 + i] = 1.0
        G[12 + i, 9 + i] = 1.0
    G[3:6, 3:6] = -R
    Qd = ((G * sig12**2) @ G.T) * dt
    Sig_next = F @ Sig @ F.T + Qd
    Sig_next = (Sig_next + Sig_next.T) / 2.0
    R2, v2, p2 = mean_step(R, v, p, bg, ba, gyro, accel, dt, g)
    return R2, v2, p2, Sig_next


@njit(cache=True)
def zupt_ekf(R, v, p, bg, ba, Sig, slip_cov, cond_limit):
    """Euclidean zero-velocity update: residual 0 - v_hat, additive correction."""
    S = Sig[3:6, 3:6] + slip_cov
    eig = np.linalg.eigvalsh(np.ascontiguousarray(S))
    if eig[0] <= 0.0 or eig[2] / eig[0] > cond_limit:
        return False, R, v, p, bg, ba, Sig
    PHt = np.ascontiguousarray(Sig[:, 3:6])
    K = np.linalg.solve(S, PHt.T).T
    dx = K @ (-v)
    dR, _, _, _ = rodrigues(dx[:3])
    R2 = R @ dR  # body-frame multiplicative attitude correction
    Sig2 = Sig - K @ np.ascontiguousarray(Sig[3:6, :])
    Sig2 = (Sig2 + Sig2.T) / 2.0
    return True, R2, v + dx[3:6], p + dx[6:9], bg + dx[9:12], ba + dx[12:15], Sig2


@njit(cache=True)
def project_rotation(R):
    """Nearest rotation matrix (symmetric orthogonalization via SVD)."""
    U, _, Vt = np.linalg.svd(R)
    M = U @ Vt
    if np.linalg.det(M) < 0.0:
        D = np.eye(3)
        D[2, 2] = -1.0
        M = (U @ D) @ Vt
    return M


@njit(cache=True)
def filter_loop(t, gyro, accel, stance, init_n, R0, Sig0, sig15, sig12,
                slip_cov, g, reorth_interval, cond_limit, use_ekf):
    """Full prediction/update pass over one log.

    Returns (rot, vel, pos, bias, final_cov, skipped, bad_index): per-sample
    state histories starting at sample ``init_n``, the final covariance, the
    number of degenerate zero-velocity updates skipped, and the index of the
    first non-finite state (-1 when the run stayed finite).
    """
    n = t.shape[0]
    n_out = n - init_n
    rot = np.empty((n_out, 3, 3))
    vel = np.empty((n_out, 3))
    pos = np.empty((n_out, 3))
    bias = np.empty((n_out, 6))

    R = R0.copy()
    v = np.zeros(3)
    p = np.zeros(3)
    bg = np.zeros(3)
    ba = np.zeros(3)
    Sig = Sig0.copy()
    skipped = 0
    bad_index = -1
    steps = 0
    for k in range(init_n, n):
        dt = t[k] - t[k - 1]
        if use_ekf:
            R, v, p, Sig = predict_ekf(R, v, p, bg, ba, Sig, gyro[k],
                                       accel[k], dt, sig12, g)
        else:
            R, v, p, Sig = predict_inekf(R, v, p, bg, ba, Sig, gyro[k],
                                         accel[k], dt, sig15, g)
        steps += 1
        if steps % reorth_interval == 0:
            R = project_rotation(R)
        if stance[k]:
            if use_ekf:
                ok, R, v, p, bg, ba, Sig = zupt_ekf(R, v, p, bg, ba, Sig,
                                                    slip_cov, cond_limit)
            else:
                ok, R, v, p, bg, ba, Sig = zupt_inekf(R, v, p, bg, ba, Sig,
                                                      slip_cov, cond_limit)
            if not ok:
                skipped += 1
        total = v[0] + v[1] + v[2] + p[0] + p[1] + p[2] + np.trace(Sig)
        if not math.isfinite(total):
            bad_index = k
            break
        i = k - init_n
        rot[i] = R
        vel[i] = v
        pos[i] = p
        bias[i, 0:3] = bg
        bias[i, 3:6] = ba
    return rot, vel, pos, bias, Sig, skipped, bad_index
