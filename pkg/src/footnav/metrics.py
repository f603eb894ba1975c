"""Trajectory error metrics: ATE, loop closure, yaw drift, stance speed.

All metrics compare trajectories in the shared initial frame (both filters
anchor yaw to zero at startup), so no alignment transform is applied; a
frame offset is counted as error, which is the stricter and intended
reading for dead-reckoning evaluation.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .lie import log_so3


@dataclass(frozen=True)
class MetricReport:
    """Scores of one estimated trajectory; fields are None when not computable."""

    ate_rmse: float | None          # m (needs ground truth)
    final_loop_error: float         # m
    loop_error_pct_path: float | None   # % of path length
    yaw_drift: float | None         # rad (needs ground truth)
    mean_stance_speed: float | None  # m/s over stance-flagged samples
    path_length: float              # m

    FIELDS = ("ate_rmse", "final_loop_error", "loop_error_pct_path",
              "yaw_drift", "mean_stance_speed", "path_length")

    def to_text(self) -> str:
        lines = []
        for name in self.FIELDS:
            value = getattr(self, name)
            lines.append(f"{name} = " + ("n/a" if value is None else format(value, ".6g")))
        return "\n".join(lines)

    @staticmethod
    def csv_header() -> str:
        return ",".join(MetricReport.FIELDS)

    def to_csv_row(self) -> str:
        cells = []
        for name in self.FIELDS:
            value = getattr(self, name)
            cells.append("" if value is None else format(value, ".12g"))
        return ",".join(cells)


def _arrays(points):
    """Stack trajectory points, dropping zero-duration duplicate timestamps."""
    t = np.array([p.t for p in points], dtype=float)
    keep = np.ones(t.size, dtype=bool)
    keep[1:] = np.diff(t) > 0.0
    idx = np.nonzero(keep)[0]
    pos = np.stack([points[i].pos for i in idx])
    vel = np.stack([points[i].vel for i in idx])
    stance = np.array([points[i].stance for i in idx], dtype=bool)
    return t[idx], pos, vel, stance, idx


def _associate(est_t, gt_t):
    """Nearest-timestamp association of estimate samples inside the overlap."""
    t_lo = max(est_t[0], gt_t[0])
    t_hi = min(est_t[-1], gt_t[-1])
    if t_hi < t_lo:
        raise ValueError("trajectories have no temporal overlap")
    in_overlap = np.nonzero((est_t >= t_lo) & (est_t <= t_hi))[0]
    right = np.searchsorted(gt_t, est_t[in_overlap])
    right = np.clip(right, 1, gt_t.size - 1)
    left = right - 1
    pick_left = (est_t[in_overlap] - gt_t[left]) <= (gt_t[right] - est_t[in_overlap])
    return in_overlap, np.where(pick_left, left, right)


def ate_rmse(est, gt) -> float:
    """RMSE of position error under nearest-timestamp association (m)."""
    est_t, est_p, _, _, _ = _arrays(est)
    gt_t, gt_p, _, _, _ = _arrays(gt)
    ei, gi = _associate(est_t, gt_t)
    d = est_p[ei] - gt_p[gi]
    return float(np.sqrt(np.mean(np.sum(d * d, axis=1))))


def path_length(est) -> float:
    """Integrated path length of the estimated positions (m)."""
    _, pos, _, _, _ = _arrays(est)
    return float(np.sum(np.linalg.norm(np.diff(pos, axis=0), axis=1)))


def loop_closure(est) -> tuple[float, float | None]:
    """Start-to-end distance and its percentage of path length.

    The percentage is None when the path length is zero.
    """
    _, pos, _, _, _ = _arrays(est)
    if pos.shape[0] < 2:
        raise ValueError("loop closure needs at least 2 trajectory points")
    err = float(np.linalg.norm(pos[-1] - pos[0]))
    length = float(np.sum(np.linalg.norm(np.diff(pos, axis=0), axis=1)))
    if length == 0.0:
        return err, None
    return err, 100.0 * err / length


def yaw_drift(est, gt) -> float:
    """Yaw of the relative rotation gt^T est at the final common timestamp (rad)."""
    est_t, _, _, _, est_idx = _arrays(est)
    gt_t, _, _, _, gt_idx = _arrays(gt)
    t_hi = min(est_t[-1], gt_t[-1])
    if t_hi < max(est_t[0], gt_t[0]):
        raise ValueError("trajectories have no temporal overlap")
    ei = int(np.argmin(np.abs(est_t - t_hi)))
    gi = int(np.argmin(np.abs(gt_t - t_hi)))
    R_est = est[est_idx[ei]].rot
    R_gt = gt[gt_idx[gi]].rot
    return float(log_so3(R_gt.T @ R_est)[2])


def mean_stance_speed(est) -> float | None:
    """Mean speed over stance-flagged samples; None if none are flagged."""
    _, _, vel, stance, _ = _arrays(est)
    if not stance.any():
        return None
    return float(np.mean(np.linalg.norm(vel[stance], axis=1)))


def compute_report(est, gt=None) -> MetricReport:
    """Score an estimated trajectory, against ground truth when available."""
    loop_err, loop_pct = loop_closure(est)
    return MetricReport(
        ate_rmse=ate_rmse(est, gt) if gt is not None else None,
        final_loop_error=loop_err,
        loop_error_pct_path=loop_pct,
        yaw_drift=yaw_drift(est, gt) if gt is not None else None,
        mean_stance_speed=mean_stance_speed(est),
        path_length=path_length(est),
    )
