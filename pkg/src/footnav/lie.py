"""Matrix Lie group machinery for SO(3) and SE2(3).

An SE2(3) element packs orientation R, velocity v and position p into the
5x5 block matrix

    [ R  v  p ]
    [ 0  1  0 ]
    [ 0  0  1 ]

and its tangent space is parameterized by 9-vectors ordered
``[xi_rot, xi_vel, xi_pos]``.  Everything here is a pure function over
float64 ndarrays; :class:`SE23` is an immutable value type, safe to share
between threads.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

# Below this rotation angle (rad) the closed forms are replaced by their
# low-order series to avoid 0/0 amplification.
SMALL_ANGLE = 1e-8


def skew(w: np.ndarray) -> np.ndarray:
    """Skew-symmetric matrix of a 3-vector, so that skew(w) @ u == cross(w, u)."""
    wx, wy, wz = w
    return np.array([[0.0, -wz, wy],
                     [wz, 0.0, -wx],
                     [-wy, wx, 0.0]])


def vee(W: np.ndarray) -> np.ndarray:
    """Inverse of :func:`skew` (reads the off-diagonal of a skew matrix)."""
    return np.array([W[2, 1], W[0, 2], W[1, 0]])


def exp_so3(phi: np.ndarray) -> np.ndarray:
    """Exponential map of SO(3) (Rodrigues formula).

    Parameters
    ----------
    phi : (3,) array
        Rotation vector (axis * angle, rad).

    Returns
    -------
    (3, 3) array
        Rotation matrix. For angles below ``SMALL_ANGLE`` the 2nd-order
        series ``I + skew(phi) + skew(phi)^2 / 2`` is used.
    """
    phi = np.asarray(phi, dtype=float)
    K = skew(phi)
    theta = float(np.linalg.norm(phi))
    if theta < SMALL_ANGLE:
        return np.eye(3) + K + 0.5 * (K @ K)
    a = np.sin(theta) / theta
    b = (1.0 - np.cos(theta)) / theta**2
    return np.eye(3) + a * K + b * (K @ K)


def log_so3(R: np.ndarray) -> np.ndarray:
    """Logarithm map of SO(3), returning a rotation vector with angle in [0, pi].

    Raises
    ------
    ValueError
        If ``R`` deviates from orthonormality by more than 1e-6 (Frobenius).
    """
    R = np.asarray(R, dtype=float)
    defect = np.linalg.norm(R.T @ R - np.eye(3))
    if defect > 1e-6:
        raise ValueError(
            f"log_so3: input is not a rotation matrix (orthogonality defect {defect:.3e})"
        )
    cos_theta = np.clip((np.trace(R) - 1.0) / 2.0, -1.0, 1.0)
    theta = float(np.arccos(cos_theta))
    if theta < SMALL_ANGLE:
        return vee(R - R.T) / 2.0
    if theta > np.pi - 1e-4:
        # sin(theta) ~ 0: the antisymmetric part no longer carries the axis.
        # R + R^T - (tr - 1) I == 2 (1 - cos) a a^T, so take the dominant column.
        S = R + R.T - (np.trace(R) - 1.0) * np.eye(3)
        i = int(np.argmax(np.diag(S)))
        axis = S[:, i] / np.linalg.norm(S[:, i])
        w = vee(R - R.T)  # == 2 sin(theta) a, tiny but sign-carrying
        if np.dot(w, axis) < 0.0:
            axis = -axis
        elif np.linalg.norm(w) < 1e-12 and axis[np.argmax(np.abs(axis))] < 0.0:
            axis = -axis  # angle == pi exactly: pick a deterministic sign
        return theta * axis
    return theta / (2.0 * np.sin(theta)) * vee(R - R.T)


def left_jacobian_so3(phi: np.ndarray) -> np.ndarray:
    """Left Jacobian of SO(3); series fallback below ``SMALL_ANGLE``."""
    phi = np.asarray(phi, dtype=float)
    K = skew(phi)
    theta = float(np.linalg.norm(phi))
    if theta < SMALL_ANGLE:
        return np.eye(3) + 0.5 * K + (K @ K) / 6.0
    a = (1.0 - np.cos(theta)) / theta**2
    b = (theta - np.sin(theta)) / theta**3
    return np.eye(3) + a * K + b * (K @ K)


def project_so3(R: np.ndarray) -> np.ndarray:
    """Nearest rotation matrix (symmetric orthogonalization via SVD)."""
    U, _, Vt = np.linalg.svd(np.asarray(R, dtype=float))
    D = np.diag([1.0, 1.0, float(np.linalg.det(U @ Vt))])
    return U @ D @ Vt


def is_rotation(R: np.ndarray, tol: float = 1e-9) -> bool:
    """Check orthonormality and det(R) == 1 within ``tol`` (Frobenius)."""
    R = np.asarray(R, dtype=float)
    if R.shape != (3, 3) or not np.isfinite(R).all():
        return False
    return (np.linalg.norm(R.T @ R - np.eye(3)) <= tol
            and abs(np.linalg.det(R) - 1.0) <= tol)


@dataclass(frozen=True)
class SE23:
    """Element of SE2(3): rotation, velocity (m/s) and position (m)."""

    rot: np.ndarray
    vel: np.ndarray
    pos: np.ndarray

    def __post_init__(self):
        object.__setattr__(self, "rot", np.asarray(self.rot, dtype=float))
        object.__setattr__(self, "vel", np.asarray(self.vel, dtype=float).reshape(3))
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=float).reshape(3))
        if self.rot.shape != (3, 3):
            raise ValueError("SE23 rotation must be a 3x3 matrix")

    @staticmethod
    def identity() -> "SE23":
        return SE23(np.eye(3), np.zeros(3), np.zeros(3))


def wedge_se23(xi: np.ndarray) -> np.ndarray:
    """Map a 9-vector [xi_rot, xi_vel, xi_pos] into the Lie algebra (5x5)."""
    xi = np.asarray(xi, dtype=float).reshape(9)
    W = np.zeros((5, 5))
    W[:3, :3] = skew(xi[:3])
    W[:3, 3] = xi[3:6]
    W[:3, 4] = xi[6:9]
    return W


def exp_se23(xi: np.ndarray) -> SE23:
    """Exponential map of SE2(3).

    Uses the SO(3) exponential for the rotation block and the SO(3) left
    Jacobian applied to the velocity and position tangent slots; equal to the
    matrix exponential of :func:`wedge_se23`.
    """
    xi = np.asarray(xi, dtype=float).reshape(9)
    phi = xi[:3]
    J = left_jacobian_so3(phi)
    return SE23(exp_so3(phi), J @ xi[3:6], J @ xi[6:9])


def compose(A: SE23, B: SE23) -> SE23:
    """Group product, equal to the product of the 5x5 embeddings."""
    return SE23(A.rot @ B.rot, A.rot @ B.vel + A.vel, A.rot @ B.pos + A.pos)


def inverse(X: SE23) -> SE23:
    """Group inverse: (R^T, -R^T v, -R^T p)."""
    Rt = X.rot.T
    return SE23(Rt, -(Rt @ X.vel), -(Rt @ X.pos))


def adjoint(X: SE23) -> np.ndarray:
    """9x9 adjoint of an SE2(3) element.

    Block layout (rows/cols ordered rot, vel, pos)::

        [ R          0  0 ]
        [ skew(v) R  R  0 ]
        [ skew(p) R  0  R ]
    """
    Ad = np.zeros((9, 9))
    Ad[0:3, 0:3] = X.rot
    Ad[3:6, 3:6] = X.rot
    Ad[6:9, 6:9] = X.rot
    Ad[3:6, 0:3] = skew(X.vel) @ X.rot
    Ad[6:9, 0:3] = skew(X.pos) @ X.rot
    return Ad


def to_matrix(X: SE23) -> np.ndarray:
    """5x5 homogeneous embedding."""
    M = np.eye(5)
    M[:3, :3] = X.rot
    M[:3, 3] = X.vel
    M[:3, 4] = X.pos
    return M


def from_matrix(M: np.ndarray, check: bool = True) -> SE23:
    """Inverse of :func:`to_matrix`; validates the fixed lower block by default."""
    M = np.asarray(M, dtype=float)
    if M.shape != (5, 5):
        raise ValueError("expected a 5x5 matrix")
    if check:
        if not np.allclose(M[3:, :3], 0.0, atol=1e-9) or not np.allclose(
            M[3:, 3:], np.eye(2), atol=1e-9
        ):
            raise ValueError("lower 2x5 block is not [0 I2]")
        if not is_rotation(M[:3, :3]):
            raise ValueError("upper-left block is not a rotation matrix")
    return SE23(M[:3, :3], M[:3, 3], M[:3, 4])
