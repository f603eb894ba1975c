"""Independent reference computations used to freeze expected test values.

These deliberately avoid the library's own code paths: matrix exponentials
come from plain truncated Taylor series, rotations from scipy, scalar Kalman
results from the closed form.
"""

import numpy as np
from scipy.spatial.transform import Rotation


def taylor_expm(M: np.ndarray, terms: int) -> np.ndarray:
    """Plain truncated-series matrix exponential (no scaling, no shortcuts)."""
    out = np.eye(M.shape[0])
    term = np.eye(M.shape[0])
    for k in range(1, terms + 1):
        term = term @ M / k
        out = out + term
    return out


def rotvec_from_matrix(R: np.ndarray) -> np.ndarray:
    """Rotation vector via quaternion conversion (scipy), independent of lie.py."""
    return Rotation.from_matrix(R).as_rotvec()


def matrix_from_rotvec(phi: np.ndarray) -> np.ndarray:
    return Rotation.from_rotvec(phi).as_matrix()


def scalar_kalman_posterior_var(prior_var: float, meas_var: float) -> float:
    """Posterior variance of one scalar Kalman update with H = 1."""
    k = prior_var / (prior_var + meas_var)
    return (1.0 - k) * prior_var


def random_se23_matrix(rng: np.random.Generator, scale: float = 1.0) -> np.ndarray:
    """Random SE2(3) element as its 5x5 embedding."""
    M = np.eye(5)
    M[:3, :3] = Rotation.random(random_state=rng).as_matrix()
    M[:3, 3] = rng.normal(0.0, scale, 3)
    M[:3, 4] = rng.normal(0.0, scale, 3)
    return M


def dynamics_embedding(M: np.ndarray, omega: np.ndarray, accel: np.ndarray,
                       g: np.ndarray) -> np.ndarray:
    """The bias-free continuous dynamics of a 5x5 state embedding.

    f(X) = [[R wx, R a + g, v], [0, 0, 0], [0, 0, 0]].
    """
    R = M[:3, :3]
    wx = np.array([[0.0, -omega[2], omega[1]],
                   [omega[2], 0.0, -omega[0]],
                   [-omega[1], omega[0], 0.0]])
    out = np.zeros((5, 5))
    out[:3, :3] = R @ wx
    out[:3, 3] = R @ accel + g
    out[:3, 4] = M[:3, 3]
    return out
