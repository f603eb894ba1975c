"""Domain data types shared by the filters, the simulator and file I/O."""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

import numpy as np

from .lie import SE23, is_rotation

# Sanity bound on raw IMU channel magnitudes (rad/s resp. m/s^2); anything
# larger is a parsing or unit mistake, not a signal.
MAX_IMU_MAGNITUDE = 2000.0

# Default initial covariance diagonal, one variance per 3-axis block:
# attitude (rad^2), velocity ((m/s)^2), position (m^2), gyro bias, accel bias.
# Not physically derived; chosen so the static scenario converges within ~2 s.
DEFAULT_COV0_BLOCKS = (1e-4, 1e-4, 1e-6, 1e-4, 1e-2)


def default_cov0_diag() -> np.ndarray:
    """The default 15-element initial covariance diagonal."""
    return np.repeat(np.asarray(DEFAULT_COV0_BLOCKS, dtype=float), 3)


class LogGapWarning(UserWarning):
    """A timestamp gap much larger than the nominal sample interval."""


@dataclass(frozen=True)
class ImuSample:
    """One timestamped IMU reading: body-frame angular rate and specific force."""

    t: float
    gyro: np.ndarray
    accel: np.ndarray

    def __post_init__(self):
        gyro = np.asarray(self.gyro, dtype=float).reshape(3)
        accel = np.asarray(self.accel, dtype=float).reshape(3)
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "gyro", gyro)
        object.__setattr__(self, "accel", accel)
        if not np.isfinite(self.t):
            raise ValueError("ImuSample timestamp must be finite")
        if not (np.isfinite(gyro).all() and np.isfinite(accel).all()):
            raise ValueError(f"ImuSample at t={self.t} has non-finite channels")
        if np.abs(gyro).max() >= MAX_IMU_MAGNITUDE or np.abs(accel).max() >= MAX_IMU_MAGNITUDE:
            raise ValueError(
                f"ImuSample at t={self.t} exceeds the sanity bound {MAX_IMU_MAGNITUDE}"
            )


@dataclass(frozen=True)
class ImuBias:
    """Gyro (rad/s) and accelerometer (m/s^2) measurement biases."""

    gyro_bias: np.ndarray
    accel_bias: np.ndarray

    def __post_init__(self):
        gb = np.asarray(self.gyro_bias, dtype=float).reshape(3)
        ab = np.asarray(self.accel_bias, dtype=float).reshape(3)
        object.__setattr__(self, "gyro_bias", gb)
        object.__setattr__(self, "accel_bias", ab)
        if not (np.isfinite(gb).all() and np.isfinite(ab).all()):
            raise ValueError("ImuBias components must be finite")

    @staticmethod
    def zero() -> "ImuBias":
        return ImuBias(np.zeros(3), np.zeros(3))


@dataclass(frozen=True)
class FilterBelief:
    """Full filter state: navigation state, biases and 15x15 covariance.

    The covariance block order is [attitude, velocity, position, gyro bias,
    accel bias]; it is re-symmetrized on construction so the symmetry
    invariant survives every update.
    """

    nav: SE23
    bias: ImuBias
    cov: np.ndarray
    t: float

    def __post_init__(self):
        cov = np.asarray(self.cov, dtype=float)
        if cov.shape != (15, 15):
            raise ValueError("FilterBelief covariance must be 15x15")
        object.__setattr__(self, "cov", (cov + cov.T) / 2.0)
        object.__setattr__(self, "t", float(self.t))

    def validate(self, psd_tol: float = 1e-9, rot_tol: float = 1e-6) -> None:
        """Full invariant check (symmetry, PSD, rotation validity); test helper."""
        if not np.isfinite(self.cov).all():
            raise ValueError("covariance has non-finite entries")
        min_eig = float(np.linalg.eigvalsh(self.cov)[0])
        if min_eig < -psd_tol:
            raise ValueError(f"covariance is not PSD (min eigenvalue {min_eig:.3e})")
        if not is_rotation(self.nav.rot, tol=rot_tol):
            raise ValueError("navigation state rotation is not orthonormal")


@dataclass(frozen=True)
class NoiseConfig:
    """Noise model parameters shared by the simulator and both filters.

    All ``sigma_*`` values are per-axis standard deviations (they scale the
    identity); the filters square them when forming process noise
    covariances.  ``slip_cov`` is the body-frame foot-slip covariance used by
    the zero-velocity update, and ``gravity`` the world-frame gravity vector
    (z-up convention, so a level stationary accelerometer reads +|g| on z).
    """

    sigma_g: float = 0.005       # gyro white noise, rad/s
    sigma_a: float = 0.05        # accel white noise, m/s^2
    sigma_bg: float = 1e-4       # gyro bias random walk, rad/s/sqrt(s)
    sigma_ba: float = 1e-3       # accel bias random walk, m/s^2/sqrt(s)
    slip_cov: np.ndarray = field(default_factory=lambda: 1e-6 * np.eye(3))
    gravity: np.ndarray = field(default_factory=lambda: np.array([0.0, 0.0, -9.81]))
    strict_gravity: bool = True

    def __post_init__(self):
        object.__setattr__(self, "slip_cov", np.asarray(self.slip_cov, dtype=float))
        object.__setattr__(self, "gravity", np.asarray(self.gravity, dtype=float).reshape(3))
        for name in ("sigma_g", "sigma_a", "sigma_bg", "sigma_ba"):
            value = float(getattr(self, name))
            object.__setattr__(self, name, value)
            if not np.isfinite(value) or value < 0.0:
                raise ValueError(f"{name} must be a finite non-negative number")
        M = self.slip_cov
        if M.shape != (3, 3):
            raise ValueError("slip_cov must be a 3x3 matrix")
        if np.linalg.norm(M - M.T) > 1e-12:
            raise ValueError("slip_cov must be symmetric")
        if float(np.linalg.eigvalsh(M)[0]) < -1e-12:
            raise ValueError("slip_cov must be positive semi-definite")
        g_mag = float(np.linalg.norm(self.gravity))
        if self.strict_gravity and not (9.7 <= g_mag <= 9.9):
            raise ValueError(
                f"|gravity| = {g_mag:.4f} outside [9.7, 9.9]; "
                "pass strict_gravity=False to override"
            )


@dataclass(frozen=True)
class TrajectoryPoint:
    """One output record: pose, velocity and the stance flag at time ``t``."""

    t: float
    pos: np.ndarray
    vel: np.ndarray
    rot: np.ndarray
    stance: bool

    def __post_init__(self):
        object.__setattr__(self, "t", float(self.t))
        object.__setattr__(self, "pos", np.asarray(self.pos, dtype=float).reshape(3))
        object.__setattr__(self, "vel", np.asarray(self.vel, dtype=float).reshape(3))
        object.__setattr__(self, "rot", np.asarray(self.rot, dtype=float))
        object.__setattr__(self, "stance", bool(self.stance))


def belief_initial(cov0_diag: np.ndarray, t0: float) -> FilterBelief:
    """Fresh belief: identity navigation state, zero biases, diagonal covariance.

    The initial rotation is meant to be replaced by the static attitude
    initializer before filtering starts.
    """
    diag = np.asarray(cov0_diag, dtype=float).reshape(-1)
    if diag.shape != (15,):
        raise ValueError("cov0_diag must have 15 entries")
    if (diag < 0.0).any():
        raise ValueError("cov0_diag entries must be non-negative")
    return FilterBelief(SE23.identity(), ImuBias.zero(), np.diag(diag), t0)


def validate_log(samples) -> float:
    """Validate an IMU log and estimate its sample rate.

    Returns the median of ``1 / dt`` in Hz.  Raises ``ValueError`` for fewer
    than two samples or non-monotone timestamps; warns (:class:`LogGapWarning`)
    when any interval exceeds 5x the median interval.
    """
    t = np.array([s.t for s in samples], dtype=float)
    if t.size < 2:
        raise ValueError("IMU log needs at least 2 samples to estimate a rate")
    dt = np.diff(t)
    if (dt <= 0.0).any():
        k = int(np.argmax(dt <= 0.0))
        raise ValueError(
            f"non-monotone timestamps: t[{k + 1}] = {t[k + 1]} <= t[{k}] = {t[k]}"
        )
    # Gap detection needs a nominal interval that large gaps cannot pollute;
    # the lower-half median is immune to them (gaps are by definition above
    # the overall median).
    nominal = float(np.median(dt[dt <= np.median(dt)]))
    gaps = np.nonzero(dt > 5.0 * nominal)[0]
    if gaps.size:
        warnings.warn(
            f"{gaps.size} timestamp gap(s) exceed 5x the nominal interval "
            f"({nominal:.6g} s); first at sample {int(gaps[0])}",
            LogGapWarning,
            stacklevel=2,
        )
    return float(np.median(1.0 / dt))
