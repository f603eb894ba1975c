"""File formats: IMU logs, trajectories and the key = value config format.

All writers are deterministic (same input, same bytes) and all parser
errors carry the file position.  Numbers are written with 12 significant
digits, which round-trips typical hand-written decimal literals exactly.

IMU log CSV      header ``t,wx,wy,wz,ax,ay,az`` (s, rad/s, m/s^2)
trajectory CSV   header ``t,px,py,pz,vx,vy,vz,qw,qx,qy,qz,stance``
                 (quaternion Hamilton convention, w first, w >= 0, unit norm;
                 ground-truth files reuse this schema)
config           ``[section]`` headers with flat ``key = value`` lines;
                 sections [noise], [detector], [init], [filter]
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

import numpy as np
from scipy.spatial.transform import Rotation

from .detector import DetectorConfig
from .types import (
    DEFAULT_COV0_BLOCKS,
    ImuSample,
    NoiseConfig,
    TrajectoryPoint,
)

IMU_HEADER = ("t", "wx", "wy", "wz", "ax", "ay", "az")
TRAJ_HEADER = ("t", "px", "py", "pz", "vx", "vy", "vz",
               "qw", "qx", "qy", "qz", "stance")


class ImuLogError(ValueError):
    """Malformed IMU log or trajectory file."""


class ConfigError(ValueError):
    """Malformed or unknown configuration content."""


def _fmt(x: float) -> str:
    return format(float(x), ".12g")


def _parse_float(cell: str, path, line_no: int) -> float:
    try:
        value = float(cell)
    except ValueError:
        raise ImuLogError(f"{path}:{line_no}: non-numeric cell {cell!r}") from None
    if not np.isfinite(value):
        raise ImuLogError(f"{path}:{line_no}: non-finite cell {cell!r}")
    return value


def _check_header(cells, expected, path) -> None:
    if len(cells) != len(expected):
        raise ImuLogError(
            f"{path}:1: header has {len(cells)} columns, expected {len(expected)}"
        )
    for i, (got, want) in enumerate(zip(cells, expected)):
        if got.strip() != want:
            raise ImuLogError(
                f"{path}:1: header column {i + 1} is {got.strip()!r}, expected {want!r}"
            )


def parse_imu_log(path) -> list[ImuSample]:
    """Read an IMU log CSV, validating header, cells and time monotonicity."""
    path = Path(path)
    samples: list[ImuSample] = []
    last_t = None
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise ImuLogError(f"{path}:1: empty file")
        _check_header(header.rstrip("\n").split(","), IMU_HEADER, path)
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != 7:
                raise ImuLogError(
                    f"{path}:{line_no}: expected 7 columns, found {len(cells)}"
                )
            values = [_parse_float(c, path, line_no) for c in cells]
            if last_t is not None and values[0] <= last_t:
                raise ImuLogError(
                    f"{path}:{line_no}: timestamp {values[0]!r} not increasing"
                )
            last_t = values[0]
            samples.append(ImuSample(values[0], values[1:4], values[4:7]))
    return samples


def write_imu_log(samples, path) -> None:
    """Write an IMU log CSV (deterministic bytes)."""
    path = Path(path)
    lines = [",".join(IMU_HEADER)]
    for s in samples:
        lines.append(",".join(
            [_fmt(s.t)] + [_fmt(x) for x in s.gyro] + [_fmt(x) for x in s.accel]
        ))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def _quat_from_rot(R: np.ndarray) -> np.ndarray:
    q = Rotation.from_matrix(R).as_quat()      # x, y, z, w
    q = np.array([q[3], q[0], q[1], q[2]])
    # Canonical sign: w >= 0; tie broken on the first nonzero component.
    if q[0] < 0.0 or (q[0] == 0.0 and q[np.nonzero(q)[0][0]] < 0.0):
        q = -q
    return q


def _rot_from_quat(q: np.ndarray) -> np.ndarray:
    return Rotation.from_quat([q[1], q[2], q[3], q[0]]).as_matrix()


def write_trajectory(points, path) -> None:
    """Write a trajectory CSV; rotation stored as a canonical unit quaternion."""
    path = Path(path)
    lines = [",".join(TRAJ_HEADER)]
    for p in points:
        q = _quat_from_rot(p.rot)
        lines.append(",".join(
            [_fmt(p.t)]
            + [_fmt(x) for x in p.pos]
            + [_fmt(x) for x in p.vel]
            + [_fmt(x) for x in q]
            + [str(int(p.stance))]
        ))
    path.write_text("\n".join(lines) + "\n", encoding="utf-8")


def parse_trajectory(path) -> list[TrajectoryPoint]:
    """Read a trajectory (or ground truth) CSV; checks quaternion unit norm."""
    path = Path(path)
    points: list[TrajectoryPoint] = []
    with path.open("r", encoding="utf-8") as fh:
        header = fh.readline()
        if not header:
            raise ImuLogError(f"{path}:1: empty file")
        _check_header(header.rstrip("\n").split(","), TRAJ_HEADER, path)
        for line_no, line in enumerate(fh, start=2):
            line = line.strip()
            if not line:
                continue
            cells = line.split(",")
            if len(cells) != 12:
                raise ImuLogError(
                    f"{path}:{line_no}: expected 12 columns, found {len(cells)}"
                )
            values = [_parse_float(c, path, line_no) for c in cells[:11]]
            q = np.array(values[7:11])
            if abs(np.linalg.norm(q) - 1.0) > 1e-9:
                raise ImuLogError(
                    f"{path}:{line_no}: quaternion norm deviates from 1 "
                    f"by {abs(np.linalg.norm(q) - 1.0):.3e}"
                )
            stance_cell = cells[11].strip()
            if stance_cell not in ("0", "1"):
                raise ImuLogError(
                    f"{path}:{line_no}: stance flag must be 0 or 1, got {stance_cell!r}"
                )
            points.append(TrajectoryPoint(values[0], values[1:4], values[4:7],
                                          _rot_from_quat(q), stance_cell == "1"))
    return points


# --------------------------------------------------------------------------
# Configuration files


@dataclass(frozen=True)
class RunConfig:
    """Everything tunable about a filter run."""

    noise: NoiseConfig = field(default_factory=NoiseConfig)
    detector: DetectorConfig = field(default_factory=DetectorConfig)
    init_window: int = 20
    cov0_blocks: tuple = DEFAULT_COV0_BLOCKS
    zupt_enabled: bool = True
    reorth_interval: int = 1000

    def cov0_diag(self) -> np.ndarray:
        return np.repeat(np.asarray(self.cov0_blocks, dtype=float), 3)


def _read_kv_sections(path) -> dict[str, dict[str, tuple[str, int]]]:
    """Parse ``[section]`` / ``key = value`` lines; values kept as raw strings."""
    path = Path(path)
    sections: dict[str, dict[str, tuple[str, int]]] = {}
    current = None
    with path.open("r", encoding="utf-8") as fh:
        for line_no, raw in enumerate(fh, start=1):
            line = raw.split("#", 1)[0].strip()
            if not line:
                continue
            if line.startswith("[") and line.endswith("]"):
                current = line[1:-1].strip()
                sections.setdefault(current, {})
                continue
            if "=" not in line:
                raise ConfigError(f"{path}:{line_no}: expected 'key = value', got {line!r}")
            key, value = (part.strip() for part in line.split("=", 1))
            if current is None:
                raise ConfigError(f"{path}:{line_no}: key {key!r} appears before any [section]")
            if key in sections[current]:
                raise ConfigError(f"{path}:{line_no}: duplicate key {key!r} in [{current}]")
            sections[current][key] = (value, line_no)
    return sections


def _as_float(key, value, path, line_no) -> float:
    try:
        return float(value)
    except ValueError:
        raise ConfigError(
            f"{path}:{line_no}: value for {key!r} is not a number: {value!r}"
        ) from None


def _as_int(key, value, path, line_no) -> int:
    try:
        return int(value)
    except ValueError:
        raise ConfigError(
            f"{path}:{line_no}: value for {key!r} is not an integer: {value!r}"
        ) from None


def _as_bool(key, value, path, line_no) -> bool:
    lowered = value.lower()
    if lowered in ("true", "on", "yes", "1"):
        return True
    if lowered in ("false", "off", "no", "0"):
        return False
    raise ConfigError(f"{path}:{line_no}: value for {key!r} is not a boolean: {value!r}")


def _as_floats(key, value, path, line_no) -> list[float]:
    return [_as_float(key, cell.strip(), path, line_no) for cell in value.split(",")]


def _slip_cov_from(values: list[float], key, path, line_no) -> np.ndarray:
    if len(values) == 1:
        return values[0] * np.eye(3)
    if len(values) == 3:
        return np.diag(values)
    if len(values) == 9:
        return np.array(values).reshape(3, 3)
    raise ConfigError(
        f"{path}:{line_no}: {key!r} takes 1 (scalar), 3 (diagonal) or "
        f"9 (full) values, got {len(values)}"
    )


_NOISE_KEYS = ("sigma_g", "sigma_a", "sigma_bg", "sigma_ba", "slip_cov", "gravity")
_DETECTOR_KEYS = ("gyro_thresh", "accel_thresh", "window", "min_stance")
_INIT_KEYS = ("init_window", "cov0_att", "cov0_vel", "cov0_pos", "cov0_bg", "cov0_ba")
_FILTER_KEYS = ("zupt_enabled", "reorth_interval")
_SCHEMA = {"noise": _NOISE_KEYS, "detector": _DETECTOR_KEYS,
           "init": _INIT_KEYS, "filter": _FILTER_KEYS}


def load_config(path=None) -> RunConfig:
    """Load a run configuration; missing keys take the documented defaults.

    Unknown sections or keys are rejected with their file position.
    """
    defaults = RunConfig()
    if path is None:
        return defaults
    sections = _read_kv_sections(path)
    for section, entries in sections.items():
        if section not in _SCHEMA:
            raise ConfigError(f"{path}: unknown section [{section}]")
        for key, (_, line_no) in entries.items():
            if key not in _SCHEMA[section]:
                raise ConfigError(f"{path}:{line_no}: unknown key {key!r} in [{section}]")

    def get(section, key, convert, fallback):
        entry = sections.get(section, {}).get(key)
        if entry is None:
            return fallback
        return convert(key, entry[0], path, entry[1])

    noise_defaults = defaults.noise
    slip_entry = sections.get("noise", {}).get("slip_cov")
    if slip_entry is None:
        slip = noise_defaults.slip_cov
    else:
        slip = _slip_cov_from(_as_floats("slip_cov", slip_entry[0], path, slip_entry[1]),
                              "slip_cov", path, slip_entry[1])
    gravity_entry = sections.get("noise", {}).get("gravity")
    if gravity_entry is None:
        gravity = noise_defaults.gravity
    else:
        gravity = _as_floats("gravity", gravity_entry[0], path, gravity_entry[1])
        if len(gravity) != 3:
            raise ConfigError(
                f"{path}:{gravity_entry[1]}: 'gravity' takes 3 values, got {len(gravity)}"
            )
    noise = NoiseConfig(
        sigma_g=get("noise", "sigma_g", _as_float, noise_defaults.sigma_g),
        sigma_a=get("noise", "sigma_a", _as_float, noise_defaults.sigma_a),
        sigma_bg=get("noise", "sigma_bg", _as_float, noise_defaults.sigma_bg),
        sigma_ba=get("noise", "sigma_ba", _as_float, noise_defaults.sigma_ba),
        slip_cov=slip,
        gravity=np.asarray(gravity, dtype=float),
    )
    detector = DetectorConfig(
        gyro_thresh=get("detector", "gyro_thresh", _as_float, defaults.detector.gyro_thresh),
        accel_thresh=get("detector", "accel_thresh", _as_float, defaults.detector.accel_thresh),
        window=get("detector", "window", _as_int, defaults.detector.window),
        min_stance=get("detector", "min_stance", _as_int, defaults.detector.min_stance),
    )
    cov0 = tuple(
        get("init", key, _as_float, fallback)
        for key, fallback in zip(_INIT_KEYS[1:], defaults.cov0_blocks)
    )
    return RunConfig(
        noise=noise,
        detector=detector,
        init_window=get("init", "init_window", _as_int, defaults.init_window),
        cov0_blocks=cov0,
        zupt_enabled=get("filter", "zupt_enabled", _as_bool, defaults.zupt_enabled),
        reorth_interval=get("filter", "reorth_interval", _as_int, defaults.reorth_interval),
    )


def dump_config(rc: RunConfig) -> str:
    """Render the full effective configuration in the config file format."""
    slip = rc.noise.slip_cov
    if np.allclose(slip, slip[0, 0] * np.eye(3), atol=0.0):
        slip_text = _fmt(slip[0, 0])
    elif np.allclose(slip, np.diag(np.diag(slip)), atol=0.0):
        slip_text = ", ".join(_fmt(x) for x in np.diag(slip))
    else:
        slip_text = ", ".join(_fmt(x) for x in slip.reshape(-1))
    lines = [
        "[noise]",
        f"sigma_g = {_fmt(rc.noise.sigma_g)}",
        f"sigma_a = {_fmt(rc.noise.sigma_a)}",
        f"sigma_bg = {_fmt(rc.noise.sigma_bg)}",
        f"sigma_ba = {_fmt(rc.noise.sigma_ba)}",
        f"slip_cov = {slip_text}",
        "gravity = " + ", ".join(_fmt(x) for x in rc.noise.gravity),
        "",
        "[detector]",
        f"gyro_thresh = {_fmt(rc.detector.gyro_thresh)}",
        f"accel_thresh = {_fmt(rc.detector.accel_thresh)}",
        f"window = {rc.detector.window}",
        f"min_stance = {rc.detector.min_stance}",
        "",
        "[init]",
        f"init_window = {rc.init_window}",
    ]
    lines += [
        f"{key} = {_fmt(value)}"
        for key, value in zip(_INIT_KEYS[1:], rc.cov0_blocks)
    ]
    lines += [
        "",
        "[filter]",
        f"zupt_enabled = {'true' if rc.zupt_enabled else 'false'}",
        f"reorth_interval = {rc.reorth_interval}",
    ]
    return "\n".join(lines) + "\n"
