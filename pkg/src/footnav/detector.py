"""Threshold-plus-sliding-window stance detection on raw IMU magnitudes.

The detector is deliberately independent of the state estimator: it looks
only at the gyro magnitude and at how far the specific-force magnitude is
from gravity, so its output cannot feed back filter errors into the
zero-velocity updates.  Default thresholds are implementation choices tuned
for a ~100 Hz human gait, not values taken from any datasheet.
"""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, replace

import numpy as np

from .types import ImuSample


@dataclass(frozen=True)
class DetectorConfig:
    """Stance detection tunables.

    ``accel_thresh`` bounds the deviation of the specific-force magnitude
    from |gravity|; ``window`` is the sliding-window length in samples and
    ``min_stance`` the number of consecutive candidate samples required
    before stance is asserted.
    """

    gyro_thresh: float = 0.3    # rad/s
    accel_thresh: float = 0.8   # m/s^2
    window: int = 15            # samples
    min_stance: int = 5         # samples

    def __post_init__(self):
        if not (self.gyro_thresh > 0.0 and self.accel_thresh > 0.0):
            raise ValueError("detector thresholds must be positive")
        if self.window < 2:
            raise ValueError("detector window must hold at least 2 samples")
        if self.min_stance < 1:
            raise ValueError("min_stance must be at least 1")


def robot_preset(base: DetectorConfig | None = None) -> DetectorConfig:
    """Detector preset for ~3 Hz bipedal-robot gaits: halved window and hysteresis."""
    base = base or DetectorConfig()
    return replace(base, window=max(2, base.window // 2),
                   min_stance=max(1, base.min_stance // 2))


@dataclass(frozen=True)
class StanceEvent:
    """A maximal run of stance-flagged samples; ``span`` is a half-open index range."""

    t_start: float
    t_end: float
    span: tuple[int, int]

    def __post_init__(self):
        if self.t_end < self.t_start:
            raise ValueError("stance event must end no earlier than it starts")


class StanceDetector:
    """Causal stance detector over a single IMU stream.

    A sample is a stationary candidate iff ``|gyro| < gyro_thresh`` and
    ``||accel| - |g|| < accel_thresh``.  Stance is asserted once the sliding
    window is full, its first and last samples are both candidates, and at
    least ``min_stance`` consecutive candidates have accrued.  One instance
    per stream; not safe to share across threads.
    """

    def __init__(self, config: DetectorConfig | None = None, gravity_mag: float = 9.81):
        self.config = config or DetectorConfig()
        self.gravity_mag = float(gravity_mag)
        self._buf: deque[bool] = deque(maxlen=self.config.window)
        self._consecutive = 0

    def reset(self) -> None:
        self._buf.clear()
        self._consecutive = 0

    def update(self, sample: ImuSample) -> bool:
        """Consume one sample (in time order) and return the stance flag."""
        cfg = self.config
        gyro, accel = sample.gyro, sample.accel
        candidate = bool(
            float(gyro @ gyro) < cfg.gyro_thresh**2
            and abs(math.sqrt(float(accel @ accel)) - self.gravity_mag) < cfg.accel_thresh
        )
        self._buf.append(candidate)
        self._consecutive = self._consecutive + 1 if candidate else 0
        if len(self._buf) < cfg.window:
            return False
        return bool(self._buf[0] and self._buf[-1]
                    and self._consecutive >= cfg.min_stance)

    def run(self, samples) -> np.ndarray:
        """Flags for a whole log (resets first)."""
        self.reset()
        return np.array([self.update(s) for s in samples], dtype=bool)


def segment_events(flags, times) -> list[StanceEvent]:
    """Turn per-sample stance flags into maximal stance events."""
    flags = np.asarray(flags, dtype=bool)
    times = np.asarray(times, dtype=float)
    if flags.shape != times.shape:
        raise ValueError(
            f"flags ({flags.shape}) and times ({times.shape}) must have equal length"
        )
    events: list[StanceEvent] = []
    start = None
    for k, f in enumerate(flags):
        if f and start is None:
            start = k
        elif not f and start is not None:
            events.append(StanceEvent(times[start], times[k - 1], (start, k)))
            start = None
    if start is not None:
        events.append(StanceEvent(times[start], times[-1], (start, len(flags))))
    return events
