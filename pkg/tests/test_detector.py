import numpy as np
import pytest

from footnav import (
    DetectorConfig,
    GaitSpec,
    ImuBias,
    ImuSample,
    NoiseConfig,
    StanceDetector,
    StanceEvent,
    corrupt,
    generate_gait,
    inverse_imu,
    segment_events,
)
from footnav.detector import robot_preset

G = 9.81


def static_samples(n, gyro_noise=0.0, rng=None):
    out = []
    for k in range(n):
        w = gyro_noise * rng.standard_normal(3) if rng is not None else np.zeros(3)
        out.append(ImuSample(k * 0.01, w, [0, 0, G]))
    return out


class TestDetectorConfig:
    def test_defaults(self):
        cfg = DetectorConfig()
        assert cfg.window >= 2 and cfg.min_stance >= 1

    @pytest.mark.parametrize("kwargs", [
        {"gyro_thresh": 0.0},
        {"accel_thresh": -1.0},
        {"window": 1},
        {"min_stance": 0},
    ])
    def test_rejects_bad_values(self, kwargs):
        with pytest.raises(ValueError):
            DetectorConfig(**kwargs)

    def test_robot_preset_halves(self):
        base = DetectorConfig(window=15, min_stance=5)
        r = robot_preset(base)
        assert r.window == 7 and r.min_stance == 2


class TestDetectStep:
    def test_static_stream_with_noise(self, rng):
        det = StanceDetector(DetectorConfig(gyro_thresh=0.1), G)
        flags = det.run(static_samples(40, gyro_noise=0.005, rng=rng))
        assert not flags[: det.config.window - 1].any()  # cold start
        assert flags[det.config.window:].all()

    def test_swing_burst_is_not_stance(self):
        det = StanceDetector(DetectorConfig(), G)
        for s in static_samples(30):
            det.update(s)
        burst = ImuSample(1.0, [0, 0, 3.0], [0, 0, G])
        assert det.update(burst) is False

    def test_detected_stance_overlaps_truth(self, gravity):
        # Slow gait so the window-fill latency stays a small fraction of
        # each stance interval; IoU computed over the whole log.
        spec = GaitSpec(step_length=0.5, step_duration=1.0, stance_fraction=0.6,
                        n_steps=12, heading_profile=(0.0,) * 12)
        gt = generate_gait(spec, 100.0)
        samples = corrupt(inverse_imu(gt, gravity), NoiseConfig(),
                          ImuBias.zero(), 7)
        det = StanceDetector(DetectorConfig(), G)
        flags = det.run(samples)
        inter = np.sum(flags & gt.stance)
        union = np.sum(flags | gt.stance)
        assert inter / union >= 0.7

    def test_causal(self, rng):
        spec = GaitSpec(n_steps=4, heading_profile=(0.0,) * 4)
        gt = generate_gait(spec, 100.0)
        samples = corrupt(inverse_imu(gt, np.array([0, 0, -9.81])),
                          NoiseConfig(), ImuBias.zero(), 1)
        full = StanceDetector(DetectorConfig(), G).run(samples)
        cut = len(samples) // 2
        prefix = StanceDetector(DetectorConfig(), G).run(samples[:cut])
        np.testing.assert_array_equal(full[:cut], prefix)

    def test_threshold_monotonicity(self, gravity):
        spec = GaitSpec(n_steps=6, heading_profile=(0.0,) * 6)
        gt = generate_gait(spec, 100.0)
        samples = corrupt(inverse_imu(gt, gravity), NoiseConfig(),
                          ImuBias.zero(), 3)
        tight = StanceDetector(DetectorConfig(gyro_thresh=0.3, accel_thresh=0.8), G)
        loose = StanceDetector(DetectorConfig(gyro_thresh=0.6, accel_thresh=1.6), G)
        f_tight = tight.run(samples)
        f_loose = loose.run(samples)
        assert not (f_tight & ~f_loose).any()

    def test_static_coverage(self):
        cfg = DetectorConfig()
        n = 500
        flags = StanceDetector(cfg, G).run(static_samples(n))
        assert flags.sum() >= n - cfg.window


class TestSegmentEvents:
    def test_all_false(self):
        assert segment_events([False] * 5, np.arange(5) * 0.01) == []

    def test_single_run(self):
        flags = [False] * 3 + [True] * 10 + [False] * 2
        times = np.arange(15) * 0.01
        events = segment_events(flags, times)
        assert len(events) == 1
        ev = events[0]
        assert ev.span == (3, 13)
        assert ev.t_start == pytest.approx(0.03)
        assert ev.t_end == pytest.approx(0.12)

    def test_run_to_end(self):
        events = segment_events([False, True, True], np.arange(3) * 0.01)
        assert events[0].span == (1, 3)

    def test_alternating_singles_after_hysteresis(self):
        # min_stance >= 2 upstream means isolated single flags never survive.
        cfg = DetectorConfig(min_stance=2)
        det = StanceDetector(cfg, G)
        samples = []
        for k in range(60):
            if k % 2 == 0:
                samples.append(ImuSample(k * 0.01, np.zeros(3), [0, 0, G]))
            else:
                samples.append(ImuSample(k * 0.01, [0, 0, 3.0], [0, 0, G]))
        flags = det.run(samples)
        assert segment_events(flags, [s.t for s in samples]) == []

    def test_length_mismatch(self):
        with pytest.raises(ValueError, match="equal length"):
            segment_events([True], np.arange(2) * 0.01)

    def test_event_ordering_invariant(self):
        with pytest.raises(ValueError):
            StanceEvent(1.0, 0.5, (0, 1))
