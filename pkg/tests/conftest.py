import sys
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

import footnav as fn


@pytest.fixture(scope="session", autouse=True)
def warm_jit():
    """Compile (or load from cache) the numba kernels before any timed test."""
    gt = fn.generate_gait(fn.GaitSpec(n_steps=1, heading_profile=(0.0,)), 100.0)
    samples = fn.inverse_imu(gt, np.array([0.0, 0.0, -9.81]))
    cfg = fn.NoiseConfig()
    det = fn.StanceDetector(fn.DetectorConfig(), 9.81)
    fn.run_filter(samples, cfg, det, init_window=10)
    fn.run_ekf(samples, cfg, det, init_window=10)


@pytest.fixture
def rng():
    return np.random.default_rng(42)


@pytest.fixture
def gravity():
    return np.array([0.0, 0.0, -9.81])
