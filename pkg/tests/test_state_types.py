import numpy as np
import pytest

from footnav import (
    FilterBelief,
    ImuBias,
    ImuSample,
    LogGapWarning,
    NoiseConfig,
    belief_initial,
    validate_log,
)
from footnav.lie import SE23


class TestImuSample:
    def test_basic(self):
        s = ImuSample(0.5, [0.1, 0, 0], [0, 0, 9.81])
        assert s.t == 0.5
        assert s.gyro.shape == (3,)

    def test_rejects_non_finite(self):
        with pytest.raises(ValueError):
            ImuSample(0.0, [np.nan, 0, 0], [0, 0, 9.81])

    def test_rejects_insane_magnitude(self):
        with pytest.raises(ValueError, match="sanity"):
            ImuSample(0.0, [0, 0, 0], [0, 0, 5000.0])


class TestNoiseConfig:
    def test_defaults_valid(self):
        cfg = NoiseConfig()
        assert cfg.sigma_g > 0
        assert np.allclose(cfg.gravity, [0, 0, -9.81])

    def test_rejects_negative_sigma(self):
        with pytest.raises(ValueError):
            NoiseConfig(sigma_g=-1.0)

    def test_rejects_asymmetric_slip(self):
        M = np.eye(3)
        M[0, 1] = 0.5
        with pytest.raises(ValueError, match="symmetric"):
            NoiseConfig(slip_cov=M)

    def test_rejects_indefinite_slip(self):
        with pytest.raises(ValueError, match="semi-definite"):
            NoiseConfig(slip_cov=-np.eye(3))

    def test_gravity_magnitude_guard(self):
        with pytest.raises(ValueError, match="gravity"):
            NoiseConfig(gravity=[0, 0, -5.0])
        cfg = NoiseConfig(gravity=[0, 0, -5.0], strict_gravity=False)
        assert cfg.gravity[2] == -5.0


class TestBeliefInitial:
    def test_zero_diag(self):
        b = belief_initial(np.zeros(15), 0.0)
        np.testing.assert_array_equal(b.cov, np.zeros((15, 15)))
        np.testing.assert_array_equal(b.nav.rot, np.eye(3))
        np.testing.assert_array_equal(b.bias.gyro_bias, np.zeros(3))

    def test_trace(self):
        b = belief_initial(1e-4 * np.ones(15), 0.0)
        assert np.trace(b.cov) == pytest.approx(15e-4)

    def test_invariants_hold(self):
        b = belief_initial(1e-4 * np.ones(15), 0.0)
        b.validate()

    def test_rejects_negative(self):
        diag = np.ones(15)
        diag[3] = -1.0
        with pytest.raises(ValueError, match="non-negative"):
            belief_initial(diag, 0.0)

    def test_rejects_wrong_length(self):
        with pytest.raises(ValueError):
            belief_initial(np.ones(9), 0.0)


class TestFilterBelief:
    def test_symmetrizes_on_construction(self, rng):
        M = rng.normal(size=(15, 15))
        b = FilterBelief(SE23.identity(), ImuBias.zero(), M, 0.0)
        assert np.linalg.norm(b.cov - b.cov.T) == 0.0

    def test_validate_catches_indefinite(self):
        b = FilterBelief(SE23.identity(), ImuBias.zero(), -np.eye(15), 0.0)
        with pytest.raises(ValueError, match="PSD"):
            b.validate()


class TestValidateLog:
    @staticmethod
    def _log(times):
        return [ImuSample(t, np.zeros(3), [0, 0, 9.81]) for t in times]

    def test_100hz(self):
        assert validate_log(self._log([0.0, 0.01, 0.02])) == pytest.approx(100.0)

    def test_non_monotone(self):
        with pytest.raises(ValueError, match="non-monotone"):
            validate_log(self._log([0.0, 0.02, 0.01]))

    def test_gap_flagged(self):
        with pytest.warns(LogGapWarning):
            validate_log(self._log([0.0, 0.01, 0.5]))

    def test_too_short(self):
        with pytest.raises(ValueError, match="at least 2"):
            validate_log(self._log([0.0]))
