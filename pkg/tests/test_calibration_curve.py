import numpy as np
import pytest
from scipy.optimize import brentq

from cek.errors import ParameterError
from cek.evaluation.calibration_curve import binomial_ci_bounds, calibration_curve


class TestCiBounds:
    def test_half_with_25_samples(self):
        # Oracle: brentq on each side of r +/- sqrt(r(1-r)/25) = 0.5
        lo_oracle = brentq(lambda r: r + np.sqrt(r * (1 - r) / 25) - 0.5, 0, 0.5)
        hi_oracle = brentq(lambda r: r - np.sqrt(r * (1 - r) / 25) - 0.5, 0.5, 1)
        lo, hi = binomial_ci_bounds(0.5, 25)
        assert lo == pytest.approx(lo_oracle, abs=1e-3)
        assert hi == pytest.approx(hi_oracle, abs=1e-3)
        assert lo == pytest.approx(0.4019419324, abs=1e-9)
        assert hi == pytest.approx(0.5980580676, abs=1e-9)

    @pytest.mark.parametrize("p", [0.0, 0.01, 0.25, 0.5, 0.75, 0.99, 1.0])
    @pytest.mark.parametrize("n", [1, 5, 25, 1000])
    def test_defining_equation_residual(self, p, n):
        lo, hi = binomial_ci_bounds(p, n)
        assert abs(lo + np.sqrt(lo * (1 - lo) / n) - p) < 1e-9
        assert abs(hi - np.sqrt(hi * (1 - hi) / n) - p) < 1e-9
        assert 0.0 <= lo <= p <= hi <= 1.0

    def test_edge_cases_closed_form(self):
        lo, hi = binomial_ci_bounds(0.0, 25)
        assert (lo, hi) == (0.0, pytest.approx(1 / 26))
        lo, hi = binomial_ci_bounds(1.0, 25)
        assert (lo, hi) == (pytest.approx(25 / 26), 1.0)


class TestCalibrationCurve:
    def test_constant_predictor_on_diagonal(self):
        scores = np.full(100, 0.3)
        labels = np.r_[np.ones(30), np.zeros(70)]
        curve = calibration_curve(scores, labels, resolution=10)
        assert len(curve.x) == 1
        assert curve.x[0] == pytest.approx(0.3)
        assert curve.y[0] == pytest.approx(0.3)

    def test_calibrated_scores_cover_diagonal(self):
        rng = np.random.default_rng(11)
        scores = rng.random(10000)
        labels = (rng.random(10000) < scores).astype(float)
        curve = calibration_curve(scores, labels, resolution=10)
        lo, hi = curve.extras["ci_low"], curve.extras["ci_high"]
        covered = (lo <= curve.x) & (curve.x <= hi)
        assert covered.mean() >= 0.7  # ~68% nominal per-bin coverage at 1 sd

    def test_bin_sizes_roughly_equal_frequency(self):
        rng = np.random.default_rng(3)
        curve = calibration_curve(rng.random(1000), np.zeros(1000), resolution=10)
        assert (np.abs(curve.extras["n"] - 100) <= 1).all()

    def test_window_strategy_requires_width(self):
        scores = np.linspace(0, 1, 50)
        labels = (scores > 0.5).astype(float)
        with pytest.raises(ParameterError):
            calibration_curve(scores, labels, strategy="window")
        curve = calibration_curve(scores, labels, strategy="window", window_width=20)
        assert len(curve.x) > 1
        assert (np.diff(curve.x) >= 0).all()

    def test_scores_outside_unit_interval_rejected(self):
        with pytest.raises(ParameterError):
            calibration_curve(np.array([-0.1, 0.5]), np.array([0, 1]))

    def test_ci_arrays_satisfy_equation(self):
        rng = np.random.default_rng(5)
        scores = rng.random(500)
        labels = (rng.random(500) < 0.4).astype(float)
        curve = calibration_curve(scores, labels, resolution=7)
        n = curve.extras["n"]
        lo, hi = curve.extras["ci_low"], curve.extras["ci_high"]
        for p, ni, l, h in zip(curve.y, n, lo, hi):
            assert abs(l + np.sqrt(l * (1 - l) / ni) - p) < 1e-9
            assert abs(h - np.sqrt(h * (1 - h) / ni) - p) < 1e-9
