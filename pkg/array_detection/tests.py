import math

import numpy as np
import pytest

from array_detection.detection import (
    balance_gain, is_balanced, mean_signal, noise_variance, optimal_gain, proportionality, scheme_report,
    signal_slope, split_detector_gain,
)
from array_detection.models import DetectionReport, GainDistribution
from bounds.fisher import crb_summary
from imagecrb.exceptions import ConfigurationError, NoIntensitySchemeError, SchemeConfigurationError
from imaging import library
from imaging.models import Illumination
from transverse.models import TransverseGrid


@pytest.fixture
def grid():
    return TransverseGrid.default(1)


@pytest.fixture
def displaced():
    return library.displaced_gaussian()


class TestGainDistribution:

    def test_all_zero_rejected(self, grid):
        with pytest.raises(ConfigurationError):
            GainDistribution(grid, np.zeros(grid.size))

    def test_wrong_size_rejected(self, grid):
        with pytest.raises(ConfigurationError):
            GainDistribution(grid, np.ones(3))

    def test_report_snr(self):
        report = DetectionReport.build(mean_signal=3.0, noise_variance=4.0, p_min=0.1)
        assert report.snr == pytest.approx(2.25, rel=1e-12)


class TestMeanSignal:

    @pytest.mark.parametrize("p", [-0.1, 0.0, 0.05])
    def test_uniform_gain_counts_all_photons(self, grid, displaced, p):
        uniform = GainDistribution(grid, np.ones(grid.size))
        assert mean_signal(uniform, displaced, 1e4, p) == pytest.approx(1e4, abs=1e-6 * 1e4)

    def test_optimal_gain_is_balanced(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        assert gain.balanced
        assert is_balanced(gain, displaced, 1e4)
        assert abs(mean_signal(gain, displaced, 1e4, 0.0)) <= 1e-9 * 1e4

    def test_first_order_signal(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        assert mean_signal(gain, displaced, 1e4, 0.01) == pytest.approx(200.0, rel=1e-2)

    def test_first_order_signal_for_waist_change(self, grid):
        model = library.waist_scaled_gaussian()
        gain = optimal_gain(model, grid)
        a = math.sqrt(2.0)
        p = 0.01 * a
        assert mean_signal(gain, model, 1e4, p) == pytest.approx(2e4 * p / a, rel=1e-2)


class TestOptimalGain:

    def test_linear_ramp(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        inner = np.abs(grid.x) < 4.5
        np.testing.assert_allclose(gain.gains[inner], 2.0 * grid.x[inner], atol=1e-9)

    def test_dark_cells_clamped(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        assert gain.gains[0] == 0.0
        assert gain.gains[-1] == 0.0

    def test_clamping_does_not_change_snr(self, grid, displaced):
        clamped = scheme_report(optimal_gain(displaced, grid), displaced, 1e4, p=0.01)
        ramp = GainDistribution(grid, 2.0 * grid.x)
        unclamped = scheme_report(ramp, displaced, 1e4, p=0.01)
        assert clamped.snr == pytest.approx(unclamped.snr, rel=1e-9)

    def test_beta_scales_gains_not_snr(self, grid, displaced):
        single = optimal_gain(displaced, grid)
        double = optimal_gain(displaced, grid, beta=2.0)
        np.testing.assert_allclose(double.gains, 2.0 * single.gains, rtol=1e-12, atol=1e-15)
        first = scheme_report(single, displaced, 1e4, p=0.01)
        second = scheme_report(double, displaced, 1e4, p=0.01)
        assert second.snr == pytest.approx(first.snr, rel=1e-12)
        assert second.p_min == pytest.approx(first.p_min, rel=1e-12)

    def test_phase_only_family_has_no_scheme(self, grid):
        with pytest.raises(NoIntensitySchemeError, match="no intensity scheme exists"):
            optimal_gain(library.phase_tilt(), grid)


class TestNoiseVariance:

    def test_uniform_gain_is_total_shot_noise(self, grid, displaced):
        uniform = GainDistribution(grid, np.ones(grid.size))
        assert noise_variance(uniform, displaced, 1e4) == pytest.approx(1e4, rel=1e-9)

    def test_optimal_gain_coherent(self, grid, displaced):
        assert noise_variance(optimal_gain(displaced, grid), displaced, 1e4) == pytest.approx(1e4, rel=1e-6)

    def test_optimal_gain_squeezed(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        value = noise_variance(gain, displaced, 1e4, sigma_P=math.sqrt(0.5), squeezed_noise_mode=True)
        assert value == pytest.approx(0.5e4, rel=1e-6)

    def test_squeezed_variance_follows_beta(self, grid, displaced):
        gain = optimal_gain(displaced, grid, beta=3.0)
        value = noise_variance(gain, displaced, 1e4, sigma_P=math.sqrt(0.5), squeezed_noise_mode=True)
        assert value == pytest.approx(9 * 0.5e4, rel=1e-6)
        assert proportionality(gain, displaced)[0] == pytest.approx(3.0, rel=1e-9)

    def test_locally_sub_poissonian_beam(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        assert noise_variance(gain, displaced, 1e4, sigma_P=math.sqrt(0.5)) == pytest.approx(0.5e4, rel=1e-6)

    def test_squeezing_requires_matched_gain(self, grid, displaced):
        with pytest.raises(SchemeConfigurationError, match="squeezed variance defined only for noise-mode-matched gain"):
            noise_variance(split_detector_gain(grid, displaced), displaced, 1e4, sigma_P=0.5, squeezed_noise_mode=True)


class TestSchemeReport:

    def test_coherent_reaches_bound(self, grid, displaced):
        report = scheme_report(optimal_gain(displaced, grid), displaced, 1e6)
        assert report.p_min == pytest.approx(5e-4, rel=1e-9)
        summary = crb_summary(displaced, grid, Illumination.coherent(1e6))
        assert report.p_min == pytest.approx(summary.crb_intensity, rel=1e-9)

    def test_squeezed_reaches_bound(self, grid, displaced):
        report = scheme_report(optimal_gain(displaced, grid), displaced, 1e6, sigma_P=0.5, squeezed_noise_mode=True)
        assert report.squeezed
        assert report.p_min == pytest.approx(2.5e-4, rel=1e-9)

    def test_waist_change_reaches_bound(self, grid):
        model = library.waist_scaled_gaussian()
        report = scheme_report(optimal_gain(model, grid), model, 1e4)
        summary = crb_summary(model, grid, Illumination.coherent(1e4))
        assert report.p_min == pytest.approx(summary.crb_intensity, rel=1e-9)

    def test_snr_definition(self, grid, displaced):
        report = scheme_report(optimal_gain(displaced, grid), displaced, 1e4, p=0.02)
        assert report.snr == pytest.approx(report.mean_signal ** 2 / report.noise_variance, rel=1e-12)

    def test_split_detector_baseline(self, grid, displaced):
        optimum = scheme_report(optimal_gain(displaced, grid), displaced, 1e4)
        split = scheme_report(split_detector_gain(grid, displaced), displaced, 1e4)
        assert split.p_min / optimum.p_min == pytest.approx(math.sqrt(math.pi / 2), rel=1e-3)

    def test_insensitive_gain(self, grid, displaced):
        uniform = GainDistribution(grid, np.ones(grid.size))
        with pytest.raises(SchemeConfigurationError, match="gain insensitive to p"):
            signal_slope(uniform, displaced, 1e4)


class TestOptimality:

    @pytest.mark.parametrize("model", [library.displaced_gaussian(), library.waist_scaled_gaussian()], ids=str)
    def test_random_balanced_gains_are_worse(self, grid, model):
        rng = np.random.default_rng(2024)
        optimum = optimal_gain(model, grid)
        best = scheme_report(optimum, model, 1e4).p_min
        for trial in range(100):
            if trial % 2:
                values = optimum.gains + 0.1 * rng.normal(size=grid.size)
            else:
                values = rng.normal(size=grid.size)
            gain = balance_gain(values, model, grid)
            assert scheme_report(gain, model, 1e4).p_min > best

    def test_proportional_gain_matches(self, grid, displaced):
        optimum = optimal_gain(displaced, grid)
        doubled = optimum.scaled(2.0)
        first = scheme_report(optimum, displaced, 1e4, p=0.01)
        second = scheme_report(doubled, displaced, 1e4, p=0.01)
        assert second.snr == pytest.approx(first.snr, rel=1e-12)
        assert second.p_min == pytest.approx(first.p_min, rel=1e-12)
