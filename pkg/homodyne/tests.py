import math

import numpy as np
import pytest

from array_detection.detection import mean_signal
from bounds.fisher import crb_summary
from homodyne.detection import (
    equivalent_gain, homodyne_report, lo_shape, mean_difference_signal, mode_matched_config, mode_mismatch, scan_phase,
    tune_phase,
)
from homodyne.models import HomodyneConfig
from imagecrb.exceptions import ConfigurationError, SchemeConfigurationError
from imaging import library
from imaging.models import Illumination
from transverse.models import TransverseGrid
from transverse.modes import hermite_gauss

BUILTINS = [
    library.displaced_gaussian(),
    library.waist_scaled_gaussian(),
    library.phase_tilt(),
    library.hermite_superposition(coefficients=(1.0, 0.5j), slopes=(0.0, 0.3, 1.0)),
]


@pytest.fixture
def grid():
    return TransverseGrid.default(1)


@pytest.fixture
def displaced():
    return library.displaced_gaussian()


class TestHomodyneConfig:

    def test_weak_lo_rejected(self, grid):
        with pytest.raises(ConfigurationError, match="N_LO"):
            HomodyneConfig(lo_mode=hermite_gauss(grid, 1), N_LO=50.0, theta_LO=0.0, N=1.0)

    def test_unnormalized_lo_rejected(self, grid):
        lo = hermite_gauss(grid, 1)
        with pytest.raises(ConfigurationError, match="normalized"):
            HomodyneConfig(lo_mode=lo.with_values(2 * lo.values), N_LO=1e8, theta_LO=0.0, N=1e4)

    def test_default_lo_power(self, grid, displaced):
        assert mode_matched_config(displaced, grid, 1e4).N_LO == pytest.approx(1e8)


class TestLocalOscillator:

    def test_displaced_gaussian_lo_is_first_hermite_gauss(self, grid, displaced):
        np.testing.assert_allclose(lo_shape(displaced, grid).values, hermite_gauss(grid, 1).values, atol=1e-5)

    def test_phase_tilt_lo_is_real(self, grid):
        lo = lo_shape(library.phase_tilt(), grid)
        assert np.max(np.abs(lo.values.imag)) < 1e-12

    def test_tuned_phase_real_family(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4)
        assert config.theta_LO == pytest.approx(0.0, abs=1e-6)

    def test_tuned_phase_phase_family(self, grid):
        config = mode_matched_config(library.phase_tilt(), grid, 1e4)
        assert config.theta_LO == pytest.approx(math.pi / 2, abs=1e-3)

    @pytest.mark.parametrize("model", BUILTINS, ids=str)
    def test_scan_agrees_with_closed_form(self, grid, model):
        config = mode_matched_config(model, grid, 1e4)
        gap = np.angle(np.exp(1j * (tune_phase(config, model) - scan_phase(config, model))))
        assert abs(gap) <= math.radians(1.0)


class TestDifferenceSignal:

    @pytest.mark.parametrize("theta", [0.0, 0.7, math.pi / 2, 2.5])
    def test_vanishes_at_zero(self, grid, displaced, theta):
        config = mode_matched_config(displaced, grid, 1e4, n_lo=1e8, theta_lo=theta)
        assert abs(mean_difference_signal(config, displaced, 0.0)) <= 1e-6 * math.sqrt(1e12)

    def test_first_order_signal(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4, n_lo=1e8)
        assert mean_difference_signal(config, displaced, 0.01) == pytest.approx(2e4, rel=1e-2)

    def test_quadrature_selection(self, grid, displaced):
        tuned = mode_matched_config(displaced, grid, 1e4, n_lo=1e8)
        detuned = tuned.with_phase(tuned.theta_LO + math.pi / 2)
        reference = mean_difference_signal(tuned, displaced, 0.01)
        assert abs(mean_difference_signal(detuned, displaced, 0.01)) <= 1e-2 * abs(reference)

    def test_matches_array_detection_with_equivalent_gain(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4, n_lo=1e8)
        gain = equivalent_gain(config, displaced)
        homodyne = mean_difference_signal(config, displaced, 1e-3)
        array = mean_signal(gain, displaced, 1e4, 1e-3)
        assert array == pytest.approx(homodyne, rel=1e-6)


class TestHomodyneReport:

    def test_coherent_plug_in(self, grid, displaced):
        report = homodyne_report(mode_matched_config(displaced, grid, 1e6), displaced)
        assert report.p_min == pytest.approx(5e-4, rel=1e-9)

    def test_squeezed_plug_in(self, grid, displaced):
        report = homodyne_report(
            mode_matched_config(displaced, grid, 1e6), displaced, sigma_P=math.sqrt(0.5), squeezed_signal_mode=True
        )
        assert report.p_min == pytest.approx(5e-4 / math.sqrt(2.0), rel=1e-9)

    @pytest.mark.parametrize("model", BUILTINS, ids=str)
    def test_reaches_field_bound(self, grid, model):
        config = mode_matched_config(model, grid, 1e4)
        coherent = homodyne_report(config, model)
        assert coherent.p_min == pytest.approx(crb_summary(model, grid, Illumination.coherent(1e4)).crb_field, rel=1e-9)

    @pytest.mark.parametrize("model", BUILTINS[:2], ids=str)
    def test_squeezed_reaches_field_bound(self, grid, model):
        config = mode_matched_config(model, grid, 1e4)
        squeezed = homodyne_report(config, model, sigma_P=0.5, squeezed_signal_mode=True)
        assert squeezed.p_min == pytest.approx(
            crb_summary(model, grid, Illumination.squeezed(1e4, 0.25)).crb_field, rel=1e-9
        )

    def test_snr_is_one_at_p_min(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e10)
        p_min = homodyne_report(config, displaced).p_min
        assert homodyne_report(config, displaced, p=p_min).snr == pytest.approx(1.0, abs=1e-9)

    def test_snr_independent_of_lo_power(self, grid, displaced):
        weak = homodyne_report(mode_matched_config(displaced, grid, 1e4, n_lo=1e6), displaced, p=0.01)
        strong = homodyne_report(mode_matched_config(displaced, grid, 1e4, n_lo=1e10), displaced, p=0.01)
        assert strong.snr == pytest.approx(weak.snr, rel=1e-12)

    def test_squeezing_needs_mode_matched_lo(self, grid, displaced):
        config = HomodyneConfig(lo_mode=hermite_gauss(grid, 3), N_LO=1e8, theta_LO=0.0, N=1e4)
        with pytest.raises(SchemeConfigurationError, match="squeezing not mode-matched"):
            homodyne_report(config, displaced, sigma_P=0.5, squeezed_signal_mode=True)

    def test_squeezing_rejected_for_phase_encoded_signal(self, grid):
        model = library.phase_tilt()
        config = mode_matched_config(model, grid, 1e4)
        with pytest.raises(SchemeConfigurationError, match="in quadrature with the mean field"):
            homodyne_report(config, model, sigma_P=0.5, squeezed_signal_mode=True)

    def test_mode_mismatch_ignores_global_phase(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4)
        rotated = HomodyneConfig(
            lo_mode=config.lo_mode.with_values(1j * config.lo_mode.values, normalized=True),
            N_LO=config.N_LO, theta_LO=0.0, N=config.N,
        )
        assert mode_mismatch(rotated, displaced) <= 1e-9
        assert mode_mismatch(HomodyneConfig(hermite_gauss(grid, 0), 1e8, 0.0, 1e4), displaced) == pytest.approx(
            math.sqrt(2.0), rel=1e-9
        )
