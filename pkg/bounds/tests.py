import math

import numpy as np
import pytest

from bounds.fisher import crb_summary, fisher_gauss, fisher_poisson, fisher_poisson_integral, poisson_integral_terms
from bounds.sensitivity import compute_a, compute_b, noise_mode, signal_mode
from imagecrb.exceptions import NoIntensitySchemeError, ParameterNotEncodedError
from imaging import library
from imaging.derivatives import mode_at
from imaging.models import Illumination
from transverse.models import TransverseGrid
from transverse.modes import hermite_gauss, hermite_gauss_values
from transverse.quadrature import inner_product, norm_sq

BUILTINS = [
    library.displaced_gaussian(),
    library.displaced_gaussian(w=2.0),
    library.waist_scaled_gaussian(),
    library.phase_tilt(),
    library.hermite_superposition(coefficients=(1.0, 0.5j), slopes=(0.0, 0.3, 1.0)),
]


def grid_for(model, dimension=1):
    return TransverseGrid.default(dimension, waist=model.waist)


def random_superpositions(count, seed=11):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        coefficients = rng.normal(size=3) + 1j * rng.normal(size=3)
        slopes = rng.normal(size=4) + 1j * rng.normal(size=4)
        yield library.hermite_superposition(coefficients=coefficients, slopes=slopes)


class TestSensitivityParameters:

    @pytest.mark.parametrize("w", [0.5, 1.0, 2.0])
    def test_displaced_gaussian(self, w):
        model = library.displaced_gaussian(w=w)
        grid = grid_for(model)
        assert compute_a(model, grid) == pytest.approx(w, rel=1e-5)
        assert compute_b(model, grid) == pytest.approx(w, rel=1e-5)
        assert compute_a(model, grid) == pytest.approx(compute_b(model, grid), rel=1e-9)

    def test_phase_tilt(self):
        model = library.phase_tilt(w=1.0, kappa=1.0)
        grid = grid_for(model)
        assert math.isinf(compute_a(model, grid))
        assert compute_b(model, grid) == pytest.approx(2.0, rel=1e-5)

    def test_phase_tilt_b_scales_with_kappa(self):
        model = library.phase_tilt(w=1.0, kappa=4.0)
        assert compute_b(model, grid_for(model)) == pytest.approx(0.5, rel=1e-5)

    @pytest.mark.parametrize("dimension, expected", [(1, math.sqrt(2.0)), (2, 1.0)])
    def test_waist_scaled_gaussian(self, dimension, expected):
        model = library.waist_scaled_gaussian()
        grid = grid_for(model, dimension)
        assert compute_a(model, grid) == pytest.approx(expected, rel=1e-5)
        assert compute_b(model, grid) == pytest.approx(expected, rel=1e-5)

    def test_constant_model_does_not_encode_p(self):
        grid = TransverseGrid.default(1)
        u0 = hermite_gauss_values(grid.coordinates, 0, 1.0)
        model = library.custom("constant", lambda g, p: u0, p_scale=0.1)
        with pytest.raises(ParameterNotEncodedError, match="parameter not encoded"):
            compute_b(model, grid)
        with pytest.raises(ParameterNotEncodedError):
            signal_mode(model, grid)

    @pytest.mark.parametrize("model", BUILTINS, ids=str)
    def test_grid_refinement_is_stable(self, model):
        grid = grid_for(model)
        fine = grid.refined()
        assert compute_b(model, fine) == pytest.approx(compute_b(model, grid), rel=1e-6)
        a, a_fine = compute_a(model, grid), compute_a(model, fine)
        if math.isinf(a):
            assert math.isinf(a_fine)
        else:
            assert a_fine == pytest.approx(a, rel=1e-6)

    @pytest.mark.parametrize("model", [*BUILTINS, *random_superpositions(50)], ids=str)
    def test_a_never_below_b(self, model):
        grid = grid_for(model)
        a, b = compute_a(model, grid), compute_b(model, grid)
        assert a >= b * (1.0 - 1e-9)


class TestModes:

    def test_displaced_gaussian_noise_mode_is_first_hermite_gauss(self):
        grid = TransverseGrid.default(1)
        u_I = noise_mode(library.displaced_gaussian(), grid)
        np.testing.assert_allclose(u_I.values, hermite_gauss(grid, 1).values, atol=1e-5)
        np.testing.assert_allclose(signal_mode(library.displaced_gaussian(), grid).values, u_I.values, atol=1e-9)

    def test_waist_scaled_noise_mode_is_orthogonal(self):
        grid = TransverseGrid.default(1)
        model = library.waist_scaled_gaussian()
        u_I = noise_mode(model, grid)
        assert u_I.is_real
        assert abs(inner_product(mode_at(model, grid, 0.0), u_I)) < 1e-6

    def test_phase_tilt_signal_mode(self):
        grid = TransverseGrid.default(1)
        u_E = signal_mode(library.phase_tilt(), grid)
        expected = 1j * 2.0 * grid.x * hermite_gauss_values(grid.coordinates, 0, 1.0)
        np.testing.assert_allclose(u_E.values, expected, atol=1e-5)

    def test_phase_tilt_has_no_noise_mode(self):
        with pytest.raises(NoIntensitySchemeError, match="no intensity noise-mode"):
            noise_mode(library.phase_tilt(), TransverseGrid.default(1))

    @pytest.mark.parametrize("model", BUILTINS, ids=str)
    def test_signal_mode_is_normalized_and_orthogonal_in_phase(self, model):
        grid = grid_for(model)
        u_E = signal_mode(model, grid)
        assert norm_sq(u_E) == pytest.approx(1.0, abs=1e-9)
        assert abs(inner_product(mode_at(model, grid, 0.0), u_E).real) < 1e-6


class TestFisherInformation:

    @pytest.mark.parametrize("model", BUILTINS, ids=str)
    def test_integral_form_matches_closed_form(self, model):
        grid = grid_for(model)
        N = 1e4
        closed = fisher_poisson(model, grid, N)
        integral = fisher_poisson_integral(model, grid, N)
        if closed == 0.0:
            assert integral == pytest.approx(0.0, abs=1e-6 * N)
        else:
            assert integral == pytest.approx(closed, rel=1e-3)

    @pytest.mark.parametrize("model", BUILTINS, ids=str)
    def test_curvature_term_vanishes(self, model):
        N = 1e4
        _, curvature = poisson_integral_terms(model, grid_for(model), N)
        assert abs(curvature) <= 1e-6 * N

    def test_displaced_gaussian_values(self):
        grid = TransverseGrid.default(1)
        model = library.displaced_gaussian()
        assert fisher_poisson(model, grid, 1e6) == pytest.approx(4e6, rel=1e-9)
        assert fisher_poisson_integral(model, grid, 1e4) == pytest.approx(4e4, rel=1e-3)

    def test_phase_tilt_has_no_intensity_information(self):
        assert fisher_poisson(library.phase_tilt(), TransverseGrid.default(1), 1e6) == 0.0

    def test_gauss_coherent(self):
        grid = TransverseGrid.default(1)
        light = Illumination.coherent(1e4)
        assert fisher_gauss(library.displaced_gaussian(), grid, light) == pytest.approx(4e4, rel=1e-3)
        assert fisher_gauss(library.phase_tilt(), grid, light) == pytest.approx(1e4, rel=1e-3)

    def test_gauss_squeezed_real_family(self):
        light = Illumination.from_variances(1e4, sigma_P2=0.5, sigma_Q2=2.0)
        value = fisher_gauss(library.displaced_gaussian(), TransverseGrid.default(1), light)
        assert value == pytest.approx(8e4, rel=1e-3)

    def test_gauss_squeezed_phase_family_uses_q_quadrature(self):
        light = Illumination.squeezed(1e4, 0.5)
        value = fisher_gauss(library.phase_tilt(), TransverseGrid.default(1), light)
        assert value == pytest.approx(4e4 / (4.0 * 2.0), rel=1e-3)

    @pytest.mark.parametrize("N", [1e2, 1e4, 1e6])
    def test_linear_in_photon_number(self, N):
        grid = TransverseGrid.default(1)
        model = library.waist_scaled_gaussian()
        assert fisher_poisson(model, grid, N) == pytest.approx(N * fisher_poisson(model, grid, 1.0), rel=1e-12)
        light = Illumination.coherent(N)
        reference = fisher_gauss(model, grid, Illumination.coherent(1.0))
        assert fisher_gauss(model, grid, light) == pytest.approx(N * reference, rel=1e-12)


class TestCrbSummary:

    def test_displaced_gaussian_plug_in(self):
        summary = crb_summary(library.displaced_gaussian(), TransverseGrid.default(1), Illumination.coherent(1e6))
        assert summary.crb_intensity == pytest.approx(5e-4, rel=1e-5)
        assert summary.crb_field == pytest.approx(5e-4, rel=1e-5)
        assert summary.fisher_poisson == pytest.approx(4e6, rel=1e-5)
        assert summary.field_advantage == pytest.approx(1.0, rel=1e-9)
        assert norm_sq(summary.u_I) == pytest.approx(1.0, abs=1e-9)
        assert norm_sq(summary.u_E) == pytest.approx(1.0, abs=1e-9)

    def test_squeezing_halves_bounds(self):
        grid = TransverseGrid.default(1)
        model = library.displaced_gaussian()
        coherent = crb_summary(model, grid, Illumination.coherent(1e6))
        squeezed = crb_summary(model, grid, Illumination.squeezed(1e6, 0.25))
        assert squeezed.crb_intensity == pytest.approx(coherent.crb_intensity / 2, rel=1e-12)
        assert squeezed.crb_field == pytest.approx(coherent.crb_field / 2, rel=1e-12)
        assert squeezed.fisher_intensity == pytest.approx(4 * coherent.fisher_intensity, rel=1e-12)

    def test_phase_tilt(self):
        summary = crb_summary(library.phase_tilt(), TransverseGrid.default(1), Illumination.coherent(1e6))
        assert math.isinf(summary.crb_intensity)
        assert math.isinf(summary.field_advantage)
        assert summary.u_I is None
        assert not summary.has_intensity_scheme
        assert summary.crb_field == pytest.approx(2.0 / 2e3, rel=1e-5)

    @pytest.mark.parametrize("N", [1e2, 1e4, 1e6])
    def test_bounds_scale_as_inverse_sqrt_n(self, N):
        grid = TransverseGrid.default(1)
        model = library.waist_scaled_gaussian()
        reference = crb_summary(model, grid, Illumination.coherent(1.0))
        summary = crb_summary(model, grid, Illumination.coherent(N))
        assert summary.crb_intensity * math.sqrt(N) == pytest.approx(reference.crb_intensity, rel=1e-9)
        assert summary.crb_field * math.sqrt(N) == pytest.approx(reference.crb_field, rel=1e-9)

    @pytest.mark.parametrize("model", [*BUILTINS, *random_superpositions(50)], ids=str)
    def test_field_bound_never_above_intensity_bound(self, model):
        summary = crb_summary(model, grid_for(model), Illumination.coherent(1e4))
        assert summary.crb_field <= summary.crb_intensity * (1.0 + 1e-9)
