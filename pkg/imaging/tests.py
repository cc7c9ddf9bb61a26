import logging

import numpy as np
import pytest

from imagecrb.exceptions import ConfigurationError, DerivativeUnreliableError, ModelEvaluationError
from imaging import library
from imaging.derivatives import mode_at, mode_derivative, modulus_derivative
from imaging.models import Illumination, ImageModel
from transverse.models import TransverseGrid
from transverse.modes import hermite_gauss_values
from transverse.quadrature import inner_product, norm_sq


@pytest.fixture
def grid():
    return TransverseGrid.default(1)


def finite_difference_twin(model):
    """Same evaluator, derivative left to finite differences."""
    return library.custom(model.name + "-fd", model.evaluator, model.p_scale, waist=model.waist)


class TestIllumination:

    def test_coherent(self):
        light = Illumination.coherent(1e4)
        assert light.is_coherent
        assert light.sigma_P2 == 1.0

    def test_squeezed_is_minimum_uncertainty(self):
        light = Illumination.squeezed(1e4, 0.25)
        assert light.sigma_P2 == pytest.approx(0.25)
        assert light.sigma_Q2 == pytest.approx(4.0)
        assert not light.is_coherent

    def test_from_variances_defaults_to_minimum_uncertainty(self):
        assert Illumination.from_variances(100, sigma_P2=0.5).sigma_Q2 == pytest.approx(2.0)

    def test_heisenberg_violation_rejected(self):
        with pytest.raises(ConfigurationError, match="Heisenberg"):
            Illumination(N=100, sigma_P=0.5, sigma_Q=1.0)

    def test_non_positive_photon_number_rejected(self):
        with pytest.raises(ConfigurationError):
            Illumination(N=0)


class TestImageModel:

    def test_analytic_mode_needs_a_derivative(self):
        with pytest.raises(ConfigurationError):
            ImageModel(name="m", p_scale=0.1, evaluator=lambda g, p: g.x, derivative_mode=ImageModel.ANALYTIC)

    def test_p_scale_must_be_positive(self):
        with pytest.raises(ConfigurationError):
            library.displaced_gaussian(p_scale=0.0)


class TestBuiltinModels:

    @pytest.mark.parametrize("model", [
        library.displaced_gaussian(),
        library.waist_scaled_gaussian(),
        library.phase_tilt(kappa=2.0),
        library.hermite_superposition(coefficients=(1.0, 0.5j), slopes=(0.0, 0.0, 1.0)),
    ], ids=str)
    def test_normalized_across_range(self, grid, model):
        for p in (-model.p_scale, 0.0, 0.5 * model.p_scale, model.p_scale):
            assert norm_sq(mode_at(model, grid, p)) == pytest.approx(1.0, abs=1e-9)

    def test_two_dimensional_normalization(self):
        grid = TransverseGrid.default(2)
        for model in (library.displaced_gaussian(), library.waist_scaled_gaussian()):
            assert norm_sq(mode_at(model, grid, 0.05)) == pytest.approx(1.0, abs=1e-9)

    def test_refining_grid_leaves_norm_unchanged(self, grid):
        model = library.displaced_gaussian()
        coarse = norm_sq(mode_at(model, grid, 0.0))
        fine = norm_sq(mode_at(model, grid.refined(), 0.0))
        assert abs(coarse - fine) < 1e-8

    def test_displaced_overlap(self, grid):
        model = library.displaced_gaussian()
        overlap = inner_product(mode_at(model, grid, 0.0), mode_at(model, grid, 0.5))
        assert overlap.real == pytest.approx(np.exp(-0.125), abs=1e-9)
        assert abs(overlap.imag) < 1e-12

    def test_out_of_range_is_flagged(self, grid, caplog):
        model = library.displaced_gaussian()
        with caplog.at_level(logging.WARNING):
            field = mode_at(model, grid, 2 * model.p_scale)
        assert field.out_of_range
        assert "outside the declared range" in caplog.text
        assert not mode_at(model, grid, model.p_scale).out_of_range


class TestDerivatives:

    @pytest.mark.parametrize("model", [
        library.displaced_gaussian(),
        library.displaced_gaussian(w=2.0),
        library.waist_scaled_gaussian(),
        library.phase_tilt(kappa=3.0),
    ], ids=str)
    def test_analytic_matches_finite_difference(self, grid, model):
        grid = TransverseGrid.default(1, waist=model.waist)
        analytic = mode_derivative(model, grid).values
        numeric = mode_derivative(finite_difference_twin(model), grid).values
        assert np.linalg.norm(analytic - numeric) <= 1e-6 * np.linalg.norm(analytic)

    def test_displaced_gaussian_modulus_derivative(self, grid):
        model = library.displaced_gaussian()
        expected = 2.0 * grid.x * hermite_gauss_values(grid.coordinates, 0, 1.0)
        np.testing.assert_allclose(modulus_derivative(model, grid).values.real, expected, atol=1e-10)

    def test_phase_only_family_has_no_modulus_derivative(self, grid):
        derivative = modulus_derivative(library.phase_tilt(kappa=2.0), grid)
        assert np.max(np.abs(derivative.values)) < 1e-12

    def test_constant_model(self, grid):
        u0 = hermite_gauss_values(grid.coordinates, 0, 1.0)
        model = library.custom("constant", lambda g, p: u0, p_scale=0.1)
        assert np.all(mode_derivative(model, grid).values == 0)
        assert np.all(modulus_derivative(model, grid).values == 0)

    def test_unreliable_finite_difference(self, grid):
        def jittery(g, p):
            return hermite_gauss_values(g.coordinates, 0, 1.0) * np.exp(1e-3j * np.sin(1e6 * p))

        model = library.custom("jittery", jittery, p_scale=1.0)
        with pytest.raises(DerivativeUnreliableError, match="unreliable"):
            mode_derivative(model, grid)

    def test_non_finite_model(self, grid):
        model = library.custom("broken", lambda g, p: np.full(g.size, np.nan), p_scale=0.1)
        with pytest.raises(ModelEvaluationError, match="model evaluation failed"):
            mode_at(model, grid, 0.0)

    def test_unnormalized_model_rejected(self, grid):
        model = library.custom("doubled", lambda g, p: 2.0 * hermite_gauss_values(g.coordinates, 0, 1.0, center=p), 0.1)
        with pytest.raises(ModelEvaluationError, match="not normalized"):
            mode_at(model, grid, 0.0)
        with pytest.raises(ModelEvaluationError, match="not normalized"):
            mode_derivative(model, grid)

    def test_normalization_not_required_out_of_range(self, grid, caplog):
        def fading(g, p):
            return hermite_gauss_values(g.coordinates, 0, 1.0) * (1.0 if abs(p) <= 0.1 else 0.5)

        model = library.custom("fading", fading, p_scale=0.1)
        with caplog.at_level(logging.WARNING):
            field = mode_at(model, grid, 0.5)
        assert field.out_of_range
        assert norm_sq(field) == pytest.approx(0.25)

    def test_raising_model(self, grid):
        def explode(g, p):
            raise ValueError("boom")

        model = library.custom("explode", explode, p_scale=0.1)
        with pytest.raises(ModelEvaluationError, match="boom"):
            mode_derivative(model, grid)


class TestCustomExpression:

    def test_analytic_expression_matches_builtin(self, grid):
        model = library.custom_from_expression("exp(-(x - p)**2 / w**2)", derivative_mode='analytic')
        builtin = library.displaced_gaussian()
        np.testing.assert_allclose(
            mode_derivative(model, grid).values, mode_derivative(builtin, grid).values, atol=1e-9
        )
        np.testing.assert_allclose(mode_at(model, grid, 0.03).values, mode_at(builtin, grid, 0.03).values, atol=1e-9)

    def test_finite_difference_expression(self, grid):
        model = library.custom_from_expression("exp(-x**2 / w**2 + I * p * x)")
        expected = mode_derivative(library.phase_tilt(), grid).values
        np.testing.assert_allclose(mode_derivative(model, grid).values, expected, atol=1e-6)

    def test_unknown_symbol(self):
        with pytest.raises(ConfigurationError, match="unknown symbols"):
            library.custom_from_expression("exp(-z**2)")

    def test_syntax_error(self):
        with pytest.raises(ConfigurationError):
            library.custom_from_expression("exp(-x**2 +")
