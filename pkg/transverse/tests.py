import numpy as np
import pytest

from imagecrb.exceptions import ConfigurationError, GridMismatchError, NullFieldError
from transverse.models import Field, TransverseGrid
from transverse.modes import hermite_gauss
from transverse.quadrature import inner_product, norm_sq, normalize


def gaussian_field(grid, waist=1.0):
    return Field(grid, np.exp(-grid.x ** 2 / waist ** 2))


class TestTransverseGrid:

    def test_spacing_and_cell_measure(self):
        grid = TransverseGrid(dimension=2, extent=4.0, points_per_axis=16)
        assert grid.spacing == pytest.approx(0.5)
        assert grid.cell_measure == pytest.approx(0.25)
        assert grid.size == 256

    def test_midpoints_are_symmetric(self):
        grid = TransverseGrid(dimension=1, extent=3.0, points_per_axis=12)
        np.testing.assert_allclose(grid.axis, -grid.axis[::-1], atol=1e-15)
        assert grid.axis[0] == pytest.approx(-3.0 + grid.spacing / 2)

    def test_too_few_points_rejected(self):
        with pytest.raises(ConfigurationError):
            TransverseGrid(points_per_axis=4)

    def test_bad_dimension_rejected(self):
        with pytest.raises(ConfigurationError):
            TransverseGrid(dimension=3)

    def test_defaults(self):
        assert TransverseGrid.default(1).points_per_axis == 256
        assert TransverseGrid.default(2).points_per_axis == 128
        assert TransverseGrid.default(1, waist=2.0).extent == pytest.approx(12.0)
        assert TransverseGrid.default(1).refined().points_per_axis == 512

    def test_equal_grids_compare_equal(self):
        assert TransverseGrid(1, 6.0, 256) == TransverseGrid.default(1)


class TestField:

    def test_wrong_size_rejected(self):
        with pytest.raises(ConfigurationError):
            Field(TransverseGrid(), np.ones(10))

    def test_non_finite_rejected(self):
        values = np.ones(256)
        values[3] = np.nan
        with pytest.raises(ConfigurationError):
            Field(TransverseGrid(), values)

    def test_values_are_read_only(self):
        field = Field(TransverseGrid(), np.ones(256))
        with pytest.raises(ValueError):
            field.values[0] = 2.0

    def test_normalized_tag_is_checked(self):
        with pytest.raises(ConfigurationError):
            Field(TransverseGrid(), np.ones(256), normalized=True)


class TestInnerProduct:

    def test_normalized_gaussian_has_unit_overlap(self):
        u0 = hermite_gauss(TransverseGrid.default(1), 0)
        assert inner_product(u0, u0) == pytest.approx(1.0, abs=1e-9)

    def test_even_and_odd_modes_are_orthogonal(self):
        grid = TransverseGrid.default(1)
        assert abs(inner_product(hermite_gauss(grid, 0), hermite_gauss(grid, 1))) < 1e-9

    def test_odd_integrand_vanishes(self):
        grid = TransverseGrid(1, 8.0, 256)
        f = Field(grid, np.exp(-grid.x ** 2))
        g = Field(grid, grid.x * np.exp(-grid.x ** 2))
        assert abs(inner_product(f, g)) < 1e-12

    def test_grid_mismatch(self):
        f = Field.zeros(TransverseGrid(1, 6.0, 256))
        g = Field.zeros(TransverseGrid(1, 6.0, 128))
        with pytest.raises(GridMismatchError, match="incompatible grids"):
            inner_product(f, g)

    def test_sesquilinearity(self):
        rng = np.random.default_rng(7)
        grid = TransverseGrid(1, 6.0, 64)

        def random_field():
            return Field(grid, rng.normal(size=64) + 1j * rng.normal(size=64))

        f, g, h = random_field(), random_field(), random_field()
        alpha, beta = 0.3 - 1.2j, -0.7 + 0.4j

        combined = g.with_values(alpha * g.values + beta * h.values)
        expected = alpha * inner_product(f, g) + beta * inner_product(f, h)
        assert abs(inner_product(f, combined) - expected) < 1e-12

        combined = f.with_values(alpha * f.values + beta * h.values)
        expected = np.conj(alpha) * inner_product(f, g) + np.conj(beta) * inner_product(h, g)
        assert abs(inner_product(combined, g) - expected) < 1e-12

        assert abs(inner_product(f, g) - np.conj(inner_product(g, f))) < 1e-12


class TestNorm:

    def test_zero_field(self):
        assert norm_sq(Field.zeros(TransverseGrid())) == 0.0

    def test_gaussian_integral(self):
        grid = TransverseGrid(1, 8.0, 512)
        assert norm_sq(gaussian_field(grid)) == pytest.approx(np.sqrt(np.pi / 2), abs=1e-6)

    def test_two_dimensional_mode(self):
        assert norm_sq(hermite_gauss(TransverseGrid.default(2), 0)) == pytest.approx(1.0, abs=1e-9)


class TestNormalize:

    def test_idempotent(self):
        u0 = hermite_gauss(TransverseGrid.default(1), 0)
        np.testing.assert_allclose(normalize(u0).values, u0.values, atol=1e-9)

    def test_scaling_removed(self):
        u0 = hermite_gauss(TransverseGrid.default(1), 0)
        np.testing.assert_allclose(normalize(u0.with_values(2 * u0.values)).values, u0.values, atol=1e-9)

    def test_first_hermite_gauss_shape(self):
        grid = TransverseGrid.default(1)
        mode = normalize(Field(grid, grid.x * np.exp(-grid.x ** 2)))
        assert mode.normalized
        assert norm_sq(mode) == pytest.approx(1.0, abs=1e-9)
        np.testing.assert_allclose(mode.values, hermite_gauss(grid, 1).values, atol=1e-9)

    def test_null_field(self):
        with pytest.raises(NullFieldError, match="null field"):
            normalize(Field.zeros(TransverseGrid()))
