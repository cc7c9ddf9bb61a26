import math

import numpy as np
import pytest
from scipy import stats

from array_detection.detection import optimal_gain, split_detector_gain
from array_detection.models import GainDistribution
from bounds.fisher import fisher_gauss, fisher_poisson
from bounds.sensitivity import compute_a, compute_b
from homodyne.detection import lo_shape, mode_matched_config
from imagecrb.exceptions import ConfigurationError, SamplingError, SchemeConfigurationError
from imaging import library
from imaging.derivatives import mode_at, modulus_derivative
from imaging.models import Illumination
from montecarlo.estimators import estimate_field, estimate_intensity
from montecarlo.fisher_oracle import empirical_fisher
from montecarlo.harness import run_batch
from montecarlo.models import FIELD, INTENSITY, NoiseKind, TrialBatch
from montecarlo.rng import block_generator, check_seed, trial_blocks
from montecarlo.sampling import cell_means, mean_field, sample_field, sample_intensity
from transverse.models import TransverseGrid

N_TRIALS = 100_000


@pytest.fixture
def grid():
    return TransverseGrid.default(1)


@pytest.fixture
def small_grid():
    return TransverseGrid(dimension=1, extent=4.0, points_per_axis=16)


@pytest.fixture
def displaced():
    return library.displaced_gaussian()


def efficiency_window(n_trials):
    eps = 1.0 / math.sqrt(2 * n_trials)
    return 1.0 - 3 * eps, 1.0 + 3 * eps


class TestNoiseKind:

    def test_sub_poisson_needs_reduced_variance(self):
        with pytest.raises(ConfigurationError):
            NoiseKind.sub_poisson(1.5)

    def test_unknown_kind(self):
        with pytest.raises(ConfigurationError):
            NoiseKind("uniform")

    def test_defaults_per_scheme(self):
        assert NoiseKind.for_scheme(INTENSITY, Illumination.coherent(1e4)) == NoiseKind.poisson()
        assert NoiseKind.for_scheme(INTENSITY, Illumination.squeezed(1e4, 0.5)).kind == NoiseKind.SUB_POISSON
        field_noise = NoiseKind.for_scheme(FIELD, Illumination.squeezed(1e4, 0.5))
        assert field_noise.kind == NoiseKind.GAUSSIAN_FIELD
        assert field_noise.sigma_Q2 == pytest.approx(2.0)

    def test_anti_squeezed_intensity_rejected(self):
        with pytest.raises(ConfigurationError):
            NoiseKind.for_scheme(INTENSITY, Illumination.squeezed(1e4, 2.0))


class TestRng:

    def test_streams_are_keyed(self):
        first = block_generator(42, 3).standard_normal(8)
        again = block_generator(42, 3).standard_normal(8)
        other_block = block_generator(42, 4).standard_normal(8)
        other_seed = block_generator(43, 3).standard_normal(8)
        np.testing.assert_array_equal(first, again)
        assert not np.array_equal(first, other_block)
        assert not np.array_equal(first, other_seed)

    def test_trial_blocks(self):
        assert trial_blocks(2500) == [(0, 1024), (1, 1024), (2, 452)]
        assert trial_blocks(100) == [(0, 100)]

    @pytest.mark.parametrize("seed", [-1, 2 ** 64, 1.5])
    def test_bad_seed(self, seed):
        with pytest.raises(ConfigurationError):
            check_seed(seed)

    def test_largest_seed(self):
        assert check_seed(2 ** 64 - 1) == 2 ** 64 - 1


class TestTrialBatch:

    def test_summaries(self):
        batch = TrialBatch(INTENSITY, NoiseKind.POISSON, 4, 1, 0.0, [1.0, 2.0, 3.0, 4.0], crb=1.0)
        assert batch.mean_estimate == pytest.approx(2.5, rel=1e-12)
        assert batch.std_estimate == pytest.approx(np.std([1, 2, 3, 4], ddof=1), rel=1e-12)
        assert batch.efficiency_ratio == pytest.approx(batch.std_estimate)

    def test_length_checked(self):
        with pytest.raises(ConfigurationError):
            TrialBatch(INTENSITY, NoiseKind.POISSON, 5, 1, 0.0, [1.0, 2.0])


class TestSampling:

    def test_total_count(self, grid, displaced):
        counts = sample_intensity(displaced, grid, 1e4, NoiseKind.poisson(), 0.0, seed=1, n_trials=10_000)
        assert counts.shape == (10_000, grid.size)
        assert abs(counts.sum(axis=1).mean() - 1e4) <= 3.0

    def test_single_measurement_is_a_vector(self, grid, displaced):
        counts = sample_intensity(displaced, grid, 1e4, NoiseKind.poisson(), 0.0, seed=1)
        assert counts.shape == (grid.size,)

    def test_bright_pixel_is_poisson(self, small_grid, displaced):
        counts = sample_intensity(displaced, small_grid, 100, NoiseKind.poisson(), 0.0, seed=5, n_trials=N_TRIALS)
        means = cell_means(displaced, small_grid, 100, 0.0)
        k = int(np.argmax(means))
        lam = means[k]
        pixel = counts[:, k]

        low, high = int(lam - 4 * math.sqrt(lam)), int(lam + 4 * math.sqrt(lam))
        values = np.clip(pixel, low, high)
        observed = np.array([np.sum(values == v) for v in range(low, high + 1)])
        expected = stats.poisson.pmf(np.arange(low, high + 1), lam)
        expected[0] = stats.poisson.cdf(low, lam)
        expected[-1] = stats.poisson.sf(high - 1, lam)
        expected *= N_TRIALS / expected.sum()
        assert stats.chisquare(observed, expected).pvalue > 0.01

    def test_sub_poisson_variance(self, small_grid, displaced):
        noise = NoiseKind.sub_poisson(0.5)
        counts = sample_intensity(displaced, small_grid, 1e4, noise, 0.0, seed=9, n_trials=N_TRIALS)
        means = cell_means(displaced, small_grid, 1e4, 0.0)
        k = int(np.argmax(means))
        assert np.var(counts[:, k], ddof=1) / means[k] == pytest.approx(0.5, rel=0.05)

    def test_field_mean_and_independence(self, small_grid, displaced):
        samples = sample_field(displaced, small_grid, 1e4, NoiseKind.gaussian_field(), 0.0, seed=3, n_trials=N_TRIALS)
        mean = mean_field(displaced, small_grid, 1e4, 0.0)
        k = small_grid.size // 2
        P, Q = samples[:, k].real, samples[:, k].imag
        standard_error = 1.0 / math.sqrt(small_grid.cell_measure * N_TRIALS)
        assert abs(P.mean() - mean[k].real) <= 3 * standard_error
        assert abs(Q.mean()) <= 3 * standard_error
        assert abs(np.corrcoef(P, Q)[0, 1]) <= 3 / math.sqrt(N_TRIALS)

    def test_mode_projection_variance(self, displaced):
        grid = TransverseGrid(dimension=1, extent=6.0, points_per_axis=64)
        noise = NoiseKind.gaussian_field(math.sqrt(0.5), math.sqrt(2.0))
        samples = sample_field(displaced, grid, 1e4, noise, 0.0, seed=4, n_trials=20_000)
        lo = lo_shape(displaced, grid)
        projection = np.real(samples @ np.conj(lo.values)) * grid.cell_measure
        assert np.var(projection, ddof=1) == pytest.approx(0.5, rel=0.05)

    def test_reproducible(self, grid, displaced):
        first = sample_field(displaced, grid, 1e4, NoiseKind.gaussian_field(), 0.0, seed=8, n_trials=2000)
        second = sample_field(displaced, grid, 1e4, NoiseKind.gaussian_field(), 0.0, seed=8, n_trials=2000)
        np.testing.assert_array_equal(first, second)

    def test_wrong_noise_kind(self, grid, displaced):
        with pytest.raises(SamplingError):
            sample_intensity(displaced, grid, 1e4, NoiseKind.gaussian_field(), 0.0, seed=1)
        with pytest.raises(SamplingError):
            sample_field(displaced, grid, 1e4, NoiseKind.poisson(), 0.0, seed=1)


class TestEstimators:

    def test_null_statistic(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        assert estimate_intensity(np.zeros(grid.size), gain, displaced, 1e4) == 0.0
        config = mode_matched_config(displaced, grid, 1e4)
        assert estimate_field(np.zeros(grid.size, dtype=complex), config, displaced) == 0.0

    def test_noise_free_intensity(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        means = cell_means(displaced, grid, 1e4, 0.005)
        assert estimate_intensity(means, gain, displaced, 1e4) == pytest.approx(0.005, rel=1e-6)

    def test_noise_free_field(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4)
        samples = mean_field(displaced, grid, 1e4, 0.005)
        assert estimate_field(samples, config, displaced) == pytest.approx(0.005, rel=1e-4)

    def test_unbalanced_gain_rejected(self, grid, displaced):
        gain = GainDistribution(grid, 1.0 + 2.0 * grid.x)
        with pytest.raises(SchemeConfigurationError, match="not balanced"):
            estimate_intensity(np.zeros(grid.size), gain, displaced, 1e4)


class TestRunBatch:

    def test_needs_enough_trials(self, grid, displaced):
        with pytest.raises(SamplingError):
            run_batch(optimal_gain(displaced, grid), displaced, Illumination.coherent(1e4), 0.0, 50, seed=1)

    def test_noise_must_fit_scheme(self, grid, displaced):
        with pytest.raises(SamplingError):
            run_batch(
                optimal_gain(displaced, grid), displaced, Illumination.coherent(1e4), 0.0, 1000, seed=1,
                noise=NoiseKind.gaussian_field(),
            )

    def test_deterministic_across_threads(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        light = Illumination.coherent(1e4)
        serial = run_batch(gain, displaced, light, 0.0, 5000, seed=77)
        again = run_batch(gain, displaced, light, 0.0, 5000, seed=77)
        parallel = run_batch(gain, displaced, light, 0.0, 5000, seed=77, threads=4)
        other = run_batch(gain, displaced, light, 0.0, 5000, seed=78)
        assert serial.same_estimates(again)
        assert serial.same_estimates(parallel)
        assert not serial.same_estimates(other)

    def test_field_deterministic_across_threads(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4)
        light = Illumination.coherent(1e4)
        serial = run_batch(config, displaced, light, 0.0, 3000, seed=5)
        parallel = run_batch(config, displaced, light, 0.0, 3000, seed=5, threads=4)
        assert serial.same_estimates(parallel)

    def test_photon_number_must_match_homodyne_config(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4)
        with pytest.raises(ConfigurationError):
            run_batch(config, displaced, Illumination.coherent(1e3), 0.0, 1000, seed=1)


@pytest.mark.slow
class TestCramerRaoAttainment:

    def test_intensity_scheme(self, grid, displaced):
        batch = run_batch(optimal_gain(displaced, grid), displaced, Illumination.coherent(1e4), 0.0, N_TRIALS, seed=11)
        assert batch.crb == pytest.approx(5e-3, rel=1e-6)
        assert 0.98 <= batch.efficiency_ratio <= 1.02

    def test_intensity_estimator_is_unbiased(self, grid, displaced):
        batch = run_batch(optimal_gain(displaced, grid), displaced, Illumination.coherent(1e4), 0.005, N_TRIALS, seed=12)
        assert abs(batch.mean_estimate - 0.005) <= 3 * batch.std_estimate / math.sqrt(N_TRIALS)

    def test_field_scheme(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4)
        batch = run_batch(config, displaced, Illumination.coherent(1e4), 0.0, N_TRIALS, seed=13)
        assert batch.crb == pytest.approx(5e-3, rel=1e-6)
        assert 0.98 <= batch.efficiency_ratio <= 1.02

    def test_field_estimator_is_unbiased(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4)
        batch = run_batch(config, displaced, Illumination.coherent(1e4), 0.0005, N_TRIALS, seed=14)
        assert abs(batch.mean_estimate - 0.0005) <= 3 * batch.std_estimate / math.sqrt(N_TRIALS)

    def test_squeezing_gain_intensity(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        coherent = run_batch(gain, displaced, Illumination.coherent(1e4), 0.0, N_TRIALS, seed=21)
        squeezed = run_batch(gain, displaced, Illumination.squeezed(1e4, 0.5), 0.0, N_TRIALS, seed=22)
        assert squeezed.noise_kind == NoiseKind.SUB_POISSON
        assert coherent.std_estimate / squeezed.std_estimate == pytest.approx(math.sqrt(2.0), rel=0.03)

    def test_squeezing_gain_field(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4)
        coherent = run_batch(config, displaced, Illumination.coherent(1e4), 0.0, N_TRIALS, seed=23)
        squeezed = run_batch(config, displaced, Illumination.squeezed(1e4, 0.5), 0.0, N_TRIALS, seed=24)
        assert coherent.std_estimate / squeezed.std_estimate == pytest.approx(math.sqrt(2.0), rel=0.03)
        low, high = efficiency_window(N_TRIALS)
        assert low <= squeezed.efficiency_ratio <= high

    def test_std_error_of_std(self, grid, displaced):
        config = mode_matched_config(displaced, grid, 1e4)
        batch = run_batch(config, displaced, Illumination.coherent(1e4), 0.0, 20_000, seed=31)
        gaussian_theory = batch.std_estimate / math.sqrt(2 * batch.n_trials)
        assert batch.std_error_of_std == pytest.approx(gaussian_theory, rel=0.2)

    def test_split_detector_is_inefficient(self, grid, displaced):
        batch = run_batch(split_detector_gain(grid, displaced), displaced, Illumination.coherent(1e4), 0.0,
                          N_TRIALS, seed=41)
        assert batch.efficiency_ratio > efficiency_window(N_TRIALS)[1]
        assert batch.efficiency_ratio == pytest.approx(math.sqrt(math.pi / 2), rel=0.02)

    def test_spread_flat_in_p(self, grid, displaced):
        gain = optimal_gain(displaced, grid)
        light = Illumination.coherent(1e4)
        stds = [run_batch(gain, displaced, light, p, 50_000, seed=51).std_estimate for p in (0.0, 0.0005, 0.001)]
        assert max(stds) / min(stds) < 1.03


@pytest.mark.slow
class TestEmpiricalFisher:

    def test_poisson(self, small_grid, displaced):
        expected = fisher_poisson(displaced, small_grid, 100)
        value = empirical_fisher(displaced, small_grid, 100, NoiseKind.poisson(), n_trials=N_TRIALS, seed=61)
        assert value == pytest.approx(expected, rel=0.05)

    def test_poisson_phase_family(self, small_grid):
        model = library.phase_tilt()
        value = empirical_fisher(model, small_grid, 100, NoiseKind.poisson(), n_trials=N_TRIALS, seed=62)
        assert abs(value) <= 0.05 * 4 * 100 / compute_b(model, small_grid) ** 2

    @pytest.mark.parametrize("sigma_P2", [1.0, 0.5])
    def test_gaussian_field(self, small_grid, displaced, sigma_P2):
        light = Illumination.squeezed(100, sigma_P2)
        noise = NoiseKind.gaussian_field(light.sigma_P, light.sigma_Q)
        value = empirical_fisher(displaced, small_grid, 100, noise, n_trials=N_TRIALS, seed=63)
        b = compute_b(displaced, small_grid)
        assert value == pytest.approx(4 * 100 / (b ** 2 * sigma_P2), rel=0.05)
        assert value == pytest.approx(fisher_gauss(displaced, small_grid, light), rel=0.05)

    def test_sub_poisson_includes_variance_information(self, small_grid, displaced):
        N, sigma_P2 = 100, 0.5
        means = cell_means(displaced, small_grid, N, 0.0)
        modulus = mode_at(displaced, small_grid, 0.0).modulus
        slopes = N * 2.0 * modulus * modulus_derivative(displaced, small_grid).values.real * small_grid.cell_measure
        expected = np.sum(slopes ** 2 / (sigma_P2 * means)) + 0.5 * np.sum((slopes / means) ** 2)
        value = empirical_fisher(displaced, small_grid, N, NoiseKind.sub_poisson(sigma_P2), n_trials=N_TRIALS, seed=64)
        assert value == pytest.approx(expected, rel=0.05)
        assert np.sum(slopes ** 2 / (sigma_P2 * means)) == pytest.approx(
            4 * N / (compute_a(displaced, small_grid) ** 2 * sigma_P2), rel=1e-9
        )

    def test_large_grid_rejected(self, grid, displaced):
        with pytest.raises(SamplingError):
            empirical_fisher(displaced, grid, 100, NoiseKind.poisson(), n_trials=1000)

    def test_bright_image_rejected(self, small_grid, displaced):
        with pytest.raises(SamplingError):
            empirical_fisher(displaced, small_grid, 1e4, NoiseKind.poisson(), n_trials=1000)

    def test_step_too_large(self, small_grid, displaced):
        with pytest.raises(SamplingError, match="too large"):
            empirical_fisher(displaced, small_grid, 100, NoiseKind.gaussian_field(), p_step=1.0, n_trials=1000)
