"""
Brute-force Fisher information: average the curvature of the exact
log-likelihood over simulated measurements.

Only meant for small instances, where it checks the closed forms.
"""
import logging

import numpy as np
from scipy.special import gammaln, xlogy

from imagecrb.exceptions import SamplingError
from imaging.derivatives import mode_at
from .models import NoiseKind
from .rng import block_generator, check_seed, trial_blocks
from .sampling import cell_means, draw_counts, draw_field, mean_field, reference_gauge

logger = logging.getLogger(__name__)

MAX_CELLS = 64
MAX_PHOTONS = 1e3
DEFAULT_RELATIVE_STEP = 0.1
STEP_AGREEMENT = 0.05
# below this fraction of N the information is treated as zero and the step check skipped
NEGLIGIBLE_INFORMATION = 1e-6


def poisson_log_likelihood(counts, means):
    return np.sum(xlogy(counts, means) - means - gammaln(counts + 1.0), axis=-1)


def sub_poisson_log_likelihood(counts, means, sigma_P2):
    variance = sigma_P2 * means
    return -np.sum((counts - means) ** 2 / (2.0 * variance) + 0.5 * np.log(2.0 * np.pi * variance), axis=-1)


def field_log_likelihood(samples, mean, gauge, noise, cell_measure):
    """Independent Gaussian P and Q per cell, in the real-mean-field gauge (constant terms dropped)."""
    residual = np.conj(gauge) * (samples - mean)
    return -np.sum(
        residual.real ** 2 / (2.0 * noise.sigma_P2) + residual.imag ** 2 / (2.0 * noise.sigma_Q2), axis=-1
    ) * cell_measure


def _log_likelihood(model, grid, N, noise, samples, p, gauge):
    if noise.kind == NoiseKind.GAUSSIAN_FIELD:
        return field_log_likelihood(samples, mean_field(model, grid, N, p), gauge, noise, grid.cell_measure)
    means = N * mode_at(model, grid, p).intensity * grid.cell_measure
    if noise.kind == NoiseKind.POISSON:
        return poisson_log_likelihood(samples, means)
    return sub_poisson_log_likelihood(samples, means, noise.sigma_P2)


def _curvature(model, grid, N, noise, samples, h, gauge):
    """-mean over trials of the central second difference of the log-likelihood in p."""
    minus, centre, plus = (_log_likelihood(model, grid, N, noise, samples, p, gauge) for p in (-h, 0.0, h))
    return -float(np.mean((plus - 2.0 * centre + minus) / h ** 2))


def empirical_fisher(model, grid, N, noise: NoiseKind, p_step=None, n_trials=100_000, seed=0) -> float:
    """
    Monte Carlo estimate of the Fisher information at p = 0.

    Measurements are drawn at p = 0 and the exact log-likelihood is
    differentiated twice in p by central differences with step p_step
    (default 0.1 p_scale).

    Raises:
        SamplingError: for grids above 64 cells or N above 1e3, or when halving
            the step changes the result by more than 5%
    """
    if grid.size > MAX_CELLS:
        raise SamplingError(f"empirical_fisher needs at most {MAX_CELLS} cells, grid has {grid.size}")
    if N > MAX_PHOTONS:
        raise SamplingError(f"empirical_fisher needs N <= {MAX_PHOTONS:g}, got {N:g}")
    seed = check_seed(seed)
    h = DEFAULT_RELATIVE_STEP * model.p_scale if p_step is None else float(p_step)

    gauge = reference_gauge(model, grid)
    if noise.kind == NoiseKind.GAUSSIAN_FIELD:
        mean = mean_field(model, grid, N, 0.0)

        def draw(generator, count):
            return draw_field(generator, mean, gauge, noise, count, grid.cell_measure)
    else:
        means = cell_means(model, grid, N, 0.0)

        def draw(generator, count):
            return draw_counts(generator, means, noise, count).astype(float)

    samples = np.concatenate([draw(block_generator(seed, b), count) for b, count in trial_blocks(n_trials)])
    information = _curvature(model, grid, N, noise, samples, h, gauge)
    halved = _curvature(model, grid, N, noise, samples, h / 2.0, gauge)

    if max(abs(information), abs(halved)) > NEGLIGIBLE_INFORMATION * N:
        disagreement = abs(information - halved) / max(abs(halved), abs(information))
        if disagreement > STEP_AGREEMENT:
            raise SamplingError(
                f"p_step {h:g} too large: halving it changes the information by {100 * disagreement:.1f}%"
            )
    logger.info(f"empirical Fisher information of {model.name} ({noise}, N={N:g}): {information:.6g}")
    return information
