"""
Per-pixel noise generators.

Pixel counts have mean N |u0(r_k, p)|^2 dA. Field samples are expressed in
the gauge where the mean field at p = 0 is real: the in-phase quadrature P
carries noise sigma_P and the out-of-phase quadrature Q noise sigma_Q, each
with per-cell variance scaled by 1/dA so that the projection on any
normalized mode has variance sigma^2.
"""
import logging
import math

import numpy as np

from imagecrb.exceptions import SamplingError
from imaging.derivatives import mode_at
from .models import FIELD, INTENSITY, NoiseKind
from .rng import block_generator, trial_blocks

logger = logging.getLogger(__name__)

# Poisson means above this are outside the integer range numpy samples reliably
MAX_CELL_MEAN = 1e15


def cell_means(model, grid, N, p) -> np.ndarray:
    means = N * mode_at(model, grid, p).intensity * grid.cell_measure
    if means.max() > MAX_CELL_MEAN:
        raise SamplingError(f"brightest pixel mean {means.max():.3g} exceeds the count range ({MAX_CELL_MEAN:g})")
    return means


def mean_field(model, grid, N, p) -> np.ndarray:
    return 2.0 * math.sqrt(N) * mode_at(model, grid, p).values


def reference_gauge(model, grid) -> np.ndarray:
    """exp(i phi0), the local phase of the mean field at p = 0."""
    return np.exp(1j * mode_at(model, grid, 0.0).phase)


def draw_counts(generator, means, noise: NoiseKind, count):
    if noise.kind == NoiseKind.POISSON:
        return generator.poisson(means, size=(count, means.size))
    if noise.kind == NoiseKind.SUB_POISSON:
        return generator.normal(means, np.sqrt(noise.sigma_P2 * means), size=(count, means.size))
    raise SamplingError(f"noise kind {noise.kind} cannot generate pixel counts")


def draw_field(generator, mean, gauge, noise: NoiseKind, count, cell_measure):
    if noise.kind != NoiseKind.GAUSSIAN_FIELD:
        raise SamplingError(f"noise kind {noise.kind} cannot generate field samples")
    scale = 1.0 / math.sqrt(cell_measure)
    p_noise = generator.standard_normal(size=(count, mean.size))
    q_noise = generator.standard_normal(size=(count, mean.size))
    return mean + gauge * scale * (noise.sigma_P * p_noise + 1j * noise.sigma_Q * q_noise)


def _collect(draw, seed, n_trials):
    rows = [draw(block_generator(seed, block), count) for block, count in trial_blocks(n_trials)]
    return np.concatenate(rows, axis=0)


def sample_intensity(model, grid, N, noise: NoiseKind, p, seed, n_trials=None):
    """
    Pixel counts of one measurement (or an (n_trials, cells) array).

    Raises:
        SamplingError: if the noise kind does not describe pixel counts
    """
    if noise.scheme != INTENSITY:
        raise SamplingError(f"noise kind {noise.kind} cannot generate pixel counts")
    means = cell_means(model, grid, N, p)
    counts = _collect(lambda g, count: draw_counts(g, means, noise, count), seed, n_trials or 1)
    return counts[0] if n_trials is None else counts


def sample_field(model, grid, N, noise: NoiseKind, p, seed, n_trials=None):
    """Complex field samples of one measurement (or an (n_trials, cells) array)."""
    if noise.scheme != FIELD:
        raise SamplingError(f"noise kind {noise.kind} cannot generate field samples")
    mean = mean_field(model, grid, N, p)
    gauge = reference_gauge(model, grid)
    samples = _collect(
        lambda g, count: draw_field(g, mean, gauge, noise, count, grid.cell_measure), seed, n_trials or 1
    )
    return samples[0] if n_trials is None else samples
