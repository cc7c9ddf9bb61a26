"""
Batch runner: simulate n_trials measurements, estimate p in each and
summarize the spread against the Cramer-Rao bound.
"""
import logging
import math
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from array_detection.models import GainDistribution
from bounds.fisher import fisher_gauss
from bounds.sensitivity import compute_a
from homodyne.models import HomodyneConfig
from imagecrb.exceptions import ConfigurationError, SamplingError
from imaging.models import Illumination
from .estimators import field_estimator, intensity_estimator
from .models import FIELD, INTENSITY, NoiseKind, TrialBatch
from .rng import block_generator, check_seed, trial_blocks
from .sampling import cell_means, draw_counts, draw_field, mean_field, reference_gauge

logger = logging.getLogger(__name__)

MIN_TRIALS = 100


def _scheme_of(scheme_config):
    if isinstance(scheme_config, GainDistribution):
        return INTENSITY
    if isinstance(scheme_config, HomodyneConfig):
        return FIELD
    raise ConfigurationError(f"expected a GainDistribution or HomodyneConfig, got {type(scheme_config).__name__}")


def batch_crb(scheme, model, grid, N, noise: NoiseKind) -> float:
    """
    Cramer-Rao bound the batch is compared against: a sigma_P / (2 sqrt N) for
    pixel counts, the inverse square root of the Gaussian field information
    for field samples.
    """
    if scheme == INTENSITY:
        return compute_a(model, grid) * noise.sigma_P / (2.0 * math.sqrt(N))
    light = Illumination(N=N, sigma_P=noise.sigma_P, sigma_Q=noise.sigma_Q)
    return 1.0 / math.sqrt(fisher_gauss(model, grid, light))


def run_batch(scheme_config, model, illumination, true_p, n_trials, seed, noise=None, threads=1) -> TrialBatch:
    """
    Simulate and estimate n_trials measurements at p = true_p.

    ``scheme_config`` is a GainDistribution (array detection) or a
    HomodyneConfig (homodyne detection). Blocks of trials may run on several
    threads; the estimates do not depend on the thread count.

    Raises:
        SamplingError: for fewer than 100 trials or a noise kind foreign to the scheme
    """
    scheme = _scheme_of(scheme_config)
    seed = check_seed(seed)
    if int(n_trials) != n_trials or n_trials < MIN_TRIALS:
        raise SamplingError(f"n_trials must be an integer >= {MIN_TRIALS}, got {n_trials}")
    n_trials = int(n_trials)
    noise = noise or NoiseKind.for_scheme(scheme, illumination)
    if noise.scheme != scheme:
        raise SamplingError(f"noise kind {noise.kind} does not fit the {scheme} scheme")

    N = illumination.N
    grid = scheme_config.grid
    if scheme == INTENSITY:
        estimator = intensity_estimator(scheme_config, model, N)
        means = cell_means(model, grid, N, true_p)

        def draw(generator, count):
            return draw_counts(generator, means, noise, count)
    else:
        if not math.isclose(scheme_config.N, N, rel_tol=1e-12):
            raise ConfigurationError(f"homodyne config is set up for N={scheme_config.N:g}, illumination has N={N:g}")
        estimator = field_estimator(scheme_config, model)
        mean = mean_field(model, grid, N, true_p)
        gauge = reference_gauge(model, grid)

        def draw(generator, count):
            return draw_field(generator, mean, gauge, noise, count, grid.cell_measure)

    def run_block(block):
        index, count = block
        return estimator.estimate(draw(block_generator(seed, index), count))

    blocks = trial_blocks(n_trials)
    logger.info(f"running {n_trials} {scheme} trials of {model.name} ({noise}) on {threads} thread(s)")
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as executor:
            parts = list(executor.map(run_block, blocks))
    else:
        parts = [run_block(block) for block in blocks]

    batch = TrialBatch(
        scheme=scheme,
        noise_kind=noise.kind,
        n_trials=n_trials,
        seed=seed,
        true_p=float(true_p),
        estimates=np.concatenate(parts),
        crb=batch_crb(scheme, model, grid, N, noise),
    )
    logger.info(
        f"{scheme} batch: mean={batch.mean_estimate:.6g}, std={batch.std_estimate:.6g}, "
        f"crb={batch.crb:.6g}, ratio={batch.efficiency_ratio:.4f}"
    )
    return batch
