"""
Array detection: a pixelized detector whose pixel counts are combined with
a programmable gain map into one difference signal S = sum g n.

The optimal gain is proportional to u_I / |u0|; it makes the scheme reach
the intensity Cramer-Rao bound.
"""
import logging
import math

import numpy as np

from bounds.sensitivity import compute_a, noise_mode
from imagecrb.exceptions import NoIntensitySchemeError, SchemeConfigurationError
from imaging.derivatives import mode_at, modulus_derivative
from .models import DetectionReport, GainDistribution

logger = logging.getLogger(__name__)

# cells with |u0|^2 dA below this fraction of the brightest cell get zero gain
CLAMP_FRACTION = 1e-20
BALANCE_TOLERANCE = 1e-9
PROPORTIONALITY_TOLERANCE = 1e-6
# |slope| below this fraction of its Cauchy-Schwarz bound means p is not seen
SENSITIVITY_FLOOR = 1e-9


def _support(cell_intensity):
    return cell_intensity >= CLAMP_FRACTION * cell_intensity.max()


def mean_signal(gain: GainDistribution, model, N, p) -> float:
    """N * sum g |u0(p)|^2 dA, exact in p."""
    u = mode_at(model, gain.grid, p)
    return float(N * np.sum(gain.gains * u.intensity) * gain.grid.cell_measure)


def balance_gain(values, model, grid, beta=1.0) -> GainDistribution:
    """
    Re-center arbitrary gains so that the signal vanishes at p = 0.

    Gains outside the support of u0 are zeroed and the intensity-weighted
    mean is subtracted on the support.
    """
    values = np.array(values, dtype=float).reshape(-1)
    cell_intensity = mode_at(model, grid, 0.0).intensity * grid.cell_measure
    support = _support(cell_intensity)
    gains = np.where(support, values, 0.0)
    offset = np.sum(gains * cell_intensity) / np.sum(cell_intensity[support])
    gains[support] -= offset
    return GainDistribution(grid, gains, beta=beta, balanced_for=model.name)


def is_balanced(gain: GainDistribution, model, N) -> bool:
    return abs(mean_signal(gain, model, N, 0.0)) <= BALANCE_TOLERANCE * N


def optimal_gain(model, grid, beta=1.0) -> GainDistribution:
    """
    g_opt = beta * u_I / |u0(., 0)|, clamped to zero where u0 is dark.

    Raises:
        NoIntensitySchemeError: if a is infinite
    """
    if math.isinf(compute_a(model, grid)):
        raise NoIntensitySchemeError(f"no intensity scheme exists for {model.name}: a is infinite")
    u_I = noise_mode(model, grid).values.real
    modulus = mode_at(model, grid, 0.0).modulus
    support = _support(modulus ** 2 * grid.cell_measure)
    ratio = np.zeros(grid.size)
    ratio[support] = u_I[support] / modulus[support]
    return balance_gain(beta * ratio, model, grid, beta=beta)


def split_detector_gain(grid, model=None) -> GainDistribution:
    """g = sign(x), the two-pixel split detector; balanced when a model is given."""
    values = np.sign(grid.x)
    if model is None:
        return GainDistribution(grid, values)
    return balance_gain(values, model, grid)


def proportionality(gain: GainDistribution, model):
    """
    Fit gain = beta_hat * g_opt(beta=1) in the intensity-weighted L2 sense.

    Returns (beta_hat, relative residual).
    """
    grid = gain.grid
    reference = optimal_gain(model, grid).gains
    weights = mode_at(model, grid, 0.0).intensity * grid.cell_measure
    beta_hat = np.sum(weights * gain.gains * reference) / np.sum(weights * reference ** 2)
    residual = np.sqrt(np.sum(weights * (gain.gains - beta_hat * reference) ** 2))
    scale = np.sqrt(np.sum(weights * gain.gains ** 2))
    return float(beta_hat), float(residual / scale) if scale > 0 else math.inf


def noise_variance(gain: GainDistribution, model, N, sigma_P=1.0, squeezed_noise_mode=False) -> float:
    """
    Variance of S at p = 0.

    Without mode squeezing the local amplitude variance sigma_P^2 is
    homogeneous: N sigma_P^2 sum g^2 |u0|^2 dA (sigma_P = 1 is shot noise).
    With u_I squeezed the variance is N sigma_P^2 beta^2, defined only for
    gains proportional to the optimal one.
    """
    if squeezed_noise_mode:
        beta_hat, residual = proportionality(gain, model)
        if residual > PROPORTIONALITY_TOLERANCE:
            raise SchemeConfigurationError(
                f"squeezed variance defined only for noise-mode-matched gain (residual {residual:.2e})"
            )
        return float(N * sigma_P ** 2 * beta_hat ** 2)
    intensity = mode_at(model, gain.grid, 0.0).intensity
    return float(N * sigma_P ** 2 * np.sum(gain.gains ** 2 * intensity) * gain.grid.cell_measure)


def signal_slope(gain: GainDistribution, model, N) -> float:
    """
    dS/dp at p = 0: 2N sum g |u0| d|u0|/dp dA.

    Raises:
        SchemeConfigurationError: if the gain does not see p ("gain insensitive to p")
    """
    grid = gain.grid
    modulus = mode_at(model, grid, 0.0).modulus
    m = modulus_derivative(model, grid).values.real
    slope = 2.0 * N * np.sum(gain.gains * modulus * m) * grid.cell_measure
    bound = 2.0 * N * np.sqrt(np.sum((gain.gains * modulus) ** 2) * np.sum(m ** 2)) * grid.cell_measure
    if abs(slope) <= SENSITIVITY_FLOOR * bound:
        raise SchemeConfigurationError(f"gain insensitive to p for {model.name}")
    return float(slope)


def scheme_report(gain: GainDistribution, model, N, sigma_P=1.0, p=0.0, squeezed_noise_mode=False) -> DetectionReport:
    """
    Signal, noise, SNR at p and the p at which the first-order SNR equals one.
    """
    if not gain.balanced and not is_balanced(gain, model, N):
        logger.warning(f"gain is not balanced for {model.name}; the signal at p=0 is nonzero")
    signal = mean_signal(gain, model, N, p)
    variance = noise_variance(gain, model, N, sigma_P, squeezed_noise_mode)
    p_min = math.sqrt(variance) / abs(signal_slope(gain, model, N))
    report = DetectionReport.build(signal, variance, p_min, p=p, squeezed=squeezed_noise_mode)
    logger.info(f"array detection for {model.name}: snr={report.snr:.6g} at p={p:g}, p_min={p_min:.6g}")
    return report
