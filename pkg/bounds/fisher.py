"""
Fisher informations and Cramer-Rao bounds for intensity and field measurements.
"""
import logging
import math

import numpy as np

from imaging.derivatives import mode_at, mode_derivative
from .models import SensitivitySummary
from .sensitivity import compute_a, compute_b, noise_mode, signal_mode

logger = logging.getLogger(__name__)

# finite-difference step in p for the integral form, relative to p_scale
INTEGRAL_RELATIVE_STEP = 1e-2
# cells dimmer than this fraction of N are left out of the n'^2/n term
DARK_CELL_FRACTION = 1e-30
ORDERING_TOLERANCE = 1e-9


def poisson_integral_terms(model, grid, N):
    """
    The two terms of the Poisson information integral, (int n'^2/n, int n'').

    n(r, p) = N |u0(r, p)|^2 is differentiated by central differences. The
    second term vanishes when the photon number does not depend on p.
    """
    h = INTEGRAL_RELATIVE_STEP * model.p_scale
    minus, centre, plus = (N * mode_at(model, grid, p).intensity for p in (-h, 0.0, h))
    first = (plus - minus) / (2.0 * h)
    second = (plus - 2.0 * centre + minus) / h ** 2

    lit = centre >= DARK_CELL_FRACTION * N
    score = float(np.sum(first[lit] ** 2 / centre[lit]) * grid.cell_measure)
    curvature = float(np.sum(second) * grid.cell_measure)
    return score, curvature


def fisher_poisson_integral(model, grid, N) -> float:
    """Poisson information evaluated directly from the photon-number distribution."""
    score, curvature = poisson_integral_terms(model, grid, N)
    return max(score - curvature, 0.0)


def fisher_poisson(model, grid, N) -> float:
    """4N/a^2; zero for pure-phase families."""
    a = compute_a(model, grid)
    return 0.0 if math.isinf(a) else 4.0 * N / a ** 2


def fisher_gauss(model, grid, illumination) -> float:
    """
    Information carried by the full field under Gaussian quadrature noise.

    The derivative is projected on the local mean-field phase: the in-phase
    part is weighted by 1/sigma_P^2 and the quadrature part by 1/sigma_Q^2.
    """
    u0 = mode_at(model, grid, 0.0)
    rotated = np.exp(-1j * u0.phase) * mode_derivative(model, grid).values
    in_phase = np.sum(rotated.real ** 2) * grid.cell_measure
    quadrature = np.sum(rotated.imag ** 2) * grid.cell_measure
    return float(4.0 * illumination.N * (in_phase / illumination.sigma_P2 + quadrature / illumination.sigma_Q2))


def crb_summary(model, grid, illumination) -> SensitivitySummary:
    a = compute_a(model, grid)
    b = compute_b(model, grid)
    if a < b * (1.0 - ORDERING_TOLERANCE):
        logger.warning(f"{model.name}: a={a!r} is below b={b!r}; the grid may be too coarse")

    shot_noise = illumination.sigma_P / (2.0 * math.sqrt(illumination.N))
    summary = SensitivitySummary(
        model_name=model.name,
        illumination=illumination,
        a=a,
        b=b,
        u_I=None if math.isinf(a) else noise_mode(model, grid),
        u_E=signal_mode(model, grid),
        fisher_poisson=0.0 if math.isinf(a) else 4.0 * illumination.N / a ** 2,
        fisher_gauss=fisher_gauss(model, grid, illumination),
        crb_intensity=a * shot_noise,
        crb_field=b * shot_noise,
    )
    logger.info(
        f"{model.name} at N={illumination.N:g}, sigma_P^2={illumination.sigma_P2:g}: "
        f"a={a:.6g}, b={b:.6g}, crb_intensity={summary.crb_intensity:.6g}, crb_field={summary.crb_field:.6g}"
    )
    return summary
