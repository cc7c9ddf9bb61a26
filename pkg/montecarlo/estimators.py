"""
Unbiased linear estimators of p for both detection schemes.

Both estimators divide a linear statistic of the samples by its first-order
slope dS/dp, so they are unbiased to first order around p = 0.
"""
import logging
import math
from dataclasses import dataclass

import numpy as np

from array_detection.detection import is_balanced, signal_slope
from homodyne.detection import difference_slope
from imagecrb.exceptions import SchemeConfigurationError

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class LinearEstimator:
    """p_hat = Re(samples @ weights) / slope."""

    weights: np.ndarray
    slope: float

    def statistic(self, samples):
        return np.real(np.asarray(samples) @ self.weights)

    def estimate(self, samples):
        return self.statistic(samples) / self.slope


def intensity_estimator(gain, model, N) -> LinearEstimator:
    """
    S = sum_k g_k n_k divided by 2N <g |u0| d|u0|/dp>; for the optimal gain
    with beta = 1 this is a S / (2N).

    Raises:
        SchemeConfigurationError: for unbalanced or p-insensitive gains
    """
    if not is_balanced(gain, model, N):
        raise SchemeConfigurationError(f"gain is not balanced for {model.name}; the linear estimator would be biased")
    return LinearEstimator(weights=np.asarray(gain.gains, dtype=float), slope=signal_slope(gain, model, N))


def estimate_intensity(counts, gain, model, N):
    return intensity_estimator(gain, model, N).estimate(counts)


def field_estimator(config, model) -> LinearEstimator:
    """
    n_minus = sqrt(N_LO) Re[exp(-i theta_LO) <lo, E>] divided by its slope;
    with the tuned phase this is b n_minus / (2 sqrt(N N_LO)).
    """
    slope = difference_slope(config, model)
    if slope == 0.0:
        raise SchemeConfigurationError(f"LO phase {config.theta_LO:g} is insensitive to p for {model.name}")
    weights = (
        math.sqrt(config.N_LO) * np.exp(-1j * config.theta_LO)
        * np.conj(config.lo_mode.values) * config.grid.cell_measure
    )
    return LinearEstimator(weights=weights, slope=slope)


def estimate_field(field_samples, config, model):
    return field_estimator(config, model).estimate(field_samples)
