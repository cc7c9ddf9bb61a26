"""
Sensitivity parameters a, b and the associated detection modes.

1/a^2 is the squared norm of d|u0|/dp and 1/b^2 the squared norm of
du0/dp, both at p = 0. a is infinite for pure-phase families.
"""
import logging
import math

from imagecrb.exceptions import NoIntensitySchemeError, ParameterNotEncodedError
from imaging.derivatives import mode_derivative, modulus_derivative
from transverse.quadrature import norm_sq, normalize

logger = logging.getLogger(__name__)

# squared derivative norms below this count as "p not encoded"
ENCODING_THRESHOLD = 1e-12


def compute_a(model, grid) -> float:
    """Intensity sensitivity parameter; ``math.inf`` when |u0| does not depend on p."""
    n = norm_sq(modulus_derivative(model, grid))
    if n < ENCODING_THRESHOLD:
        logger.info(f"{model.name}: intensity profile is p-independent, a = inf")
        return math.inf
    return 1.0 / math.sqrt(n)


def compute_b(model, grid) -> float:
    """
    Field sensitivity parameter.

    Raises:
        ParameterNotEncodedError: if du0/dp vanishes on the grid
    """
    n = norm_sq(mode_derivative(model, grid))
    if n <= ENCODING_THRESHOLD:
        raise ParameterNotEncodedError(f"parameter not encoded: {model.name} does not depend on p")
    return 1.0 / math.sqrt(n)


def noise_mode(model, grid):
    """u_I = a * d|u0|/dp, the only mode whose fluctuations enter the optimal intensity measurement."""
    derivative = modulus_derivative(model, grid)
    if norm_sq(derivative) < ENCODING_THRESHOLD:
        raise NoIntensitySchemeError(f"no intensity noise-mode: the intensity of {model.name} does not depend on p")
    return normalize(derivative)


def signal_mode(model, grid):
    """u_E = b * du0/dp, the optimal local-oscillator shape."""
    derivative = mode_derivative(model, grid)
    if norm_sq(derivative) <= ENCODING_THRESHOLD:
        raise ParameterNotEncodedError(f"parameter not encoded: {model.name} does not depend on p")
    return normalize(derivative)
