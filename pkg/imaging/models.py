"""
Parametrized image families and the illumination that carries them.
"""
from dataclasses import dataclass, field
from typing import Callable, Mapping, Optional

import numpy as np

from imagecrb.exceptions import ConfigurationError
from transverse.models import TransverseGrid

# evaluator(grid, p) -> complex samples of u0(., p) on the flattened grid
Evaluator = Callable[[TransverseGrid, float], np.ndarray]
# derivative(grid) -> complex samples of du0/dp at p = 0
Derivative = Callable[[TransverseGrid], np.ndarray]


@dataclass(frozen=True)
class ImageModel:
    """
    A family p -> u0(., p) of mean-field transverse distributions.

    The evaluator must return normalized samples for |p| <= p_scale (the
    total photon number does not depend on p) and be a pure function.
    """

    ANALYTIC = 'analytic'
    FINITE_DIFFERENCE = 'finite-difference'
    DERIVATIVE_MODES = (ANALYTIC, FINITE_DIFFERENCE)

    name: str
    p_scale: float
    evaluator: Evaluator = field(compare=False, repr=False)
    derivative_mode: str = FINITE_DIFFERENCE
    derivative: Optional[Derivative] = field(default=None, compare=False, repr=False)
    kind: str = 'custom'
    waist: float = 1.0
    parameters: Mapping = field(default_factory=dict, compare=False)

    def __post_init__(self):
        if not np.isfinite(self.p_scale) or self.p_scale <= 0:
            raise ConfigurationError(f"p_scale must be positive, got {self.p_scale}")
        if not np.isfinite(self.waist) or self.waist <= 0:
            raise ConfigurationError(f"waist must be positive, got {self.waist}")
        if self.derivative_mode not in self.DERIVATIVE_MODES:
            raise ConfigurationError(
                f"derivative_mode must be one of {self.DERIVATIVE_MODES}, got {self.derivative_mode!r}"
            )
        if self.derivative_mode == self.ANALYTIC and self.derivative is None:
            raise ConfigurationError(f"model {self.name!r} declares an analytic derivative but supplies none")

    def __str__(self):
        return self.name


@dataclass(frozen=True)
class Illumination:
    """
    Mean photon number and quadrature noise, in shot-noise units.

    sigma_P = sigma_Q = 1 is coherent light; the product is bounded below
    by the Heisenberg constraint sigma_P * sigma_Q >= 1.
    """

    HEISENBERG_TOLERANCE = 1e-12

    N: float
    sigma_P: float = 1.0
    sigma_Q: float = 1.0

    def __post_init__(self):
        errors = []
        if not np.isfinite(self.N) or self.N <= 0:
            errors.append(f"N must be positive, got {self.N}")
        if not np.isfinite(self.sigma_P) or self.sigma_P <= 0:
            errors.append(f"sigma_P must be positive, got {self.sigma_P}")
        if not np.isfinite(self.sigma_Q) or self.sigma_Q <= 0:
            errors.append(f"sigma_Q must be positive, got {self.sigma_Q}")
        if not errors and self.sigma_P * self.sigma_Q < 1.0 - self.HEISENBERG_TOLERANCE:
            errors.append(
                f"sigma_P * sigma_Q = {self.sigma_P * self.sigma_Q:.6g} violates the Heisenberg constraint (>= 1)"
            )
        if errors:
            raise ConfigurationError("; ".join(errors))

    @classmethod
    def coherent(cls, N):
        return cls(N=float(N))

    @classmethod
    def squeezed(cls, N, sigma_P2):
        """Minimum-uncertainty state with amplitude variance sigma_P2."""
        sigma_P = float(np.sqrt(sigma_P2))
        return cls(N=float(N), sigma_P=sigma_P, sigma_Q=1.0 / sigma_P)

    @classmethod
    def from_variances(cls, N, sigma_P2=1.0, sigma_Q2=None):
        if sigma_Q2 is None:
            sigma_Q2 = 1.0 / sigma_P2
        return cls(N=float(N), sigma_P=float(np.sqrt(sigma_P2)), sigma_Q=float(np.sqrt(sigma_Q2)))

    @property
    def sigma_P2(self) -> float:
        return self.sigma_P ** 2

    @property
    def sigma_Q2(self) -> float:
        return self.sigma_Q ** 2

    @property
    def is_coherent(self) -> bool:
        return self.sigma_P == 1.0 and self.sigma_Q == 1.0
