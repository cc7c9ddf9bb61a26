"""
Result types for the sensitivity analysis.
"""
import math
from dataclasses import dataclass
from typing import Optional

from imagecrb.exceptions import ConfigurationError
from imaging.models import Illumination
from transverse.models import Field


@dataclass(frozen=True)
class SensitivitySummary:
    """
    Sensitivity parameters, modes, Fisher informations and Cramer-Rao bounds
    of one image model under one illumination.

    ``a`` and ``crb_intensity`` are ``math.inf`` (and ``u_I`` is None) when
    the intensity profile does not depend on p.
    """

    model_name: str
    illumination: Illumination
    a: float
    b: float
    u_I: Optional[Field]
    u_E: Field
    fisher_poisson: float
    fisher_gauss: float
    crb_intensity: float
    crb_field: float

    def __post_init__(self):
        if not self.a > 0 or not self.b > 0 or math.isinf(self.b):
            raise ConfigurationError(f"a and b must be positive (b finite), got a={self.a!r}, b={self.b!r}")
        if (self.u_I is None) != math.isinf(self.a):
            raise ConfigurationError("u_I must be present exactly when a is finite")

    @property
    def fisher_intensity(self) -> float:
        """Intensity information with locally sub-Poissonian noise of variance sigma_P^2."""
        return self.fisher_poisson / self.illumination.sigma_P2

    @property
    def field_advantage(self) -> float:
        """a / b, the factor by which field measurement beats intensity measurement."""
        return self.a / self.b

    @property
    def has_intensity_scheme(self) -> bool:
        return not math.isinf(self.a)
