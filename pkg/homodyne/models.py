"""
Local-oscillator configuration for balanced homodyne detection.
"""
from dataclasses import dataclass, replace

import numpy as np

from imagecrb.exceptions import ConfigurationError
from transverse.models import Field

MIN_LO_RATIO = 100.0


@dataclass(frozen=True)
class HomodyneConfig:
    """
    Mean LO field 2 sqrt(N_LO) lo_mode exp(i theta_LO) mixed with an image of N photons.

    The LO must be much brighter than the image: N_LO >= 100 N.
    """

    lo_mode: Field
    N_LO: float
    theta_LO: float
    N: float

    def __post_init__(self):
        errors = []
        if not np.isfinite(self.N) or self.N <= 0:
            errors.append(f"N must be positive, got {self.N}")
        elif not np.isfinite(self.N_LO) or self.N_LO < MIN_LO_RATIO * self.N:
            errors.append(f"N_LO must be at least {MIN_LO_RATIO:g} * N = {MIN_LO_RATIO * self.N:g}, got {self.N_LO}")
        if not np.isfinite(self.theta_LO):
            errors.append(f"theta_LO must be finite, got {self.theta_LO}")
        norm = float(np.sum(self.lo_mode.intensity) * self.lo_mode.grid.cell_measure)
        if abs(norm - 1.0) > Field.NORMALIZATION_TOLERANCE:
            errors.append(f"lo_mode must be normalized, norm_sq is {norm!r}")
        if errors:
            raise ConfigurationError("; ".join(errors))

    @property
    def grid(self):
        return self.lo_mode.grid

    def with_phase(self, theta_LO):
        return replace(self, theta_LO=float(theta_LO))
