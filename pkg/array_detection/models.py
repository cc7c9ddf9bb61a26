"""
Gain maps and detection reports.
"""
from dataclasses import dataclass
from typing import Optional

import numpy as np

from imagecrb.exceptions import ConfigurationError
from transverse.models import TransverseGrid


@dataclass(frozen=True, eq=False)
class GainDistribution:
    """
    Real, signed gain g(r) applied to each pixel before the counts are summed.

    ``balanced_for`` names the model for which the gains were re-centered so
    that the mean signal vanishes at p = 0.
    """

    grid: TransverseGrid
    gains: np.ndarray
    beta: float = 1.0
    balanced_for: Optional[str] = None

    def __post_init__(self):
        gains = np.array(self.gains, dtype=float).reshape(-1)
        if gains.size != self.grid.size:
            raise ConfigurationError(f"gain map has {gains.size} values but the grid has {self.grid.size} points")
        if not np.all(np.isfinite(gains)):
            raise ConfigurationError("gains must be finite")
        if not np.any(gains):
            raise ConfigurationError("at least one gain must be nonzero")
        if not np.isfinite(self.beta) or self.beta == 0:
            raise ConfigurationError(f"beta must be finite and nonzero, got {self.beta}")
        gains.setflags(write=False)
        object.__setattr__(self, 'gains', gains)

    @property
    def balanced(self) -> bool:
        return self.balanced_for is not None

    def scaled(self, factor):
        return GainDistribution(self.grid, factor * self.gains, self.beta * factor, self.balanced_for)


@dataclass(frozen=True)
class DetectionReport:
    """Mean signal, noise and the resulting minimum measurable p of one detection scheme."""

    mean_signal: float
    noise_variance: float
    snr: float
    p_min: float
    p: float = 0.0
    squeezed: bool = False

    @classmethod
    def build(cls, mean_signal, noise_variance, p_min, p=0.0, squeezed=False):
        if noise_variance < 0:
            raise ConfigurationError(f"noise variance must be nonnegative, got {noise_variance!r}")
        if noise_variance > 0:
            snr = mean_signal ** 2 / noise_variance
        else:
            snr = 0.0 if mean_signal == 0 else float('inf')
        return cls(float(mean_signal), float(noise_variance), float(snr), float(p_min), float(p), bool(squeezed))
