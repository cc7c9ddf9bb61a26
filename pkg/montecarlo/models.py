"""
Noise models and trial batches for the Monte Carlo harness.
"""
import math
from dataclasses import dataclass, field
from functools import cached_property
from typing import Optional

import numpy as np
from scipy import stats

from imagecrb.exceptions import ConfigurationError

INTENSITY = 'intensity'
FIELD = 'field'
SCHEMES = (INTENSITY, FIELD)


@dataclass(frozen=True)
class NoiseKind:
    """
    Generative noise model of one measurement.

    poisson and sub_poisson_gaussian draw pixel counts; gaussian_field draws
    complex field samples with independent quadrature noise.
    """

    POISSON = 'poisson'
    SUB_POISSON = 'sub_poisson_gaussian'
    GAUSSIAN_FIELD = 'gaussian_field'
    KINDS = (POISSON, SUB_POISSON, GAUSSIAN_FIELD)

    kind: str
    sigma_P: float = 1.0
    sigma_Q: float = 1.0

    def __post_init__(self):
        if self.kind not in self.KINDS:
            raise ConfigurationError(f"noise kind must be one of {self.KINDS}, got {self.kind!r}")
        if not self.sigma_P > 0 or not self.sigma_Q > 0:
            raise ConfigurationError(f"noise standard deviations must be positive, got {self.sigma_P}, {self.sigma_Q}")
        if self.kind == self.SUB_POISSON and self.sigma_P ** 2 > 1.0:
            raise ConfigurationError(f"sub-Poissonian noise needs sigma_P^2 <= 1, got {self.sigma_P ** 2:g}")

    @classmethod
    def poisson(cls):
        return cls(cls.POISSON)

    @classmethod
    def sub_poisson(cls, sigma_P2):
        return cls(cls.SUB_POISSON, sigma_P=math.sqrt(sigma_P2))

    @classmethod
    def gaussian_field(cls, sigma_P=1.0, sigma_Q=1.0):
        return cls(cls.GAUSSIAN_FIELD, sigma_P=float(sigma_P), sigma_Q=float(sigma_Q))

    @classmethod
    def for_scheme(cls, scheme, illumination):
        """Default generative model of a detection scheme under the given light."""
        if scheme == FIELD:
            return cls.gaussian_field(illumination.sigma_P, illumination.sigma_Q)
        if scheme != INTENSITY:
            raise ConfigurationError(f"scheme must be one of {SCHEMES}, got {scheme!r}")
        if illumination.sigma_P == 1.0:
            return cls.poisson()
        return cls.sub_poisson(illumination.sigma_P2)

    @property
    def scheme(self) -> str:
        return FIELD if self.kind == self.GAUSSIAN_FIELD else INTENSITY

    @property
    def sigma_P2(self) -> float:
        return self.sigma_P ** 2

    @property
    def sigma_Q2(self) -> float:
        return self.sigma_Q ** 2

    def __str__(self):
        return self.kind


@dataclass(frozen=True, eq=False)
class TrialBatch:
    """
    Estimates of p from n_trials independent simulated measurements.

    Summaries are recomputed from ``estimates`` on first access.
    """

    scheme: str
    noise_kind: str
    n_trials: int
    seed: int
    true_p: float
    estimates: np.ndarray = field(repr=False)
    crb: Optional[float] = None

    def __post_init__(self):
        estimates = np.array(self.estimates, dtype=float).reshape(-1)
        if estimates.size != self.n_trials:
            raise ConfigurationError(f"batch holds {estimates.size} estimates, expected {self.n_trials}")
        estimates.setflags(write=False)
        object.__setattr__(self, 'estimates', estimates)

    @cached_property
    def mean_estimate(self) -> float:
        return float(np.mean(self.estimates))

    @cached_property
    def std_estimate(self) -> float:
        return float(np.std(self.estimates, ddof=1))

    @cached_property
    def std_error_of_std(self) -> float:
        """Large-sample standard error of std_estimate: s/2 sqrt((kurtosis - 1)/n)."""
        kurtosis = float(stats.kurtosis(self.estimates, fisher=False))
        return 0.5 * self.std_estimate * math.sqrt(max(kurtosis - 1.0, 0.0) / self.n_trials)

    @property
    def efficiency_ratio(self) -> float:
        """std_estimate / crb; 1 means the estimator reaches the bound."""
        if self.crb is None or math.isinf(self.crb) or self.crb == 0:
            return math.nan
        return self.std_estimate / self.crb

    def same_estimates(self, other) -> bool:
        return np.array_equal(self.estimates, other.estimates)
