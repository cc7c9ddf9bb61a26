"""
Discretized transverse plane and complex fields sampled on it.
"""
from dataclasses import dataclass, field
from functools import cached_property
from typing import Tuple

import numpy as np

from imagecrb.exceptions import ConfigurationError


@dataclass(frozen=True)
class TransverseGrid:
    """
    Uniform midpoint grid over [-extent, extent] per axis.

    Lengths are in units of the beam waist. Samples are cell midpoints,
    symmetric about the origin; 2D grids are flattened in row-major
    ('ij') order with x varying slowest.
    """

    MIN_POINTS = 8
    DEFAULT_EXTENT = 6.0
    DEFAULT_POINTS = {1: 256, 2: 128}

    dimension: int = 1
    extent: float = DEFAULT_EXTENT
    points_per_axis: int = 256

    def __post_init__(self):
        if self.dimension not in (1, 2):
            raise ConfigurationError(f"grid dimension must be 1 or 2, got {self.dimension}")
        if not np.isfinite(self.extent) or self.extent <= 0:
            raise ConfigurationError(f"grid extent must be positive, got {self.extent}")
        if int(self.points_per_axis) != self.points_per_axis or self.points_per_axis < self.MIN_POINTS:
            raise ConfigurationError(
                f"points_per_axis must be an integer >= {self.MIN_POINTS}, got {self.points_per_axis}"
            )

    @classmethod
    def default(cls, dimension=1, waist=1.0):
        """Grid spanning 6 beam waists with the default resolution for the dimension."""
        return cls(
            dimension=dimension,
            extent=cls.DEFAULT_EXTENT * waist,
            points_per_axis=cls.DEFAULT_POINTS[dimension],
        )

    def refined(self):
        """Same extent, twice the points per axis."""
        return TransverseGrid(self.dimension, self.extent, 2 * self.points_per_axis)

    @property
    def spacing(self) -> float:
        return 2.0 * self.extent / self.points_per_axis

    @property
    def cell_measure(self) -> float:
        return self.spacing ** self.dimension

    @property
    def size(self) -> int:
        return self.points_per_axis ** self.dimension

    @cached_property
    def axis(self) -> np.ndarray:
        axis = -self.extent + self.spacing * (np.arange(self.points_per_axis) + 0.5)
        axis.setflags(write=False)
        return axis

    @cached_property
    def coordinates(self) -> Tuple[np.ndarray, ...]:
        """Flattened coordinate arrays, one per axis: (x,) or (x, y)."""
        if self.dimension == 1:
            coords = (self.axis.copy(),)
        else:
            xx, yy = np.meshgrid(self.axis, self.axis, indexing="ij")
            coords = (xx.ravel(), yy.ravel())
        for c in coords:
            c.setflags(write=False)
        return coords

    @property
    def x(self) -> np.ndarray:
        return self.coordinates[0]

    @cached_property
    def radius_sq(self) -> np.ndarray:
        r2 = sum(c ** 2 for c in self.coordinates)
        r2.setflags(write=False)
        return r2


@dataclass(frozen=True, eq=False)
class Field:
    """
    Complex amplitude per grid point, in units of 1/sqrt(area).

    Values are copied into a read-only complex array at construction.
    A field tagged ``normalized`` is checked to have unit norm.
    """

    NORMALIZATION_TOLERANCE = 1e-9

    grid: TransverseGrid
    values: np.ndarray
    normalized: bool = False
    out_of_range: bool = field(default=False, compare=False)

    def __post_init__(self):
        values = np.array(self.values, dtype=complex).reshape(-1)
        if values.size != self.grid.size:
            raise ConfigurationError(
                f"field has {values.size} values but the grid has {self.grid.size} points"
            )
        if not np.all(np.isfinite(values)):
            raise ConfigurationError("field values must be finite")
        values.setflags(write=False)
        object.__setattr__(self, 'values', values)

        if self.normalized:
            norm = float(np.sum(np.abs(values) ** 2) * self.grid.cell_measure)
            if abs(norm - 1.0) > self.NORMALIZATION_TOLERANCE:
                raise ConfigurationError(f"field tagged normalized has norm_sq {norm!r}")

    @classmethod
    def zeros(cls, grid):
        return cls(grid, np.zeros(grid.size, dtype=complex))

    def with_values(self, values, normalized=False):
        """New field on the same grid."""
        return Field(self.grid, values, normalized=normalized)

    @property
    def modulus(self) -> np.ndarray:
        return np.abs(self.values)

    @property
    def intensity(self) -> np.ndarray:
        return np.abs(self.values) ** 2

    @property
    def phase(self) -> np.ndarray:
        return np.angle(self.values)

    @property
    def is_real(self) -> bool:
        return bool(np.all(self.values.imag == 0))

    def __repr__(self):
        tag = " normalized" if self.normalized else ""
        return f"<Field{tag} on {self.grid.dimension}D grid ({self.grid.size} points)>"
