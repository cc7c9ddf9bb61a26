"""
Midpoint-rule replacements for the continuous integrals over the transverse plane.
"""
import numpy as np

from imagecrb.exceptions import GridMismatchError, NullFieldError
from .models import Field

NULL_NORM_THRESHOLD = 1e-30


def require_same_grid(*grids):
    first = grids[0]
    for grid in grids[1:]:
        if grid != first:
            raise GridMismatchError()
    return first


def inner_product(f: Field, g: Field) -> complex:
    """Sum of conj(f) * g * dA; conjugate-linear in f, linear in g."""
    grid = require_same_grid(f.grid, g.grid)
    return complex(np.vdot(f.values, g.values) * grid.cell_measure)


def norm_sq(f: Field) -> float:
    return inner_product(f, f).real


def normalize(f: Field) -> Field:
    """
    Rescale f to unit norm.

    Raises:
        NullFieldError: if norm_sq(f) is below 1e-30
    """
    n = norm_sq(f)
    if n <= NULL_NORM_THRESHOLD:
        raise NullFieldError()
    return f.with_values(f.values / np.sqrt(n), normalized=True)


def l2_distance(f: Field, g: Field) -> float:
    require_same_grid(f.grid, g.grid)
    return float(np.sqrt(np.sum(np.abs(f.values - g.values) ** 2) * f.grid.cell_measure))
