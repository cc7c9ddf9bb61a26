"""
Hermite-Gauss transverse modes.
"""
import math

import numpy as np
from scipy.special import eval_hermite

from .models import Field


def hermite_gauss_values(coordinates, order, waist, center=0.0):
    """
    HG_n along x (times the fundamental Gaussian along y in 2D), normalized
    in the continuum: (2/(pi w^2))^(d/4) / sqrt(2^n n!) H_n(sqrt2 (x-c)/w) exp(-r^2/w^2).
    """
    x = coordinates[0] - center
    r2 = x ** 2 + sum(c ** 2 for c in coordinates[1:])
    dimension = len(coordinates)
    prefactor = (2.0 / (np.pi * waist ** 2)) ** (dimension / 4.0)
    prefactor /= math.sqrt(2.0 ** order * math.factorial(order))
    return prefactor * eval_hermite(order, np.sqrt(2.0) * x / waist) * np.exp(-r2 / waist ** 2)


def hermite_gauss(grid, order, waist=1.0):
    return Field(grid, hermite_gauss_values(grid.coordinates, order, waist))
