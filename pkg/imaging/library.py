"""
Built-in image families and the model-authoring interface.

The built-ins span the three regimes of interest: real families where
a = b (displaced_gaussian, waist_scaled_gaussian), a pure phase family
where a is infinite (phase_tilt), and complex superpositions where a > b
(hermite_superposition).
"""
import logging

import numpy as np
import sympy

from imagecrb.exceptions import ConfigurationError, ModelEvaluationError
from transverse.modes import hermite_gauss_values
from .models import ImageModel

logger = logging.getLogger(__name__)

DEFAULT_RELATIVE_P_SCALE = 0.1


def _p_scale(p_scale, waist):
    return DEFAULT_RELATIVE_P_SCALE * waist if p_scale is None else float(p_scale)


def displaced_gaussian(w=1.0, p_scale=None):
    """u0(x, p) = (2/(pi w^2))^(1/4) exp(-(x-p)^2/w^2); p is a transverse displacement."""
    w = float(w)

    def evaluate(grid, p):
        return hermite_gauss_values(grid.coordinates, 0, w, center=p)

    def derivative(grid):
        return (2.0 * grid.x / w ** 2) * hermite_gauss_values(grid.coordinates, 0, w)

    return ImageModel(
        name=f"displaced_gaussian(w={w:g})",
        p_scale=_p_scale(p_scale, w),
        evaluator=evaluate,
        derivative_mode=ImageModel.ANALYTIC,
        derivative=derivative,
        kind='displaced_gaussian',
        waist=w,
        parameters={'waist': w},
    )


def waist_scaled_gaussian(w=1.0, p_scale=None):
    """Gaussian whose waist is w * (1 + p); p is a relative size change."""
    w = float(w)

    def evaluate(grid, p):
        return hermite_gauss_values(grid.coordinates, 0, w * (1.0 + p))

    def derivative(grid):
        u0 = hermite_gauss_values(grid.coordinates, 0, w)
        return u0 * (2.0 * grid.radius_sq / w ** 2 - grid.dimension / 2.0)

    return ImageModel(
        name=f"waist_scaled_gaussian(w={w:g})",
        p_scale=DEFAULT_RELATIVE_P_SCALE if p_scale is None else float(p_scale),
        evaluator=evaluate,
        derivative_mode=ImageModel.ANALYTIC,
        derivative=derivative,
        kind='waist_scaled_gaussian',
        waist=w,
        parameters={'waist': w},
    )


def phase_tilt(w=1.0, kappa=1.0, p_scale=None):
    """u0(x, p) = u0(x) exp(i kappa p x); the intensity does not depend on p."""
    w, kappa = float(w), float(kappa)

    def evaluate(grid, p):
        return hermite_gauss_values(grid.coordinates, 0, w) * np.exp(1j * kappa * p * grid.x)

    def derivative(grid):
        return 1j * kappa * grid.x * hermite_gauss_values(grid.coordinates, 0, w)

    return ImageModel(
        name=f"phase_tilt(w={w:g},kappa={kappa:g})",
        p_scale=_p_scale(p_scale, w),
        evaluator=evaluate,
        derivative_mode=ImageModel.ANALYTIC,
        derivative=derivative,
        kind='phase_tilt',
        waist=w,
        parameters={'waist': w, 'kappa': kappa},
    )


def hermite_superposition(w=1.0, coefficients=(1.0,), slopes=(0.0, 1.0), p_scale=None):
    """
    u0(p) proportional to sum_n (c_n + p d_n) HG_n, renormalized at every p.

    Hermite-Gauss modes are orthonormal, so the norm is sqrt(sum |c_n + p d_n|^2).
    """
    w = float(w)
    order = max(len(coefficients), len(slopes))
    c = np.zeros(order, dtype=complex)
    d = np.zeros(order, dtype=complex)
    c[:len(coefficients)] = coefficients
    d[:len(slopes)] = slopes
    if not np.any(c):
        raise ConfigurationError("hermite_superposition needs at least one nonzero coefficient")

    def evaluate(grid, p):
        amplitudes = c + p * d
        norm = np.sqrt(np.sum(np.abs(amplitudes) ** 2))
        if norm == 0:
            raise ModelEvaluationError(f"model evaluation failed: all amplitudes vanish at p={p}")
        values = sum(a * hermite_gauss_values(grid.coordinates, n, w) for n, a in enumerate(amplitudes) if a != 0)
        return values / norm

    return ImageModel(
        name=f"hermite_superposition(w={w:g},order={order})",
        p_scale=_p_scale(p_scale, w),
        evaluator=evaluate,
        kind='hermite_superposition',
        waist=w,
        parameters={'waist': w, 'coefficients': tuple(c), 'slopes': tuple(d)},
    )


def custom(name, evaluator, p_scale, derivative=None, waist=1.0):
    """
    Wrap a caller-supplied evaluator(grid, p).

    Without an analytic ``derivative(grid)`` the model is differentiated by
    central finite differences.
    """
    return ImageModel(
        name=name,
        p_scale=float(p_scale),
        evaluator=evaluator,
        derivative_mode=ImageModel.ANALYTIC if derivative is not None else ImageModel.FINITE_DIFFERENCE,
        derivative=derivative,
        kind='custom',
        waist=float(waist),
    )


X, Y, P, W = sympy.symbols('x y p w', real=True)
EXPRESSION_SYMBOLS = {'x': X, 'y': Y, 'p': P, 'w': W}


def parse_expression(expression):
    """
    Parse a model expression in x, y, p and w (I is the imaginary unit).

    Raises:
        ConfigurationError: on syntax errors or unknown symbols
    """
    try:
        expr = sympy.sympify(expression, locals=EXPRESSION_SYMBOLS)
    except (sympy.SympifyError, SyntaxError, TypeError) as e:
        raise ConfigurationError(f"cannot parse model expression {expression!r}: {e}") from e
    unknown = {str(s) for s in expr.free_symbols} - set(EXPRESSION_SYMBOLS)
    if unknown:
        raise ConfigurationError(
            f"model expression uses unknown symbols {sorted(unknown)}; allowed: x, y, p, w"
        )
    return expr


def _sample(function, grid, p, waist):
    x = grid.coordinates[0]
    y = grid.coordinates[1] if grid.dimension == 2 else np.zeros_like(x)
    with np.errstate(all='ignore'):
        values = np.asarray(function(x, y, p, waist), dtype=complex)
    return np.broadcast_to(values, x.shape)


def custom_from_expression(expression, waist=1.0, p_scale=None, derivative_mode=ImageModel.FINITE_DIFFERENCE,
                           name=None):
    """
    Build a model from a text expression, renormalized on the grid at every p.

    With ``derivative_mode='analytic'`` the p-derivative is taken symbolically
    and combined with the derivative of the normalization:
    d(f/|f|) = f'/|f| - f Re<f, f'>/|f|^3.
    """
    waist = float(waist)
    expr = parse_expression(expression)
    function = sympy.lambdify((X, Y, P, W), expr, modules='numpy')

    def evaluate(grid, p):
        values = _sample(function, grid, p, waist)
        norm_sq = float(np.sum(np.abs(values) ** 2) * grid.cell_measure)
        if not np.isfinite(norm_sq) or norm_sq <= 0:
            raise ModelEvaluationError(f"model evaluation failed: expression {expression!r} has no finite norm")
        return values / np.sqrt(norm_sq)

    derivative = None
    if derivative_mode == ImageModel.ANALYTIC:
        slope_function = sympy.lambdify((X, Y, P, W), sympy.diff(expr, P), modules='numpy')

        def derivative(grid):
            f = _sample(function, grid, 0.0, waist)
            df = _sample(slope_function, grid, 0.0, waist)
            norm_sq = float(np.sum(np.abs(f) ** 2) * grid.cell_measure)
            overlap = float(np.real(np.vdot(f, df)) * grid.cell_measure)
            return df / np.sqrt(norm_sq) - f * overlap / norm_sq ** 1.5
    elif derivative_mode != ImageModel.FINITE_DIFFERENCE:
        raise ConfigurationError(f"unknown derivative mode {derivative_mode!r}")

    logger.info(f"Parsed custom model expression {expr} ({derivative_mode} derivative)")
    return ImageModel(
        name=name or f"custom({expression})",
        p_scale=_p_scale(p_scale, waist),
        evaluator=evaluate,
        derivative_mode=derivative_mode,
        derivative=derivative,
        kind='custom',
        waist=waist,
        parameters={'waist': waist, 'expression': expression},
    )
