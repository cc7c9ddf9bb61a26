"""
Evaluation and differentiation contract for image models.

Derivatives are taken at the a priori value p = 0.
"""
import logging

import numpy as np

from imagecrb.exceptions import DerivativeUnreliableError, ModelEvaluationError
from transverse.models import Field
from .models import ImageModel

logger = logging.getLogger(__name__)

# central-difference step, as a fraction of the model's p_scale
FD_RELATIVE_STEP = 1e-4
# relative L2 disagreement tolerated between steps h and h/10
FD_AGREEMENT = 1e-3
# |u0| below this fraction of max|u0| is treated as a dark cell
MODULUS_FLOOR = 1e-12
# allowed |norm_sq - 1| of u0(., p) for |p| <= p_scale
NORMALIZATION_TOLERANCE = 1e-6


def _evaluate(model: ImageModel, grid, p):
    try:
        with np.errstate(all='ignore'):
            raw = model.evaluator(grid, p)
        values = np.broadcast_to(np.asarray(raw, dtype=complex), (grid.size,))
    except (ArithmeticError, ValueError, TypeError) as e:
        raise ModelEvaluationError(f"model evaluation failed for {model.name} at p={p!r}: {e}") from e
    if not np.all(np.isfinite(values)):
        raise ModelEvaluationError(f"model evaluation failed for {model.name} at p={p!r}: non-finite values")
    if abs(p) <= model.p_scale:
        norm = float(np.sum(np.abs(values) ** 2) * grid.cell_measure)
        if abs(norm - 1.0) > NORMALIZATION_TOLERANCE:
            raise ModelEvaluationError(
                f"model evaluation failed for {model.name} at p={p!r}: not normalized (norm_sq={norm:.9g})"
            )
    return values


def mode_at(model: ImageModel, grid, p) -> Field:
    """u0(., p) on the grid; flagged ``out_of_range`` when |p| exceeds p_scale."""
    p = float(p)
    out_of_range = abs(p) > model.p_scale
    if out_of_range:
        logger.warning(f"p={p:g} is outside the declared range of {model.name} (|p| <= {model.p_scale:g})")
    return Field(grid, _evaluate(model, grid, p), out_of_range=out_of_range)


def central_difference(sample, p_scale, what="derivative"):
    """
    Central difference of sample(p) at p = 0 with step 1e-4 * p_scale,
    cross-checked against a step ten times smaller.
    """
    h = FD_RELATIVE_STEP * p_scale
    coarse = (sample(h) - sample(-h)) / (2.0 * h)
    fine = (sample(h / 10.0) - sample(-h / 10.0)) / (h / 5.0)
    scale = max(np.linalg.norm(coarse), np.linalg.norm(fine))
    if scale == 0.0:
        return coarse
    disagreement = np.linalg.norm(coarse - fine) / scale
    if disagreement > FD_AGREEMENT:
        raise DerivativeUnreliableError(
            f"{what} unreliable: steps {h:.3g} and {h / 10:.3g} disagree by {disagreement:.2e} (relative)"
        )
    return coarse


def mode_derivative(model: ImageModel, grid) -> Field:
    """du0/dp at p = 0 (complex, unnormalized)."""
    if model.derivative_mode == ImageModel.ANALYTIC:
        try:
            with np.errstate(all='ignore'):
                values = np.broadcast_to(np.asarray(model.derivative(grid), dtype=complex), (grid.size,))
        except (ArithmeticError, ValueError, TypeError) as e:
            raise ModelEvaluationError(f"model evaluation failed for the derivative of {model.name}: {e}") from e
        if not np.all(np.isfinite(values)):
            raise ModelEvaluationError(f"model evaluation failed for the derivative of {model.name}: non-finite values")
        return Field(grid, values)

    values = central_difference(lambda p: _evaluate(model, grid, p), model.p_scale)
    return Field(grid, values)


def modulus_derivative(model: ImageModel, grid) -> Field:
    """
    d|u0|/dp at p = 0 (real, unnormalized).

    Bright cells use Re(conj(u0) du0/dp) / |u0|. Dark cells (|u0| below
    1e-12 max|u0|) take |du0/dp| with the sign of the outward difference
    of |u0|, which avoids the 0/0 of the quotient in underflowing tails.
    """
    u0 = _evaluate(model, grid, 0.0)
    du = mode_derivative(model, grid).values
    modulus = np.abs(u0)
    bright = modulus >= MODULUS_FLOOR * modulus.max()

    values = np.zeros(grid.size)
    values[bright] = np.real(np.conj(u0[bright]) * du[bright]) / modulus[bright]

    dark = ~bright
    if np.any(dark):
        h = FD_RELATIVE_STEP * model.p_scale
        stepped = np.abs(_evaluate(model, grid, h))
        step = stepped - modulus
        resolved = np.abs(step) > 64 * np.finfo(float).eps * np.maximum(stepped, modulus)
        direction = np.where(resolved, np.sign(step), 0.0)
        values[dark] = (direction * np.abs(du))[dark]
    return Field(grid, values)
