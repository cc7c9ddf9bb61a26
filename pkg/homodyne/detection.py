"""
Balanced homodyne detection with a local oscillator shaped like the signal mode.

Phases are measured in the gauge where the mean image field is real and
positive at its brightest cell.
"""
import logging
import math

import numpy as np

from array_detection.detection import CLAMP_FRACTION
from array_detection.models import DetectionReport, GainDistribution
from bounds.sensitivity import signal_mode
from imagecrb.exceptions import ParameterNotEncodedError, SchemeConfigurationError
from imaging.derivatives import mode_at, mode_derivative
from transverse.quadrature import inner_product, l2_distance
from .models import HomodyneConfig

logger = logging.getLogger(__name__)

DEFAULT_LO_RATIO = 1e4
SCAN_SAMPLES = 360
SCAN_AGREEMENT = math.radians(1.0)
MODE_MATCH_TOLERANCE = 1e-6
# allowed L2 norm of the part of u_E in quadrature with the local mean field
QUADRATURE_TOLERANCE = 1e-6


def reference_phase(u0) -> float:
    """
    Phase of the mean field at its brightest cell.

    This is the beam center for the built-in families; for multi-lobed
    images the brightest cell fixes the gauge instead.
    """
    return float(u0.phase[np.argmax(u0.modulus)])


def lo_shape(model, grid):
    """
    u_E with its global phase removed, so that the LO shape is as real as
    the model allows; the removed phase is recovered by tuning theta_LO.
    """
    u_E = signal_mode(model, grid)
    f = np.exp(-1j * reference_phase(mode_at(model, grid, 0.0))) * u_E.values
    psi = float(np.mod(0.5 * np.angle(np.sum(f ** 2)), np.pi))
    if np.pi - psi < 1e-9:
        psi = 0.0
    return u_E.with_values(f * np.exp(-1j * psi), normalized=True)


def _derivative_overlap(config: HomodyneConfig, model) -> complex:
    return inner_product(config.lo_mode, mode_derivative(model, config.grid))


def scan_phase(config: HomodyneConfig, model) -> float:
    """theta_LO maximizing the first-order signal, by brute force over a 1 degree grid."""
    overlap = _derivative_overlap(config, model)
    thetas = np.linspace(-np.pi, np.pi, SCAN_SAMPLES, endpoint=False)
    return float(thetas[np.argmax(np.real(np.exp(-1j * thetas) * overlap))])


def tune_phase(config: HomodyneConfig, model) -> float:
    """
    theta_LO = arg <lo, du0/dp>, checked against a 360-sample scan.

    Raises:
        ParameterNotEncodedError: if the LO does not overlap the field derivative
    """
    overlap = _derivative_overlap(config, model)
    if abs(overlap) == 0.0:
        raise ParameterNotEncodedError(f"parameter not encoded in the LO-selected mode of {model.name}")
    theta = float(np.angle(overlap))
    scanned = scan_phase(config, model)
    gap = abs(np.angle(np.exp(1j * (theta - scanned))))
    if gap > SCAN_AGREEMENT:
        logger.warning(f"closed-form LO phase {theta:.6g} and scan {scanned:.6g} disagree; using the scan")
        return scanned
    return theta


def mode_matched_config(model, grid, N, n_lo=None, theta_lo=None) -> HomodyneConfig:
    """LO shaped like the signal mode, N_LO = 1e4 N by default, phase tuned unless given."""
    n_lo = DEFAULT_LO_RATIO * N if n_lo is None else float(n_lo)
    config = HomodyneConfig(lo_mode=lo_shape(model, grid), N_LO=n_lo, theta_LO=0.0, N=float(N))
    if theta_lo is None:
        theta_lo = tune_phase(config, model)
    return config.with_phase(theta_lo)


def mean_difference_signal(config: HomodyneConfig, model, p) -> float:
    """2 sqrt(N N_LO) Re[exp(-i theta_LO) <lo, u0(p)>], exact in p."""
    u = mode_at(model, config.grid, p)
    overlap = inner_product(config.lo_mode, u)
    return float(2.0 * math.sqrt(config.N * config.N_LO) * np.real(np.exp(-1j * config.theta_LO) * overlap))


def difference_slope(config: HomodyneConfig, model) -> float:
    """d n_minus / dp at p = 0."""
    overlap = _derivative_overlap(config, model)
    return float(2.0 * math.sqrt(config.N * config.N_LO) * np.real(np.exp(-1j * config.theta_LO) * overlap))


def mode_mismatch(config: HomodyneConfig, model) -> float:
    """L2 distance between the LO shape and u_E, up to a global phase."""
    u_E = signal_mode(model, config.grid)
    overlap = inner_product(config.lo_mode, u_E)
    aligned = config.lo_mode.with_values(config.lo_mode.values * np.exp(1j * np.angle(overlap)))
    return l2_distance(aligned, u_E)


def require_squeezable_signal_mode(config: HomodyneConfig, model):
    """
    Squeezing acts on the amplitude quadrature of the local mean field, so the
    LO must match u_E and u_E must lie in that quadrature.

    Raises:
        SchemeConfigurationError: "squeezing not mode-matched"
    """
    mismatch = mode_mismatch(config, model)
    if mismatch > MODE_MATCH_TOLERANCE:
        raise SchemeConfigurationError(f"squeezing not mode-matched: LO differs from u_E by {mismatch:.2e}")
    grid = config.grid
    gauge = np.exp(1j * mode_at(model, grid, 0.0).phase)
    rotated = np.conj(gauge) * signal_mode(model, grid).values
    quadrature = math.sqrt(float(np.sum(rotated.imag ** 2) * grid.cell_measure))
    if quadrature > QUADRATURE_TOLERANCE:
        raise SchemeConfigurationError(
            f"squeezing not mode-matched: u_E of {model.name} has a component of norm {quadrature:.3g} "
            f"in quadrature with the mean field, where the noise is not squeezed"
        )


def homodyne_report(config: HomodyneConfig, model, sigma_P=1.0, p=0.0, squeezed_signal_mode=False) -> DetectionReport:
    """
    Difference signal, LO shot noise and the p at which the first-order SNR is one.

    With the u_E component of the image in a squeezed vacuum the noise is
    N_LO sigma_P^2; the LO must then be mode-matched to u_E and u_E must be
    in phase with the local mean field.
    """
    if squeezed_signal_mode:
        require_squeezable_signal_mode(config, model)
        variance = config.N_LO * sigma_P ** 2
    else:
        if sigma_P != 1.0:
            logger.warning(f"sigma_P={sigma_P:g} ignored: only a squeezed u_E mode changes the homodyne noise")
        variance = config.N_LO

    slope = difference_slope(config, model)
    if slope == 0.0:
        raise SchemeConfigurationError(f"LO phase {config.theta_LO:g} is insensitive to p for {model.name}")
    p_min = math.sqrt(variance) / abs(slope)
    report = DetectionReport.build(
        mean_difference_signal(config, model, p), variance, p_min, p=p, squeezed=squeezed_signal_mode
    )
    logger.info(f"homodyne detection for {model.name}: snr={report.snr:.6g} at p={p:g}, p_min={p_min:.6g}")
    return report


def equivalent_gain(config: HomodyneConfig, model, N=None) -> GainDistribution:
    """
    The array-detection gain sqrt(N_LO/N) Re[exp(-i theta_LO) lo / conj(u0)]
    whose mean signal reproduces the homodyne difference signal at first order.
    """
    N = config.N if N is None else float(N)
    grid = config.grid
    u0 = mode_at(model, grid, 0.0).values
    cell_intensity = np.abs(u0) ** 2 * grid.cell_measure
    support = cell_intensity >= CLAMP_FRACTION * cell_intensity.max()
    gains = np.zeros(grid.size)
    ratio = config.lo_mode.values[support] / np.conj(u0[support])
    gains[support] = math.sqrt(config.N_LO / N) * np.real(np.exp(-1j * config.theta_LO) * ratio)
    return GainDistribution(grid, gains)
