"""
Run service: turns a validated RunConfig into bounds, scheme reports and
Monte Carlo batches.
"""
import logging

from array_detection.detection import optimal_gain, scheme_report
from bounds.fisher import crb_summary
from homodyne.detection import homodyne_report, mode_matched_config, require_squeezable_signal_mode
from imagecrb.exceptions import ConfigurationError, NoIntensitySchemeError
from montecarlo.harness import run_batch
from montecarlo.models import FIELD, INTENSITY, NoiseKind
from .runconfig import RunConfig

logger = logging.getLogger(__name__)


class RunService:
    """
    Service executing one run configuration.

    Domain objects are built once per service; sweeps create one service per
    swept value.
    """

    def __init__(self, config: RunConfig, threads=1):
        """Build the model, grid and illumination described by the config."""
        self.config = config
        self.threads = max(int(threads), 1)
        self.model = config.build_model()
        self.grid = config.build_grid()
        self.illumination = config.build_illumination()
        self._summary = None

    @property
    def summary(self):
        if self._summary is None:
            self._summary = crb_summary(self.model, self.grid, self.illumination)
        return self._summary

    def schemes(self):
        """
        Detection schemes to run.

        With scheme 'both', the intensity scheme is skipped when the intensity
        carries no information on p.

        Raises:
            NoIntensitySchemeError: if the intensity scheme alone is requested for such a model
        """
        requested = self.config.scheme
        if requested == FIELD:
            return [FIELD]
        if not self.summary.has_intensity_scheme:
            if requested == INTENSITY:
                raise NoIntensitySchemeError(f"no intensity scheme exists for {self.model.name}: a is infinite")
            logger.warning(f"{self.model.name}: intensity does not depend on p, skipping the intensity scheme")
            return [FIELD]
        return [INTENSITY, FIELD] if requested == 'both' else [INTENSITY]

    def scheme_config(self, scheme):
        """Optimal gain map for intensity detection, mode-matched LO for homodyne detection."""
        N = self.illumination.N
        if scheme == INTENSITY:
            return optimal_gain(self.model, self.grid, beta=self.config.run['beta'])
        return mode_matched_config(self.model, self.grid, N, n_lo=self.config.run['lo_ratio'] * N)

    @property
    def squeezed(self) -> bool:
        """Squeezing sits in the noise mode (intensity) or the signal mode (homodyne)."""
        return self.config.run['squeezed'] and not self.illumination.is_coherent

    def noise_kind(self, scheme) -> NoiseKind:
        """
        Generative noise matching the scheme reports: without mode squeezing
        the homodyne signal mode sees vacuum noise.
        """
        if scheme == FIELD and not self.squeezed:
            return NoiseKind.gaussian_field()
        return NoiseKind.for_scheme(scheme, self.illumination)

    def scheme_reports(self, p=0.0):
        """DetectionReport per scheme, at the optimal configuration."""
        squeezed = self.squeezed
        N, sigma_P = self.illumination.N, self.illumination.sigma_P
        reports = {}
        for scheme in self.schemes():
            setup = self.scheme_config(scheme)
            if scheme == INTENSITY:
                reports[scheme] = scheme_report(setup, self.model, N, sigma_P, p, squeezed_noise_mode=squeezed)
            else:
                reports[scheme] = homodyne_report(
                    setup, self.model, sigma_P if squeezed else 1.0, p, squeezed_signal_mode=squeezed
                )
        return reports

    def simulate(self):
        """
        One TrialBatch per scheme.

        Raises:
            ConfigurationError: without an [mc] section
            SchemeConfigurationError: for squeezed homodyne runs whose signal mode cannot be squeezed
        """
        mc = self.config.mc
        if mc is None:
            raise ConfigurationError("simulation needs an [mc] section with n_trials and seed")
        batches = []
        for scheme in self.schemes():
            setup = self.scheme_config(scheme)
            if scheme == FIELD and self.squeezed:
                require_squeezable_signal_mode(setup, self.model)
            batch = run_batch(
                setup, self.model, self.illumination, mc['true_p'], mc['n_trials'], mc['seed'],
                noise=self.noise_kind(scheme), threads=self.threads,
            )
            batches.append(batch)
        return batches

    def sweep(self, axis=None, values=None):
        """
        Evaluate the bounds (and Monte Carlo batches when an [mc] section is
        present) at every value of the swept axis.

        Returns:
            list of (value, SensitivitySummary, list of TrialBatch)
        """
        sweep = self.config.sweep or {}
        axis = axis or sweep.get('axis')
        values = values if values is not None else sweep.get('values')
        if not axis or not values:
            raise ConfigurationError("sweep needs an axis and a list of values")

        results = []
        for value in values:
            service = RunService(self.config.with_value(axis, value), threads=self.threads)
            batches = service.simulate() if service.config.mc else []
            results.append((value, service.summary, batches))
            logger.info(f"sweep {axis}={value!r}: crb_field={service.summary.crb_field:.6g}")
        return results


