"""
Shared base for the run commands: common arguments, configuration loading
and the mapping of library errors onto exit codes.
"""
import logging

from django.conf import settings
from django.core.management.base import BaseCommand, CommandError

from imagecrb.exceptions import ConfigurationError, NumericError, QuantImageError
from runs.reporting import write_config_echo
from runs.runconfig import load_run_config

logger = logging.getLogger(__name__)

RULE = '=' * 80


class RunCommand(BaseCommand):
    """Base class for bounds, simulate and sweep."""

    requires_system_checks = []
    title = ''

    def add_arguments(self, parser):
        parser.add_argument('--config', required=True, help='Path to the INI run configuration')
        parser.add_argument('--seed', type=int, help='Override the [mc] seed')
        parser.add_argument('--out', help='Override the [output] prefix')
        parser.add_argument(
            '--threads', type=int, default=settings.DEFAULT_THREADS,
            help='Worker threads for Monte Carlo blocks (results do not depend on it)',
        )

    def load_config(self, options, **overrides):
        return load_run_config(options['config'], seed=options.get('seed'), prefix=options.get('out'), **overrides)

    def handle(self, *args, **options):
        try:
            config = self.load_config(options)
            self.stdout.write('\n' + RULE)
            self.stdout.write(f'{self.title}: {config.model["kind"]} ({config.source})')
            self.stdout.write(RULE)
            written = self.run(config, options)
            written.append(write_config_echo(config, config.output_prefix))
        except ConfigurationError as e:
            raise CommandError(str(e), returncode=2) from e
        except NumericError as e:
            logger.error(f"{self.title} failed: {e}")
            raise CommandError(str(e), returncode=3) from e
        except QuantImageError as e:
            raise CommandError(str(e), returncode=1) from e

        for path in written:
            self.stdout.write(self.style.SUCCESS(f'✓ Wrote {path}'))

    def run(self, config, options):
        """Execute the command; returns the list of written paths."""
        raise NotImplementedError

    def write_summary(self, summary):
        self.stdout.write(f'  a = {summary.a:.6g}    b = {summary.b:.6g}    a/b = {summary.field_advantage:.6g}')
        self.stdout.write(f'  intensity CRB: {summary.crb_intensity:.6g}')
        self.stdout.write(f'  field CRB:     {summary.crb_field:.6g}')
