"""
Django management command sweeping N, sigma_P2 or the true parameter.
"""
from runs.management.base import RunCommand
from runs.reporting import output_path, sweep_columns, sweep_rows, write_csv
from runs.runconfig import SWEEP_AXES
from runs.service import RunService


class Command(RunCommand):
    help = 'Evaluate bounds (and Monte Carlo batches with an [mc] section) over a list of values'
    title = 'SWEEP'

    def add_arguments(self, parser):
        super().add_arguments(parser)
        parser.add_argument('--axis', choices=SWEEP_AXES, help='Override the [sweep] axis')
        parser.add_argument('--values', help='Override the [sweep] values (comma-separated)')

    def load_config(self, options, **overrides):
        return super().load_config(options, axis=options.get('axis'), values=options.get('values'))

    def run(self, config, options):
        axis = config.sweep['axis'] if config.sweep else None
        results = RunService(config, threads=options['threads']).sweep()
        for value, summary, batches in results:
            self.stdout.write(
                f'  {axis} = {value:g}: crb_intensity = {summary.crb_intensity:.6g}, crb_field = {summary.crb_field:.6g}'
            )
        path = output_path(config.output_prefix, 'sweep.csv')
        return [write_csv(path, sweep_columns(config.mc is not None), sweep_rows(axis, results))]
