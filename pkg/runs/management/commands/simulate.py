"""
Django management command running Monte Carlo batches for the optimal schemes.
"""
from runs.management.base import RunCommand
from runs.reporting import MC_COLUMNS, mc_row, output_path, write_csv
from runs.service import RunService


class Command(RunCommand):
    help = 'Simulate the optimal intensity and/or homodyne schemes and compare the estimator spread with the CRB'
    title = 'SIMULATE'

    def run(self, config, options):
        service = RunService(config, threads=options['threads'])
        batches = service.simulate()
        for batch in batches:
            self.stdout.write(
                f'  {batch.scheme}: std = {batch.std_estimate:.6g}, crb = {batch.crb:.6g}, '
                f'ratio = {batch.efficiency_ratio:.4f} ({batch.n_trials} trials)'
            )
        path = output_path(config.output_prefix, 'mc.csv')
        return [write_csv(path, MC_COLUMNS, [mc_row(batch) for batch in batches])]
