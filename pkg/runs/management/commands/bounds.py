"""
Django management command computing the Cramer-Rao bounds of one model.
"""
from runs.management.base import RunCommand
from runs.reporting import BOUNDS_COLUMNS, bounds_row, output_path, write_csv
from runs.service import RunService


class Command(RunCommand):
    help = 'Compute a, b, both Fisher informations and both Cramer-Rao bounds for a configured model'
    title = 'BOUNDS'

    def run(self, config, options):
        service = RunService(config, threads=options['threads'])
        summary = service.summary
        self.write_summary(summary)

        if summary.has_intensity_scheme:
            for scheme, report in service.scheme_reports().items():
                self.stdout.write(f'  {scheme} detection: SNR = {report.snr:.6g}, p_min = {report.p_min:.6g}')
        else:
            self.stdout.write(self.style.WARNING('⚠ Intensity carries no information on p: no intensity scheme'))

        path = output_path(config.output_prefix, 'bounds.csv')
        return [write_csv(path, BOUNDS_COLUMNS, [bounds_row(summary)])]
