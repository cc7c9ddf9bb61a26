import csv
import io
import math

import pytest
from django.core.management import call_command
from django.core.management.base import CommandError

from imagecrb.exceptions import ConfigurationError, NoIntensitySchemeError, SchemeConfigurationError
from runs.reporting import format_number
from runs.runconfig import load_run_config, validate_sections
from runs.service import RunService

BASE_CONFIG = """
[model]
kind = {kind}
waist = 1.0

[grid]
dimension = 1
extent = 6.0
points = {points}

[illumination]
N = {N}
sigma_P2 = {sigma_P2}

[run]
scheme = {scheme}
squeezed = {squeezed}

[output]
prefix = {prefix}
"""

MC_SECTION = """
[mc]
n_trials = {n_trials}
seed = 7
true_p = 0.0
"""


@pytest.fixture
def write_config(tmp_path):
    def write(kind='displaced_gaussian', N=1e6, sigma_P2=1.0, scheme='both', points=256, mc=None, extra='',
              squeezed=True):
        text = BASE_CONFIG.format(
            kind=kind, N=N, sigma_P2=sigma_P2, scheme=scheme, squeezed=str(squeezed).lower(), points=points,
            prefix=tmp_path / 'out' / 'run',
        )
        if mc:
            text += MC_SECTION.format(n_trials=mc)
        path = tmp_path / 'run.ini'
        path.write_text(text + extra, encoding='utf-8')
        return path
    return write


def read_rows(path):
    with open(path, encoding='utf-8', newline='') as f:
        return list(csv.DictReader(f))


def run(command, path, **options):
    call_command(command, config=str(path), stdout=io.StringIO(), **options)


class TestFormatNumber:

    def test_shortest_round_trip(self):
        assert format_number(0.1) == '0.1'
        assert float(format_number(1 / 3)) == 1 / 3

    def test_infinity_and_integers(self):
        assert format_number(math.inf) == 'inf'
        assert format_number(1000) == '1000'


class TestRunConfig:

    def test_defaults_are_resolved(self, write_config):
        config = load_run_config(write_config())
        assert config.scheme == 'both'
        assert config.run['lo_ratio'] == 1e4
        assert config.illumination['sigma_Q2'] == 1.0
        assert config.mc is None

    def test_all_errors_reported_together(self):
        raw = {
            'model': {'kind': 'no_such_model'},
            'illumination': {'N': '-5'},
            'run': {'scheme': 'telepathy'},
        }
        with pytest.raises(ConfigurationError) as exc:
            validate_sections(raw)
        message = str(exc.value)
        assert 'model.kind' in message
        assert 'illumination.N' in message
        assert 'run.scheme' in message

    def test_unknown_section_rejected(self):
        raw = {'model': {'kind': 'displaced_gaussian'}, 'illumination': {'N': '100'}, 'extras': {'x': '1'}}
        with pytest.raises(ConfigurationError, match='extras: unknown section'):
            validate_sections(raw)

    def test_heisenberg_violation_rejected(self):
        raw = {'model': {'kind': 'displaced_gaussian'}, 'illumination': {'N': '100', 'sigma_P2': '0.5', 'sigma_Q2': '1.0'}}
        with pytest.raises(ConfigurationError, match='Heisenberg'):
            validate_sections(raw)

    def test_custom_expression_checked(self):
        raw = {'model': {'kind': 'custom', 'expression': 'exp(-(x - p)**2'}, 'illumination': {'N': '100'}}
        with pytest.raises(ConfigurationError, match='model.expression'):
            validate_sections(raw)

    def test_p_sweep_requires_mc(self, write_config):
        path = write_config(extra='\n[sweep]\naxis = p\nvalues = 0.0, 0.1\n')
        with pytest.raises(ConfigurationError, match='sweep'):
            load_run_config(path)

    def test_intensity_mc_rejects_super_poissonian_light(self, write_config):
        with pytest.raises(ConfigurationError, match='mc'):
            load_run_config(write_config(sigma_P2=2.0, mc=1000))

    def test_command_line_overrides(self, write_config, tmp_path):
        config = load_run_config(write_config(mc=1000), seed=99, prefix=str(tmp_path / 'other'))
        assert config.mc['seed'] == 99
        assert config.output_prefix == str(tmp_path / 'other')

    def test_with_value_keeps_minimum_uncertainty(self, write_config):
        config = load_run_config(write_config()).with_value('sigma_P2', 0.25)
        assert config.illumination['sigma_Q2'] == pytest.approx(4.0)


class TestRunService:

    def test_both_schemes_for_displacement(self, write_config):
        assert RunService(load_run_config(write_config())).schemes() == ['intensity', 'field']

    def test_intensity_skipped_for_phase_only_model(self, write_config):
        service = RunService(load_run_config(write_config(kind='phase_tilt')))
        assert service.schemes() == ['field']

    def test_intensity_only_for_phase_only_model_fails(self, write_config):
        service = RunService(load_run_config(write_config(kind='phase_tilt', scheme='intensity')))
        with pytest.raises(NoIntensitySchemeError):
            service.schemes()

    def test_scheme_reports_reach_the_bounds(self, write_config):
        service = RunService(load_run_config(write_config()))
        reports = service.scheme_reports()
        summary = service.summary
        assert reports['intensity'].p_min == pytest.approx(summary.crb_intensity, rel=1e-3)
        assert reports['field'].p_min == pytest.approx(summary.crb_field, rel=1e-3)

    def test_simulate_needs_mc(self, write_config):
        with pytest.raises(ConfigurationError):
            RunService(load_run_config(write_config())).simulate()

    @pytest.mark.parametrize("squeezed", [True, False])
    def test_simulation_follows_squeezed_flag(self, write_config, squeezed):
        path = write_config(N=1e4, sigma_P2=0.5, scheme='field', points=32, mc=1000, squeezed=squeezed)
        service = RunService(load_run_config(path))
        noise = service.noise_kind('field')
        assert noise.sigma_P == pytest.approx(math.sqrt(0.5) if squeezed else 1.0)
        batch = service.simulate()[0]
        report = service.scheme_reports()['field']
        assert batch.crb == pytest.approx(report.p_min, rel=1e-6)

    def test_intensity_noise_ignores_squeezed_flag(self, write_config):
        path = write_config(sigma_P2=0.5, scheme='intensity', squeezed=False)
        noise = RunService(load_run_config(path)).noise_kind('intensity')
        assert noise.kind == 'sub_poisson_gaussian'
        assert noise.sigma_P2 == pytest.approx(0.5)

    def test_squeezed_phase_encoded_simulation_rejected(self, write_config):
        path = write_config(kind='phase_tilt', sigma_P2=0.25, scheme='field', points=32, mc=1000)
        with pytest.raises(SchemeConfigurationError, match="squeezing not mode-matched"):
            RunService(load_run_config(path)).simulate()


class TestBoundsCommand:

    def test_bounds_csv(self, write_config, tmp_path):
        run('bounds', write_config())
        rows = read_rows(tmp_path / 'out' / 'run_bounds.csv')
        assert len(rows) == 1
        row = rows[0]
        assert float(row['a']) == pytest.approx(1.0, rel=1e-4)
        assert float(row['b']) == pytest.approx(1.0, rel=1e-4)
        assert float(row['crb_intensity']) == pytest.approx(5e-4, rel=1e-4)
        assert float(row['crb_field']) == pytest.approx(5e-4, rel=1e-4)
        assert float(row['N']) == 1e6

    def test_phase_only_model_writes_inf(self, write_config, tmp_path):
        run('bounds', write_config(kind='phase_tilt'))
        row = read_rows(tmp_path / 'out' / 'run_bounds.csv')[0]
        assert row['a'] == 'inf'
        assert row['crb_intensity'] == 'inf'
        assert math.isfinite(float(row['crb_field']))

    def test_stable_under_grid_refinement(self, write_config, tmp_path):
        run('bounds', write_config(points=256), out=str(tmp_path / 'coarse' / 'run'))
        run('bounds', write_config(points=512), out=str(tmp_path / 'fine' / 'run'))
        coarse = read_rows(tmp_path / 'coarse' / 'run_bounds.csv')[0]
        fine = read_rows(tmp_path / 'fine' / 'run_bounds.csv')[0]
        for column in ('a', 'b', 'fisher_poisson', 'fisher_gauss', 'crb_intensity', 'crb_field'):
            assert float(fine[column]) == pytest.approx(float(coarse[column]), rel=1e-6)

    def test_config_echo_round_trip(self, write_config, tmp_path):
        original = load_run_config(write_config(mc=1000))
        run('bounds', write_config(mc=1000))
        echoed = load_run_config(tmp_path / 'out' / 'run_config.ini')
        assert echoed.model == original.model
        assert echoed.illumination == original.illumination
        assert echoed.run == original.run
        assert echoed.mc == original.mc
        assert echoed.build_grid() == original.build_grid()

    def test_invalid_config_exit_code(self, tmp_path):
        path = tmp_path / 'bad.ini'
        path.write_text('[model]\nkind = displaced_gaussian\n', encoding='utf-8')
        with pytest.raises(CommandError) as exc:
            run('bounds', path)
        assert exc.value.returncode == 2

    def test_missing_config_exit_code(self, tmp_path):
        with pytest.raises(CommandError) as exc:
            run('bounds', tmp_path / 'missing.ini')
        assert exc.value.returncode == 2

    def test_undecodable_config_exit_code(self, tmp_path):
        path = tmp_path / 'binary.ini'
        path.write_bytes(b'\xff\xfe[model]\nkind = displaced_gaussian\n')
        with pytest.raises(CommandError) as exc:
            run('bounds', path)
        assert exc.value.returncode == 2

    def test_numeric_failure_exit_code(self, write_config):
        path = write_config(kind='phase_tilt', scheme='intensity', mc=1000)
        with pytest.raises(CommandError) as exc:
            run('simulate', path)
        assert exc.value.returncode == 3


class TestSimulateCommand:

    def test_output_independent_of_threads(self, write_config, tmp_path):
        path = write_config(points=32, mc=3000)
        run('simulate', path, threads=1, out=str(tmp_path / 'one' / 'run'))
        run('simulate', path, threads=4, out=str(tmp_path / 'four' / 'run'))
        one = (tmp_path / 'one' / 'run_mc.csv').read_bytes()
        four = (tmp_path / 'four' / 'run_mc.csv').read_bytes()
        assert one == four

    def test_seed_override_changes_estimates(self, write_config, tmp_path):
        path = write_config(points=32, mc=1000, scheme='field')
        run('simulate', path, seed=1, out=str(tmp_path / 'a' / 'run'))
        run('simulate', path, seed=2, out=str(tmp_path / 'b' / 'run'))
        a = read_rows(tmp_path / 'a' / 'run_mc.csv')[0]
        b = read_rows(tmp_path / 'b' / 'run_mc.csv')[0]
        assert a['seed'] == '1'
        assert a['mean_estimate'] != b['mean_estimate']

    def test_one_row_per_scheme(self, write_config, tmp_path):
        run('simulate', write_config(points=32, mc=1000))
        rows = read_rows(tmp_path / 'out' / 'run_mc.csv')
        assert [row['scheme'] for row in rows] == ['intensity', 'field']
        assert rows[0]['noise_kind'] == 'poisson'
        assert rows[1]['noise_kind'] == 'gaussian_field'


class TestSweepCommand:

    def test_field_bound_scales_with_photon_number(self, write_config, tmp_path):
        run('sweep', write_config(), axis='N', values='1e4, 1e6')
        rows = read_rows(tmp_path / 'out' / 'run_sweep.csv')
        assert [row['axis'] for row in rows] == ['N', 'N']
        ratio = float(rows[0]['crb_field']) / float(rows[1]['crb_field'])
        assert ratio == pytest.approx(10.0, rel=1e-9)

    def test_bounds_scale_with_squeezing(self, write_config, tmp_path):
        run('sweep', write_config(), axis='sigma_P2', values='0.25, 1.0')
        rows = read_rows(tmp_path / 'out' / 'run_sweep.csv')
        ratio = float(rows[1]['crb_intensity']) / float(rows[0]['crb_intensity'])
        assert ratio == pytest.approx(2.0, rel=1e-9)
        assert float(rows[0]['sigma_Q2']) == pytest.approx(4.0)

    def test_sweep_without_axis_is_a_configuration_error(self, write_config):
        with pytest.raises(CommandError) as exc:
            run('sweep', write_config())
        assert exc.value.returncode == 2

    def test_p_sweep_with_mc(self, write_config, tmp_path):
        run('sweep', write_config(points=32, mc=500, scheme='field'), axis='p', values='0.0, 0.05')
        rows = read_rows(tmp_path / 'out' / 'run_sweep.csv')
        assert [float(row['true_p']) for row in rows] == [0.0, 0.05]
        assert all(row['scheme'] == 'field' for row in rows)
