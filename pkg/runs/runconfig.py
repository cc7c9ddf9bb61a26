"""
Run configuration: INI sections validated by REST framework serializers.

Every section is validated before any computation starts and all problems
are reported together.
"""
import configparser
import copy
import io
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

from django.conf import settings
from rest_framework import serializers

from imagecrb.exceptions import ConfigurationError
from imaging import library
from imaging.models import Illumination, ImageModel
from transverse.models import TransverseGrid

logger = logging.getLogger(__name__)

MODEL_KINDS = ['displaced_gaussian', 'waist_scaled_gaussian', 'phase_tilt', 'hermite_superposition', 'custom']
SCHEME_CHOICES = ['intensity', 'field', 'both']
SWEEP_AXES = ['N', 'sigma_P2', 'p']
HEISENBERG_TOLERANCE = 1e-12


def parse_list(value, convert=float):
    items = [item.strip() for item in str(value).split(',') if item.strip()]
    if not items:
        raise serializers.ValidationError("Expected a comma-separated list of numbers.")
    try:
        return [convert(item) for item in items]
    except ValueError:
        raise serializers.ValidationError(f"Cannot parse {value!r} as a list of numbers.")


class ModelSectionSerializer(serializers.Serializer):
    """[model] section."""
    kind = serializers.ChoiceField(choices=MODEL_KINDS)
    name = serializers.CharField(required=False, allow_blank=False)
    waist = serializers.FloatField(default=1.0)
    kappa = serializers.FloatField(default=1.0)
    p_scale = serializers.FloatField(required=False)
    expression = serializers.CharField(required=False)
    derivative = serializers.ChoiceField(choices=list(ImageModel.DERIVATIVE_MODES), default=ImageModel.FINITE_DIFFERENCE)
    coefficients = serializers.CharField(required=False)
    slopes = serializers.CharField(required=False)

    def validate_waist(self, value):
        if value <= 0:
            raise serializers.ValidationError("Waist must be positive.")
        return value

    def validate_p_scale(self, value):
        if value <= 0:
            raise serializers.ValidationError("p_scale must be positive.")
        return value

    def validate_coefficients(self, value):
        return parse_list(value, complex)

    def validate_slopes(self, value):
        return parse_list(value, complex)

    def validate(self, attrs):
        """Custom models need a parseable expression."""
        if attrs['kind'] == 'custom':
            if 'expression' not in attrs:
                raise serializers.ValidationError({'expression': 'An expression is required for custom models.'})
            try:
                library.parse_expression(attrs['expression'])
            except ConfigurationError as e:
                raise serializers.ValidationError({'expression': str(e)})
        return attrs


class GridSectionSerializer(serializers.Serializer):
    """[grid] section; extent and points default to the model's waist and the dimension."""
    dimension = serializers.ChoiceField(choices=[1, 2], default=1)
    extent = serializers.FloatField(required=False)
    points = serializers.IntegerField(required=False, min_value=TransverseGrid.MIN_POINTS)

    def validate_extent(self, value):
        if value <= 0:
            raise serializers.ValidationError("Extent must be positive.")
        return value


class IlluminationSectionSerializer(serializers.Serializer):
    """[illumination] section; sigma_Q2 defaults to 1/sigma_P2."""
    N = serializers.FloatField()
    sigma_P2 = serializers.FloatField(default=1.0)
    sigma_Q2 = serializers.FloatField(required=False)

    def validate_N(self, value):
        if value <= 0:
            raise serializers.ValidationError("Photon number must be positive.")
        return value

    def validate_sigma_P2(self, value):
        if value <= 0:
            raise serializers.ValidationError("sigma_P2 must be positive.")
        return value

    def validate_sigma_Q2(self, value):
        if value <= 0:
            raise serializers.ValidationError("sigma_Q2 must be positive.")
        return value

    def validate(self, attrs):
        attrs.setdefault('sigma_Q2', 1.0 / attrs['sigma_P2'])
        if attrs['sigma_P2'] * attrs['sigma_Q2'] < 1.0 - HEISENBERG_TOLERANCE:
            raise serializers.ValidationError(
                f"sigma_P2 * sigma_Q2 = {attrs['sigma_P2'] * attrs['sigma_Q2']:.6g} violates the Heisenberg constraint (>= 1)."
            )
        return attrs


class RunSectionSerializer(serializers.Serializer):
    """[run] section."""
    scheme = serializers.ChoiceField(choices=SCHEME_CHOICES, default='both')
    beta = serializers.FloatField(default=1.0)
    lo_ratio = serializers.FloatField(default=1e4, min_value=100.0)
    squeezed = serializers.BooleanField(default=True)

    def validate_beta(self, value):
        if value == 0:
            raise serializers.ValidationError("beta must be nonzero.")
        return value


class McSectionSerializer(serializers.Serializer):
    """[mc] section."""
    n_trials = serializers.IntegerField(min_value=100)
    true_p = serializers.FloatField(default=0.0)
    seed = serializers.IntegerField(min_value=0, max_value=2 ** 64 - 1)


class OutputSectionSerializer(serializers.Serializer):
    """[output] section."""
    prefix = serializers.CharField(default=settings.DEFAULT_OUTPUT_PREFIX)


class SweepSectionSerializer(serializers.Serializer):
    """[sweep] section."""
    axis = serializers.ChoiceField(choices=SWEEP_AXES)
    values = serializers.CharField()

    def validate_values(self, value):
        return parse_list(value)

    def validate(self, attrs):
        if attrs['axis'] in ('N', 'sigma_P2') and any(v <= 0 for v in attrs['values']):
            raise serializers.ValidationError({'values': f"Values of {attrs['axis']} must be positive."})
        return attrs


class RunConfigSerializer(serializers.Serializer):
    """The whole run configuration."""
    model = ModelSectionSerializer()
    grid = GridSectionSerializer()
    illumination = IlluminationSectionSerializer()
    run = RunSectionSerializer()
    output = OutputSectionSerializer()
    mc = McSectionSerializer(required=False)
    sweep = SweepSectionSerializer(required=False)

    def validate(self, attrs):
        """Cross-section checks."""
        sweep = attrs.get('sweep')
        if sweep and sweep['axis'] == 'p' and 'mc' not in attrs:
            raise serializers.ValidationError({'sweep': 'Sweeping p requires an [mc] section.'})
        if 'mc' in attrs and attrs['run']['scheme'] != 'field':
            swept = sweep['values'] if sweep and sweep['axis'] == 'sigma_P2' else []
            if any(v > 1.0 for v in [attrs['illumination']['sigma_P2'], *swept]):
                raise serializers.ValidationError(
                    {'mc': 'Intensity Monte Carlo needs sigma_P2 <= 1 (Poissonian or sub-Poissonian light).'}
                )
        return attrs


def flatten_errors(errors, prefix=''):
    """Nested serializer errors as 'section.field: message' lines."""
    lines = []
    if isinstance(errors, dict):
        for key, value in errors.items():
            name = prefix if key == 'non_field_errors' else f"{prefix}.{key}" if prefix else key
            lines.extend(flatten_errors(value, name))
    elif isinstance(errors, list):
        for value in errors:
            lines.extend(flatten_errors(value, prefix))
    else:
        lines.append(f"{prefix or 'config'}: {errors}")
    return lines


@dataclass(frozen=True)
class RunConfig:
    """Validated run configuration with builders for the domain objects."""

    model: dict
    grid: dict
    illumination: dict
    run: dict
    output_prefix: str
    mc: Optional[dict] = None
    sweep: Optional[dict] = None
    source: Optional[str] = field(default=None, compare=False)

    @property
    def scheme(self) -> str:
        return self.run['scheme']

    def build_model(self) -> ImageModel:
        section = self.model
        kind, waist, p_scale = section['kind'], section['waist'], section.get('p_scale')
        if kind == 'displaced_gaussian':
            return library.displaced_gaussian(w=waist, p_scale=p_scale)
        if kind == 'waist_scaled_gaussian':
            return library.waist_scaled_gaussian(w=waist, p_scale=p_scale)
        if kind == 'phase_tilt':
            return library.phase_tilt(w=waist, kappa=section['kappa'], p_scale=p_scale)
        if kind == 'hermite_superposition':
            return library.hermite_superposition(
                w=waist,
                coefficients=section.get('coefficients', (1.0,)),
                slopes=section.get('slopes', (0.0, 1.0)),
                p_scale=p_scale,
            )
        return library.custom_from_expression(
            section['expression'], waist=waist, p_scale=p_scale, derivative_mode=section['derivative'], name=section.get('name'),
        )

    def build_grid(self) -> TransverseGrid:
        dimension = self.grid['dimension']
        return TransverseGrid(
            dimension=dimension,
            extent=self.grid.get('extent', TransverseGrid.DEFAULT_EXTENT * self.model['waist']),
            points_per_axis=self.grid.get('points', TransverseGrid.DEFAULT_POINTS[dimension]),
        )

    def build_illumination(self) -> Illumination:
        return Illumination.from_variances(**self.illumination)

    def with_value(self, axis, value):
        """Copy with one sweep axis set; sweeping sigma_P2 keeps minimum uncertainty."""
        illumination, mc = dict(self.illumination), copy.deepcopy(self.mc)
        if axis == 'N':
            illumination['N'] = float(value)
        elif axis == 'sigma_P2':
            illumination['sigma_P2'] = float(value)
            illumination['sigma_Q2'] = 1.0 / float(value)
        elif axis == 'p':
            if mc is None:
                raise ConfigurationError("sweeping p requires an [mc] section")
            mc['true_p'] = float(value)
        else:
            raise ConfigurationError(f"sweep axis must be one of {SWEEP_AXES}, got {axis!r}")
        return RunConfig(self.model, self.grid, illumination, self.run, self.output_prefix, mc, self.sweep, self.source)

    def to_ini(self) -> str:
        """Effective configuration (defaults resolved) in the input format."""
        parser = configparser.ConfigParser(interpolation=None)
        parser.optionxform = str
        grid = self.build_grid()
        sections = {
            'model': self.model,
            'grid': {'dimension': grid.dimension, 'extent': grid.extent, 'points': grid.points_per_axis},
            'illumination': self.illumination,
            'run': self.run,
            'output': {'prefix': self.output_prefix},
        }
        if self.mc:
            sections['mc'] = self.mc
        if self.sweep:
            sections['sweep'] = self.sweep
        for name, values in sections.items():
            parser[name] = {key: ini_value(value) for key, value in values.items()}
        buffer = io.StringIO()
        parser.write(buffer)
        return buffer.getvalue()


def ini_value(value):
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, float):
        return repr(value)
    if isinstance(value, complex):
        return repr(value).strip('()')
    if isinstance(value, (list, tuple)):
        return ', '.join(ini_value(v) for v in value)
    return str(value)


def read_ini(path):
    """INI file as {section: {key: raw string}}."""
    path = Path(path)
    if not path.is_file():
        raise ConfigurationError(f"config file not found: {path}")
    parser = configparser.ConfigParser(interpolation=None)
    parser.optionxform = str
    try:
        parser.read(path, encoding='utf-8')
    except (configparser.Error, UnicodeDecodeError) as e:
        raise ConfigurationError(f"cannot parse {path}: {e}") from e
    except OSError as e:
        raise ConfigurationError(f"cannot read {path}: {e}") from e
    return {section: dict(parser[section]) for section in parser.sections()}


def validate_sections(raw, source=None) -> RunConfig:
    """
    Validate raw sections into a RunConfig.

    Raises:
        ConfigurationError: listing every invalid field
    """
    data = copy.deepcopy(raw)
    for section in ('grid', 'run', 'output'):
        data.setdefault(section, {})
    unknown = sorted(set(data) - set(RunConfigSerializer().fields))
    serializer = RunConfigSerializer(data=data)
    if not serializer.is_valid() or unknown:
        lines = flatten_errors(serializer.errors)
        lines.extend(f"{section}: unknown section" for section in unknown)
        message = "invalid run configuration:\n  " + "\n  ".join(lines)
        logger.error(message)
        raise ConfigurationError(message)

    validated = serializer.validated_data
    config = RunConfig(
        model=dict(validated['model']),
        grid=dict(validated['grid']),
        illumination=dict(validated['illumination']),
        run=dict(validated['run']),
        output_prefix=validated['output']['prefix'],
        mc=dict(validated['mc']) if 'mc' in validated else None,
        sweep=dict(validated['sweep']) if 'sweep' in validated else None,
        source=str(source) if source else None,
    )
    # domain types enforce their own invariants
    config.build_grid()
    config.build_illumination()
    return config


def load_run_config(path, seed=None, prefix=None, axis=None, values=None) -> RunConfig:
    """Read, apply command-line overrides, and validate a run configuration."""
    raw = read_ini(path)
    if seed is not None and 'mc' in raw:
        raw['mc']['seed'] = str(seed)
    if prefix is not None:
        raw.setdefault('output', {})['prefix'] = prefix
    if axis is not None:
        raw.setdefault('sweep', {})['axis'] = axis
    if values is not None:
        raw.setdefault('sweep', {})['values'] = values
    config = validate_sections(raw, source=path)
    logger.info(f"loaded run configuration from {path} (model {config.model['kind']}, scheme {config.scheme})")
    return config
