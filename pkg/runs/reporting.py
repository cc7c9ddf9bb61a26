"""
CSV output and human-readable summaries.

Numbers are written in their shortest round-trip form; unbounded values
as the literal 'inf'.
"""
import csv
import logging
import math
from pathlib import Path

logger = logging.getLogger(__name__)

BOUNDS_COLUMNS = [
    'model', 'N', 'sigma_P2', 'sigma_Q2', 'a', 'b', 'fisher_poisson', 'fisher_gauss', 'crb_intensity', 'crb_field',
]
MC_COLUMNS = [
    'scheme', 'noise_kind', 'n_trials', 'seed', 'true_p', 'mean_estimate', 'std_estimate', 'crb', 'efficiency_ratio',
]


def format_number(value):
    if isinstance(value, bool):
        return str(value).lower()
    if isinstance(value, int):
        return str(value)
    value = float(value)
    if math.isinf(value):
        return 'inf' if value > 0 else '-inf'
    return repr(value)


def bounds_row(summary):
    light = summary.illumination
    return {
        'model': summary.model_name,
        'N': format_number(light.N),
        'sigma_P2': format_number(light.sigma_P2),
        'sigma_Q2': format_number(light.sigma_Q2),
        'a': format_number(summary.a),
        'b': format_number(summary.b),
        'fisher_poisson': format_number(summary.fisher_poisson),
        'fisher_gauss': format_number(summary.fisher_gauss),
        'crb_intensity': format_number(summary.crb_intensity),
        'crb_field': format_number(summary.crb_field),
    }


def mc_row(batch):
    return {
        'scheme': batch.scheme,
        'noise_kind': batch.noise_kind,
        'n_trials': format_number(batch.n_trials),
        'seed': format_number(batch.seed),
        'true_p': format_number(batch.true_p),
        'mean_estimate': format_number(batch.mean_estimate),
        'std_estimate': format_number(batch.std_estimate),
        'crb': format_number(batch.crb),
        'efficiency_ratio': format_number(batch.efficiency_ratio),
    }


def sweep_rows(axis, results):
    """One row per swept value, or per value and scheme when batches were simulated."""
    rows = []
    for value, summary, batches in results:
        base = {'axis': axis, 'value': format_number(value), **bounds_row(summary)}
        if not batches:
            rows.append(base)
        for batch in batches:
            rows.append({**base, **mc_row(batch)})
    return rows


def sweep_columns(with_mc):
    return ['axis', 'value', *BOUNDS_COLUMNS, *(MC_COLUMNS if with_mc else [])]


def output_path(prefix, suffix):
    path = Path(f"{prefix}_{suffix}")
    path.parent.mkdir(parents=True, exist_ok=True)
    return path


def write_csv(path, columns, rows):
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.DictWriter(f, fieldnames=columns, lineterminator='\n')
        writer.writeheader()
        writer.writerows(rows)
    logger.info(f"wrote {len(rows)} row(s) to {path}")
    return path


def write_config_echo(config, prefix):
    path = output_path(prefix, 'config.ini')
    path.write_text(config.to_ini(), encoding='utf-8')
    return path
