"""
CSV and JSON writers for result tables.

CSV layout: ``#``-prefixed provenance lines, one header row, then data with
floats in scientific notation to the configured number of significant
digits. Undefined values (NaN) are empty cells.
"""
import json
import math

import numpy as np
from django.core.serializers.json import DjangoJSONEncoder

from optomech.utils import get_setting


class ResultEncoder(DjangoJSONEncoder):
    """DjangoJSONEncoder that also understands numpy scalars and arrays."""

    def default(self, o):
        if isinstance(o, np.bool_):
            return bool(o)
        if isinstance(o, np.integer):
            return int(o)
        if isinstance(o, np.floating):
            return _finite_or_none(float(o))
        if isinstance(o, np.ndarray):
            return clean_value(o.tolist())
        if isinstance(o, complex):
            return {'real': o.real, 'imag': o.imag}
        return super().default(o)


def _finite_or_none(value):
    return value if math.isfinite(value) else None


def clean_value(value):
    """Replace NaN/inf by None recursively so the output is strict JSON."""
    if isinstance(value, float):
        return _finite_or_none(value)
    if isinstance(value, dict):
        return {key: clean_value(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [clean_value(item) for item in value]
    return value


def float_format(digits=None):
    digits = digits or get_setting('CSV_SIGNIFICANT_DIGITS')
    return f"%.{digits - 1}e"


def provenance_lines(provenance):
    for key, value in provenance.items():
        yield f"# {key}: {json.dumps(clean_value(value), cls=ResultEncoder, sort_keys=True)}\n"


def write_csv(frame, provenance, handle, digits=None):
    for line in provenance_lines(provenance):
        handle.write(line)
    frame.to_csv(handle, index=False, float_format=float_format(digits), na_rep='', lineterminator='\n')


def table_records(frame):
    records = frame.astype(object).where(frame.notna(), None).to_dict(orient='records')
    return [clean_value(record) for record in records]


def write_json(frame, provenance, handle):
    document = {
        'provenance': clean_value(provenance),
        'columns': list(frame.columns),
        'rows': table_records(frame),
    }
    json.dump(document, handle, cls=ResultEncoder, indent=2)
    handle.write('\n')


def write_table(frame, provenance, handle, fmt='csv', digits=None):
    if fmt == 'json':
        write_json(frame, provenance, handle)
    else:
        write_csv(frame, provenance, handle, digits)


def write_result(result, handle, fmt=None):
    """Write a SweepResult in its spec's format unless ``fmt`` overrides it."""
    write_table(result.frame, result.provenance, handle, fmt or result.spec.format)
