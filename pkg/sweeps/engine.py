"""
Parameter-grid execution.

Grid nodes are evaluated independently (in worker processes when the grid
is large enough) and collected in row-major order over the axes, so the
data section of a result does not depend on scheduling.
"""
import itertools
import json
import logging
import math
import os
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from functools import partial

import numpy as np
import pandas as pd
import psutil
from django.utils import timezone

import wgmsim
from optomech.config import default_config, is_parameter_path
from optomech.exceptions import ParameterValidationError
from optomech.utils import get_setting

from .pipeline import (
    STATUSES,
    evaluate_point,
    output_columns,
    resolve_tolerances,
    validate_outputs,
)

logger = logging.getLogger(__name__)

SCALES = ('linear', 'log')
FORMATS = ('csv', 'json')


@dataclass(frozen=True)
class Axis:
    name: str
    min: float
    max: float
    count: int
    scale: str = 'linear'
    endpoint: bool = True

    def validate(self):
        if not is_parameter_path(self.name):
            raise ParameterValidationError(f"axes.{self.name}", "not a recognised parameter path")
        if int(self.count) != self.count or self.count < 2:
            raise ParameterValidationError(f"axes.{self.name}.count", f"must be an integer >= 2, got {self.count!r}")
        if self.scale not in SCALES:
            raise ParameterValidationError(f"axes.{self.name}.scale", f"must be one of {', '.join(SCALES)}")
        if not (math.isfinite(self.min) and math.isfinite(self.max)):
            raise ParameterValidationError(f"axes.{self.name}", "bounds must be finite")
        if self.scale == 'log' and (self.min <= 0.0 or self.max <= 0.0):
            raise ParameterValidationError(f"axes.{self.name}", "log axes need positive bounds")

    def values(self):
        if self.scale == 'log':
            return np.geomspace(self.min, self.max, int(self.count), endpoint=self.endpoint)
        return np.linspace(self.min, self.max, int(self.count), endpoint=self.endpoint)

    def as_dict(self):
        return {
            'name': self.name,
            'min': self.min,
            'max': self.max,
            'count': int(self.count),
            'scale': self.scale,
            'endpoint': self.endpoint,
        }


@dataclass(frozen=True)
class SweepSpec:
    """A base config, fixed parameter overrides, 1-2 axes and the outputs to record."""

    axes: tuple
    outputs: tuple = ('E_N_cw', 'E_N_ccw', 'stable')
    base: object = field(default_factory=default_config)
    fixed: tuple = ()
    format: str = 'csv'
    name: str = 'custom'
    description: str = ''
    notes: tuple = ()

    @property
    def grid_size(self):
        return math.prod(int(axis.count) for axis in self.axes)

    @property
    def columns(self):
        return [axis.name for axis in self.axes] + output_columns(self.outputs) + ['status']

    def validate(self, max_points=None):
        if max_points is None:
            max_points = get_setting('SWEEP_MAX_POINTS')
        if not 1 <= len(self.axes) <= 2:
            raise ParameterValidationError('axes', f"a sweep has one or two axes, got {len(self.axes)}")
        names = [axis.name for axis in self.axes]
        if len(set(names)) != len(names):
            raise ParameterValidationError('axes', "axis names must be distinct")
        for axis in self.axes:
            axis.validate()
        for path, _ in self.fixed:
            if not is_parameter_path(path):
                raise ParameterValidationError(f"fixed.{path}", "not a recognised parameter path")
        validate_outputs(self.outputs)
        if self.format not in FORMATS:
            raise ParameterValidationError('format', f"must be one of {', '.join(FORMATS)}")
        if self.grid_size > max_points:
            raise ParameterValidationError(
                'axes', f"grid has {self.grid_size} points, above the budget of {max_points}"
            )
        return self

    def resolved_base(self):
        config = self.base
        for path, value in self.fixed:
            config = config.with_value(path, value)
        return config

    def grid(self):
        """Axis coordinates of every node, row-major (last axis fastest)."""
        return list(itertools.product(*(axis.values() for axis in self.axes)))

    def node_configs(self):
        base = self.resolved_base()
        configs = []
        for point in self.grid():
            config = base
            for axis, value in zip(self.axes, point):
                config = config.with_value(axis.name, value)
            configs.append(config)
        return configs

    def as_dict(self):
        return {
            'name': self.name,
            'description': self.description,
            'axes': [axis.as_dict() for axis in self.axes],
            'outputs': list(self.outputs),
            'fixed': {path: value for path, value in self.fixed},
            'format': self.format,
            'base': self.base.as_dict(),
        }

    def cache_key(self):
        canonical = json.dumps(self.as_dict(), sort_keys=True, default=str)
        return f"sweep:{canonical}"


@dataclass
class SweepResult:
    spec: SweepSpec
    frame: pd.DataFrame
    provenance: dict
    elapsed: float = 0.0

    def status_counts(self):
        counts = self.frame['status'].value_counts()
        return {status: int(counts.get(status, 0)) for status in STATUSES}


def resolve_workers(workers=None):
    """Explicit count, else env WGMSIM_WORKERS or SWEEP_WORKERS, else physical cores."""
    if workers is None:
        configured = os.environ.get('WGMSIM_WORKERS') or get_setting('SWEEP_WORKERS')
        if configured not in ('', None):
            try:
                workers = int(configured)
            except (TypeError, ValueError):
                raise ParameterValidationError('WGMSIM_WORKERS', f"must be an integer, got {configured!r}")
        else:
            workers = psutil.cpu_count(logical=False) or psutil.cpu_count() or 1
    if workers < 1:
        raise ParameterValidationError('workers', "must be at least 1")
    return workers


def build_provenance(spec, base, derived, workers):
    """Everything needed to reproduce a sweep, written ahead of the data."""
    drive = base.drive
    conventions = {
        'frequency_convention': base.system.frequency_convention,
        'kappa_ex': (
            'critical coupling (kappa_ex = kappa_0)' if base.system.kappa_ex is None
            else base.system.kappa_ex
        ),
        'pump_power': {
            'power_cw': drive.power_cw,
            'power_ccw': drive.power_ccw,
            'per_pump': True,
        },
        'variance_convention': 'vacuum variance 1/2',
        'quadrature_order': ['X_cw', 'Y_cw', 'X_ccw', 'Y_ccw', 'q', 'p'],
    }
    return {
        'tool': 'wgmsim',
        'version': wgmsim.__version__,
        'generated_at': timezone.now().isoformat(),
        'scenario': spec.name,
        'description': spec.description,
        'axes': [axis.as_dict() for axis in spec.axes],
        'fixed': {path: value for path, value in spec.fixed},
        'grid_size': spec.grid_size,
        'resolved_base': base.as_dict(),
        'derived_at_base': {
            'omega_c': derived.omega_c,
            'kappa_0': derived.kappa_0,
            'kappa_ex': derived.kappa_ex,
            'Gamma': derived.Gamma,
            'J': derived.J,
            'G0': derived.G0,
            'eps_cw': derived.eps_cw,
            'eps_ccw': derived.eps_ccw,
            'n_m': derived.n_m,
        },
        'conventions': conventions,
        'workers': workers,
        'notes': list(spec.notes) + list(derived.notes),
    }


def run_sweep(spec, workers=None, progress=None, max_points=None):
    """Evaluate every grid node of ``spec``; per-point failures land in 'status'.

    ``progress`` is called with 1 after each collected row.
    """
    spec.validate(max_points)
    configs = spec.node_configs()
    base = spec.resolved_base()
    derived = base.derive()
    workers = resolve_workers(workers)
    chunk_size = get_setting('SWEEP_CHUNK_SIZE')
    task = partial(evaluate_point, outputs=tuple(spec.outputs), tolerances=resolve_tolerances())

    logger.info(f"Sweep '{spec.name}': {len(configs)} points on {workers} worker(s)")
    started = time.perf_counter()
    rows = []
    if workers == 1 or len(configs) < 2 * chunk_size:
        iterator = map(task, configs)
        for row in iterator:
            rows.append(row)
            if progress:
                progress(1)
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            for row in pool.map(task, configs, chunksize=chunk_size):
                rows.append(row)
                if progress:
                    progress(1)
    elapsed = time.perf_counter() - started

    grid = pd.DataFrame(spec.grid(), columns=[axis.name for axis in spec.axes])
    data = pd.DataFrame(rows, columns=output_columns(spec.outputs) + ['status'])
    frame = pd.concat([grid, data], axis=1)

    provenance = build_provenance(spec, base, derived, workers)
    result = SweepResult(spec=spec, frame=frame, provenance=provenance, elapsed=elapsed)
    result.provenance['status_counts'] = result.status_counts()
    logger.info(f"Sweep '{spec.name}' finished in {elapsed:.2f}s: {result.status_counts()}")
    failed = result.status_counts()['no_converge']
    if failed:
        logger.warning(f"Sweep '{spec.name}': {failed} point(s) did not converge")
    return result
