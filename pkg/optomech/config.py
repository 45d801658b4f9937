"""
Loading and resolving simulation configs.

A config is a JSON object with the sections ``system``, ``drive`` and
``solver``. Missing keys take the reference operating point; ``--set``
overrides are applied to the raw mapping before validation.
"""
import copy
import json
import logging
from dataclasses import asdict, dataclass, replace
from pathlib import Path

from .exceptions import ParameterValidationError
from .params import REFERENCE_DRIVE, REFERENCE_SYSTEM, DriveConfig, SystemParams, derive_constants
from .steady_state import SolverOptions

logger = logging.getLogger(__name__)

# Short sweep-axis names and the parameter path they stand for
AXIS_ALIASES = {
    'theta': 'drive.theta',
    'detuning_ratio': 'drive.detuning_ratio',
    'J_over_Gamma': 'system.coupling_ratio',
    'temperature': 'system.temperature',
    'quality_c': 'system.quality_c',
    'power_ccw': 'drive.power_ccw',
}

SYSTEM_FIELDS = frozenset(SystemParams.__dataclass_fields__)
DRIVE_FIELDS = frozenset(DriveConfig.__dataclass_fields__)


def _flatten_errors(errors, prefix=''):
    """Turn a nested DRF error dict into (dotted path, message) pairs."""
    if isinstance(errors, dict):
        flat = []
        for key, value in errors.items():
            path = f"{prefix}.{key}" if prefix and key != 'non_field_errors' else (prefix or str(key))
            flat.extend(_flatten_errors(value, path))
        return flat
    if isinstance(errors, list):
        flat = []
        for item in errors:
            flat.extend(_flatten_errors(item, prefix))
        return flat
    return [(prefix, str(errors))]


def validation_error(errors):
    """ParameterValidationError naming the first offending path of a DRF error dict."""
    problems = _flatten_errors(errors)
    field, message = problems[0]
    if len(problems) > 1:
        message += ' (' + '; '.join(f"{path}: {text}" for path, text in problems[1:]) + ')'
    return ParameterValidationError(field, message)


def parse_override(text):
    """Split ``section.key=value``; the value is a JSON literal or a bare string."""
    path, sep, raw_value = text.partition('=')
    path = path.strip()
    if not sep or not path:
        raise ParameterValidationError('--set', f"expected key=value, got {text!r}")
    try:
        value = json.loads(raw_value)
    except json.JSONDecodeError:
        value = raw_value.strip()
    return path, value


def apply_overrides(raw, overrides):
    """Return a copy of ``raw`` with dotted-path overrides set."""
    resolved = copy.deepcopy(raw)
    for item in overrides:
        path, value = parse_override(item) if isinstance(item, str) else item
        keys = path.split('.')
        node = resolved
        for key in keys[:-1]:
            child = node.setdefault(key, {})
            if not isinstance(child, dict):
                raise ParameterValidationError(path, f"{key!r} is not a section")
            node = child
        node[keys[-1]] = value
    return resolved


def read_config_file(path):
    path = Path(path)
    try:
        with path.open(encoding='utf-8') as handle:
            raw = json.load(handle)
    except FileNotFoundError:
        raise ParameterValidationError('config', f"config file not found: {path}")
    except json.JSONDecodeError as exc:
        raise ParameterValidationError('config', f"{path} is not valid JSON: {exc}")
    if not isinstance(raw, dict):
        raise ParameterValidationError('config', f"{path} must contain a JSON object")
    return raw


@dataclass(frozen=True)
class SimulationConfig:
    """One fully resolved parameter point."""

    system: SystemParams
    drive: DriveConfig
    solver: SolverOptions

    def derive(self):
        return derive_constants(self.system, self.drive)

    def as_dict(self):
        return {
            'system': asdict(self.system),
            'drive': asdict(self.drive),
            'solver': asdict(self.solver),
        }

    def with_value(self, name, value):
        """Copy with one parameter path (or axis alias) set to ``value``."""
        path = AXIS_ALIASES.get(name, name)
        section, _, field = path.partition('.')
        value = float(value)
        if section == 'drive':
            if field == 'theta':
                return replace(self, drive=self.drive.with_theta(value))
            if field == 'detuning_ratio':
                return replace(self, drive=replace(self.drive, detuning=None, detuning_ratio=value))
            if field == 'detuning':
                return replace(self, drive=replace(self.drive, detuning=value, detuning_ratio=None))
            if field in DRIVE_FIELDS:
                return replace(self, drive=replace(self.drive, **{field: value}))
        elif section == 'system':
            if field == 'coupling_ratio':
                return replace(self, system=replace(self.system, coupling_J=None, coupling_ratio=value))
            if field == 'coupling_J':
                return replace(self, system=replace(self.system, coupling_J=value, coupling_ratio=None))
            if field in SYSTEM_FIELDS and field != 'frequency_convention':
                return replace(self, system=replace(self.system, **{field: value}))
        raise ParameterValidationError(name, "not a recognised parameter path")


def is_parameter_path(name):
    path = AXIS_ALIASES.get(name, name)
    section, _, field = path.partition('.')
    if section == 'drive':
        return field in DRIVE_FIELDS or field == 'theta'
    if section == 'system':
        return field in SYSTEM_FIELDS and field != 'frequency_convention'
    return False


def build_config(raw):
    """Validate a raw mapping and build the parameter objects."""
    from .serializers import SimulationConfigSerializer

    serializer = SimulationConfigSerializer(data=raw)
    if not serializer.is_valid():
        raise validation_error(serializer.errors)

    data = serializer.validated_data
    solver = {key: value for key, value in data['solver'].items() if value is not None}
    drive_fields = dict(data['drive'])
    theta = drive_fields.pop('theta', None)
    drive = DriveConfig(**drive_fields)
    if theta is not None:
        drive = drive.with_theta(theta)
    return SimulationConfig(
        system=SystemParams(**data['system']),
        drive=drive,
        solver=SolverOptions(**solver),
    )


def default_config():
    """The reference operating point with settings-derived solver options."""
    return SimulationConfig(system=REFERENCE_SYSTEM, drive=REFERENCE_DRIVE, solver=SolverOptions())


def load_config(path=None, overrides=()):
    """Read, override and validate a config; no file means all defaults."""
    raw = read_config_file(path) if path else {}
    raw = apply_overrides(raw, overrides)
    config = build_config(raw)
    logger.debug(f"Loaded config from {path or '<defaults>'} with {len(overrides)} override(s)")
    return config
