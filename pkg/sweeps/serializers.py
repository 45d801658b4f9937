"""Serializers for sweep specs supplied as JSON (CLI --spec file or API body)."""
from rest_framework import serializers

from optomech.config import build_config, is_parameter_path
from optomech.exceptions import ParameterValidationError
from optomech.serializers import StrictSerializer

from .engine import FORMATS, SCALES, Axis, SweepSpec
from .pipeline import OUTPUTS


class AxisSerializer(StrictSerializer):
    name = serializers.CharField()
    min = serializers.FloatField()
    max = serializers.FloatField()
    count = serializers.IntegerField(min_value=2)
    scale = serializers.ChoiceField(choices=SCALES, default='linear')
    endpoint = serializers.BooleanField(default=True)

    def validate_name(self, value):
        if not is_parameter_path(value):
            raise serializers.ValidationError(f"'{value}' is not a recognised parameter path.")
        return value

    def validate(self, data):
        if data['scale'] == 'log' and (data['min'] <= 0 or data['max'] <= 0):
            raise serializers.ValidationError('Log axes need positive bounds.')
        return data


class SweepSpecSerializer(StrictSerializer):
    """
    {
        "name": "my-sweep",
        "base": {"system": {...}, "drive": {...}},
        "fixed": {"J_over_Gamma": 1.0},
        "axes": [{"name": "theta", "min": 0, "max": 6.283185307179586, "count": 64, "endpoint": false}],
        "outputs": ["E_N_cw", "E_N_ccw", "stable"],
        "format": "csv"
    }
    """

    name = serializers.CharField(default='custom')
    description = serializers.CharField(default='', allow_blank=True)
    base = serializers.DictField(default=dict)
    fixed = serializers.DictField(child=serializers.FloatField(), default=dict)
    axes = AxisSerializer(many=True)
    outputs = serializers.ListField(
        child=serializers.ChoiceField(choices=OUTPUTS), default=['E_N_cw', 'E_N_ccw', 'stable']
    )
    format = serializers.ChoiceField(choices=FORMATS, default='csv')

    def validate_axes(self, value):
        if not 1 <= len(value) <= 2:
            raise serializers.ValidationError('A sweep has one or two axes.')
        return value

    def validate_fixed(self, value):
        unknown = [path for path in value if not is_parameter_path(path)]
        if unknown:
            raise serializers.ValidationError(f"Unrecognised parameter path(s): {', '.join(unknown)}.")
        return value

    def validate_outputs(self, value):
        if not value:
            raise serializers.ValidationError('Request at least one output.')
        return value

    def validate_base(self, value):
        try:
            build_config(value)
        except ParameterValidationError as exc:
            raise serializers.ValidationError(str(exc))
        return value

    def create_spec(self, base=None):
        """SweepSpec from validated data; ``base`` is merged under the spec's own base."""
        data = self.validated_data
        config = build_config(_merge(base or {}, data['base']))
        return SweepSpec(
            name=data['name'],
            description=data['description'],
            base=config,
            fixed=tuple(data['fixed'].items()),
            axes=tuple(Axis(**axis) for axis in data['axes']),
            outputs=tuple(data['outputs']),
            format=data['format'],
        )


def _merge(lower, upper):
    merged = {key: dict(value) if isinstance(value, dict) else value for key, value in lower.items()}
    for key, value in upper.items():
        if isinstance(value, dict) and isinstance(merged.get(key), dict):
            merged[key] = {**merged[key], **value}
        else:
            merged[key] = value
    return merged
