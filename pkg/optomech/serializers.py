"""Serializers validating the JSON simulation config."""
import math

from rest_framework import serializers

from .params import REFERENCE_DRIVE, REFERENCE_SYSTEM, FREQUENCY_CONVENTIONS


class StrictSerializer(serializers.Serializer):
    """Serializer that rejects keys it does not declare."""

    def to_internal_value(self, data):
        if isinstance(data, dict):
            unknown = sorted(set(data) - set(self.fields))
            if unknown:
                raise serializers.ValidationError(
                    {key: ['Unknown field.'] for key in unknown}
                )
        return super().to_internal_value(data)


class SystemSerializer(StrictSerializer):
    """Resonator and mechanical parameters, SI units."""

    omega_m = serializers.FloatField(default=REFERENCE_SYSTEM.omega_m)
    gamma_m = serializers.FloatField(default=REFERENCE_SYSTEM.gamma_m)
    temperature = serializers.FloatField(default=REFERENCE_SYSTEM.temperature, min_value=0.0)
    mass = serializers.FloatField(default=REFERENCE_SYSTEM.mass)
    wavelength = serializers.FloatField(default=REFERENCE_SYSTEM.wavelength)
    quality_c = serializers.FloatField(default=REFERENCE_SYSTEM.quality_c)
    radius = serializers.FloatField(default=REFERENCE_SYSTEM.radius)
    kappa_ex = serializers.FloatField(default=None, allow_null=True)
    coupling_J = serializers.FloatField(default=None, allow_null=True, min_value=0.0)
    coupling_ratio = serializers.FloatField(default=None, allow_null=True, min_value=0.0)
    frequency_convention = serializers.ChoiceField(
        choices=FREQUENCY_CONVENTIONS, default=REFERENCE_SYSTEM.frequency_convention
    )

    def validate(self, data):
        if data['coupling_J'] is not None and data['coupling_ratio'] is not None:
            raise serializers.ValidationError(
                {'coupling_J': ['Give either coupling_J or coupling_ratio, not both.']}
            )
        if data['coupling_J'] is None and data['coupling_ratio'] is None:
            data['coupling_ratio'] = REFERENCE_SYSTEM.coupling_ratio
        return data


class DriveSerializer(StrictSerializer):
    """Pump powers (W), phases (rad) and detuning."""

    power_cw = serializers.FloatField(default=REFERENCE_DRIVE.power_cw, min_value=0.0)
    power_ccw = serializers.FloatField(default=REFERENCE_DRIVE.power_ccw, min_value=0.0)
    phase_cw = serializers.FloatField(default=REFERENCE_DRIVE.phase_cw)
    phase_ccw = serializers.FloatField(default=REFERENCE_DRIVE.phase_ccw)
    detuning = serializers.FloatField(default=None, allow_null=True)
    detuning_ratio = serializers.FloatField(default=None, allow_null=True)
    theta = serializers.FloatField(default=None, allow_null=True)

    def to_internal_value(self, data):
        # theta places phase_cw relative to phase_ccw
        if isinstance(data, dict) and data.get('theta') is not None and 'phase_cw' in data:
            raise serializers.ValidationError(
                {'theta': ['Give either theta or phase_cw, not both.']}
            )
        return super().to_internal_value(data)

    def validate(self, data):
        if data['detuning'] is not None and data['detuning_ratio'] is not None:
            raise serializers.ValidationError(
                {'detuning': ['Give either detuning or detuning_ratio, not both.']}
            )
        if data['detuning'] is None and data['detuning_ratio'] is None:
            data['detuning_ratio'] = REFERENCE_DRIVE.detuning_ratio
        for name in ('phase_cw', 'phase_ccw', 'theta'):
            if data[name] is not None and not math.isfinite(data[name]):
                raise serializers.ValidationError({name: ['Must be a finite angle.']})
        return data


class SolverSerializer(StrictSerializer):
    """Steady-state solver knobs; omitted values come from settings.SIMULATION."""

    tolerance = serializers.FloatField(default=None, allow_null=True, min_value=0.0)
    max_iterations = serializers.IntegerField(default=None, allow_null=True, min_value=1)
    damping = serializers.FloatField(default=None, allow_null=True, min_value=0.0, max_value=1.0)
    scan_points = serializers.IntegerField(default=None, allow_null=True, min_value=3)

    def validate_damping(self, value):
        if value is not None and value == 0.0:
            raise serializers.ValidationError('Damping must be in (0, 1].')
        return value


class SimulationConfigSerializer(StrictSerializer):
    system = SystemSerializer()
    drive = DriveSerializer()
    solver = SolverSerializer()

    def to_internal_value(self, data):
        # Missing sections still run through validation so their defaults apply
        if isinstance(data, dict):
            data = {name: {} for name in self.fields} | data
        return super().to_internal_value(data)
