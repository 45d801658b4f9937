"""Serializers for API request bodies."""
from rest_framework import serializers

from optomech.serializers import StrictSerializer
from sweeps.scenarios import SCENARIOS


class SweepRequestSerializer(StrictSerializer):
    """Either {"scenario": "fig4b"} or {"spec": {...}}, plus an optional base config."""

    scenario = serializers.ChoiceField(choices=list(SCENARIOS), required=False)
    spec = serializers.DictField(required=False)
    base = serializers.DictField(default=dict)

    def validate(self, data):
        if ('scenario' in data) == ('spec' in data):
            raise serializers.ValidationError('Give exactly one of scenario or spec.')
        return data
