"""
Query-parameter serializers for the API
"""
from rest_framework import serializers

from core.config import Config
from services.dimension.services import DEFAULT_COUNTING_LENGTH, METHODS, parse_grid
from services.expansions.services import BetaSystem


class BetaSpecSerializer(serializers.Serializer):
    """Exactly one of pseudo_golden, golden, beta or integer"""
    pseudo_golden = serializers.IntegerField(required=False, min_value=2)
    golden = serializers.BooleanField(required=False, default=False)
    beta = serializers.FloatField(required=False)
    integer = serializers.IntegerField(required=False, min_value=2)

    def validate(self, attrs):
        given = [name for name in ('pseudo_golden', 'beta', 'integer') if attrs.get(name) is not None]
        if attrs.get('golden'):
            given.append('golden')
        if len(given) != 1:
            raise serializers.ValidationError('Give exactly one of pseudo_golden, golden, beta or integer')
        return attrs

    def system(self) -> BetaSystem:
        data = self.validated_data
        if data.get('pseudo_golden') is not None:
            return BetaSystem.pseudo_golden(data['pseudo_golden'])
        if data.get('golden'):
            return BetaSystem.golden()
        if data.get('integer') is not None:
            return BetaSystem.integer(data['integer'])
        return BetaSystem.from_value(data['beta'])


class ExpandQuerySerializer(BetaSpecSerializer):
    x = serializers.FloatField()
    digits = serializers.IntegerField(default=20, min_value=1)


class CountQuerySerializer(BetaSpecSerializer):
    n = serializers.IntegerField(min_value=1)
    zeros = serializers.IntegerField(required=False, min_value=0)

    def validate(self, attrs):
        attrs = super().validate(attrs)
        if attrs.get('zeros') is not None and attrs['zeros'] > attrs['n']:
            raise serializers.ValidationError({'zeros': f"must not exceed n={attrs['n']}"})
        return attrs


class DimQuerySerializer(BetaSpecSerializer):
    a = serializers.FloatField()
    method = serializers.ChoiceField(choices=METHODS, default='auto')
    n = serializers.IntegerField(default=DEFAULT_COUNTING_LENGTH, min_value=10)


class SpectrumQuerySerializer(BetaSpecSerializer):
    a_grid = serializers.CharField()
    method = serializers.ChoiceField(choices=METHODS, default='auto')
    n = serializers.IntegerField(default=DEFAULT_COUNTING_LENGTH, min_value=10)

    def validate_a_grid(self, value):
        try:
            grid = parse_grid(value, limit=Config.from_settings().max_grid)
        except ValueError as e:
            raise serializers.ValidationError(f"bad grid: {e}")
        if not grid:
            raise serializers.ValidationError('empty grid')
        return grid
