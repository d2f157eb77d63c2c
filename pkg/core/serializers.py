"""
Serializers for the JSON model file header
"""
from rest_framework import serializers


class ModelFileSerializer(serializers.Serializer):
    """Validates the scalar header of a model file; rows are checked while loading"""

    name = serializers.CharField(required=False, allow_blank=True, default='')
    num_states = serializers.IntegerField(min_value=1)
    num_actions = serializers.IntegerField(min_value=1)
    discount = serializers.FloatField(min_value=0.0, max_value=1.0)
    measure_cost = serializers.FloatField(min_value=0.0)
    initial_state = serializers.IntegerField(min_value=0)
    terminals = serializers.ListField(child=serializers.IntegerField(min_value=0), allow_empty=True)

    def validate_discount(self, value):
        if value <= 0.0:
            raise serializers.ValidationError("Discount must be positive")
        return value

    def validate(self, data):
        num_states = data['num_states']
        if data['initial_state'] >= num_states:
            raise serializers.ValidationError({'initial_state': f"Must be below num_states={num_states}"})
        bad = [t for t in data['terminals'] if t >= num_states]
        if bad:
            raise serializers.ValidationError({'terminals': f"Out of range: {bad}"})
        return data
