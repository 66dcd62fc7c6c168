"""
Serializer fields for numpy-backed results.
"""
import math

from rest_framework import serializers


class FiniteFloatField(serializers.FloatField):
    """Float that renders non-finite values (inf, nan) as null."""

    def to_representation(self, value):
        if value is None:
            return None
        value = float(value)
        return value if math.isfinite(value) else None


def vector_field(**kwargs):
    return serializers.ListField(child=FiniteFloatField(allow_null=True), **kwargs)


def matrix_field(**kwargs):
    return serializers.ListField(child=vector_field(), **kwargs)
