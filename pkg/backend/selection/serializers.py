from rest_framework import serializers

from validitykit.fields import FiniteFloatField


class PhiSeriesSerializer(serializers.Serializer):
    k_min = serializers.IntegerField(read_only=True)
    k_max = serializers.IntegerField(read_only=True)
    delta_T_by_k = serializers.DictField(child=FiniteFloatField(), read_only=True)
    phi_by_k = serializers.DictField(child=FiniteFloatField(), read_only=True)
    phi1_by_k = serializers.DictField(child=FiniteFloatField(), read_only=True)
    selected_k = serializers.IntegerField(read_only=True)
    threshold = serializers.FloatField(read_only=True, allow_null=True)
