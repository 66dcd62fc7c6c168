from rest_framework import serializers

from validitykit.fields import FiniteFloatField


class IndexSeriesSerializer(serializers.Serializer):
    kind = serializers.CharField(read_only=True)
    value_by_k = serializers.DictField(child=FiniteFloatField(allow_null=True), read_only=True)
    selected_k = serializers.IntegerField(read_only=True)
    infinite_k = serializers.ListField(child=serializers.IntegerField(), read_only=True)


class GapSeriesSerializer(serializers.Serializer):
    k_min = serializers.IntegerField(read_only=True)
    k_max = serializers.IntegerField(read_only=True)
    gap_by_k = serializers.DictField(child=FiniteFloatField(allow_null=True), read_only=True)
    se_by_k = serializers.DictField(child=FiniteFloatField(allow_null=True), read_only=True)
    log_w_by_k = serializers.DictField(child=FiniteFloatField(allow_null=True), read_only=True)
    expected_log_w_by_k = serializers.DictField(child=FiniteFloatField(allow_null=True), read_only=True)
    B = serializers.IntegerField(read_only=True)
    reference_kind = serializers.CharField(read_only=True)
    seed = serializers.IntegerField(read_only=True)
    selected_k = serializers.IntegerField(read_only=True)
    infinite_k = serializers.ListField(child=serializers.IntegerField(), read_only=True)
    d_power = serializers.IntegerField(read_only=True)
