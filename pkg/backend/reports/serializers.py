from rest_framework import serializers

from indices.serializers import GapSeriesSerializer, IndexSeriesSerializer
from indices.utils import CH_FORMULAS, DISPERSION_POWERS
from selection.serializers import PhiSeriesSerializer


class ValidityReportSerializer(serializers.Serializer):
    source = serializers.CharField(read_only=True, allow_null=True)
    n = serializers.IntegerField(read_only=True)
    p = serializers.IntegerField(read_only=True)
    k_max = serializers.IntegerField(read_only=True)
    threshold = serializers.FloatField(read_only=True, allow_null=True)
    seed = serializers.IntegerField(read_only=True)
    B = serializers.IntegerField(read_only=True)
    ch_formula = serializers.CharField(read_only=True)
    selected = serializers.DictField(child=serializers.IntegerField(), read_only=True)
    phi = PhiSeriesSerializer(read_only=True)
    gap_uniform = GapSeriesSerializer(read_only=True)
    gap_pca = GapSeriesSerializer(read_only=True)
    ch = IndexSeriesSerializer(read_only=True)
    silhouette = IndexSeriesSerializer(read_only=True)


class AnalyzeRequestSerializer(serializers.Serializer):
    """Multipart upload for POST /api/analyze/; omitted parameters take the VALIDITY defaults."""
    file = serializers.FileField()
    k_max = serializers.IntegerField(min_value=3, required=False)
    threshold = serializers.FloatField(min_value=0.0, max_value=1.0, required=False, allow_null=True)
    bootstraps = serializers.IntegerField(min_value=10, required=False)
    seed = serializers.IntegerField(required=False)
    ch_formula = serializers.ChoiceField(choices=CH_FORMULAS, required=False)
    gap_d_power = serializers.ChoiceField(choices=DISPERSION_POWERS, required=False)
