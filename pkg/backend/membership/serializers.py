from rest_framework import serializers

from validitykit.fields import FiniteFloatField, matrix_field, vector_field


class MembershipMatrixSerializer(serializers.Serializer):
    k = serializers.IntegerField(read_only=True)
    gamma = matrix_field(read_only=True)
    delta_mk = matrix_field(read_only=True)
    delta_dot_k = vector_field(read_only=True)
    delta_m_dot = vector_field(read_only=True)
    delta_T = FiniteFloatField(read_only=True)
    thresholded = serializers.BooleanField(read_only=True)
    threshold = serializers.FloatField(read_only=True)
