from django.conf import settings
from rest_framework import serializers

from validitykit.exceptions import InvalidInputError
from .models import Study
from .scenarios import SCENARIO_KINDS, ScenarioSpec, scenario_by_name
from .study import METHODS, StudyParameters


class ScenarioSpecSerializer(serializers.Serializer):
    name = serializers.CharField(max_length=100)
    kind = serializers.ChoiceField(choices=SCENARIO_KINDS)
    dims = serializers.IntegerField(min_value=1)
    sizes = serializers.ListField(child=serializers.IntegerField(min_value=1), min_length=1)
    lower = serializers.ListField(child=serializers.FloatField(), required=False, default=list)
    upper = serializers.ListField(child=serializers.FloatField(), required=False, default=list)
    centers = serializers.ListField(
        child=serializers.ListField(child=serializers.FloatField(), min_length=1),
        required=False, default=list,
    )
    sd = serializers.FloatField(required=False, default=1.0)
    n = serializers.IntegerField(read_only=True)

    def validate(self, attrs):
        try:
            ScenarioSpec(**attrs)
        except InvalidInputError as e:
            raise serializers.ValidationError(e.message)
        return attrs

    def create(self, validated_data):
        return ScenarioSpec(**validated_data)


class TallyTableSerializer(serializers.Serializer):
    scenario = ScenarioSpecSerializer(read_only=True)
    R = serializers.IntegerField(read_only=True)
    seed = serializers.IntegerField(read_only=True)
    k_max = serializers.IntegerField(source='parameters.k_max', read_only=True)
    B = serializers.IntegerField(source='parameters.B', read_only=True)
    threshold = serializers.FloatField(source='parameters.threshold', read_only=True)
    ch_formula = serializers.CharField(source='parameters.ch_formula', read_only=True)
    d_power = serializers.IntegerField(source='parameters.d_power', read_only=True)
    methods = serializers.ListField(source='parameters.methods', child=serializers.CharField(), read_only=True)
    rows = serializers.SerializerMethodField()
    failures = serializers.SerializerMethodField()

    def get_rows(self, obj):
        return obj.rows()

    def get_failures(self, obj):
        return obj.labelled_failures()


class StudySerializer(serializers.ModelSerializer):
    scenario = serializers.CharField(max_length=100, required=False)
    spec = serializers.JSONField(required=False)
    methods = serializers.ListField(
        child=serializers.ChoiceField(choices=METHODS), required=False, min_length=1,
    )

    class Meta:
        model = Study
        fields = [
            'id', 'scenario', 'spec', 'methods', 'replications', 'k_max', 'seed', 'bootstraps', 'threshold',
            'ch_formula', 'gap_d_power', 'tallies', 'failures', 'processing_status', 'processing_error',
            'created_at', 'updated_at',
        ]
        read_only_fields = [
            'id', 'tallies', 'failures', 'processing_status', 'processing_error', 'created_at', 'updated_at',
        ]

    def validate(self, attrs):
        defaults = settings.VALIDITY
        if attrs.get('spec'):
            spec_serializer = ScenarioSpecSerializer(data=attrs['spec'])
            spec_serializer.is_valid(raise_exception=True)
            spec = spec_serializer.save()
        elif attrs.get('scenario'):
            try:
                spec = scenario_by_name(attrs['scenario'], defaults['GAUSSIAN_SD'])
            except InvalidInputError as e:
                raise serializers.ValidationError({'scenario': e.message})
        else:
            raise serializers.ValidationError('either scenario or spec is required')

        attrs['scenario'] = spec.name
        attrs['spec'] = ScenarioSpecSerializer(spec).data
        attrs.setdefault('methods', list(METHODS))
        attrs.setdefault('replications', defaults['REPLICATIONS'])
        attrs.setdefault('k_max', defaults['K_MAX'])
        attrs.setdefault('seed', defaults['SEED'])
        attrs.setdefault('bootstraps', defaults['BOOTSTRAPS'])
        attrs.setdefault('threshold', defaults['THRESHOLD'])
        attrs.setdefault('gap_d_power', defaults['GAP_D_POWER'])
        try:
            StudyParameters(methods=attrs['methods'], R=attrs['replications'], k_max=attrs['k_max'])
        except InvalidInputError as e:
            raise serializers.ValidationError(e.message)
        if attrs['k_max'] > spec.n - 1:
            raise serializers.ValidationError({'k_max': f"at most {spec.n - 1} for scenario {spec.name}"})
        return attrs
