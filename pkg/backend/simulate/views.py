import logging

from django.conf import settings
from rest_framework import mixins, status, viewsets
from rest_framework.response import Response
from rest_framework.views import APIView

from .models import Study
from .scenarios import builtin_scenarios
from .serializers import ScenarioSpecSerializer, StudySerializer

logger = logging.getLogger(__name__)

# Try to import Celery task for async processing
try:
    from .tasks import run_study_async
    CELERY_AVAILABLE = True
except ImportError:
    CELERY_AVAILABLE = False


class ScenarioListView(APIView):
    """Built-in simulation scenarios"""

    def get(self, request):
        specs = builtin_scenarios(settings.VALIDITY['GAUSSIAN_SD'])
        return Response(ScenarioSpecSerializer(specs, many=True).data)


class StudyViewSet(mixins.CreateModelMixin,
                   mixins.ListModelMixin,
                   mixins.RetrieveModelMixin,
                   viewsets.GenericViewSet):
    """Simulation studies: create runs the study, synchronously unless ASYNC_STUDIES is on"""
    queryset = Study.objects.all()
    serializer_class = StudySerializer

    def create(self, request, *args, **kwargs):
        serializer = self.get_serializer(data=request.data)
        serializer.is_valid(raise_exception=True)
        study = serializer.save()

        if settings.VALIDITY['ASYNC_STUDIES'] and CELERY_AVAILABLE:
            run_study_async.delay(study.id)
            logger.info(f"Queued study {study.id} on Celery")
            response_status = status.HTTP_202_ACCEPTED
        else:
            run_study_async(study.id)
            response_status = status.HTTP_201_CREATED

        study.refresh_from_db()
        return Response(self.get_serializer(study).data, status=response_status)
