import logging

from django.conf import settings
from rest_framework import status
from rest_framework.parsers import FormParser, MultiPartParser
from rest_framework.response import Response
from rest_framework.views import APIView

from validitykit.exceptions import ValidityError
from geometry.datasets import read_csv_dataset
from indices.utils import CH_STANDARD
from .report import analyze
from .serializers import AnalyzeRequestSerializer, ValidityReportSerializer

logger = logging.getLogger(__name__)


class AnalyzeView(APIView):
    """Upload a numeric CSV and get its per-k validity report"""
    parser_classes = [MultiPartParser, FormParser]

    def post(self, request):
        serializer = AnalyzeRequestSerializer(data=request.data)
        if not serializer.is_valid():
            return Response(serializer.errors, status=status.HTTP_400_BAD_REQUEST)
        params = serializer.validated_data
        defaults = settings.VALIDITY
        upload = params['file']

        try:
            data = read_csv_dataset(upload, source=upload.name)
            report = analyze(
                data,
                k_max=params.get('k_max', defaults['K_MAX']),
                threshold=params.get('threshold'),
                B=params.get('bootstraps', defaults['BOOTSTRAPS']),
                seed=params.get('seed', defaults['SEED']),
                ch_formula=params.get('ch_formula', CH_STANDARD),
                clamp=defaults['DELTA_T_CLAMP'],
                d_power=params.get('gap_d_power', defaults['GAP_D_POWER']),
            )
        except ValidityError as e:
            return Response(e.as_payload(), status=status.HTTP_400_BAD_REQUEST)
        except Exception as e:
            logger.error(f"Error analyzing {upload.name}: {e}", exc_info=True)
            return Response({'error': 'Analysis failed'}, status=status.HTTP_500_INTERNAL_SERVER_ERROR)

        return Response(ValidityReportSerializer(report).data)
