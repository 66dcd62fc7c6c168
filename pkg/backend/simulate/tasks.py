"""
Celery tasks for running simulation studies in the background
"""
import logging

from celery import shared_task
from django.conf import settings

from .models import Study
from .serializers import ScenarioSpecSerializer
from .study import StudyParameters, run_study

logger = logging.getLogger(__name__)


@shared_task
def run_study_async(study_id):
    """
    Run a stored study and save its tallies.
    """
    try:
        study = Study.objects.get(id=study_id)

        if study.processing_status == 'completed':
            logger.warning(f"Study {study_id} already completed")
            return {'status': 'completed', 'study_id': study_id}

        study.processing_status = 'processing'
        study.processing_error = None
        study.save()

        spec_serializer = ScenarioSpecSerializer(data=study.spec)
        spec_serializer.is_valid(raise_exception=True)
        params = StudyParameters(
            methods=study.methods,
            R=study.replications,
            k_max=study.k_max,
            seed=study.seed,
            B=study.bootstraps,
            threshold=study.threshold,
            ch_formula=study.ch_formula,
            clamp=settings.VALIDITY['DELTA_T_CLAMP'],
            d_power=study.gap_d_power,
        )
        table = run_study([spec_serializer.save()], params)[0]

        study.tallies = table.rows()
        study.failures = table.labelled_failures()
        study.processing_status = 'completed'
        study.save()

        logger.info(f"Successfully ran study {study_id}")
        return {'status': 'completed', 'study_id': study_id}

    except Study.DoesNotExist:
        logger.error(f"Study {study_id} not found")
        return {'status': 'error', 'message': 'Study not found'}
    except Exception as e:
        logger.error(f"Error running study {study_id}: {e}", exc_info=True)
        Study.objects.filter(id=study_id).update(processing_status='failed', processing_error=str(e))
        return {'status': 'failed', 'study_id': study_id, 'error': str(e)}
