"""
Celery configuration for Validity Kit
"""
import os
from celery import Celery

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'validitykit.settings')

app = Celery('validitykit')
app.config_from_object('django.conf:settings', namespace='CELERY')
app.autodiscover_tasks()
