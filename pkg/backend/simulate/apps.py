from django.apps import AppConfig


class SimulateConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'simulate'
