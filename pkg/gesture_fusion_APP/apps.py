from django.apps import AppConfig


class GestureFusionAppConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'gesture_fusion_APP'
    verbose_name = 'EMG and event-camera gesture fusion'
