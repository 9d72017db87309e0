from django.apps import AppConfig


class DimensionConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'services.dimension'
    verbose_name = 'Frequency Dimensions'
