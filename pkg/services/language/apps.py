from django.apps import AppConfig


class LanguageConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'services.language'
    verbose_name = 'Beta-shift Language'
