from django.apps import AppConfig


class ExpansionsConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'services.expansions'
    verbose_name = 'Beta Expansions'
