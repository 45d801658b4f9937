from django.apps import AppConfig


class GaussianConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'gaussian'
    verbose_name = 'Gaussian state analysis'
