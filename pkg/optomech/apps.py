from django.apps import AppConfig


class OptomechConfig(AppConfig):
    default_auto_field = 'django.db.models.BigAutoField'
    name = 'optomech'
    verbose_name = 'Optomechanical model'
