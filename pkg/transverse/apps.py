from django.apps import AppConfig


class TransverseConfig(AppConfig):
    name = "transverse"
    verbose_name = "Transverse plane"
