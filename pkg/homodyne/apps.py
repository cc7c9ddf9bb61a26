from django.apps import AppConfig


class HomodyneAppConfig(AppConfig):
    name = "homodyne"
    verbose_name = "Balanced homodyne detection"
