from django.apps import AppConfig


class ArrayDetectionConfig(AppConfig):
    name = "array_detection"
    verbose_name = "Pixelized intensity detection"
