"""
Django settings for the imagecrb project.

Only the pieces the command-line front end needs are configured: the
management-command app, REST framework serializers for run-config
validation, and logging. There is no database.
"""

from pathlib import Path
import os
from dotenv import load_dotenv

# Load environment variables
load_dotenv()

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

SECRET_KEY = os.getenv('SECRET_KEY', "imagecrb-offline-batch-runs-only")

DEBUG = os.getenv('DEBUG', 'False') == 'True'

ALLOWED_HOSTS = []


# Application definition

INSTALLED_APPS = [
    # Third-party apps
    "rest_framework",
    # Local apps
    "transverse",
    "imaging",
    "bounds",
    "array_detection",
    "homodyne",
    "montecarlo",
    "runs",
]

DATABASES = {}

LANGUAGE_CODE = "en-us"

TIME_ZONE = "UTC"

USE_I18N = False

USE_TZ = True


# Logging
LOG_LEVEL = os.getenv('IMAGECRB_LOG_LEVEL', 'WARNING').upper()

LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'plain': {
            'format': '%(levelname)s %(name)s: %(message)s',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'plain',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': LOG_LEVEL,
    },
}


# Run defaults (overridable per invocation from the command line)
DEFAULT_THREADS = int(os.getenv('IMAGECRB_THREADS', '1'))
DEFAULT_OUTPUT_PREFIX = os.getenv('IMAGECRB_OUTPUT_PREFIX', 'run')
