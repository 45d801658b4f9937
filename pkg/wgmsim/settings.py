"""
Django settings for wgmsim project.

For more information on this file, see
https://docs.djangoproject.com/en/5.2/topics/settings/

For the full list of settings and their values, see
https://docs.djangoproject.com/en/5.2/ref/settings/
"""

import os
from pathlib import Path
from dotenv import load_dotenv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Load environment variables from .env file
load_dotenv(BASE_DIR / '.env')


# SECURITY WARNING: keep the secret key used in production secret!
# Use environment variable in production, fallback to default for development
SECRET_KEY = os.environ.get(
    'SECRET_KEY',
    'django-insecure-wgmsim-local-development-key-change-me'
)

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = os.environ.get('DEBUG', 'False') == 'True'

# Format: ALLOWED_HOSTS=sim.example.org,localhost,127.0.0.1
ALLOWED_HOSTS = [
    h.strip()
    for h in os.environ.get('ALLOWED_HOSTS', 'localhost,127.0.0.1').split(',')
    if h.strip()
]


# Application definition

INSTALLED_APPS = [
    # Third-party apps
    'rest_framework',
    'corsheaders',
    # Local apps
    'optomech',
    'gaussian',
    'sweeps',
    'api',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'corsheaders.middleware.CorsMiddleware',
    'django.middleware.common.CommonMiddleware',
]

ROOT_URLCONF = 'wgmsim.urls'

WSGI_APPLICATION = 'wgmsim.wsgi.application'


# Results are written to CSV/JSON files, never to a database.
DATABASES = {}

# Caching Configuration (API sweep results)
CACHES = {
    'default': {
        'BACKEND': 'django.core.cache.backends.locmem.LocMemCache',
        'LOCATION': 'wgmsim-cache',
        'OPTIONS': {
            'MAX_ENTRIES': 256,
            'CULL_FREQUENCY': 3,
        }
    }
}

# Cache timeout settings
CACHE_TTL = {
    'sweep_results': 3600,  # 1 hour
    'scenario_list': 86400,
}


# Internationalization
LANGUAGE_CODE = 'en-us'

TIME_ZONE = 'UTC'

USE_I18N = False

USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'


# Simulation configuration
# Every numerical knob of the pipeline; library calls fall back to these
# values when the caller passes no explicit tolerance.
SIMULATION = {
    'STEADY_STATE_TOLERANCE': float(os.environ.get('WGMSIM_STEADY_TOLERANCE', '1e-10')),
    'STEADY_STATE_MAX_ITERATIONS': 10_000,
    'STEADY_STATE_DAMPING': 0.5,
    'BISECTION_SCAN_POINTS': 2001,
    'STABILITY_MARGIN': 1e-6,  # in units of omega_m
    'LYAPUNOV_RESIDUAL_TOLERANCE': 1e-10,
    'PHYSICALITY_TOLERANCE': 1e-8,
    'SWEEP_MAX_POINTS': 1_000_000,
    # Empty means "one worker per physical core" (see sweeps.engine)
    'SWEEP_WORKERS': os.environ.get('WGMSIM_WORKERS', ''),
    'SWEEP_CHUNK_SIZE': 64,
    'CSV_SIGNIFICANT_DIGITS': 12,
    'API_MAX_POINTS': int(os.environ.get('WGMSIM_API_MAX_POINTS', '2500')),
}

LOG_LEVEL = os.environ.get('WGMSIM_LOG_LEVEL', 'INFO')

# Logging configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {process:d} {thread:d} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': LOG_LEVEL,
            'class': 'logging.FileHandler',
            'filename': BASE_DIR / 'logs' / 'wgmsim.log',
            'formatter': 'verbose',
        },
        'console': {
            'level': 'WARNING',
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
        'optomech': {
            'handlers': ['file', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'gaussian': {
            'handlers': ['file', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'sweeps': {
            'handlers': ['file', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
        'api': {
            'handlers': ['file', 'console'],
            'level': LOG_LEVEL,
            'propagate': False,
        },
    },
}

# Create logs directory
os.makedirs(BASE_DIR / 'logs', exist_ok=True)

# Django REST Framework Configuration
REST_FRAMEWORK = {
    'DEFAULT_RENDERER_CLASSES': [
        'rest_framework.renderers.JSONRenderer',
    ],
    'DEFAULT_PARSER_CLASSES': [
        'rest_framework.parsers.JSONParser',
    ],
    'DEFAULT_AUTHENTICATION_CLASSES': [
        'api.authentication.APIKeyAuthentication',
    ],
    'DEFAULT_PERMISSION_CLASSES': [
        'rest_framework.permissions.IsAuthenticated',
    ],
    # No django.contrib.auth: unauthenticated requests carry no user object
    'UNAUTHENTICATED_USER': None,
    'EXCEPTION_HANDLER': 'api.views.simulation_exception_handler',
}

# CORS Configuration
# CORS_ALLOWED_ORIGINS=http://lab-notebook.local:8888,http://127.0.0.1:8888
CORS_ALLOWED_ORIGINS = [
    origin.strip()
    for origin in os.environ.get(
        'CORS_ALLOWED_ORIGINS',
        'http://localhost:8888,http://127.0.0.1:8888'
    ).split(',')
    if origin.strip()
]

# For development only, you can set environment variable CORS_ALLOW_ALL_ORIGINS=True
# WARNING: Never use in production!
if os.environ.get('CORS_ALLOW_ALL_ORIGINS', 'False') == 'True':
    CORS_ALLOW_ALL_ORIGINS = True
