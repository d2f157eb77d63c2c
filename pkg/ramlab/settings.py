from pathlib import Path
from decouple import config, Csv
import dj_database_url


# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Create logs directory if it doesn't exist
LOG_DIR = BASE_DIR / 'logs'
LOG_DIR.mkdir(parents=True, exist_ok=True)

# SECURITY WARNING: keep the secret key used in production secret!
SECRET_KEY = config('SECRET_KEY', default='ramlab-local-development-key')

# SECURITY WARNING: don't run with debug turned on in production!
DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = config('ALLOWED_HOSTS', default='localhost,127.0.0.1', cast=Csv())

# Application definition
INSTALLED_APPS = [
    'django.contrib.admin',
    'django.contrib.auth',
    'django.contrib.contenttypes',
    'django.contrib.sessions',
    'django.contrib.messages',
    'django.contrib.staticfiles',

    # Third party apps
    'rest_framework',

    # Local apps
    'core',
    'environments',
    'analytics',
]

MIDDLEWARE = [
    'django.middleware.security.SecurityMiddleware',
    'django.contrib.sessions.middleware.SessionMiddleware',
    'django.middleware.common.CommonMiddleware',
    'django.middleware.csrf.CsrfViewMiddleware',
    'django.contrib.auth.middleware.AuthenticationMiddleware',
    'django.contrib.messages.middleware.MessageMiddleware',
    'django.middleware.clickjacking.XFrameOptionsMiddleware',
]

ROOT_URLCONF = 'ramlab.urls'

TEMPLATES = [
    {
        'BACKEND': 'django.template.backends.django.DjangoTemplates',
        'DIRS': [],
        'APP_DIRS': True,
        'OPTIONS': {
            'context_processors': [
                'django.template.context_processors.debug',
                'django.template.context_processors.request',
                'django.contrib.auth.context_processors.auth',
                'django.contrib.messages.context_processors.messages',
            ],
        },
    },
]

WSGI_APPLICATION = 'ramlab.wsgi.application'

# Database configuration (experiment history only)
DATABASES = {
    'default': dj_database_url.config(
        default=f"sqlite:///{BASE_DIR / 'db.sqlite3'}",
        conn_max_age=600,
    )
}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = True
USE_TZ = True

STATIC_URL = 'static/'
STATIC_ROOT = BASE_DIR / 'staticfiles'

# Default primary key field type
DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Solver configuration
RAMLAB_VI_TOLERANCE = config('RAMLAB_VI_TOLERANCE', default=1e-8, cast=float)
RAMLAB_VI_MAX_ITER = config('RAMLAB_VI_MAX_ITER', default=100000, cast=int)
RAMLAB_PROB_EPSILON = config('RAMLAB_PROB_EPSILON', default=1e-9, cast=float)
RAMLAB_TIE_TOLERANCE = config('RAMLAB_TIE_TOLERANCE', default=1e-9, cast=float)
RAMLAB_GAME_TOLERANCE = config('RAMLAB_GAME_TOLERANCE', default=1e-12, cast=float)
RAMLAB_GAME_MAX_ROUNDS = config('RAMLAB_GAME_MAX_ROUNDS', default=1000, cast=int)

# Oracle limits
RAMLAB_ORACLE_GRID = config('RAMLAB_ORACLE_GRID', default=1000, cast=int)
RAMLAB_ORACLE_BELIEF_BUDGET = config('RAMLAB_ORACLE_BELIEF_BUDGET', default=10000, cast=int)

# Experiment harness
RAMLAB_RESULTS_DIR = Path(config('RAMLAB_RESULTS_DIR', default=str(BASE_DIR / 'results')))
RAMLAB_DEFAULT_JOBS = config('RAMLAB_DEFAULT_JOBS', default=1, cast=int)
RAMLAB_HORIZON_CAPS = {
    'ab': 2,
    'lucky-unlucky': 2,
    'belief-dep': 2,
    'snakemaze': config('RAMLAB_SNAKEMAZE_HORIZON', default=100, cast=int),
    'drone': config('RAMLAB_DRONE_HORIZON', default=100, cast=int),
}

# Logging Configuration
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
        'simple': {
            'format': '{levelname} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'file': {
            'level': 'INFO',
            'class': 'logging.handlers.RotatingFileHandler',
            'filename': LOG_DIR / 'ramlab.log',
            'maxBytes': 10 * 1024 * 1024,
            'backupCount': 3,
            'formatter': 'verbose',
        },
        'console': {
            'level': config('RAMLAB_CONSOLE_LOG_LEVEL', default='WARNING'),
            'class': 'logging.StreamHandler',
            'formatter': 'simple',
        },
        'error_file': {
            'level': 'ERROR',
            'class': 'logging.FileHandler',
            'filename': LOG_DIR / 'error.log',
            'formatter': 'verbose',
        },
    },
    'loggers': {
        'django': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
        'core': {
            'handlers': ['file', 'console'],
            'level': 'INFO',
            'propagate': True,
        },
    },
}

# Library loggers
for _name in ('solvers', 'planners', 'simulation', 'oracle', 'experiments', 'environments'):
    LOGGING['loggers'][_name] = {
        'handlers': ['file', 'console', 'error_file'],
        'level': config('RAMLAB_LOG_LEVEL', default='INFO'),
        'propagate': False,
    }
