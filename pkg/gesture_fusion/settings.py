"""
Django settings for gesture_fusion project.
"""
from pathlib import Path
from decouple import config, Csv

# Build paths inside the project like this: BASE_DIR / 'subdir'.
BASE_DIR = Path(__file__).resolve().parent.parent

# Only used by Django internals; nothing here is served over HTTP.
SECRET_KEY = config('SECRET_KEY', default='gesture-fusion-offline-key')

DEBUG = config('DEBUG', default=False, cast=bool)

ALLOWED_HOSTS = []

# Application definition
INSTALLED_APPS = [
    'gesture_fusion_APP',
]

# No relational state: models and reports are plain files
DATABASES = {}

# Internationalization
LANGUAGE_CODE = 'en-us'
TIME_ZONE = 'UTC'
USE_I18N = False
USE_TZ = True

DEFAULT_AUTO_FIELD = 'django.db.models.BigAutoField'

# Sensor fusion pipeline
GESTURE_FUSION = {
    # Windows
    'WINDOW_MS': config('WINDOW_MS', default=200, cast=int),
    'WINDOW_SWEEP_MS': config('WINDOW_SWEEP_MS', default='100,150,200,250', cast=Csv(int)),
    'DEFAULT_SEED': config('DEFAULT_SEED', default=0, cast=int),

    # EMG (Myo armband)
    'EMG_SAMPLE_RATE_HZ': config('EMG_SAMPLE_RATE_HZ', default=200.0, cast=float),
    'EMG_CHANNELS': config('EMG_CHANNELS', default=8, cast=int),

    # Vision
    'PATCH_SIDE': config('PATCH_SIDE', default=60, cast=int),
    'DAVIS_PATCH_SIDE': config('DAVIS_PATCH_SIDE', default=120, cast=int),
    'HOG_CELL': config('HOG_CELL', default=10, cast=int),
    'HOG_BINS': config('HOG_BINS', default=9, cast=int),
    'HOG_BLOCK': config('HOG_BLOCK', default=2, cast=int),
    'HOG_EPSILON': config('HOG_EPSILON', default=1e-6, cast=float),

    # SVM
    'SVM_C_GRID': config('SVM_C_GRID', default='0.01,0.1,1,10,100', cast=Csv(float)),
    'SVM_TOLERANCE': config('SVM_TOLERANCE', default=1e-3, cast=float),
    'SVM_MAX_PASSES': config('SVM_MAX_PASSES', default=10, cast=int),

    # Cross-validation
    'CV_FOLDS': config('CV_FOLDS', default=5, cast=int),
    'FOLD_STRATEGY': config('FOLD_STRATEGY', default='mixed'),  # mixed | subject
    'N_JOBS': config('N_JOBS', default=1, cast=int),

    # CNN training
    'CNN_EPOCHS': config('CNN_EPOCHS', default=100, cast=int),
    'CNN_BATCH_SIZE': config('CNN_BATCH_SIZE', default=32, cast=int),
    'ADADELTA_RHO': config('ADADELTA_RHO', default=0.95, cast=float),
    'ADADELTA_EPSILON': config('ADADELTA_EPSILON', default=1e-6, cast=float),
    'ADADELTA_LEARNING_RATE': config('ADADELTA_LEARNING_RATE', default=1.0, cast=float),
    'FUSION_EPOCHS': config('FUSION_EPOCHS', default=50, cast=int),
    'FUSION_INPUT': config('FUSION_INPUT', default='softmax'),  # softmax | logits

    # Replay runtime
    'QUEUE_CAPACITY': config('QUEUE_CAPACITY', default=8, cast=int),
    'DROP_POLICY': config('DROP_POLICY', default='keep-latest'),  # keep-latest | none
    'REPLAY_SPEED': config('REPLAY_SPEED', default='max'),  # max | realtime
    'JOIN_TIMEOUT_FACTOR': config('JOIN_TIMEOUT_FACTOR', default=2.0, cast=float),
}

# Logging
LOGGING = {
    'version': 1,
    'disable_existing_loggers': False,
    'formatters': {
        'verbose': {
            'format': '{levelname} {asctime} {module} {message}',
            'style': '{',
        },
    },
    'handlers': {
        'console': {
            'class': 'logging.StreamHandler',
            'formatter': 'verbose',
        },
    },
    'root': {
        'handlers': ['console'],
        'level': 'WARNING',
    },
    'loggers': {
        'django': {
            'handlers': ['console'],
            'level': 'WARNING',
            'propagate': False,
        },
        'gesture_fusion_APP': {
            'handlers': ['console'],
            'level': config('LOG_LEVEL', default='INFO'),
            'propagate': False,
        },
    },
}
