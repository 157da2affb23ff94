import os

import django

os.environ.setdefault('DJANGO_SETTINGS_MODULE', 'gesture_fusion.settings')
django.setup()
