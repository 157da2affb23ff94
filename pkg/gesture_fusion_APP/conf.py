"""
Typed access to the GESTURE_FUSION settings block.
Location: gesture_fusion_APP/conf.py
"""
from typing import Any

from django.conf import settings


def get_setting(name: str, default: Any = None) -> Any:
    """Read one pipeline setting lazily so library modules never touch settings at import"""
    block = getattr(settings, 'GESTURE_FUSION', {})
    return block.get(name, default)
