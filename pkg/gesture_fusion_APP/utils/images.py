"""
Grayscale image import/export helpers backed by Pillow.
Location: gesture_fusion_APP/utils/images.py
"""
from pathlib import Path
from typing import Union

import numpy as np
from PIL import Image


def gray_to_uint8(gray: np.ndarray) -> np.ndarray:
    """Map [0, 1] intensities to 8-bit levels (gray x 255, rounded)"""
    return np.clip(np.rint(np.asarray(gray, dtype=np.float64) * 255.0), 0, 255).astype(np.uint8)


def write_pgm(path: Union[str, Path], gray: np.ndarray):
    """Write a binary (P5) 8-bit PGM"""
    Image.fromarray(gray_to_uint8(gray)).save(Path(path), format='PPM')


def read_gray(path: Union[str, Path]) -> np.ndarray:
    """Read any Pillow-readable image as grayscale intensities in [0, 1]"""
    with Image.open(path) as image:
        return np.asarray(image.convert('L'), dtype=np.float64) / 255.0
