"""
Visual features: event frames, APS averaging, hand localization, patches and HOG.
Location: gesture_fusion_APP/features/vision_features.py
"""
import logging
from dataclasses import dataclass, replace
from typing import Optional, Tuple

import numpy as np

from ..conf import get_setting
from ..exceptions import ApsFrameSizeMismatch, EmptyFrame, NoApsFrames, PatchLargerThanFrame, WrongPatchSize
from ..sensors.types import EventArray, SensorGeometry, SyncWindow

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EventFrame:
    """Per-pixel event counts of one window; gray is filled by minmax_normalize"""
    width: int
    height: int
    counts: np.ndarray
    n: int = 0
    gray: Optional[np.ndarray] = None


@dataclass(frozen=True, eq=False)
class Patch:
    side: int
    pixels: np.ndarray
    source_center: Tuple[int, int]


@dataclass(frozen=True, eq=False)
class HogDescriptor:
    values: np.ndarray
    n: Optional[int] = None

    @property
    def d(self) -> int:
        return len(self.values)

    def __len__(self) -> int:
        return len(self.values)


@dataclass(frozen=True)
class HogParameters:
    cell: int = 10
    bins: int = 9
    block: int = 2
    epsilon: float = 1e-6

    @classmethod
    def from_settings(cls) -> 'HogParameters':
        return cls(
            cell=get_setting('HOG_CELL', 10),
            bins=get_setting('HOG_BINS', 9),
            block=get_setting('HOG_BLOCK', 2),
            epsilon=get_setting('HOG_EPSILON', 1e-6),
        )


def accumulate_event_frame(window: SyncWindow, geometry: SensorGeometry) -> EventFrame:
    """Count events per pixel, ignoring polarity"""
    return accumulate_events(window.events, geometry, n=window.n)


def accumulate_events(events: EventArray, geometry: SensorGeometry, n: int = 0) -> EventFrame:
    flat = events.y * geometry.width + events.x
    counts = np.bincount(flat, minlength=geometry.width * geometry.height)
    counts = counts.reshape(geometry.height, geometry.width).astype(np.int64)
    return EventFrame(width=geometry.width, height=geometry.height, counts=counts, n=n)


def minmax_normalize(frame: EventFrame) -> EventFrame:
    """Gray = (counts - min) / (max - min); a uniform frame maps to all zeros"""
    counts = frame.counts.astype(np.float64)
    low, high = counts.min(), counts.max()
    if high == low:
        gray = np.zeros_like(counts)
    else:
        gray = (counts - low) / (high - low)
    return replace(frame, gray=gray)


def hand_center(frame: EventFrame) -> Tuple[int, int]:
    """Count centroid (M10/M00, M01/M00) rounded half-up to the nearest pixel"""
    counts = frame.counts.astype(np.float64)
    m00 = counts.sum()
    if m00 == 0:
        raise EmptyFrame(f"Event frame {frame.n} has no events")
    rows, cols = np.indices(counts.shape)
    cx = (cols * counts).sum() / m00
    cy = (rows * counts).sum() / m00
    return int(np.floor(cx + 0.5)), int(np.floor(cy + 0.5))


def locate_hand(frame: EventFrame) -> Tuple[int, int]:
    """hand_center with the geometric frame center as fallback for empty frames"""
    try:
        return hand_center(frame)
    except EmptyFrame:
        logger.warning(f"Window {frame.n}: empty event frame, using the frame center")
        return frame.width // 2, frame.height // 2


def extract_patch(frame_gray: np.ndarray, center: Tuple[int, int], patch_side: int) -> Patch:
    """Square patch centered at `center`, translated to lie fully inside the frame"""
    frame_gray = np.asarray(frame_gray, dtype=np.float64)
    height, width = frame_gray.shape
    if patch_side > min(width, height):
        raise PatchLargerThanFrame(f"A {patch_side}px patch does not fit a {width}x{height} frame")
    cx, cy = center
    x0 = int(np.clip(cx - patch_side // 2, 0, width - patch_side))
    y0 = int(np.clip(cy - patch_side // 2, 0, height - patch_side))
    pixels = frame_gray[y0:y0 + patch_side, x0:x0 + patch_side].copy()
    return Patch(side=patch_side, pixels=pixels, source_center=(int(cx), int(cy)))


def subsample(patch: Patch) -> Patch:
    """120x120 -> 60x60 by averaging 2x2 blocks"""
    pixels = np.asarray(patch.pixels, dtype=np.float64)
    if pixels.shape != (120, 120):
        raise WrongPatchSize(f"Subsampling expects a 120x120 patch, got {pixels.shape}")
    half = pixels.reshape(60, 2, 60, 2).mean(axis=(1, 3))
    return Patch(side=60, pixels=half, source_center=patch.source_center)


def average_aps(window: SyncWindow) -> np.ndarray:
    """Per-pixel mean of the APS frames inside the window"""
    if not window.aps_frames:
        raise NoApsFrames(f"Window {window.n} contains no APS frames")
    sizes = {frame.pixels.shape for frame in window.aps_frames}
    if len(sizes) > 1:
        raise ApsFrameSizeMismatch(f"Window {window.n} mixes APS frame sizes {sorted(sizes)}")
    return np.mean(np.stack([frame.pixels for frame in window.aps_frames]), axis=0)


def image_gradients(pixels: np.ndarray) -> Tuple[np.ndarray, np.ndarray]:
    """Central differences [-1, 0, 1] with replicated borders"""
    padded = np.pad(pixels, 1, mode='edge')
    gx = padded[1:-1, 2:] - padded[1:-1, :-2]
    gy = padded[2:, 1:-1] - padded[:-2, 1:-1]
    return gx, gy


def hog_cell_histograms(pixels: np.ndarray, params: Optional[HogParameters] = None) -> np.ndarray:
    """Unsigned orientation histograms, shape (cells_y, cells_x, bins).

    Each pixel votes its gradient magnitude into the single bin covering its
    orientation in [0, 180) degrees.
    """
    params = params or HogParameters()
    pixels = np.asarray(pixels, dtype=np.float64)
    height, width = pixels.shape
    cells_y, cells_x = height // params.cell, width // params.cell

    gx, gy = image_gradients(pixels)
    magnitude = np.hypot(gx, gy)
    angle = np.mod(np.arctan2(gy, gx), np.pi)
    bins = np.minimum((angle / (np.pi / params.bins)).astype(np.int64), params.bins - 1)

    rows, cols = np.indices(pixels.shape)
    cell_index = (rows // params.cell) * cells_x + (cols // params.cell)
    flat = cell_index * params.bins + bins
    histograms = np.bincount(flat.ravel(), weights=magnitude.ravel(), minlength=cells_y * cells_x * params.bins)
    return histograms.reshape(cells_y, cells_x, params.bins)


def hog(patch: Patch, params: Optional[HogParameters] = None) -> HogDescriptor:
    """HOG of a 60x60 patch: 2x2-cell blocks, stride one cell, L2 norm with epsilon"""
    params = params or HogParameters()
    pixels = np.asarray(patch.pixels, dtype=np.float64)
    if pixels.shape != (60, 60):
        raise WrongPatchSize(f"HOG expects a 60x60 patch, got {pixels.shape}")

    cells = hog_cell_histograms(pixels, params)
    blocks_y = cells.shape[0] - params.block + 1
    blocks_x = cells.shape[1] - params.block + 1
    blocks = []
    for by in range(blocks_y):
        for bx in range(blocks_x):
            block = cells[by:by + params.block, bx:bx + params.block, :].ravel()
            blocks.append(block / np.sqrt(np.dot(block, block) + params.epsilon ** 2))
    values = np.concatenate(blocks)
    values.setflags(write=False)
    return HogDescriptor(values=values)
