"""
APS frame import/export.
Frames are stored one per file as 8-bit grayscale images named `<t_us>.pgm`
(or .png); intensities are rescaled by 1/255 on import.
Location: gesture_fusion_APP/sensors/aps.py
"""
import logging
from pathlib import Path
from typing import Iterable, Tuple, Union

from ..exceptions import MissingFile, SensorDataError
from ..utils.images import read_gray, write_pgm
from .types import ApsFrame

logger = logging.getLogger(__name__)

FRAME_SUFFIXES = ('.pgm', '.png')


def load_aps_frames(aps_dir: Union[str, Path]) -> Tuple[ApsFrame, ...]:
    """Load every frame of a directory ordered by timestamp"""
    aps_dir = Path(aps_dir)
    if not aps_dir.is_dir():
        raise MissingFile(f"APS directory not found: {aps_dir}")

    frames = []
    for path in aps_dir.iterdir():
        if path.suffix.lower() not in FRAME_SUFFIXES:
            continue
        try:
            t = int(path.stem)
        except ValueError:
            raise SensorDataError(f"APS frame name must be its timestamp in us, got '{path.name}'")
        pixels = read_gray(path)
        frames.append(ApsFrame(width=pixels.shape[1], height=pixels.shape[0], pixels=pixels, t=t))

    frames.sort(key=lambda frame: frame.t)
    logger.debug(f"Loaded {len(frames)} APS frames from {aps_dir}")
    return tuple(frames)


def write_aps_frames(aps_dir: Union[str, Path], frames: Iterable[ApsFrame]):
    aps_dir = Path(aps_dir)
    aps_dir.mkdir(parents=True, exist_ok=True)
    for frame in frames:
        write_pgm(aps_dir / f'{frame.t}.pgm', frame.pixels)
