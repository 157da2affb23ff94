"""
Time-domain EMG features computed per synchronized window.
The window feature vector concatenates the per-channel MAV block and the
per-channel RMS block: E(n) = [MAV(x_1..x_C), RMS(x_1..x_C)].
Location: gesture_fusion_APP/features/emg_features.py
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import Iterable, Sequence, Union

import numpy as np
import pandas as pd

from ..exceptions import EmptyWindow
from ..sensors.types import SyncWindow

logger = logging.getLogger(__name__)


@dataclass(frozen=True, eq=False)
class EmgFeatureVector:
    values: np.ndarray
    n: int

    def __len__(self) -> int:
        return len(self.values)

    @property
    def channel_count(self) -> int:
        return len(self.values) // 2


def mav(channel_samples: Sequence[float]) -> float:
    """Mean Absolute Value: (1/N) sum |x_i|"""
    x = np.asarray(channel_samples, dtype=np.float64)
    if x.size == 0:
        raise EmptyWindow("MAV needs at least one sample")
    return float(np.mean(np.abs(x)))


def rms(channel_samples: Sequence[float]) -> float:
    """Root Mean Square: sqrt((1/N) sum x_i^2)"""
    x = np.asarray(channel_samples, dtype=np.float64)
    if x.size == 0:
        raise EmptyWindow("RMS needs at least one sample")
    return float(np.sqrt(np.mean(np.square(x))))


def emg_feature_matrix(samples: np.ndarray) -> np.ndarray:
    """MAV block then RMS block for an (N, C) lockstep sample matrix"""
    samples = np.asarray(samples, dtype=np.float64)
    if samples.ndim != 2 or samples.shape[0] == 0 or samples.shape[1] == 0:
        raise EmptyWindow(f"EMG window needs at least one sample per channel, got shape {samples.shape}")
    return np.concatenate([
        np.mean(np.abs(samples), axis=0),
        np.sqrt(np.mean(np.square(samples), axis=0)),
    ])


def emg_feature_vector(window: SyncWindow) -> EmgFeatureVector:
    """Feature vector E(n) of one window (length 2*C)"""
    try:
        values = emg_feature_matrix(window.emg_samples)
    except EmptyWindow:
        raise EmptyWindow(f"Window {window.n} holds no EMG samples")
    values.setflags(write=False)
    return EmgFeatureVector(values=values, n=window.n)


def write_feature_csv(vectors: Iterable[EmgFeatureVector], path: Union[str, Path]):
    """Rows of `n,f0..f{2C-1}` for inspection"""
    vectors = list(vectors)
    width = len(vectors[0]) if vectors else 16
    frame = pd.DataFrame(
        [v.values for v in vectors] if vectors else np.empty((0, width)),
        columns=[f'f{i}' for i in range(width)],
    )
    frame.insert(0, 'n', [v.n for v in vectors])
    frame.to_csv(path, index=False)
    logger.debug(f"Wrote {len(vectors)} EMG feature rows to {path}")
