"""
EMG CSV import/export.
Canonical layout: header `t_us,ch0,...,ch7`, integer microsecond timestamps,
raw Myo amplitudes in [-128, 127] kept as real numbers without rescaling.
Location: gesture_fusion_APP/sensors/emg_csv.py
"""
import logging
from pathlib import Path
from typing import Union

import numpy as np
import pandas as pd

from ..conf import get_setting
from ..exceptions import MissingFile, NonMonotonicTime, RaggedRow, SensorDataError
from .types import EmgRecording

logger = logging.getLogger(__name__)

TIME_COLUMN = 't_us'


def _channel_columns(columns) -> list:
    channels = list(columns[1:])
    expected = [f'ch{i}' for i in range(len(channels))]
    if not channels or channels != expected:
        raise SensorDataError(
            f"EMG CSV header must be '{TIME_COLUMN},ch0,...', got {','.join(map(str, columns))}"
        )
    return channels


def infer_sample_rate(timestamps: np.ndarray) -> float:
    """Sample rate from the median sample spacing; settings default below two samples"""
    if len(timestamps) < 2:
        return float(get_setting('EMG_SAMPLE_RATE_HZ', 200.0))
    spacing = float(np.median(np.diff(timestamps)))
    if spacing <= 0:
        return float(get_setting('EMG_SAMPLE_RATE_HZ', 200.0))
    return 1e6 / spacing


def read_emg_csv(path: Union[str, Path]) -> EmgRecording:
    """Read one EMG recording; raises RaggedRow / NonMonotonicTime on bad rows"""
    path = Path(path)
    if not path.exists():
        raise MissingFile(f"EMG file not found: {path}")

    try:
        frame = pd.read_csv(path, encoding='utf-8', skipinitialspace=True)
    except pd.errors.ParserError as e:
        raise RaggedRow(f"{path.name}: {str(e)}")
    except pd.errors.EmptyDataError:
        raise SensorDataError(f"{path.name}: missing header row")

    # a first data row longer than the header turns into an implicit index
    if len(frame) and not isinstance(frame.index, pd.RangeIndex):
        raise RaggedRow(f"{path.name}: data rows have more columns than the header")
    if list(frame.columns[:1]) != [TIME_COLUMN]:
        raise SensorDataError(f"{path.name}: first column must be '{TIME_COLUMN}'")
    channels = _channel_columns(frame.columns)

    if frame.isna().any().any():
        row = int(np.argmax(frame.isna().any(axis=1).to_numpy())) + 2
        raise RaggedRow(f"{path.name}: line {row} has missing columns")

    try:
        values = frame.to_numpy(dtype=np.float64)
    except ValueError as e:
        raise SensorDataError(f"{path.name}: non-numeric value ({str(e)})")

    timestamps = values[:, 0].astype(np.int64)
    steps = np.diff(timestamps)
    if (steps < 0).any():
        row = int(np.argmax(steps < 0)) + 3
        raise NonMonotonicTime(f"{path.name}: timestamp decreases at line {row}")

    recording = EmgRecording(
        sample_rate=infer_sample_rate(timestamps),
        channel_count=len(channels),
        samples=values[:, 1:],
        t0=int(timestamps[0]) if len(timestamps) else 0,
        timestamps=timestamps,
    )
    logger.debug(
        f"Loaded {len(recording)} EMG samples x {recording.channel_count} channels "
        f"at {recording.sample_rate:.1f} Hz from {path.name}"
    )
    return recording


def write_emg_csv(recording: EmgRecording, path: Union[str, Path]):
    """Write a recording in the canonical CSV layout"""
    columns = [f'ch{i}' for i in range(recording.channel_count)]
    frame = pd.DataFrame(recording.samples, columns=columns)
    frame.insert(0, TIME_COLUMN, recording.timestamps)
    frame.to_csv(path, index=False, encoding='utf-8')
