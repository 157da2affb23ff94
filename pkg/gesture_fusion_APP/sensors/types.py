"""
Domain types for the recorded sensor streams.
This module defines events, EMG recordings, APS frames, sessions and synchronized windows.
Location: gesture_fusion_APP/sensors/types.py
"""
from dataclasses import dataclass
from enum import Enum, IntEnum
from typing import Iterator, Optional, Sequence, Tuple, Union

import numpy as np

from ..exceptions import InvalidAnnotation, SensorDataError

GESTURES: Tuple[str, ...] = ('pinky', 'elle', 'yo', 'index', 'thumb')


def gesture_index(label: str) -> int:
    """Class index of a gesture label"""
    try:
        return GESTURES.index(label)
    except ValueError:
        raise InvalidAnnotation(f"Unknown gesture label '{label}', expected one of {GESTURES}")


def _frozen(array: np.ndarray) -> np.ndarray:
    array.setflags(write=False)
    return array


class Polarity(IntEnum):
    OFF = 0
    ON = 1


class SensorKind(str, Enum):
    DVS128 = 'DVS128'
    DAVIS240 = 'DAVIS240'


@dataclass(frozen=True)
class SensorGeometry:
    """Pixel array of an event camera"""
    width: int
    height: int
    kind: SensorKind

    SIZES = {
        SensorKind.DVS128: (128, 128),
        SensorKind.DAVIS240: (240, 180),
    }

    @classmethod
    def for_kind(cls, kind: Union[str, SensorKind]) -> 'SensorGeometry':
        try:
            kind = SensorKind(kind)
        except ValueError:
            raise SensorDataError(f"Unknown chip '{kind}', expected DVS128 or DAVIS240")
        width, height = cls.SIZES[kind]
        return cls(width=width, height=height, kind=kind)

    @property
    def center(self) -> Tuple[int, int]:
        return self.width // 2, self.height // 2


@dataclass(frozen=True)
class DvsEvent:
    """One address-event: pixel column/row, microsecond timestamp and polarity"""
    x: int
    y: int
    t: int
    polarity: Polarity


class EventArray:
    """Immutable, time-ordered column store of DVS events.

    Iterating yields DvsEvent values; slicing and time-range queries return
    new EventArray views without copying the columns.
    """

    def __init__(self, x: Sequence[int], y: Sequence[int], t: Sequence[int],
                 polarity: Sequence[int]):
        self.x = _frozen(np.asarray(x, dtype=np.int64).reshape(-1))
        self.y = _frozen(np.asarray(y, dtype=np.int64).reshape(-1))
        self.t = _frozen(np.asarray(t, dtype=np.int64).reshape(-1))
        self.polarity = _frozen(np.asarray(polarity, dtype=np.int8).reshape(-1))
        sizes = {len(self.x), len(self.y), len(self.t), len(self.polarity)}
        if len(sizes) != 1:
            raise SensorDataError(f"Event columns have different lengths: {sorted(sizes)}")

    @classmethod
    def empty(cls) -> 'EventArray':
        return cls([], [], [], [])

    @classmethod
    def from_events(cls, events: Sequence[DvsEvent]) -> 'EventArray':
        events = list(events)
        return cls(
            [e.x for e in events],
            [e.y for e in events],
            [e.t for e in events],
            [int(e.polarity) for e in events],
        )

    def __len__(self) -> int:
        return len(self.t)

    def __iter__(self) -> Iterator[DvsEvent]:
        for x, y, t, p in zip(self.x.tolist(), self.y.tolist(), self.t.tolist(), self.polarity.tolist()):
            yield DvsEvent(x=x, y=y, t=t, polarity=Polarity(p))

    def __getitem__(self, item):
        if isinstance(item, slice):
            return EventArray(self.x[item], self.y[item], self.t[item], self.polarity[item])
        return DvsEvent(
            x=int(self.x[item]), y=int(self.y[item]), t=int(self.t[item]),
            polarity=Polarity(int(self.polarity[item])),
        )

    def __eq__(self, other) -> bool:
        if not isinstance(other, EventArray):
            return NotImplemented
        return (
            np.array_equal(self.x, other.x) and np.array_equal(self.y, other.y)
            and np.array_equal(self.t, other.t) and np.array_equal(self.polarity, other.polarity)
        )

    def __repr__(self) -> str:
        return f"EventArray(n={len(self)})"

    def between(self, t_start: int, t_end: int) -> 'EventArray':
        """Events with t_start <= t < t_end"""
        lo = int(np.searchsorted(self.t, t_start, side='left'))
        hi = int(np.searchsorted(self.t, t_end, side='left'))
        return self[lo:hi]

    @property
    def last_timestamp(self) -> int:
        return int(self.t[-1]) if len(self) else 0


@dataclass(frozen=True, eq=False)
class EmgRecording:
    """Multi-channel EMG recording on the session clock.

    samples has shape (N, C); timestamps holds the session-relative
    microsecond time of every sample row.
    """
    sample_rate: float
    channel_count: int
    samples: np.ndarray
    t0: int
    timestamps: np.ndarray

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64)
        if samples.ndim == 1 and samples.size == 0:
            samples = samples.reshape(0, self.channel_count)
        if samples.ndim != 2 or samples.shape[1] != self.channel_count:
            raise SensorDataError(
                f"EMG samples must have shape (N, {self.channel_count}), got {samples.shape}"
            )
        timestamps = np.asarray(self.timestamps, dtype=np.int64).reshape(-1)
        if len(timestamps) != len(samples):
            raise SensorDataError("EMG timestamps and samples differ in length")
        if self.sample_rate <= 0:
            raise SensorDataError(f"EMG sample rate must be positive, got {self.sample_rate}")
        object.__setattr__(self, 'samples', _frozen(samples))
        object.__setattr__(self, 'timestamps', _frozen(timestamps))

    def __len__(self) -> int:
        return len(self.samples)

    def between(self, t_start: int, t_end: int) -> np.ndarray:
        """Sample rows with t_start <= t < t_end"""
        lo = int(np.searchsorted(self.timestamps, t_start, side='left'))
        hi = int(np.searchsorted(self.timestamps, t_end, side='left'))
        return self.samples[lo:hi]


@dataclass(frozen=True, eq=False)
class ApsFrame:
    """Grayscale active-pixel frame with intensities in [0, 1]"""
    width: int
    height: int
    pixels: np.ndarray
    t: int

    def __post_init__(self):
        pixels = np.asarray(self.pixels, dtype=np.float64)
        if pixels.shape != (self.height, self.width):
            raise SensorDataError(
                f"APS frame must be {self.height}x{self.width}, got {pixels.shape}"
            )
        if pixels.size and (pixels.min() < 0.0 or pixels.max() > 1.0):
            raise SensorDataError("APS intensities must lie in [0, 1]")
        object.__setattr__(self, 'pixels', _frozen(pixels))


@dataclass(frozen=True)
class GestureAnnotation:
    label: str
    start_us: int
    end_us: int

    def __post_init__(self):
        gesture_index(self.label)
        if self.end_us <= self.start_us:
            raise InvalidAnnotation(
                f"Annotation '{self.label}' ends at {self.end_us} before it starts at {self.start_us}"
            )

    @property
    def label_index(self) -> int:
        return gesture_index(self.label)

    @property
    def duration_us(self) -> int:
        return self.end_us - self.start_us


@dataclass(frozen=True)
class SessionManifest:
    subject_id: str
    session_id: str
    annotations: Tuple[GestureAnnotation, ...]
    events_file: str
    emg_file: str
    aps_dir: Optional[str] = None


@dataclass(frozen=True, eq=False)
class Session:
    """Manifest plus the opened streams, all on one session clock"""
    manifest: SessionManifest
    geometry: SensorGeometry
    events: EventArray
    emg: EmgRecording
    aps_frames: Tuple[ApsFrame, ...] = ()

    @property
    def subject_id(self) -> str:
        return self.manifest.subject_id

    @property
    def annotations(self) -> Tuple[GestureAnnotation, ...]:
        return self.manifest.annotations


@dataclass(frozen=True, eq=False)
class SyncWindow:
    """One T-ms window pairing EMG samples, events and APS frames.

    n is the session-wide window index; position is the index of the window
    inside its gesture interval.
    """
    n: int
    t_start: int
    t_end: int
    emg_samples: np.ndarray
    events: EventArray
    aps_frames: Tuple[ApsFrame, ...] = ()
    label: Optional[str] = None
    position: int = 0
    subject_id: Optional[str] = None

    @property
    def length_us(self) -> int:
        return self.t_end - self.t_start

    @property
    def label_index(self) -> Optional[int]:
        return gesture_index(self.label) if self.label is not None else None
