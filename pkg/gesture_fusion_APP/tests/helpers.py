"""
Shared builders for the test suite.
Location: gesture_fusion_APP/tests/helpers.py
"""
from typing import Sequence

import numpy as np

from ..ai.synthetic import synthetic_session_streams
from ..sensors.types import (
    EmgRecording, EventArray, GestureAnnotation, SensorGeometry, Session, SessionManifest, SyncWindow,
)


def in_memory_session(annotations: Sequence[GestureAnnotation], events: EventArray = None,
                      emg: EmgRecording = None, kind: str = 'DVS128', subject_id: str = 's01') -> Session:
    manifest = SessionManifest(
        subject_id=subject_id, session_id='1', annotations=tuple(annotations),
        events_file='events.aedat', emg_file='emg.csv',
    )
    if emg is None:
        emg = EmgRecording(sample_rate=200.0, channel_count=8, samples=[], t0=0, timestamps=[])
    return Session(
        manifest=manifest,
        geometry=SensorGeometry.for_kind(kind),
        events=events if events is not None else EventArray.empty(),
        emg=emg,
    )


def emg_window(samples: np.ndarray, n: int = 0) -> SyncWindow:
    return SyncWindow(n=n, t_start=0, t_end=200_000, emg_samples=np.asarray(samples, dtype=np.float64),
                      events=EventArray.empty())


def event_window(x: Sequence[int], y: Sequence[int], polarity: Sequence[int] = None, n: int = 0) -> SyncWindow:
    count = len(x)
    polarity = polarity if polarity is not None else [1] * count
    events = EventArray(x, y, np.arange(count), polarity)
    return SyncWindow(n=n, t_start=0, t_end=200_000, emg_samples=np.zeros((40, 8)), events=events)


def random_events(rng: np.random.Generator, count: int, geometry: SensorGeometry,
                  t_max: int = 1_000_000) -> EventArray:
    return EventArray(
        rng.integers(0, geometry.width, count),
        rng.integers(0, geometry.height, count),
        np.sort(rng.integers(0, t_max, count)),
        rng.integers(0, 2, count),
    )


def synthetic_session(gestures: int = 25, seed: int = 0, with_emg: bool = True) -> Session:
    """Scripted DVS128 session held in memory; without EMG every window lacks samples"""
    geometry, events, emg, annotations, aps_frames = synthetic_session_streams(gestures=gestures, seed=seed)
    if not with_emg:
        return in_memory_session(annotations, events=events)
    manifest = SessionManifest(subject_id='s01', session_id='1', annotations=tuple(annotations),
                               events_file='', emg_file='')
    return Session(manifest=manifest, geometry=geometry, events=events, emg=emg, aps_frames=tuple(aps_frames))
