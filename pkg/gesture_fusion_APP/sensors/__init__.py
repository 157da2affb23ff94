from .types import (
    GESTURES, ApsFrame, DvsEvent, EmgRecording, EventArray, GestureAnnotation, Polarity,
    SensorGeometry, SensorKind, Session, SessionManifest, SyncWindow, gesture_index,
)
from .aedat import parse_aedat, write_aedat
from .emg_csv import read_emg_csv, write_emg_csv
from .aps import load_aps_frames, write_aps_frames
from .session import (
    discover_manifests, load_session, load_sessions, session_from_events, stream_windows,
    window_slices, write_session,
)

__all__ = [
    'GESTURES',
    'ApsFrame',
    'DvsEvent',
    'EmgRecording',
    'EventArray',
    'GestureAnnotation',
    'Polarity',
    'SensorGeometry',
    'SensorKind',
    'Session',
    'SessionManifest',
    'SyncWindow',
    'gesture_index',
    'parse_aedat',
    'write_aedat',
    'read_emg_csv',
    'write_emg_csv',
    'load_aps_frames',
    'write_aps_frames',
    'discover_manifests',
    'load_session',
    'load_sessions',
    'session_from_events',
    'stream_windows',
    'window_slices',
    'write_session',
]
