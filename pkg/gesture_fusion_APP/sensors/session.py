"""
Session manifests, session loading and synchronized window slicing.
Location: gesture_fusion_APP/sensors/session.py
"""
import json
import logging
from pathlib import Path
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

from ..exceptions import InvalidAnnotation, InvalidConfiguration, MissingFile, OverlappingAnnotations, SensorDataError
from .aedat import parse_aedat, write_aedat
from .aps import load_aps_frames, write_aps_frames
from .emg_csv import read_emg_csv, write_emg_csv
from .types import (
    ApsFrame, EmgRecording, EventArray, GestureAnnotation, SensorGeometry, Session,
    SessionManifest, SyncWindow,
)

logger = logging.getLogger(__name__)


def window_length_us(T_ms: float) -> int:
    if T_ms is None or T_ms <= 0:
        raise InvalidConfiguration(f"Window length must be positive, got {T_ms} ms")
    return int(round(T_ms * 1000))


def _validate_annotations(annotations: Sequence[GestureAnnotation]) -> Tuple[GestureAnnotation, ...]:
    ordered = sorted(annotations, key=lambda a: (a.start_us, a.end_us))
    for previous, current in zip(ordered, ordered[1:]):
        if current.start_us < previous.end_us:
            raise OverlappingAnnotations(
                f"'{previous.label}' [{previous.start_us}, {previous.end_us}) overlaps "
                f"'{current.label}' [{current.start_us}, {current.end_us})"
            )
    return tuple(ordered)


def parse_manifest(document: Dict) -> SessionManifest:
    """Build a manifest from its JSON document"""
    try:
        annotations = [
            GestureAnnotation(label=str(item['label']), start_us=int(item['start_us']), end_us=int(item['end_us']))
            for item in document.get('annotations', [])
        ]
        return SessionManifest(
            subject_id=str(document['subject']),
            session_id=str(document['session']),
            annotations=_validate_annotations(annotations),
            events_file=str(document['events_file']),
            emg_file=str(document['emg_file']),
            aps_dir=document.get('aps_dir'),
        )
    except KeyError as e:
        raise InvalidAnnotation(f"Session manifest is missing field {str(e)}")
    except (TypeError, ValueError) as e:
        raise InvalidAnnotation(f"Session manifest has an invalid value: {str(e)}")


def manifest_document(manifest: SessionManifest) -> Dict:
    document = {
        'subject': manifest.subject_id,
        'session': manifest.session_id,
        'events_file': manifest.events_file,
        'emg_file': manifest.emg_file,
        'annotations': [
            {'label': a.label, 'start_us': a.start_us, 'end_us': a.end_us}
            for a in manifest.annotations
        ],
    }
    if manifest.aps_dir:
        document['aps_dir'] = manifest.aps_dir
    return document


def _resolve(base: Path, name: str) -> Path:
    path = Path(name)
    return path if path.is_absolute() else base / path


def load_session(manifest_path: Union[str, Path]) -> Session:
    """Open a session manifest and the three streams it references"""
    manifest_path = Path(manifest_path)
    if not manifest_path.exists():
        raise MissingFile(f"Session manifest not found: {manifest_path}")

    try:
        document = json.loads(manifest_path.read_text(encoding='utf-8'))
    except json.JSONDecodeError as e:
        raise SensorDataError(f"{manifest_path.name} is not valid JSON: {str(e)}")
    manifest = parse_manifest(document)

    base = manifest_path.parent
    events_path = _resolve(base, manifest.events_file)
    emg_path = _resolve(base, manifest.emg_file)
    for path in (events_path, emg_path):
        if not path.exists():
            raise MissingFile(f"{manifest_path.name} references a missing file: {path}")

    geometry, events = parse_aedat(events_path)
    emg = read_emg_csv(emg_path)
    aps_frames = load_aps_frames(_resolve(base, manifest.aps_dir)) if manifest.aps_dir else ()

    # camera zero-timestamp restarts at every session; all streams share that clock
    if len(emg) and emg.timestamps[0] < 0:
        raise SensorDataError(f"{emg_path.name}: EMG clock starts before the session origin")

    session = Session(manifest=manifest, geometry=geometry, events=events, emg=emg, aps_frames=aps_frames)
    logger.info(
        f"Loaded session {manifest.subject_id}/{manifest.session_id}: {len(events)} events, "
        f"{len(emg)} EMG samples, {len(aps_frames)} APS frames, "
        f"{len(manifest.annotations)} annotations"
    )
    return session


def write_session(directory: Union[str, Path], subject_id: str, session_id: str,
                  geometry: SensorGeometry, events: EventArray, emg: EmgRecording,
                  annotations: Sequence[GestureAnnotation],
                  aps_frames: Sequence[ApsFrame] = ()) -> Path:
    """Write a session in the canonical on-disk layout and return the manifest path"""
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)

    write_aedat(geometry, events, directory / 'events.aedat')
    write_emg_csv(emg, directory / 'emg.csv')
    aps_dir = None
    if aps_frames:
        aps_dir = 'aps'
        write_aps_frames(directory / aps_dir, aps_frames)

    manifest = SessionManifest(
        subject_id=str(subject_id),
        session_id=str(session_id),
        annotations=_validate_annotations(annotations),
        events_file='events.aedat',
        emg_file='emg.csv',
        aps_dir=aps_dir,
    )
    manifest_path = directory / 'session.json'
    manifest_path.write_text(json.dumps(manifest_document(manifest), indent=2), encoding='utf-8')
    return manifest_path


def _make_window(session: Session, n: int, t_start: int, t_end: int, label: Optional[str],
                 position: int) -> SyncWindow:
    return SyncWindow(
        n=n,
        t_start=t_start,
        t_end=t_end,
        emg_samples=session.emg.between(t_start, t_end),
        events=session.events.between(t_start, t_end),
        aps_frames=tuple(f for f in session.aps_frames if t_start <= f.t < t_end),
        label=label,
        position=position,
        subject_id=session.subject_id,
    )


def window_slices(session: Session, T_ms: float) -> List[SyncWindow]:
    """Tile every labeled gesture interval with T-ms windows from its start.

    A trailing partial window is discarded and rest periods yield nothing.
    Window indices run across the whole session.
    """
    length = window_length_us(T_ms)
    windows = []
    n = 0
    for annotation in session.annotations:
        for position in range(annotation.duration_us // length):
            t_start = annotation.start_us + position * length
            windows.append(_make_window(session, n, t_start, t_start + length, annotation.label, position))
            n += 1
    return windows


def stream_windows(session: Session, T_ms: float) -> List[SyncWindow]:
    """Unlabeled contiguous windows from t=0 over the whole event stream"""
    length = window_length_us(T_ms)
    count = (session.events.last_timestamp + 1) // length if len(session.events) else 0
    return [
        _make_window(session, n, n * length, (n + 1) * length, None, n)
        for n in range(count)
    ]


def session_from_events(geometry: SensorGeometry, events: EventArray, channel_count: int = 8) -> Session:
    """Wrap a bare event stream (no EMG, no annotations) as a session"""
    manifest = SessionManifest(
        subject_id='unknown', session_id='events-only', annotations=(),
        events_file='', emg_file='',
    )
    emg = EmgRecording(sample_rate=200.0, channel_count=channel_count, samples=[], t0=0, timestamps=[])
    return Session(manifest=manifest, geometry=geometry, events=events, emg=emg)


def discover_manifests(root: Union[str, Path]) -> List[Path]:
    """All session manifests below a data directory"""
    root = Path(root)
    if root.is_file():
        return [root]
    if not root.is_dir():
        raise MissingFile(f"Data directory not found: {root}")
    manifests = []
    for path in sorted(root.rglob('*.json')):
        try:
            document = json.loads(path.read_text(encoding='utf-8'))
        except (json.JSONDecodeError, UnicodeDecodeError):
            continue
        if isinstance(document, dict) and 'events_file' in document and 'annotations' in document:
            manifests.append(path)
    return manifests


def load_sessions(root: Union[str, Path]) -> List[Session]:
    return [load_session(path) for path in discover_manifests(root)]
