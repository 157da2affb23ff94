"""
Synthetic data generators.
make_complementary_synthetic builds paired EMG / image samples in which each
modality alone confuses one pair of classes while the pair is always
separable; make_synthetic_session writes a complete recording session to disk.
Location: gesture_fusion_APP/ai/synthetic.py
"""
import logging
from dataclasses import dataclass
from pathlib import Path
from typing import List, Optional, Tuple, Union

import numpy as np

from ..exceptions import InvalidConfiguration
from ..sensors.session import write_session
from ..sensors.types import (
    GESTURES, ApsFrame, EmgRecording, EventArray, GestureAnnotation, SensorGeometry, SensorKind,
)

logger = logging.getLogger(__name__)

CLASS_COUNT = len(GESTURES)
EMG_LENGTH = 16
IMAGE_SIDE = 60
BLOB_SIGMA = 5.0
EMG_LEVEL = 3.0

# Half of the samples of classes 0 and 1 share one EMG pattern; half of the
# samples of classes 3 and 4 share one blob position. The other modality
# always tells the pair apart.
EMG_CONFUSABLE = (0, 1)
VISION_CONFUSABLE = (3, 4)
BLOB_POSITIONS = ((12, 12), (30, 12), (48, 12), (12, 48), (48, 48))
SHARED_BLOB_POSITION = (30, 48)


@dataclass(frozen=True, eq=False)
class PairedDataset:
    emg: np.ndarray
    images: np.ndarray
    labels: np.ndarray

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def emg_inputs(self) -> np.ndarray:
        """(N, 1, 16) EMG CNN inputs"""
        return self.emg[:, np.newaxis, :]

    @property
    def vision_inputs(self) -> np.ndarray:
        """(N, 1, 60, 60) vision CNN inputs"""
        return self.images[:, np.newaxis, :, :]


def emg_prototype(label: int) -> np.ndarray:
    """Level EMG_LEVEL on the three features owned by the class"""
    prototype = np.zeros(EMG_LENGTH)
    prototype[3 * label:3 * label + 3] = EMG_LEVEL
    return prototype


def shared_emg_prototype() -> np.ndarray:
    return np.mean([emg_prototype(label) for label in EMG_CONFUSABLE], axis=0)


def blob_image(center: Tuple[int, int], side: int = IMAGE_SIDE, sigma: float = BLOB_SIGMA) -> np.ndarray:
    rows, cols = np.indices((side, side))
    cx, cy = center
    return np.exp(-((cols - cx) ** 2 + (rows - cy) ** 2) / (2.0 * sigma ** 2))


def make_complementary_synthetic(n_per_class: int, noise: float = 0.0, seed: int = 0) -> PairedDataset:
    """5-class paired samples; with noise=0 each modality alone is at best 90% accurate and the pair 100%"""
    if n_per_class < 20:
        raise InvalidConfiguration(f"n_per_class must be at least 20, got {n_per_class}")
    rng = np.random.default_rng(seed)
    labels = np.repeat(np.arange(CLASS_COUNT), n_per_class)
    ambiguous = np.tile(np.arange(n_per_class) < n_per_class // 2, CLASS_COUNT)

    shared_emg = shared_emg_prototype()
    shared_blob = blob_image(SHARED_BLOB_POSITION)
    prototypes = np.stack([
        shared_emg if (is_ambiguous and label in EMG_CONFUSABLE) else emg_prototype(label)
        for label, is_ambiguous in zip(labels, ambiguous)
    ])
    blobs = np.stack([
        shared_blob if (is_ambiguous and label in VISION_CONFUSABLE) else blob_image(BLOB_POSITIONS[label])
        for label, is_ambiguous in zip(labels, ambiguous)
    ])

    emg = prototypes + noise * rng.standard_normal(prototypes.shape)
    images = np.clip(blobs + noise * rng.standard_normal(blobs.shape), 0.0, 1.0)
    return PairedDataset(emg=emg, images=images, labels=labels)


# Recording sessions

SESSION_GESTURE_US = 2_000_000
SESSION_REST_US = 1_000_000
SESSION_LEAD_US = 500_000
EVENT_RATE_HZ = 4000.0
REST_EVENT_RATE_HZ = 100.0
APS_PERIOD_US = 100_000


def _gesture_shape_events(rng: np.random.Generator, label: int, count: int,
                          geometry: SensorGeometry) -> Tuple[np.ndarray, np.ndarray]:
    """Pixels of an elongated hand silhouette whose orientation encodes the gesture"""
    angle = np.pi * label / CLASS_COUNT
    major = rng.normal(0.0, 12.0, count)
    minor = rng.normal(0.0, 3.0, count)
    cx, cy = geometry.center
    cx += int(rng.integers(-10, 11))
    cy += int(rng.integers(-10, 11))
    x = np.rint(cx + major * np.cos(angle) - minor * np.sin(angle)).astype(np.int64)
    y = np.rint(cy + major * np.sin(angle) + minor * np.cos(angle)).astype(np.int64)
    return np.clip(x, 0, geometry.width - 1), np.clip(y, 0, geometry.height - 1)


def _emg_pattern(label: int, channels: int) -> np.ndarray:
    """Per-channel activation amplitude of a gesture"""
    amplitude = np.full(channels, 4.0)
    amplitude[label % channels] = 60.0
    amplitude[(label + 3) % channels] = 30.0
    return amplitude


def synthetic_session_streams(kind: Union[str, SensorKind] = SensorKind.DVS128, gestures: int = 25,
                              seed: int = 0, emg_rate_hz: float = 200.0, emg_channels: int = 8,
                              with_aps: Optional[bool] = None):
    """Events, EMG, annotations and optional APS frames of a scripted session"""
    geometry = SensorGeometry.for_kind(kind)
    rng = np.random.default_rng(seed)
    with_aps = geometry.kind is SensorKind.DAVIS240 if with_aps is None else with_aps

    annotations: List[GestureAnnotation] = []
    x_parts, y_parts, t_parts = [], [], []
    for index in range(gestures):
        label = index % CLASS_COUNT
        start = SESSION_LEAD_US + index * (SESSION_GESTURE_US + SESSION_REST_US)
        end = start + SESSION_GESTURE_US
        annotations.append(GestureAnnotation(label=GESTURES[label], start_us=start, end_us=end))

        count = int(EVENT_RATE_HZ * SESSION_GESTURE_US / 1e6)
        x, y = _gesture_shape_events(rng, label, count, geometry)
        x_parts.append(x)
        y_parts.append(y)
        t_parts.append(rng.integers(start, end, count))

    duration = SESSION_LEAD_US + gestures * (SESSION_GESTURE_US + SESSION_REST_US)
    rest_count = int(REST_EVENT_RATE_HZ * duration / 1e6)
    x_parts.append(rng.integers(0, geometry.width, rest_count))
    y_parts.append(rng.integers(0, geometry.height, rest_count))
    t_parts.append(rng.integers(0, duration, rest_count))

    t = np.concatenate(t_parts)
    order = np.argsort(t, kind='stable')
    events = EventArray(
        np.concatenate(x_parts)[order],
        np.concatenate(y_parts)[order],
        t[order],
        rng.integers(0, 2, len(t))[order],
    )

    period_us = int(round(1e6 / emg_rate_hz))
    timestamps = np.arange(0, duration, period_us, dtype=np.int64)
    amplitude = np.full((len(timestamps), emg_channels), 2.0)
    for annotation in annotations:
        active = (timestamps >= annotation.start_us) & (timestamps < annotation.end_us)
        amplitude[active] = _emg_pattern(annotation.label_index, emg_channels)
    samples = np.clip(np.rint(rng.normal(0.0, 1.0, amplitude.shape) * amplitude), -128, 127)
    emg = EmgRecording(sample_rate=emg_rate_hz, channel_count=emg_channels, samples=samples,
                       t0=0, timestamps=timestamps)

    aps_frames = []
    if with_aps:
        rows, cols = np.indices((geometry.height, geometry.width))
        for frame_t in range(0, duration, APS_PERIOD_US):
            pixels = np.full((geometry.height, geometry.width), 0.2)
            for annotation in annotations:
                if annotation.start_us <= frame_t < annotation.end_us:
                    angle = np.pi * annotation.label_index / CLASS_COUNT
                    cx, cy = geometry.center
                    u = (cols - cx) * np.cos(angle) + (rows - cy) * np.sin(angle)
                    v = -(cols - cx) * np.sin(angle) + (rows - cy) * np.cos(angle)
                    pixels = pixels + 0.7 * np.exp(-(u / 24.0) ** 2 - (v / 6.0) ** 2)
            aps_frames.append(ApsFrame(width=geometry.width, height=geometry.height,
                                       pixels=np.clip(pixels, 0.0, 1.0), t=frame_t))
    return geometry, events, emg, annotations, aps_frames


def make_synthetic_session(directory: Union[str, Path], subject_id: str = 's01', session_id: str = '1',
                           kind: Union[str, SensorKind] = SensorKind.DVS128, gestures: int = 25,
                           seed: int = 0, with_aps: Optional[bool] = None) -> Path:
    """Write a scripted session (gestures of 2 s separated by 1 s of rest) and return its manifest"""
    geometry, events, emg, annotations, aps_frames = synthetic_session_streams(
        kind=kind, gestures=gestures, seed=seed, with_aps=with_aps,
    )
    manifest_path = write_session(
        directory, subject_id, session_id, geometry, events, emg, annotations, aps_frames,
    )
    logger.info(
        f"Wrote synthetic {geometry.kind.value} session with {gestures} gestures, "
        f"{len(events)} events to {manifest_path}"
    )
    return manifest_path
