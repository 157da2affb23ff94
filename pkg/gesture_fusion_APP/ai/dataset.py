"""
Labeled per-window dataset assembly for training and evaluation.
Location: gesture_fusion_APP/ai/dataset.py
"""
import logging
from dataclasses import dataclass, field
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np

from ..exceptions import EmptyDataset, FeatureError, ModelModalityMismatch
from ..features.pipeline import WindowFeatureExtractor
from ..features.vision_features import HogParameters, Patch, hog
from ..sensors.session import window_slices
from ..sensors.types import Session
from .fusion import Modality
from .synthetic import PairedDataset

logger = logging.getLogger(__name__)

VISION_MODALITIES = (Modality.DVS, Modality.DAV, Modality.FRM)


@dataclass(eq=False)
class GestureDataset:
    """EMG vectors, 60x60 patches and HOG descriptors of every labeled window.

    Patches and HOGs are keyed by vision modality (DVS, DAV, FRM); fusion
    modalities combine them with the EMG block on demand.
    """
    T_ms: float
    labels: np.ndarray
    subjects: np.ndarray
    emg: np.ndarray
    patches: Dict[Modality, np.ndarray] = field(default_factory=dict)
    hogs: Dict[Modality, np.ndarray] = field(default_factory=dict)
    window_ids: List[Tuple[str, int]] = field(default_factory=list)

    def __len__(self) -> int:
        return len(self.labels)

    @property
    def modalities(self) -> List[Modality]:
        return [
            modality for modality in Modality
            if modality.vision is None or modality.vision in self.patches
        ]

    def require(self, modality: Modality):
        if modality not in self.modalities:
            raise ModelModalityMismatch(
                f"Dataset has no {modality.value} data; available: {', '.join(m.value for m in self.modalities)}"
            )
        if len(self) == 0:
            raise EmptyDataset("Dataset holds no labeled windows")

    def svm_features(self, modality: Modality) -> np.ndarray:
        self.require(modality)
        if modality is Modality.EMG:
            return self.emg
        if not modality.is_fusion:
            return self.hogs[modality.vision]
        return np.concatenate([self.emg, self.hogs[modality.vision]], axis=1)

    def cnn_inputs(self, modality: Modality) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        """(N, 1, 2C) EMG and (N, 1, 60, 60) vision inputs; the unused part is None"""
        self.require(modality)
        emg_inputs = self.emg[:, np.newaxis, :] if modality.uses_emg else None
        vision_inputs = self.patches[modality.vision][:, np.newaxis] if modality.vision is not None else None
        return emg_inputs, vision_inputs

    @classmethod
    def from_synthetic(cls, paired: PairedDataset, hog_params: Optional[HogParameters] = None,
                       vision: Modality = Modality.DVS) -> 'GestureDataset':
        """Wrap a paired synthetic set: images act as the patches of one vision modality"""
        hog_params = hog_params or HogParameters.from_settings()
        hogs = np.stack([
            hog(Patch(side=image.shape[0], pixels=image, source_center=(0, 0)), hog_params).values
            for image in paired.images
        ])
        return cls(
            T_ms=0.0,
            labels=np.asarray(paired.labels, dtype=np.int64),
            subjects=np.array(['synthetic'] * len(paired)),
            emg=np.asarray(paired.emg, dtype=np.float64),
            patches={vision: np.asarray(paired.images, dtype=np.float64)},
            hogs={vision: hogs},
            window_ids=[('synthetic', i) for i in range(len(paired))],
        )


def build_dataset(sessions: Iterable[Session], T_ms: float,
                  modalities: Optional[Sequence[Modality]] = None,
                  hog_params: Optional[HogParameters] = None) -> GestureDataset:
    """Extract features of every labeled window of every session.

    Only vision modalities supported by all sessions' sensors are computed;
    requesting an unsupported one raises ModelModalityMismatch. Windows whose
    features cannot be computed (no EMG samples, no APS frame) are skipped.
    """
    sessions = list(sessions)
    if not sessions:
        raise EmptyDataset("No sessions to build a dataset from")

    supported = [
        vision for vision in VISION_MODALITIES
        if all(vision.supported_by(session.geometry.kind) for session in sessions)
    ]
    if modalities is not None:
        requested = {modality.vision for modality in modalities if modality.vision is not None}
        missing = requested - set(supported)
        if missing:
            raise ModelModalityMismatch(
                f"Sessions cannot provide {', '.join(sorted(m.value for m in missing))}"
            )
        supported = [vision for vision in supported if vision in requested]

    labels, subjects, emg, window_ids = [], [], [], []
    patches = {vision: [] for vision in supported}
    skipped = 0
    for session in sessions:
        extractor = WindowFeatureExtractor(session.geometry, hog_params=hog_params)
        for window in window_slices(session, T_ms):
            try:
                emg_vector = extractor.emg_vector(window).values
                window_patches = {vision: extractor.vision_patch(window, vision).pixels for vision in supported}
            except FeatureError as e:
                logger.warning(f"Skipping window {window.n} of {session.subject_id}/{session.manifest.session_id}: {str(e)}")
                skipped += 1
                continue
            labels.append(window.label_index)
            subjects.append(session.subject_id)
            emg.append(emg_vector)
            window_ids.append((f'{session.subject_id}/{session.manifest.session_id}', window.n))
            for vision, pixels in window_patches.items():
                patches[vision].append(pixels)

    if not labels:
        raise EmptyDataset(f"No labeled {T_ms} ms windows in {len(sessions)} session(s)")

    extractor_params = hog_params or HogParameters.from_settings()
    stacked = {vision: np.stack(values) for vision, values in patches.items()}
    hogs = {
        vision: np.stack([
            hog(Patch(side=pixels.shape[0], pixels=pixels, source_center=(0, 0)), extractor_params).values
            for pixels in values
        ])
        for vision, values in stacked.items()
    }
    logger.info(
        f"Built dataset of {len(labels)} windows at T={T_ms} ms from {len(sessions)} session(s) "
        f"({skipped} skipped), vision modalities: {[v.value for v in supported]}"
    )
    return GestureDataset(
        T_ms=T_ms,
        labels=np.asarray(labels, dtype=np.int64),
        subjects=np.asarray(subjects),
        emg=np.asarray(emg, dtype=np.float64),
        patches=stacked,
        hogs=hogs,
        window_ids=window_ids,
    )
