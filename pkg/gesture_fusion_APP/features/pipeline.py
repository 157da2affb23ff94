"""
Per-window feature pipeline shared by offline dataset assembly and the replay runtime.
Location: gesture_fusion_APP/features/pipeline.py
"""
import logging
from dataclasses import replace
from typing import Optional, Tuple

import numpy as np

from ..ai.fusion import Modality, concat_features, check_modality_geometry
from ..conf import get_setting
from ..sensors.types import SensorGeometry, SyncWindow
from .emg_features import EmgFeatureVector, emg_feature_vector
from .vision_features import (
    HogDescriptor, HogParameters, Patch, accumulate_event_frame, average_aps, extract_patch, hog,
    locate_hand, minmax_normalize, subsample,
)

logger = logging.getLogger(__name__)


class WindowFeatureExtractor:
    """Turns SyncWindows into SVM feature vectors and CNN input tensors.

    DVS frames give a 60x60 patch directly. DAVIS frames (events or averaged
    APS) give a 120x120 patch that is subsampled to 60x60; the APS patch is
    centered on the hand located in the DAVIS event frame of the same window.
    """

    def __init__(self, geometry: SensorGeometry, hog_params: Optional[HogParameters] = None,
                 patch_side: Optional[int] = None, davis_patch_side: Optional[int] = None):
        self.geometry = geometry
        self.hog_params = hog_params or HogParameters.from_settings()
        self.patch_side = patch_side or get_setting('PATCH_SIDE', 60)
        self.davis_patch_side = davis_patch_side or get_setting('DAVIS_PATCH_SIDE', 120)

    def supports(self, modality: Modality) -> bool:
        return modality.supported_by(self.geometry.kind)

    def emg_vector(self, window: SyncWindow) -> EmgFeatureVector:
        return emg_feature_vector(window)

    def vision_patch(self, window: SyncWindow, modality: Modality) -> Patch:
        """60x60 patch of the vision part of a modality"""
        vision = modality.vision
        check_modality_geometry(modality, self.geometry)

        frame = minmax_normalize(accumulate_event_frame(window, self.geometry))
        center = locate_hand(frame)
        if vision is Modality.DVS:
            return extract_patch(frame.gray, center, self.patch_side)
        if vision is Modality.DAV:
            return subsample(extract_patch(frame.gray, center, self.davis_patch_side))
        # FRM: intensity image, hand position from the events of the same window
        return subsample(extract_patch(average_aps(window), center, self.davis_patch_side))

    def hog_vector(self, window: SyncWindow, modality: Modality) -> HogDescriptor:
        descriptor = hog(self.vision_patch(window, modality), self.hog_params)
        return replace(descriptor, n=window.n)

    def svm_features(self, window: SyncWindow, modality: Modality) -> np.ndarray:
        """EMG vector, HOG descriptor or their concatenation"""
        if modality is Modality.EMG:
            return np.array(self.emg_vector(window).values)
        descriptor = self.hog_vector(window, modality)
        if not modality.is_fusion:
            return np.array(descriptor.values)
        return concat_features(self.emg_vector(window), descriptor).values

    def cnn_inputs(self, window: SyncWindow, modality: Modality) -> Tuple[Optional[np.ndarray], Optional[np.ndarray]]:
        """(EMG signal 1x2C, vision image 1x60x60); the part a modality lacks is None"""
        emg_input = None
        vision_input = None
        if modality.uses_emg:
            emg_input = np.asarray(self.emg_vector(window).values, dtype=np.float64)[np.newaxis, :]
        if modality.vision is not None:
            vision_input = self.vision_patch(window, modality).pixels[np.newaxis, :, :]
        return emg_input, vision_input
