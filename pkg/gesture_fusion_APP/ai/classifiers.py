"""
Window classifiers used by the replay runtime, the benchmark and the offline
prediction path. Every classifier predicts one SyncWindow at a time through
the shared WindowFeatureExtractor.
Location: gesture_fusion_APP/ai/classifiers.py
"""
import json
import logging
from abc import ABC, abstractmethod
from pathlib import Path
from typing import Dict, Optional, Tuple, Union

import numpy as np

from ..exceptions import ModelFormatError, ModelModalityMismatch
from ..features.pipeline import WindowFeatureExtractor
from ..sensors.types import GESTURES, SensorGeometry, SyncWindow
from .cnn import CnnModel
from .cnn.serialization import (
    JSON_FORMAT, MAGIC, cnn_from_bytes, cnn_to_bytes, from_json_document, read_bytes, unpack, write_bytes,
)
from .fusion import FusionModel, Modality, check_modality_geometry
from .svm import SvmClassifier

logger = logging.getLogger(__name__)

Prediction = Tuple[int, np.ndarray]


class GestureClassifier(ABC):
    """Abstract base class for trained gesture classifiers"""

    kind = ''

    def __init__(self, modality: Modality):
        self.modality = Modality.parse(modality)
        self._extractors: Dict[SensorGeometry, WindowFeatureExtractor] = {}

    def extractor_for(self, geometry: SensorGeometry) -> WindowFeatureExtractor:
        check_modality_geometry(self.modality, geometry)
        extractor = self._extractors.get(geometry)
        if extractor is None:
            extractor = self._extractors.setdefault(geometry, WindowFeatureExtractor(geometry))
        return extractor

    def check_modality(self, modality: Optional[Union[str, Modality]]):
        if modality is not None and Modality.parse(modality) is not self.modality:
            raise ModelModalityMismatch(
                f"Model was trained for {self.modality.value}, configured modality is {Modality.parse(modality).value}"
            )

    def predict_window(self, window: SyncWindow, geometry: SensorGeometry) -> Prediction:
        """(class index, per-class scores) of one window"""
        return self.predict_features(window, self.extractor_for(geometry))

    @abstractmethod
    def predict_features(self, window: SyncWindow, extractor: WindowFeatureExtractor) -> Prediction:
        pass

    @abstractmethod
    def to_bytes(self) -> bytes:
        pass

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        write_bytes(path, self.to_bytes())
        logger.info(f"Saved {self.kind} {self.modality.value} model to {path}")
        return path

    @staticmethod
    def label_name(index: int) -> str:
        return GESTURES[index]


class SvmGestureClassifier(GestureClassifier):
    kind = 'svm'

    def __init__(self, svm: SvmClassifier, modality: Modality):
        super().__init__(modality)
        self.svm = svm
        self.svm.modality = self.modality.value

    def predict_features(self, window: SyncWindow, extractor: WindowFeatureExtractor) -> Prediction:
        label, values = self.svm.predict(extractor.svm_features(window, self.modality))
        return int(label), values

    def to_bytes(self) -> bytes:
        return json.dumps(self.svm.to_document()).encode('utf-8')


class CnnGestureClassifier(GestureClassifier):
    kind = 'cnn'

    def __init__(self, model: CnnModel, modality: Modality):
        super().__init__(modality)
        if self.modality.is_fusion:
            raise ModelModalityMismatch(f"A single CNN cannot serve fusion modality {self.modality.value}")
        self.model = model

    def predict_features(self, window: SyncWindow, extractor: WindowFeatureExtractor) -> Prediction:
        emg_input, vision_input = extractor.cnn_inputs(window, self.modality)
        x = emg_input if self.modality is Modality.EMG else vision_input
        probabilities = self.model.predict_proba(x[np.newaxis])[0]
        return int(np.argmax(probabilities)), probabilities

    def to_bytes(self) -> bytes:
        return cnn_to_bytes(self.model, modality=self.modality.value)


class FusionGestureClassifier(GestureClassifier):
    kind = 'fusion-cnn'

    def __init__(self, model: FusionModel, modality: Optional[Modality] = None):
        modality = modality or model.modality
        if modality is None or not Modality.parse(modality).is_fusion:
            raise ModelModalityMismatch(f"Fusion model needs a fusion modality, got {modality}")
        super().__init__(modality)
        self.model = model
        self.model.modality = self.modality

    def predict_features(self, window: SyncWindow, extractor: WindowFeatureExtractor) -> Prediction:
        emg_input, vision_input = extractor.cnn_inputs(window, self.modality)
        probabilities = self.model.predict_proba(emg_input[np.newaxis], vision_input[np.newaxis])[0]
        return int(np.argmax(probabilities)), probabilities

    def to_bytes(self) -> bytes:
        return self.model.to_bytes()


def classifier_from_bytes(data: bytes) -> GestureClassifier:
    """Detect the model format (FGCN container, FGCN JSON or SVM JSON)"""
    if data[:4] == MAGIC:
        descriptor, _ = unpack(data)
        kind = descriptor.get('type')
        if kind == 'cnn':
            model, descriptor = cnn_from_bytes(data)
            if not descriptor.get('modality'):
                raise ModelFormatError("CNN container does not name its modality")
            return CnnGestureClassifier(model, descriptor['modality'])
        if kind == 'fusion':
            return FusionGestureClassifier(FusionModel.from_bytes(data))
        raise ModelFormatError(f"Unknown FGCN model type '{kind}'")

    try:
        document = json.loads(data.decode('utf-8'))
    except (UnicodeDecodeError, json.JSONDecodeError):
        raise ModelFormatError("Model file is neither an FGCN container nor JSON")
    if not isinstance(document, dict):
        raise ModelFormatError("Model JSON must be an object")
    if document.get('format') == JSON_FORMAT:
        return classifier_from_bytes(from_json_document(document))
    if document.get('format') == SvmClassifier.FORMAT:
        if not document.get('modality'):
            raise ModelFormatError("SVM model does not name its modality")
        return SvmGestureClassifier(SvmClassifier.from_document(document), document['modality'])
    raise ModelFormatError(f"Unknown model format '{document.get('format')}'")


def load_classifier(path: Union[str, Path]) -> GestureClassifier:
    data = read_bytes(path)
    classifier = classifier_from_bytes(data)
    logger.info(f"Loaded {classifier.kind} {classifier.modality.value} model from {path}")
    return classifier
