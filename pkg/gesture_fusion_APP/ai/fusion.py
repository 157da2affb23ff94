"""
Sensor fusion: modalities, feature concatenation for SVMs and the
perceptron fusion layer over the two unimodal CNNs.
Location: gesture_fusion_APP/ai/fusion.py
"""
import logging
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Tuple, Union

import numpy as np

from ..conf import get_setting
from ..exceptions import (
    EmptyDataset, InvalidConfiguration, ModelFormatError, ModelModalityMismatch, ShapeMismatch,
    WindowIndexMismatch,
)
from ..features.emg_features import EmgFeatureVector
from ..features.vision_features import HogDescriptor
from ..sensors.types import SensorGeometry, SensorKind
from .cnn import AdadeltaState, CnnModel, build_dense_cnn, build_emg_cnn, build_vision_cnn, softmax, train
from .cnn.serialization import pack, unpack

logger = logging.getLogger(__name__)

FUSION_INPUTS = ('softmax', 'logits')


class Modality(str, Enum):
    EMG = 'EMG'
    DVS = 'DVS'
    DAV = 'DAV'
    FRM = 'FRM'
    FUS_DVS = 'FUS-DVS'
    FUS_DAV = 'FUS-DAV'
    FUS_FRM = 'FUS-FRM'

    @classmethod
    def parse(cls, value: Union[str, 'Modality']) -> 'Modality':
        try:
            return cls(str(value).upper().replace('_', '-'))
        except ValueError:
            raise InvalidConfiguration(
                f"Unknown modality '{value}', expected one of {', '.join(m.value for m in cls)}"
            )

    @property
    def is_fusion(self) -> bool:
        return self.value.startswith('FUS-')

    @property
    def uses_emg(self) -> bool:
        return self is Modality.EMG or self.is_fusion

    @property
    def vision(self) -> Optional['Modality']:
        """The vision modality involved (itself, or the one fused with EMG)"""
        if self is Modality.EMG:
            return None
        if self.is_fusion:
            return Modality(self.value[len('FUS-'):])
        return self

    def supported_by(self, kind: SensorKind) -> bool:
        vision = self.vision
        if vision is None:
            return True
        if vision is Modality.DVS:
            return kind is SensorKind.DVS128
        return kind is SensorKind.DAVIS240

    @classmethod
    def for_sensor(cls, kind: SensorKind) -> List['Modality']:
        return [modality for modality in cls if modality.supported_by(kind)]


def check_modality_geometry(modality: Modality, geometry: SensorGeometry):
    if not modality.supported_by(geometry.kind):
        raise ModelModalityMismatch(
            f"Modality {modality.value} cannot be computed from a {geometry.kind.value} recording"
        )


@dataclass(frozen=True, eq=False)
class FeatureVector:
    values: np.ndarray
    n: int
    emg_length: int = 0

    def __len__(self) -> int:
        return len(self.values)


def concat_features(emg: EmgFeatureVector, vision: HogDescriptor) -> FeatureVector:
    """EMG block first, then the HOG descriptor"""
    if vision.n is not None and vision.n != emg.n:
        raise WindowIndexMismatch(f"EMG features of window {emg.n} paired with HOG of window {vision.n}")
    values = np.concatenate([np.asarray(emg.values, dtype=np.float64), np.asarray(vision.values, dtype=np.float64)])
    values.setflags(write=False)
    return FeatureVector(values=values, n=emg.n, emg_length=len(emg.values))


@dataclass(eq=False)
class FusionModel:
    """softmax(W [emg_cnn(x); vision_cnn(v)] + bias) with W of shape (5, 10)"""
    emg_cnn: CnnModel
    vision_cnn: CnnModel
    W: np.ndarray
    bias: np.ndarray
    fusion_input: str = 'softmax'
    modality: Optional[Modality] = None

    def __post_init__(self):
        classes = self.emg_cnn.class_count
        if self.vision_cnn.class_count != classes:
            raise ShapeMismatch("Both CNNs must predict the same number of classes")
        self.W = np.asarray(self.W, dtype=np.float64)
        self.bias = np.asarray(self.bias, dtype=np.float64)
        if self.W.shape != (classes, 2 * classes) or self.bias.shape != (classes,):
            raise ShapeMismatch(
                f"Fusion layer must be ({classes}, {2 * classes}) + ({classes},), "
                f"got {self.W.shape} + {self.bias.shape}"
            )
        if self.fusion_input not in FUSION_INPUTS:
            raise InvalidConfiguration(f"Fusion input must be one of {FUSION_INPUTS}, got '{self.fusion_input}'")

    @property
    def class_count(self) -> int:
        return self.emg_cnn.class_count

    def _outputs(self, cnn: CnnModel, X: np.ndarray) -> np.ndarray:
        return cnn.predict_proba(X) if self.fusion_input == 'softmax' else cnn.logits(X)

    def activities(self, emg_X: np.ndarray, vision_X: np.ndarray) -> np.ndarray:
        """(N, 10) concatenated outputs of the frozen CNNs"""
        emg_out = self._outputs(self.emg_cnn, emg_X)
        vision_out = self._outputs(self.vision_cnn, vision_X)
        if len(emg_out) != len(vision_out):
            raise ShapeMismatch(f"{len(emg_out)} EMG inputs but {len(vision_out)} vision inputs")
        return np.concatenate([emg_out, vision_out], axis=1)

    def predict_proba(self, emg_X: np.ndarray, vision_X: np.ndarray) -> np.ndarray:
        return softmax(self.activities(emg_X, vision_X) @ self.W.T + self.bias)

    def predict(self, emg_X: np.ndarray, vision_X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(emg_X, vision_X), axis=1)

    def tensors(self) -> Dict[str, np.ndarray]:
        tensors = {f'emg.{name}': value for name, value in self.emg_cnn.parameters().items()}
        tensors.update({f'vision.{name}': value for name, value in self.vision_cnn.parameters().items()})
        tensors['fusion.W'] = self.W
        tensors['fusion.b'] = self.bias
        return tensors

    def to_bytes(self) -> bytes:
        descriptor = {
            'type': 'fusion',
            'modality': self.modality.value if self.modality else None,
            'fusion_input': self.fusion_input,
            'emg': self.emg_cnn.descriptor(),
            'vision': self.vision_cnn.descriptor(),
        }
        return pack(descriptor, self.tensors())

    @classmethod
    def from_bytes(cls, data: bytes) -> 'FusionModel':
        descriptor, tensors = unpack(data)
        if descriptor.get('type') != 'fusion':
            raise ModelFormatError(f"FGCN container holds a '{descriptor.get('type')}' model, not a fusion model")
        emg_cnn = CnnModel.from_descriptor(descriptor['emg'])
        vision_cnn = CnnModel.from_descriptor(descriptor['vision'])
        emg_cnn.set_parameters({k[len('emg.'):]: v for k, v in tensors.items() if k.startswith('emg.')})
        vision_cnn.set_parameters({k[len('vision.'):]: v for k, v in tensors.items() if k.startswith('vision.')})
        try:
            W, bias = tensors['fusion.W'], tensors['fusion.b']
        except KeyError as e:
            raise ModelFormatError(f"Fusion container lacks tensor {str(e)}")
        modality = Modality.parse(descriptor['modality']) if descriptor.get('modality') else None
        return cls(emg_cnn, vision_cnn, W, bias, descriptor.get('fusion_input', 'softmax'), modality)


def fusion_forward(model: FusionModel, emg_input: np.ndarray, vision_input: np.ndarray) -> np.ndarray:
    """Class probabilities of one paired sample"""
    emg_input = np.asarray(emg_input, dtype=np.float64)
    vision_input = np.asarray(vision_input, dtype=np.float64)
    if emg_input.shape != model.emg_cnn.input_shape:
        raise ShapeMismatch(f"EMG input must have shape {model.emg_cnn.input_shape}, got {emg_input.shape}")
    if vision_input.shape != model.vision_cnn.input_shape:
        raise ShapeMismatch(f"Vision input must have shape {model.vision_cnn.input_shape}, got {vision_input.shape}")
    return model.predict_proba(emg_input[np.newaxis], vision_input[np.newaxis])[0]


@dataclass
class FusionTrainingConfig:
    cnn_epochs: int = 100
    fusion_epochs: int = 50
    batch_size: int = 32
    fusion_input: str = 'softmax'
    learning_rate: float = 1.0
    emg_builder_options: Dict = field(default_factory=dict)
    vision_builder_options: Dict = field(default_factory=dict)

    @classmethod
    def from_settings(cls, **overrides) -> 'FusionTrainingConfig':
        values = {
            'cnn_epochs': get_setting('CNN_EPOCHS', 100),
            'fusion_epochs': get_setting('FUSION_EPOCHS', 50),
            'batch_size': get_setting('CNN_BATCH_SIZE', 32),
            'fusion_input': get_setting('FUSION_INPUT', 'softmax'),
            'learning_rate': get_setting('ADADELTA_LEARNING_RATE', 1.0),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


@dataclass
class FusionTrainingResult:
    model: FusionModel
    emg_history: List[float]
    vision_history: List[float]
    fusion_history: List[float]


def build_unimodal_cnns(emg_X: np.ndarray, vision_X: np.ndarray, config: FusionTrainingConfig,
                        seed: int) -> Tuple[CnnModel, CnnModel]:
    emg_cnn = build_emg_cnn(input_length=emg_X.shape[-1], seed=seed, **config.emg_builder_options)
    vision_cnn = build_vision_cnn(input_side=vision_X.shape[-1], seed=seed + 1, **config.vision_builder_options)
    return emg_cnn, vision_cnn


def train_two_step(emg_X: np.ndarray, vision_X: np.ndarray, labels: np.ndarray,
                   config: Optional[FusionTrainingConfig] = None, seed: Optional[int] = None,
                   modality: Optional[Modality] = None) -> FusionTrainingResult:
    """Step 1 trains each unimodal CNN; step 2 freezes them and trains only the
    zero-initialized fusion perceptrons on their concatenated output activities."""
    config = config or FusionTrainingConfig.from_settings()
    seed = seed if seed is not None else get_setting('DEFAULT_SEED', 0)
    emg_X = np.asarray(emg_X, dtype=np.float64)
    vision_X = np.asarray(vision_X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if len(labels) == 0:
        raise EmptyDataset("Fusion training needs at least one paired sample")
    if not len(emg_X) == len(vision_X) == len(labels):
        raise ShapeMismatch(f"Unpaired data: {len(emg_X)} EMG, {len(vision_X)} vision, {len(labels)} labels")

    def optimizer():
        return AdadeltaState.from_settings(learning_rate=config.learning_rate)

    emg_cnn, vision_cnn = build_unimodal_cnns(emg_X, vision_X, config, seed)
    emg_result = train(emg_cnn, emg_X, labels, config.cnn_epochs, config.batch_size, seed, optimizer())
    vision_result = train(vision_cnn, vision_X, labels, config.cnn_epochs, config.batch_size, seed + 1, optimizer())

    classes = emg_cnn.class_count
    model = FusionModel(
        emg_result.model, vision_result.model,
        W=np.zeros((classes, 2 * classes)), bias=np.zeros(classes),
        fusion_input=config.fusion_input, modality=modality,
    )
    perceptrons = build_dense_cnn(2 * classes, classes, seed=seed + 2, name='fusion')
    perceptrons.set_parameters({'layers.0.W': model.W, 'layers.0.b': model.bias})
    activities = model.activities(emg_X, vision_X)
    fusion_result = train(perceptrons, activities, labels, config.fusion_epochs, config.batch_size, seed + 2, optimizer())

    trained = fusion_result.model.parameters()
    model.W = trained['layers.0.W'].copy()
    model.bias = trained['layers.0.b'].copy()
    logger.info(
        f"Two-step fusion training done: EMG loss {_last(emg_result.loss_history)}, "
        f"vision loss {_last(vision_result.loss_history)}, fusion loss {_last(fusion_result.loss_history)}"
    )
    return FusionTrainingResult(model, emg_result.loss_history, vision_result.loss_history, fusion_result.loss_history)


def _last(history: List[float]) -> str:
    return f"{history[-1]:.4f}" if history else 'n/a'
