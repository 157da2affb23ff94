from .layers import Activation, Conv1D, Conv2D, Dense, Layer, MaxPool2D, Softmax, softmax
from .network import (
    CLASS_COUNT, CnnModel, backward, build_dense_cnn, build_emg_cnn, build_vision_cnn, forward,
)
from .optimizer import AdadeltaState, adadelta_step
from .training import TrainingResult, train
from .serialization import cnn_from_bytes, cnn_to_bytes, from_json_document, pack, to_json_document, unpack

__all__ = [
    'Activation',
    'Conv1D',
    'Conv2D',
    'Dense',
    'Layer',
    'MaxPool2D',
    'Softmax',
    'softmax',
    'CLASS_COUNT',
    'CnnModel',
    'backward',
    'build_dense_cnn',
    'build_emg_cnn',
    'build_vision_cnn',
    'forward',
    'AdadeltaState',
    'adadelta_step',
    'TrainingResult',
    'train',
    'cnn_from_bytes',
    'cnn_to_bytes',
    'from_json_document',
    'pack',
    'to_json_document',
    'unpack',
]
