"""
Sequential CNN model, softmax cross-entropy backpropagation and the two
gesture architectures (LeNet-5 style vision net, 1-D EMG net).
Location: gesture_fusion_APP/ai/cnn/network.py
"""
import logging
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np

from ...exceptions import InvalidLabel, ShapeMismatch
from .layers import Activation, Conv1D, Conv2D, Dense, Layer, MaxPool2D, Shape, Softmax, layer_from_config

logger = logging.getLogger(__name__)

CLASS_COUNT = 5


class CnnModel:
    """Layers built in order on a fixed input shape; parameters are float64 arrays"""

    def __init__(self, layers: Sequence[Layer], input_shape: Shape, class_count: int = CLASS_COUNT,
                 seed: int = 0, name: str = 'cnn'):
        self.layers: List[Layer] = list(layers)
        self.input_shape = tuple(int(s) for s in input_shape)
        self.class_count = class_count
        self.seed = seed
        self.name = name

        rng = np.random.default_rng(seed)
        shape = self.input_shape
        self.shapes = [shape]
        for layer in self.layers:
            shape = layer.build(shape, rng)
            self.shapes.append(shape)
        if shape != (class_count,):
            raise ShapeMismatch(f"Model ends in shape {shape}, expected ({class_count},)")
        if not self.layers or not isinstance(self.layers[-1], Softmax):
            raise ShapeMismatch("The last layer must be Softmax")

    # parameters

    def parameters(self) -> Dict[str, np.ndarray]:
        """Named parameter arrays (live references), e.g. 'layers.0.W'"""
        return {
            f'layers.{index}.{name}': value
            for index, layer in enumerate(self.layers)
            for name, value in layer.params.items()
        }

    def parameter_count(self) -> int:
        return int(sum(value.size for value in self.parameters().values()))

    def set_parameters(self, values: Dict[str, np.ndarray]):
        current = self.parameters()
        for name, value in values.items():
            if name not in current:
                raise ShapeMismatch(f"Model has no parameter '{name}'")
            value = np.asarray(value, dtype=np.float64)
            if value.shape != current[name].shape:
                raise ShapeMismatch(f"Parameter {name} has shape {current[name].shape}, got {value.shape}")
            index, key = name.split('.')[1:]
            self.layers[int(index)].params[key] = value.copy()

    def copy(self) -> 'CnnModel':
        clone = CnnModel([layer_from_config(layer.config()) for layer in self.layers], self.input_shape,
                         self.class_count, self.seed, self.name)
        clone.set_parameters(self.parameters())
        return clone

    def descriptor(self) -> Dict:
        return {
            'name': self.name,
            'input_shape': list(self.input_shape),
            'class_count': self.class_count,
            'seed': self.seed,
            'layers': [layer.config() for layer in self.layers],
        }

    @classmethod
    def from_descriptor(cls, descriptor: Dict) -> 'CnnModel':
        return cls(
            [layer_from_config(config) for config in descriptor['layers']],
            descriptor['input_shape'],
            class_count=descriptor.get('class_count', CLASS_COUNT),
            seed=descriptor.get('seed', 0),
            name=descriptor.get('name', 'cnn'),
        )

    # inference

    def _check_batch(self, X: np.ndarray) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if X.shape[1:] != self.input_shape:
            raise ShapeMismatch(f"{self.name} expects inputs of shape {self.input_shape}, got {X.shape[1:]}")
        return X

    def forward_batch(self, X: np.ndarray, until: Optional[int] = None) -> Tuple[np.ndarray, list]:
        """Run layers[:until] on a batch; returns the output and the per-layer caches"""
        out = self._check_batch(X)
        caches = []
        for layer in self.layers[:until]:
            out, cache = layer.forward(out)
            caches.append(cache)
        return out, caches

    def logits(self, X: np.ndarray) -> np.ndarray:
        out, _ = self.forward_batch(X, until=-1)
        return out

    def predict_proba(self, X: np.ndarray) -> np.ndarray:
        out, _ = self.forward_batch(X)
        return out

    def predict(self, X: np.ndarray) -> np.ndarray:
        return np.argmax(self.predict_proba(X), axis=1)

    # training

    def loss_and_gradients(self, X: np.ndarray, labels: Sequence[int]) -> Tuple[float, Dict[str, np.ndarray]]:
        """Mean softmax cross-entropy over the batch and its parameter gradients"""
        X = self._check_batch(X)
        labels = np.asarray(labels).ravel()
        if len(labels) != len(X):
            raise ShapeMismatch(f"{len(X)} inputs but {len(labels)} labels")
        if not np.issubdtype(labels.dtype, np.integer) or labels.min(initial=0) < 0 \
                or labels.max(initial=0) >= self.class_count:
            raise InvalidLabel(f"Labels must be integers in 0..{self.class_count - 1}")

        logits, caches = self.forward_batch(X, until=-1)
        probabilities = self.layers[-1].forward(logits)[0]
        n = len(X)
        rows = np.arange(n)
        loss = float(-np.mean(np.log(np.maximum(probabilities[rows, labels], np.finfo(float).tiny))))

        dout = probabilities.copy()
        dout[rows, labels] -= 1.0
        dout /= n

        gradients = {}
        for index in range(len(self.layers) - 2, -1, -1):
            dout, layer_grads = self.layers[index].backward(dout, caches[index])
            for key, value in layer_grads.items():
                gradients[f'layers.{index}.{key}'] = value
        return loss, gradients

    def summary(self) -> str:
        lines = [f"{self.name}: input {self.input_shape}"]
        for layer, shape in zip(self.layers, self.shapes[1:]):
            lines.append(f"  {layer.kind:<10} -> {shape}")
        lines.append(f"  {self.parameter_count()} parameters")
        return '\n'.join(lines)


def forward(model: CnnModel, x: np.ndarray) -> np.ndarray:
    """Class probabilities of a single input"""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.input_shape:
        raise ShapeMismatch(f"{model.name} expects input shape {model.input_shape}, got {x.shape}")
    return model.predict_proba(x[np.newaxis])[0]


def backward(model: CnnModel, x: np.ndarray, label: int) -> Tuple[Dict[str, np.ndarray], float]:
    """Gradients of the cross-entropy of a single (input, label) pair, and the loss"""
    x = np.asarray(x, dtype=np.float64)
    if x.shape != model.input_shape:
        raise ShapeMismatch(f"{model.name} expects input shape {model.input_shape}, got {x.shape}")
    if isinstance(label, bool) or not isinstance(label, (int, np.integer)) or not 0 <= label < model.class_count:
        raise InvalidLabel(f"Label must be an integer in 0..{model.class_count - 1}, got {label!r}")
    loss, gradients = model.loss_and_gradients(x[np.newaxis], [int(label)])
    return gradients, loss


def build_vision_cnn(input_side: int = 60, channels: Tuple[int, int] = (6, 16),
                     dense: Tuple[int, ...] = (120, 84), class_count: int = CLASS_COUNT,
                     kernel_size: int = 5, activation: str = 'relu', seed: int = 0) -> CnnModel:
    """conv 6@5x5 -> pool -> conv 16@5x5 -> pool -> dense 120 -> dense 84 -> dense 5"""
    layers: List[Layer] = [
        Conv2D(1, channels[0], kernel_size), Activation(activation), MaxPool2D(),
        Conv2D(channels[0], channels[1], kernel_size), Activation(activation), MaxPool2D(),
    ]
    for units in dense:
        layers += [Dense(units), Activation(activation)]
    layers += [Dense(class_count), Softmax()]
    return CnnModel(layers, (1, input_side, input_side), class_count, seed, name='vision')


def build_emg_cnn(input_length: int = 16, channels: Tuple[int, int] = (6, 16),
                  dense: Tuple[int, ...] = (64,), class_count: int = CLASS_COUNT,
                  kernel_size: int = 5, activation: str = 'relu', seed: int = 0) -> CnnModel:
    """conv1d 6@5 -> conv1d 16@5 -> dense 64 -> dense 5, no pooling"""
    layers: List[Layer] = [
        Conv1D(1, channels[0], kernel_size), Activation(activation),
        Conv1D(channels[0], channels[1], kernel_size), Activation(activation),
    ]
    for units in dense:
        layers += [Dense(units), Activation(activation)]
    layers += [Dense(class_count), Softmax()]
    return CnnModel(layers, (1, input_length), class_count, seed, name='emg')


def build_dense_cnn(input_size: int, class_count: int = CLASS_COUNT, seed: int = 0,
                    name: str = 'dense') -> CnnModel:
    """A single Dense + Softmax: multinomial logistic regression"""
    return CnnModel([Dense(class_count), Softmax()], (input_size,), class_count, seed, name=name)
