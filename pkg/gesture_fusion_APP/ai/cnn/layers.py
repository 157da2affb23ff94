"""
Batch layers for the numpy CNN core.
Every layer is stateless apart from its parameters: forward returns
(output, cache) and backward(dout, cache) returns (dx, gradients), so a
built model can run inference from several threads at once.
Location: gesture_fusion_APP/ai/cnn/layers.py
"""
from abc import ABC, abstractmethod
from typing import Dict, Optional, Tuple

import numpy as np

from ...exceptions import InvalidConfiguration, ShapeMismatch

Shape = Tuple[int, ...]


class Layer(ABC):
    """Base class: build() fixes the input shape and allocates parameters"""

    kind = ''

    def __init__(self):
        self.input_shape: Optional[Shape] = None
        self.output_shape: Optional[Shape] = None
        self.params: Dict[str, np.ndarray] = {}

    def build(self, input_shape: Shape, rng: np.random.Generator) -> Shape:
        self.input_shape = tuple(int(s) for s in input_shape)
        self.output_shape = self.infer_shape(self.input_shape)
        self.init_params(rng)
        return self.output_shape

    @abstractmethod
    def infer_shape(self, input_shape: Shape) -> Shape:
        """Output shape for one sample, ShapeMismatch if the input cannot be consumed"""

    def init_params(self, rng: np.random.Generator):
        pass

    @abstractmethod
    def forward(self, x: np.ndarray) -> Tuple[np.ndarray, object]:
        pass

    @abstractmethod
    def backward(self, dout: np.ndarray, cache) -> Tuple[np.ndarray, Dict[str, np.ndarray]]:
        pass

    def config(self) -> Dict:
        return {'kind': self.kind}


def he_uniform(rng: np.random.Generator, shape: Shape, fan_in: int) -> np.ndarray:
    limit = np.sqrt(6.0 / fan_in)
    return rng.uniform(-limit, limit, size=shape)


class Conv2D(Layer):
    """Valid 2-D convolution (cross-correlation), stride 1; weights (out, in, k, k)"""

    kind = 'Conv2D'

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size

    def infer_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 3 or input_shape[0] != self.in_channels:
            raise ShapeMismatch(f"Conv2D expects ({self.in_channels}, H, W), got {input_shape}")
        _, height, width = input_shape
        k = self.kernel_size
        if height < k or width < k:
            raise ShapeMismatch(f"Conv2D kernel {k} does not fit input {input_shape}")
        return self.out_channels, height - k + 1, width - k + 1

    def init_params(self, rng: np.random.Generator):
        k = self.kernel_size
        fan_in = self.in_channels * k * k
        self.params = {
            'W': he_uniform(rng, (self.out_channels, self.in_channels, k, k), fan_in),
            'b': np.zeros(self.out_channels),
        }

    def forward(self, x: np.ndarray):
        W, b = self.params['W'], self.params['b']
        k = self.kernel_size
        n, _, height, width = x.shape
        out_h, out_w = height - k + 1, width - k + 1
        out = np.zeros((n, out_h, out_w, self.out_channels))
        for i in range(k):
            for j in range(k):
                out += np.tensordot(x[:, :, i:i + out_h, j:j + out_w], W[:, :, i, j], axes=([1], [1]))
        out = out.transpose(0, 3, 1, 2) + b[np.newaxis, :, np.newaxis, np.newaxis]
        return out, x

    def backward(self, dout: np.ndarray, cache):
        x = cache
        W = self.params['W']
        k = self.kernel_size
        _, _, out_h, out_w = dout.shape
        dout_t = dout.transpose(0, 2, 3, 1)
        dx = np.zeros_like(x)
        dW = np.zeros_like(W)
        for i in range(k):
            for j in range(k):
                window = x[:, :, i:i + out_h, j:j + out_w]
                dW[:, :, i, j] = np.tensordot(dout_t, window, axes=([0, 1, 2], [0, 2, 3]))
                dx[:, :, i:i + out_h, j:j + out_w] += np.tensordot(dout_t, W[:, :, i, j], axes=([3], [0])).transpose(0, 3, 1, 2)
        return dx, {'W': dW, 'b': dout.sum(axis=(0, 2, 3))}

    def config(self) -> Dict:
        return {'kind': self.kind, 'in_channels': self.in_channels,
                'out_channels': self.out_channels, 'kernel_size': self.kernel_size}


class Conv1D(Layer):
    """Valid 1-D convolution, stride 1; weights (out, in, k)"""

    kind = 'Conv1D'

    def __init__(self, in_channels: int, out_channels: int, kernel_size: int):
        super().__init__()
        self.in_channels = in_channels
        self.out_channels = out_channels
        self.kernel_size = kernel_size

    def infer_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 2 or input_shape[0] != self.in_channels:
            raise ShapeMismatch(f"Conv1D expects ({self.in_channels}, L), got {input_shape}")
        if input_shape[1] < self.kernel_size:
            raise ShapeMismatch(f"Conv1D kernel {self.kernel_size} does not fit input {input_shape}")
        return self.out_channels, input_shape[1] - self.kernel_size + 1

    def init_params(self, rng: np.random.Generator):
        fan_in = self.in_channels * self.kernel_size
        self.params = {
            'W': he_uniform(rng, (self.out_channels, self.in_channels, self.kernel_size), fan_in),
            'b': np.zeros(self.out_channels),
        }

    def forward(self, x: np.ndarray):
        W, b = self.params['W'], self.params['b']
        n, _, length = x.shape
        out_len = length - self.kernel_size + 1
        out = np.zeros((n, out_len, self.out_channels))
        for i in range(self.kernel_size):
            out += np.tensordot(x[:, :, i:i + out_len], W[:, :, i], axes=([1], [1]))
        return out.transpose(0, 2, 1) + b[np.newaxis, :, np.newaxis], x

    def backward(self, dout: np.ndarray, cache):
        x = cache
        W = self.params['W']
        out_len = dout.shape[2]
        dout_t = dout.transpose(0, 2, 1)
        dx = np.zeros_like(x)
        dW = np.zeros_like(W)
        for i in range(self.kernel_size):
            dW[:, :, i] = np.tensordot(dout_t, x[:, :, i:i + out_len], axes=([0, 1], [0, 2]))
            dx[:, :, i:i + out_len] += np.tensordot(dout_t, W[:, :, i], axes=([2], [0])).transpose(0, 2, 1)
        return dx, {'W': dW, 'b': dout.sum(axis=(0, 2))}

    def config(self) -> Dict:
        return {'kind': self.kind, 'in_channels': self.in_channels,
                'out_channels': self.out_channels, 'kernel_size': self.kernel_size}


class MaxPool2D(Layer):
    """Non-overlapping 2x2 max pooling"""

    kind = 'MaxPool2D'
    size = 2

    def infer_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 3:
            raise ShapeMismatch(f"MaxPool2D expects (C, H, W), got {input_shape}")
        channels, height, width = input_shape
        if height % self.size or width % self.size:
            raise ShapeMismatch(f"MaxPool2D needs even spatial sizes, got {input_shape}")
        return channels, height // self.size, width // self.size

    def forward(self, x: np.ndarray):
        n, channels, height, width = x.shape
        h2, w2 = height // 2, width // 2
        windows = x.reshape(n, channels, h2, 2, w2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(n, channels, h2, w2, 4)
        index = np.argmax(windows, axis=-1)
        out = np.take_along_axis(windows, index[..., np.newaxis], axis=-1)[..., 0]
        return out, (x.shape, index)

    def backward(self, dout: np.ndarray, cache):
        shape, index = cache
        n, channels, height, width = shape
        h2, w2 = height // 2, width // 2
        dwindows = np.zeros((n, channels, h2, w2, 4))
        np.put_along_axis(dwindows, index[..., np.newaxis], dout[..., np.newaxis], axis=-1)
        dx = dwindows.reshape(n, channels, h2, w2, 2, 2).transpose(0, 1, 2, 4, 3, 5).reshape(shape)
        return dx, {}


class Dense(Layer):
    """Fully connected layer over the flattened input; weights (out, in)"""

    kind = 'Dense'

    def __init__(self, units: int):
        super().__init__()
        self.units = units

    def infer_shape(self, input_shape: Shape) -> Shape:
        if not input_shape or int(np.prod(input_shape)) < 1:
            raise ShapeMismatch(f"Dense cannot consume input shape {input_shape}")
        return (self.units,)

    def init_params(self, rng: np.random.Generator):
        fan_in = int(np.prod(self.input_shape))
        self.params = {
            'W': he_uniform(rng, (self.units, fan_in), fan_in),
            'b': np.zeros(self.units),
        }

    def forward(self, x: np.ndarray):
        flat = x.reshape(x.shape[0], -1)
        return flat @ self.params['W'].T + self.params['b'], x

    def backward(self, dout: np.ndarray, cache):
        x = cache
        flat = x.reshape(x.shape[0], -1)
        dx = (dout @ self.params['W']).reshape(x.shape)
        return dx, {'W': dout.T @ flat, 'b': dout.sum(axis=0)}

    def config(self) -> Dict:
        return {'kind': self.kind, 'units': self.units}


class Activation(Layer):
    kind = 'Activation'
    FUNCTIONS = ('relu', 'tanh')

    def __init__(self, function: str = 'relu'):
        super().__init__()
        if function not in self.FUNCTIONS:
            raise InvalidConfiguration(f"Unknown activation '{function}', expected one of {self.FUNCTIONS}")
        self.function = function

    def infer_shape(self, input_shape: Shape) -> Shape:
        return input_shape

    def forward(self, x: np.ndarray):
        if self.function == 'relu':
            return np.maximum(x, 0.0), x
        out = np.tanh(x)
        return out, out

    def backward(self, dout: np.ndarray, cache):
        if self.function == 'relu':
            return dout * (cache > 0), {}
        return dout * (1.0 - cache ** 2), {}

    def config(self) -> Dict:
        return {'kind': self.kind, 'function': self.function}


class Softmax(Layer):
    """Final normalization; its gradient is fused with the cross-entropy loss"""

    kind = 'Softmax'

    def infer_shape(self, input_shape: Shape) -> Shape:
        if len(input_shape) != 1:
            raise ShapeMismatch(f"Softmax expects a flat input, got {input_shape}")
        return input_shape

    def forward(self, x: np.ndarray):
        probabilities = softmax(x)
        return probabilities, probabilities

    def backward(self, dout: np.ndarray, cache):
        p = cache
        return p * (dout - np.sum(dout * p, axis=1, keepdims=True)), {}


def softmax(logits: np.ndarray) -> np.ndarray:
    shifted = logits - logits.max(axis=-1, keepdims=True)
    exp = np.exp(shifted)
    return exp / exp.sum(axis=-1, keepdims=True)


LAYER_TYPES = {
    cls.kind: cls for cls in (Conv2D, Conv1D, MaxPool2D, Dense, Activation, Softmax)
}


def layer_from_config(config: Dict) -> Layer:
    config = dict(config)
    kind = config.pop('kind', None)
    if kind not in LAYER_TYPES:
        raise InvalidConfiguration(f"Unknown layer kind '{kind}'")
    return LAYER_TYPES[kind](**config)
