"""
Adadelta optimizer.
Location: gesture_fusion_APP/ai/cnn/optimizer.py
"""
from dataclasses import dataclass, field
from typing import Dict, Optional

import numpy as np

from ...conf import get_setting
from ...exceptions import InvalidConfiguration, ShapeMismatch


@dataclass
class AdadeltaState:
    """Running averages E[g^2] and E[dx^2] per parameter name"""
    rho: float = 0.95
    epsilon: float = 1e-6
    learning_rate: float = 1.0
    square_grad: Dict[str, np.ndarray] = field(default_factory=dict)
    square_delta: Dict[str, np.ndarray] = field(default_factory=dict)

    def __post_init__(self):
        if not 0.0 < self.rho < 1.0:
            raise InvalidConfiguration(f"Adadelta rho must lie in (0, 1), got {self.rho}")
        if self.epsilon <= 0:
            raise InvalidConfiguration(f"Adadelta epsilon must be positive, got {self.epsilon}")

    @classmethod
    def from_settings(cls, learning_rate: Optional[float] = None) -> 'AdadeltaState':
        return cls(
            rho=get_setting('ADADELTA_RHO', 0.95),
            epsilon=get_setting('ADADELTA_EPSILON', 1e-6),
            learning_rate=learning_rate if learning_rate is not None else get_setting('ADADELTA_LEARNING_RATE', 1.0),
        )


def adadelta_step(params: Dict[str, np.ndarray], grads: Dict[str, np.ndarray],
                  state: AdadeltaState) -> Dict[str, np.ndarray]:
    """Apply one update in place and return params.

    E[g^2] <- rho E[g^2] + (1 - rho) g^2
    dx = -sqrt(E[dx^2] + eps) / sqrt(E[g^2] + eps) * g
    E[dx^2] <- rho E[dx^2] + (1 - rho) dx^2
    """
    rho, eps = state.rho, state.epsilon
    for name, grad in grads.items():
        if name not in params:
            raise ShapeMismatch(f"Gradient for unknown parameter '{name}'")
        param = params[name]
        if grad.shape != param.shape:
            raise ShapeMismatch(f"Gradient of {name} has shape {grad.shape}, parameter has {param.shape}")

        square_grad = state.square_grad.setdefault(name, np.zeros_like(param))
        square_delta = state.square_delta.setdefault(name, np.zeros_like(param))
        square_grad *= rho
        square_grad += (1.0 - rho) * grad * grad
        delta = -np.sqrt(square_delta + eps) / np.sqrt(square_grad + eps) * grad
        square_delta *= rho
        square_delta += (1.0 - rho) * delta * delta
        param += state.learning_rate * delta
    return params
