"""
Mini-batch training loop.
Location: gesture_fusion_APP/ai/cnn/training.py
"""
import logging
from dataclasses import dataclass
from typing import List, Optional, Sequence

import numpy as np

from ...conf import get_setting
from ...exceptions import EmptyDataset, ShapeMismatch
from .network import CnnModel
from .optimizer import AdadeltaState, adadelta_step

logger = logging.getLogger(__name__)


@dataclass
class TrainingResult:
    model: CnnModel
    loss_history: List[float]

    @property
    def final_loss(self) -> Optional[float]:
        return self.loss_history[-1] if self.loss_history else None


def train(model: CnnModel, X: np.ndarray, labels: Sequence[int], epochs: Optional[int] = None,
          batch_size: Optional[int] = None, seed: Optional[int] = None,
          state: Optional[AdadeltaState] = None) -> TrainingResult:
    """Train a copy of `model` with Adadelta on shuffled mini-batches.

    The loss history holds the sample-weighted mean training loss of every
    epoch. Shuffling is driven by `seed`, so equal seeds give identical
    weight trajectories.
    """
    X = np.asarray(X, dtype=np.float64)
    labels = np.asarray(labels, dtype=np.int64).ravel()
    if len(X) == 0:
        raise EmptyDataset(f"Cannot train {model.name} on an empty dataset")
    if len(X) != len(labels):
        raise ShapeMismatch(f"{len(X)} inputs but {len(labels)} labels")

    epochs = epochs if epochs is not None else get_setting('CNN_EPOCHS', 100)
    batch_size = batch_size or get_setting('CNN_BATCH_SIZE', 32)
    seed = seed if seed is not None else get_setting('DEFAULT_SEED', 0)
    state = state or AdadeltaState.from_settings()

    trained = model.copy()
    params = trained.parameters()
    rng = np.random.default_rng(seed)
    history = []
    for epoch in range(epochs):
        order = rng.permutation(len(X))
        total = 0.0
        for start in range(0, len(X), batch_size):
            batch = order[start:start + batch_size]
            loss, grads = trained.loss_and_gradients(X[batch], labels[batch])
            adadelta_step(params, grads, state)
            total += loss * len(batch)
        history.append(total / len(X))
        logger.debug(f"{trained.name} epoch {epoch + 1}/{epochs}: loss {history[-1]:.4f}")

    if history:
        logger.info(f"Trained {trained.name} for {epochs} epochs, loss {history[0]:.4f} -> {history[-1]:.4f}")
    return TrainingResult(model=trained, loss_history=history)
