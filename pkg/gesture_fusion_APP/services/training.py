"""
Fit a deployable classifier for one modality on a whole dataset.
Location: gesture_fusion_APP/services/training.py
"""
import logging
from typing import Optional, Sequence

from ..ai.classifiers import CnnGestureClassifier, FusionGestureClassifier, GestureClassifier, SvmGestureClassifier
from ..ai.cnn import build_emg_cnn, build_vision_cnn, train
from ..ai.cnn.optimizer import AdadeltaState
from ..ai.dataset import GestureDataset
from ..ai.evaluation import EvaluationOptions, ModelKind
from ..ai.fusion import Modality, train_two_step
from ..ai.svm import SvmClassifier, select_slack

logger = logging.getLogger(__name__)


def train_classifier(dataset: GestureDataset, modality: Modality, model_kind: ModelKind,
                     options: Optional[EvaluationOptions] = None,
                     C_grid: Optional[Sequence[float]] = None) -> GestureClassifier:
    """SVMs pick C by cross-validation, then refit on every window; CNNs train on every window"""
    options = options or EvaluationOptions.from_settings()
    modality = Modality.parse(modality)
    model_kind = ModelKind.parse(model_kind)
    dataset.require(modality)
    labels = dataset.labels

    if model_kind.kernel is not None:
        X = dataset.svm_features(modality)
        C = select_slack(X, labels, model_kind.kernel, C_grid=C_grid or options.C_grid,
                         folds=options.folds, seed=options.seed, n_jobs=options.n_jobs)
        svm = SvmClassifier.fit(X, labels, model_kind.kernel, C, modality=modality.value, n_jobs=options.n_jobs)
        svm.metadata.update({'T_ms': dataset.T_ms, 'windows': len(dataset)})
        return SvmGestureClassifier(svm, modality)

    config = options.cnn
    emg_inputs, vision_inputs = dataset.cnn_inputs(modality)
    if modality.is_fusion:
        result = train_two_step(emg_inputs, vision_inputs, labels, config, options.seed, modality)
        return FusionGestureClassifier(result.model, modality)

    state = AdadeltaState.from_settings(learning_rate=config.learning_rate)
    if modality is Modality.EMG:
        model = build_emg_cnn(input_length=emg_inputs.shape[-1], seed=options.seed, **config.emg_builder_options)
        result = train(model, emg_inputs, labels, config.cnn_epochs, config.batch_size, options.seed, state)
    else:
        model = build_vision_cnn(input_side=vision_inputs.shape[-1], seed=options.seed + 1,
                                 **config.vision_builder_options)
        result = train(model, vision_inputs, labels, config.cnn_epochs, config.batch_size, options.seed, state)
    logger.info(f"Trained {modality.value} CNN on {len(dataset)} windows, final loss {result.final_loss}")
    return CnnGestureClassifier(result.model, modality)
