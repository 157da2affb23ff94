"""
Cross-validated evaluation harness: modality x model accuracy tables and
the window-length sweep.
Location: gesture_fusion_APP/ai/evaluation.py
"""
import logging
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Dict, Iterable, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import GroupKFold

from ..conf import get_setting
from ..exceptions import FeatureError, InsufficientDataForFolds, InvalidConfiguration
from ..sensors.session import window_slices
from ..sensors.types import Session
from .classifiers import GestureClassifier
from .cnn import build_emg_cnn, build_vision_cnn, train
from .cnn.optimizer import AdadeltaState
from .dataset import GestureDataset, build_dataset
from .fusion import FusionTrainingConfig, Modality, train_two_step
from .svm import KernelSpec, best_slack, slack_scores, stratified_folds

logger = logging.getLogger(__name__)


class ModelKind(str, Enum):
    LINEAR_SVM = 'linear'
    RBF_SVM = 'rbf'
    CNN = 'cnn'

    @classmethod
    def parse(cls, value) -> 'ModelKind':
        try:
            return cls(str(value).lower())
        except ValueError:
            raise InvalidConfiguration(f"Unknown model kind '{value}', expected linear, rbf or cnn")

    @property
    def title(self) -> str:
        return {'linear': 'Linear', 'rbf': 'RBF', 'cnn': 'CNN'}[self.value]

    @property
    def kernel(self) -> Optional[KernelSpec]:
        if self is ModelKind.LINEAR_SVM:
            return KernelSpec.linear()
        if self is ModelKind.RBF_SVM:
            return KernelSpec.rbf()
        return None


@dataclass
class EvalReport:
    modality: str
    model_kind: str
    T_ms: float
    fold_accuracies: List[float]
    mean: float = 0.0
    std: float = 0.0
    C: Optional[float] = None
    strategy: str = 'mixed'
    seed: int = 0

    def __post_init__(self):
        accuracies = np.asarray(self.fold_accuracies, dtype=np.float64)
        self.mean = float(np.mean(accuracies))
        self.std = float(np.std(accuracies))

    def to_dict(self) -> Dict:
        return asdict(self)

    @property
    def cell(self) -> str:
        return f"{100 * self.mean:.1f} ± {100 * self.std:.1f}"


@dataclass
class EvaluationOptions:
    folds: int = 5
    seed: int = 0
    strategy: str = 'mixed'
    C_grid: List[float] = field(default_factory=lambda: [0.01, 0.1, 1.0, 10.0, 100.0])
    cnn: FusionTrainingConfig = field(default_factory=FusionTrainingConfig)
    n_jobs: int = 1

    @classmethod
    def from_settings(cls, **overrides) -> 'EvaluationOptions':
        values = {
            'folds': get_setting('CV_FOLDS', 5),
            'seed': get_setting('DEFAULT_SEED', 0),
            'strategy': get_setting('FOLD_STRATEGY', 'mixed'),
            'C_grid': list(get_setting('SVM_C_GRID', [0.01, 0.1, 1.0, 10.0, 100.0])),
            'cnn': FusionTrainingConfig.from_settings(),
            'n_jobs': get_setting('N_JOBS', 1),
        }
        values.update({key: value for key, value in overrides.items() if value is not None})
        return cls(**values)


def make_folds(labels: np.ndarray, subjects: np.ndarray, folds: int, seed: int,
               strategy: str = 'mixed') -> List[Tuple[np.ndarray, np.ndarray]]:
    """Mixed: stratified by class over all subjects. Subject: whole subjects per fold."""
    if folds < 2:
        raise InvalidConfiguration(f"Cross-validation needs at least 2 folds, got {folds}")
    if strategy == 'mixed':
        return stratified_folds(labels, folds, seed)
    if strategy == 'subject':
        groups = np.asarray(subjects)
        if len(np.unique(groups)) < folds:
            raise InsufficientDataForFolds(
                f"Subject folds need at least {folds} subjects, got {len(np.unique(groups))}"
            )
        return list(GroupKFold(n_splits=folds).split(np.zeros(len(labels)), labels, groups))
    raise InvalidConfiguration(f"Unknown fold strategy '{strategy}', expected mixed or subject")


def _cnn_fold_accuracy(dataset: GestureDataset, modality: Modality, train_index: np.ndarray,
                       test_index: np.ndarray, config: FusionTrainingConfig, seed: int) -> float:
    labels = dataset.labels
    emg_inputs, vision_inputs = dataset.cnn_inputs(modality)
    if modality.is_fusion:
        result = train_two_step(emg_inputs[train_index], vision_inputs[train_index], labels[train_index],
                                config, seed, modality)
        predicted = result.model.predict(emg_inputs[test_index], vision_inputs[test_index])
    else:
        if modality is Modality.EMG:
            X = emg_inputs
            model = build_emg_cnn(input_length=X.shape[-1], seed=seed, **config.emg_builder_options)
        else:
            X = vision_inputs
            model = build_vision_cnn(input_side=X.shape[-1], seed=seed + 1, **config.vision_builder_options)
        state = AdadeltaState.from_settings(learning_rate=config.learning_rate)
        result = train(model, X[train_index], labels[train_index], config.cnn_epochs, config.batch_size,
                       seed, state)
        predicted = result.model.predict(X[test_index])
    return float(np.mean(predicted == labels[test_index]))


def evaluate(dataset: GestureDataset, modality: Modality, model_kind: ModelKind,
             options: Optional[EvaluationOptions] = None) -> EvalReport:
    """Train on k-1 folds and test on the remaining one, rotating over all folds.

    SVMs report the fold accuracies of the slack value with the best mean
    over the same folds.
    """
    options = options or EvaluationOptions.from_settings()
    modality = Modality.parse(modality)
    model_kind = ModelKind.parse(model_kind)
    dataset.require(modality)
    splits = make_folds(dataset.labels, dataset.subjects, options.folds, options.seed, options.strategy)

    C = None
    if model_kind.kernel is not None:
        scores = slack_scores(dataset.svm_features(modality), dataset.labels, model_kind.kernel,
                              options.C_grid, splits, n_jobs=options.n_jobs)
        C = best_slack(scores)
        accuracies = scores[C]
    else:
        accuracies = Parallel(n_jobs=options.n_jobs)(
            delayed(_cnn_fold_accuracy)(dataset, modality, train_index, test_index, options.cnn, options.seed)
            for train_index, test_index in splits
        )

    report = EvalReport(
        modality=modality.value, model_kind=model_kind.value, T_ms=dataset.T_ms,
        fold_accuracies=[float(a) for a in accuracies], C=C, strategy=options.strategy, seed=options.seed,
    )
    logger.info(f"{modality.value} {model_kind.title} T={dataset.T_ms} ms: {report.cell}")
    return report


def evaluate_table(dataset: GestureDataset, modalities: Optional[Sequence[Modality]] = None,
                   model_kinds: Optional[Sequence[ModelKind]] = None,
                   options: Optional[EvaluationOptions] = None) -> List[EvalReport]:
    modalities = list(modalities or dataset.modalities)
    model_kinds = list(model_kinds or ModelKind)
    return [
        evaluate(dataset, modality, kind, options)
        for modality in modalities
        for kind in model_kinds
    ]


def render_table(reports: Iterable[EvalReport]) -> str:
    """Modality rows x Linear/RBF/CNN columns of 'mean ± std' percentages"""
    reports = list(reports)
    kinds = [kind for kind in ModelKind if any(r.model_kind == kind.value for r in reports)]
    windows = sorted({r.T_ms for r in reports})
    lines = []
    for T_ms in windows:
        cells = {(r.modality, r.model_kind): r.cell for r in reports if r.T_ms == T_ms}
        rows = [m.value for m in Modality if any(key[0] == m.value for key in cells)]
        header = f"{'T=' + format(T_ms, 'g') + ' ms':<10}" + ''.join(f"{kind.title:>16}" for kind in kinds)
        lines.append(header)
        lines.append('-' * len(header))
        for row in rows:
            lines.append(f"{row:<10}" + ''.join(f"{cells.get((row, kind.value), '-'):>16}" for kind in kinds))
        lines.append('')
    return '\n'.join(lines).rstrip('\n')


def sweep_windows(sessions: Sequence[Session], windows_ms: Optional[Sequence[float]] = None,
                  modalities: Optional[Sequence[Modality]] = None,
                  model_kinds: Optional[Sequence[ModelKind]] = None,
                  options: Optional[EvaluationOptions] = None) -> Dict[float, List[EvalReport]]:
    """Evaluate the table at every window length"""
    windows_ms = list(windows_ms or get_setting('WINDOW_SWEEP_MS', [100, 150, 200, 250]))
    results = {}
    for T_ms in windows_ms:
        dataset = build_dataset(sessions, T_ms, modalities)
        results[T_ms] = evaluate_table(dataset, modalities, model_kinds, options)
    return results


def offline_predictions(session: Session, classifier: GestureClassifier, T_ms: float) -> List[Dict]:
    """Per-window predictions over the labeled windows of a session, one window at a time.

    Windows whose features cannot be computed are left out, as the replay
    runtime does.
    """
    predictions = []
    for window in window_slices(session, T_ms):
        try:
            label, scores = classifier.predict_window(window, session.geometry)
        except FeatureError as e:
            logger.warning(f"Skipping window {window.n}: {str(e)}")
            continue
        predictions.append({'n': window.n, 'label': label, 'scores': scores})
    return predictions
