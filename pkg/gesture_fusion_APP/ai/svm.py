"""
Support vector machines for gesture classification.
Binary soft-margin SVMs are trained with SMO (maximal violating pair working
set, two-variable analytic updates); multiclass models combine one-vs-rest
binaries and predict by argmax of the raw decision values.
Location: gesture_fusion_APP/ai/svm.py
"""
import logging
from collections import OrderedDict
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from joblib import Parallel, delayed
from sklearn.model_selection import StratifiedKFold
from sklearn.preprocessing import StandardScaler

from ..conf import get_setting
from ..exceptions import (
    DimensionMismatch, InsufficientDataForFolds, InvalidConfiguration, NonFiniteFeature, SingleClassData,
)
from ..sensors.types import GESTURES

logger = logging.getLogger(__name__)

TAU = 1e-12
FULL_KERNEL_LIMIT = 5000
ABSENT_CLASS_DECISION = -1e9


class KernelKind(str, Enum):
    LINEAR = 'linear'
    RBF = 'rbf'


@dataclass(frozen=True)
class KernelSpec:
    kind: KernelKind
    gamma: Optional[float] = None

    def __post_init__(self):
        object.__setattr__(self, 'kind', KernelKind(self.kind))
        if self.kind is KernelKind.RBF and self.gamma is not None and self.gamma <= 0:
            raise InvalidConfiguration(f"RBF gamma must be positive, got {self.gamma}")

    @classmethod
    def linear(cls) -> 'KernelSpec':
        return cls(KernelKind.LINEAR)

    @classmethod
    def rbf(cls, gamma: Optional[float] = None) -> 'KernelSpec':
        return cls(KernelKind.RBF, gamma)

    def resolved(self, d: int) -> 'KernelSpec':
        """Fill the default gamma = 1/d for RBF kernels"""
        if self.kind is KernelKind.RBF and self.gamma is None:
            return KernelSpec(KernelKind.RBF, 1.0 / d)
        return self


def kernel_eval(spec: KernelSpec, x: Sequence[float], y: Sequence[float]) -> float:
    x = np.asarray(x, dtype=np.float64).ravel()
    y = np.asarray(y, dtype=np.float64).ravel()
    if x.shape != y.shape:
        raise DimensionMismatch(f"Kernel arguments have dimensions {len(x)} and {len(y)}")
    if spec.kind is KernelKind.LINEAR:
        return float(np.dot(x, y))
    gamma = spec.resolved(len(x)).gamma
    diff = x - y
    return float(np.exp(-gamma * np.dot(diff, diff)))


def kernel_matrix(spec: KernelSpec, A: np.ndarray, B: np.ndarray) -> np.ndarray:
    """Gram matrix K[i, j] = k(A[i], B[j])"""
    inner = A @ B.T
    if spec.kind is KernelKind.LINEAR:
        return inner
    sq = np.sum(A * A, axis=1)[:, np.newaxis] + np.sum(B * B, axis=1)[np.newaxis, :] - 2.0 * inner
    return np.exp(-spec.gamma * np.maximum(sq, 0.0))


@dataclass(frozen=True, eq=False)
class BinarySvmModel:
    """f(x) = sum_i coef_i k(sv_i, x) + bias, with coef_i = alpha_i y_i"""
    support_vectors: np.ndarray
    dual_coefs: np.ndarray
    bias: float
    kernel: KernelSpec
    C: float = 1.0
    support_indices: Tuple[int, ...] = ()
    iterations: int = 0

    @property
    def d(self) -> int:
        return self.support_vectors.shape[1]

    def decision_function(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        return kernel_matrix(self.kernel, X, self.support_vectors) @ self.dual_coefs + self.bias


@dataclass(frozen=True, eq=False)
class MulticlassSvmModel:
    binaries: Tuple[BinarySvmModel, ...]
    labels: Tuple[int, ...]
    d: int
    kernel: KernelSpec

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        """(N, classes) one-vs-rest decision values"""
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.d:
            raise DimensionMismatch(f"Model expects {self.d} features, got {X.shape[1]}")
        return np.column_stack([binary.decision_function(X) for binary in self.binaries])


class _KernelRows:
    """Signed rows Q[i] = y_i y K(x_i, .) of the dual Hessian, fully cached for small problems"""

    def __init__(self, X: np.ndarray, y: np.ndarray, spec: KernelSpec, cache_rows: int = 512):
        self.X = X
        self.y = y
        self.spec = spec
        self.full = None
        self.rows = OrderedDict()
        self.cache_rows = cache_rows
        if len(X) <= FULL_KERNEL_LIMIT:
            self.full = kernel_matrix(spec, X, X) * np.outer(y, y)
        if spec.kind is KernelKind.LINEAR:
            self.diagonal = np.sum(X * X, axis=1)
        else:
            self.diagonal = np.ones(len(X))

    def __getitem__(self, i: int) -> np.ndarray:
        if self.full is not None:
            return self.full[i]
        row = self.rows.get(i)
        if row is None:
            row = self.y[i] * self.y * kernel_matrix(self.spec, self.X[i:i + 1], self.X)[0]
            self.rows[i] = row
            if len(self.rows) > self.cache_rows:
                self.rows.popitem(last=False)
        else:
            self.rows.move_to_end(i)
        return row


def _check_features(X: np.ndarray):
    if not np.isfinite(X).all():
        row = int(np.argmax(~np.isfinite(X).all(axis=1)))
        raise NonFiniteFeature(f"Feature row {row} contains NaN or infinite values")


def _compute_bias(alpha: np.ndarray, y: np.ndarray, G: np.ndarray, C: float) -> float:
    """Bias b = -rho; rho averages y*G over free vectors, else the feasible midpoint"""
    yG = y * G
    at_upper = alpha >= C
    at_lower = alpha <= 0
    free = ~at_upper & ~at_lower
    if free.any():
        return -float(np.mean(yG[free]))
    upper_bound = yG[(at_upper & (y < 0)) | (at_lower & (y > 0))]
    lower_bound = yG[(at_upper & (y > 0)) | (at_lower & (y < 0))]
    ub = upper_bound.min() if len(upper_bound) else np.inf
    lb = lower_bound.max() if len(lower_bound) else -np.inf
    return -float((ub + lb) / 2.0)


def train_binary(X: np.ndarray, y: Sequence[int], C: float, spec: KernelSpec,
                 tolerance: Optional[float] = None, max_iterations: Optional[int] = None) -> BinarySvmModel:
    """Solve the soft-margin dual for labels in {-1, +1}"""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    if len(X) != len(y):
        raise DimensionMismatch(f"{len(X)} feature rows but {len(y)} labels")
    if not np.isin(y, (-1.0, 1.0)).all():
        raise SingleClassData("Binary labels must be -1 or +1")
    if not ((y > 0).any() and (y < 0).any()):
        raise SingleClassData("Binary SVM training needs samples of both classes")
    if C <= 0:
        raise InvalidConfiguration(f"Slack parameter C must be positive, got {C}")
    _check_features(X)

    n = len(y)
    spec = spec.resolved(X.shape[1])
    tolerance = tolerance if tolerance is not None else get_setting('SVM_TOLERANCE', 1e-3)
    if max_iterations is None:
        max_iterations = max(get_setting('SVM_MAX_PASSES', 10) * n * n, 100000)

    Q = _KernelRows(X, y, spec)
    QD = Q.diagonal
    alpha = np.zeros(n)
    G = -np.ones(n)

    iteration = 0
    converged = False
    while iteration < max_iterations:
        minus_yG = -y * G
        up = ((y > 0) & (alpha < C)) | ((y < 0) & (alpha > 0))
        low = ((y > 0) & (alpha > 0)) | ((y < 0) & (alpha < C))
        i = int(np.argmax(np.where(up, minus_yG, -np.inf)))
        j = int(np.argmin(np.where(low, minus_yG, np.inf)))
        if not up[i] or not low[j] or minus_yG[i] - minus_yG[j] < tolerance:
            converged = True
            break
        iteration += 1

        Q_i, Q_j = Q[i], Q[j]
        old_i, old_j = alpha[i], alpha[j]
        a_i, a_j = old_i, old_j
        if y[i] != y[j]:
            quad = max(QD[i] + QD[j] + 2.0 * Q_i[j], TAU)
            delta = (-G[i] - G[j]) / quad
            diff = a_i - a_j
            a_i += delta
            a_j += delta
            if diff > 0:
                if a_j < 0:
                    a_j, a_i = 0.0, diff
            elif a_i < 0:
                a_i, a_j = 0.0, -diff
            if diff > 0:
                if a_i > C:
                    a_i, a_j = C, C - diff
            elif a_j > C:
                a_j, a_i = C, C + diff
        else:
            quad = max(QD[i] + QD[j] - 2.0 * Q_i[j], TAU)
            delta = (G[i] - G[j]) / quad
            total = a_i + a_j
            a_i -= delta
            a_j += delta
            if total > C:
                if a_i > C:
                    a_i, a_j = C, total - C
            elif a_j < 0:
                a_j, a_i = 0.0, total
            if total > C:
                if a_j > C:
                    a_j, a_i = C, total - C
            elif a_i < 0:
                a_i, a_j = 0.0, total

        alpha[i], alpha[j] = a_i, a_j
        G += Q_i * (a_i - old_i) + Q_j * (a_j - old_j)

    if not converged:
        logger.warning(f"SMO stopped at the iteration cap ({max_iterations}) before reaching tolerance {tolerance}")

    support = np.flatnonzero(alpha > 0)
    model = BinarySvmModel(
        support_vectors=X[support].copy(),
        dual_coefs=(alpha[support] * y[support]),
        bias=_compute_bias(alpha, y, G, C),
        kernel=spec,
        C=float(C),
        support_indices=tuple(int(s) for s in support),
        iterations=iteration,
    )
    logger.debug(f"SMO finished after {iteration} iterations with {len(support)} support vectors")
    return model


def kkt_residuals(model: BinarySvmModel, X: np.ndarray, y: Sequence[int]) -> np.ndarray:
    """Per-point violation of the soft-margin KKT conditions in functional-margin units"""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    y = np.asarray(y, dtype=np.float64).ravel()
    alpha = np.zeros(len(y))
    alpha[list(model.support_indices)] = np.abs(model.dual_coefs)
    margin = y * model.decision_function(X) - 1.0

    residuals = np.zeros(len(y))
    at_lower = alpha <= 0
    at_upper = alpha >= model.C
    free = ~at_lower & ~at_upper
    residuals[at_lower] = np.maximum(0.0, -margin[at_lower])
    residuals[at_upper] = np.maximum(0.0, margin[at_upper])
    residuals[free] = np.abs(margin[free])
    return residuals


def _one_vs_rest_targets(labels: np.ndarray, label: int) -> np.ndarray:
    return np.where(labels == label, 1.0, -1.0)


def absent_class_binary(d: int, spec: KernelSpec, C: float = 1.0) -> BinarySvmModel:
    """Constant decision ABSENT_CLASS_DECISION for a class with no training samples"""
    return BinarySvmModel(
        support_vectors=np.zeros((0, d)), dual_coefs=np.zeros(0), bias=ABSENT_CLASS_DECISION, kernel=spec, C=float(C),
    )


def train_multiclass(X: np.ndarray, labels: Sequence[int], C: float, spec: KernelSpec,
                     n_jobs: Optional[int] = None, n_classes: int = len(GESTURES)) -> MulticlassSvmModel:
    """One binary SVM per class, that class against all others; every one of n_classes keeps a slot"""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64).ravel()
    classes = np.unique(labels)
    if len(classes) < 2:
        raise SingleClassData(f"Multiclass training needs at least two classes, got {classes.tolist()}")
    if classes[0] < 0 or classes[-1] >= n_classes:
        raise InvalidConfiguration(f"Class labels must lie in [0, {n_classes}), got {classes.tolist()}")
    _check_features(X)

    spec = spec.resolved(X.shape[1])
    n_jobs = n_jobs if n_jobs is not None else get_setting('N_JOBS', 1)
    trained = Parallel(n_jobs=n_jobs)(
        delayed(train_binary)(X, _one_vs_rest_targets(labels, label), C, spec)
        for label in classes
    )
    by_class = dict(zip(classes.tolist(), trained))
    absent = [label for label in range(n_classes) if label not in by_class]
    if absent:
        logger.warning(f"Classes {absent} have no training samples and can never be predicted")
    return MulticlassSvmModel(
        binaries=tuple(by_class.get(label) or absent_class_binary(X.shape[1], spec, C) for label in range(n_classes)),
        labels=tuple(range(n_classes)),
        d=X.shape[1],
        kernel=spec,
    )


def predict(model: MulticlassSvmModel, x: Sequence[float]) -> Tuple[int, np.ndarray]:
    """(label, decision values); ties go to the lowest class index"""
    x = np.asarray(x, dtype=np.float64).ravel()
    if len(x) != model.d:
        raise DimensionMismatch(f"Model expects {model.d} features, got {len(x)}")
    values = model.decision_values(x[np.newaxis, :])[0]
    return model.labels[int(np.argmax(values))], values


def predict_labels(model: MulticlassSvmModel, X: np.ndarray) -> np.ndarray:
    values = model.decision_values(X)
    return np.asarray(model.labels)[np.argmax(values, axis=1)]


def stratified_folds(labels: np.ndarray, folds: int, seed: int) -> List[Tuple[np.ndarray, np.ndarray]]:
    """Shuffled stratified (train, test) index pairs; every class must fill every fold"""
    labels = np.asarray(labels).ravel()
    _, counts = np.unique(labels, return_counts=True)
    if len(counts) == 0 or counts.min() < folds:
        raise InsufficientDataForFolds(
            f"{folds}-fold cross-validation needs at least {folds} samples per class, "
            f"smallest class has {int(counts.min()) if len(counts) else 0}"
        )
    splitter = StratifiedKFold(n_splits=folds, shuffle=True, random_state=seed)
    return list(splitter.split(np.zeros(len(labels)), labels))


def _fold_accuracy(X: np.ndarray, labels: np.ndarray, train_index: np.ndarray, test_index: np.ndarray,
                   C: float, spec: KernelSpec) -> float:
    scaler = StandardScaler().fit(X[train_index])
    model = train_multiclass(scaler.transform(X[train_index]), labels[train_index], C, spec, n_jobs=1)
    predicted = predict_labels(model, scaler.transform(X[test_index]))
    return float(np.mean(predicted == labels[test_index]))


def slack_scores(X: np.ndarray, labels: Sequence[int], spec: KernelSpec, C_grid: Sequence[float],
                 splits: Sequence[Tuple[np.ndarray, np.ndarray]],
                 n_jobs: Optional[int] = None) -> Dict[float, List[float]]:
    """Per-fold validation accuracies of every grid value on the given splits"""
    X = np.atleast_2d(np.asarray(X, dtype=np.float64))
    labels = np.asarray(labels, dtype=np.int64).ravel()
    spec = spec.resolved(X.shape[1])
    n_jobs = n_jobs if n_jobs is not None else get_setting('N_JOBS', 1)
    grid = [float(C) for C in C_grid]
    jobs = [(C, train_index, test_index) for C in grid for train_index, test_index in splits]
    accuracies = Parallel(n_jobs=n_jobs)(
        delayed(_fold_accuracy)(X, labels, train_index, test_index, C, spec)
        for C, train_index, test_index in jobs
    )
    scores = {C: [] for C in grid}
    for (C, _, _), accuracy in zip(jobs, accuracies):
        scores[C].append(accuracy)
    return scores


def best_slack(scores: Dict[float, List[float]]) -> float:
    """Grid value with the highest mean accuracy; ties go to the smallest C"""
    best_C, best_mean = None, -np.inf
    for C in sorted(scores):
        mean = float(np.mean(scores[C]))
        if mean > best_mean:
            best_C, best_mean = C, mean
    return best_C


def select_slack(X: np.ndarray, labels: Sequence[int], spec: KernelSpec,
                 C_grid: Optional[Sequence[float]] = None, folds: Optional[int] = None,
                 seed: Optional[int] = None, n_jobs: Optional[int] = None) -> float:
    """Choose C by mean stratified k-fold validation accuracy"""
    C_grid = list(C_grid if C_grid is not None else get_setting('SVM_C_GRID', [0.01, 0.1, 1.0, 10.0, 100.0]))
    if not C_grid:
        raise InvalidConfiguration("The slack grid must not be empty")
    folds = folds or get_setting('CV_FOLDS', 5)
    seed = seed if seed is not None else get_setting('DEFAULT_SEED', 0)

    if len(C_grid) == 1:
        return float(C_grid[0])
    labels = np.asarray(labels, dtype=np.int64).ravel()
    splits = stratified_folds(labels, folds, seed)
    scores = slack_scores(X, labels, spec, C_grid, splits, n_jobs=n_jobs)
    C = best_slack(scores)
    logger.info(
        f"Selected C={C} ({spec.kind.value}) from "
        + ', '.join(f"{c}: {np.mean(a):.3f}" for c, a in sorted(scores.items()))
    )
    return C


@dataclass(eq=False)
class SvmClassifier:
    """A multiclass SVM together with the z-score standardization it was trained under"""
    model: MulticlassSvmModel
    scaler: StandardScaler
    modality: Optional[str] = None
    metadata: Dict = field(default_factory=dict)

    FORMAT = 'gesture-fusion-svm'

    @classmethod
    def fit(cls, X: np.ndarray, labels: Sequence[int], spec: KernelSpec, C: float,
            modality: Optional[str] = None, n_jobs: Optional[int] = None) -> 'SvmClassifier':
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        _check_features(X)
        scaler = StandardScaler().fit(X)
        model = train_multiclass(scaler.transform(X), labels, C, spec, n_jobs=n_jobs)
        return cls(model=model, scaler=scaler, modality=modality, metadata={'C': float(C)})

    @property
    def d(self) -> int:
        return self.model.d

    def decision_values(self, X: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != self.model.d:
            raise DimensionMismatch(f"Model expects {self.model.d} features, got {X.shape[1]}")
        return self.model.decision_values(self.scaler.transform(X))

    def predict(self, x: Sequence[float]) -> Tuple[int, np.ndarray]:
        x = np.asarray(x, dtype=np.float64).ravel()
        if len(x) != self.model.d:
            raise DimensionMismatch(f"Model expects {self.model.d} features, got {len(x)}")
        return predict(self.model, self.scaler.transform(x[np.newaxis, :])[0])

    def to_document(self) -> Dict:
        kernel = self.model.kernel
        return {
            'format': self.FORMAT,
            'version': 1,
            'modality': self.modality,
            'kernel': kernel.kind.value,
            'gamma': kernel.gamma,
            'd': self.model.d,
            'C': self.metadata.get('C'),
            'labels': list(self.model.labels),
            'classes': [
                {
                    'support_vectors': binary.support_vectors.tolist(),
                    'dual_coefs': binary.dual_coefs.tolist(),
                    'bias': binary.bias,
                }
                for binary in self.model.binaries
            ],
            'standardization': {
                'mean': self.scaler.mean_.tolist(),
                'std': self.scaler.scale_.tolist(),
            },
        }

    @classmethod
    def from_document(cls, document: Dict) -> 'SvmClassifier':
        kernel = KernelSpec(document['kernel'], document.get('gamma'))
        d = int(document['d'])
        C = document.get('C') or 1.0
        binaries = tuple(
            BinarySvmModel(
                support_vectors=np.asarray(item['support_vectors'], dtype=np.float64).reshape(-1, d),
                dual_coefs=np.asarray(item['dual_coefs'], dtype=np.float64),
                bias=float(item['bias']),
                kernel=kernel,
                C=float(C),
            )
            for item in document['classes']
        )
        model = MulticlassSvmModel(
            binaries=binaries, labels=tuple(int(label) for label in document['labels']), d=d, kernel=kernel,
        )
        mean = np.asarray(document['standardization']['mean'], dtype=np.float64)
        std = np.asarray(document['standardization']['std'], dtype=np.float64)
        if len(mean) != d or len(std) != d:
            raise DimensionMismatch(f"Standardization has {len(mean)} entries for a {d}-feature model")
        scaler = StandardScaler()
        scaler.mean_ = mean
        scaler.scale_ = std
        scaler.var_ = std ** 2
        scaler.n_features_in_ = d
        scaler.n_samples_seen_ = 0
        return cls(model=model, scaler=scaler, modality=document.get('modality'), metadata={'C': C})
