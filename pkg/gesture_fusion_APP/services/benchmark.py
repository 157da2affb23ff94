"""
Per-window inference latency benchmark on synthetic inputs.
Location: gesture_fusion_APP/services/benchmark.py
"""
import logging
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Dict, List, Optional, Union

import numpy as np

from ..ai.classifiers import GestureClassifier, load_classifier
from ..ai.fusion import Modality
from ..ai.synthetic import synthetic_session_streams
from ..exceptions import InvalidConfiguration, MissingModel
from ..sensors.session import window_slices
from ..sensors.types import SensorKind, Session, SessionManifest, SyncWindow

logger = logging.getLogger(__name__)


@dataclass
class BenchReport:
    modality: str
    model_kind: str
    iterations: int
    min_ms: float
    mean_ms: float
    p95_ms: float
    predictions: List[int] = field(default_factory=list)

    def to_dict(self) -> Dict:
        return {
            'modality': self.modality,
            'model_kind': self.model_kind,
            'iterations': self.iterations,
            'min_ms': self.min_ms,
            'mean_ms': self.mean_ms,
            'p95_ms': self.p95_ms,
        }


def benchmark_window(modality: Modality, seed: int = 0) -> Session:
    """A one-gesture scripted session recorded by a sensor that provides the modality"""
    kind = SensorKind.DVS128 if modality.supported_by(SensorKind.DVS128) else SensorKind.DAVIS240
    geometry, events, emg, annotations, aps_frames = synthetic_session_streams(kind=kind, gestures=1, seed=seed)
    manifest = SessionManifest(
        subject_id='bench', session_id='0', annotations=tuple(annotations),
        events_file='', emg_file='',
    )
    return Session(manifest=manifest, geometry=geometry, events=events, emg=emg, aps_frames=tuple(aps_frames))


def bench(model: Optional[Union[str, Path, GestureClassifier]], modality: Optional[Union[str, Modality]] = None,
          iterations: int = 100, seed: int = 0) -> BenchReport:
    """Time feature extraction plus inference of one window, `iterations` times"""
    if iterations < 1:
        raise InvalidConfiguration(f"Benchmark needs at least one iteration, got {iterations}")
    if not model:
        raise MissingModel("No model given to benchmark")
    classifier = model if isinstance(model, GestureClassifier) else load_classifier(model)
    classifier.check_modality(modality)

    session = benchmark_window(classifier.modality, seed)
    window: SyncWindow = window_slices(session, 200)[0]
    extractor = classifier.extractor_for(session.geometry)

    timings_ns = np.empty(iterations, dtype=np.float64)
    predictions = []
    for i in range(iterations):
        started = time.perf_counter_ns()
        label, _ = classifier.predict_features(window, extractor)
        timings_ns[i] = time.perf_counter_ns() - started
        predictions.append(int(label))

    timings_ms = timings_ns / 1e6
    report = BenchReport(
        modality=classifier.modality.value,
        model_kind=classifier.kind,
        iterations=iterations,
        min_ms=float(timings_ms.min()),
        mean_ms=float(timings_ms.mean()),
        p95_ms=float(np.percentile(timings_ms, 95)),
        predictions=predictions,
    )
    logger.info(
        f"{report.model_kind} {report.modality}: min {report.min_ms:.3f} ms, "
        f"mean {report.mean_ms:.3f} ms, p95 {report.p95_ms:.3f} ms over {iterations} iterations"
    )
    return report
