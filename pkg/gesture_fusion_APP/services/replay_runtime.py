"""
Replay runtime: four concurrent roles connected by bounded queues.

    event source  --\
                     >-- processing (join by n, features, inference) --> output
    EMG source    --/

The sources cut a recorded session into per-window batches and push them,
either as fast as possible or paced by the recording clock. The processing
role is the only one touching the classifier. The output role serializes
records as JSON lines and owns the run summary.
Location: gesture_fusion_APP/services/replay_runtime.py
"""
import json
import logging
import queue
import threading
import time
from collections import deque
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Optional, Sequence, TextIO, Tuple

import numpy as np

from ..ai.classifiers import GestureClassifier, load_classifier
from ..exceptions import FeatureError, MissingModel
from ..features.pipeline import WindowFeatureExtractor
from ..sensors.session import stream_windows, window_slices
from ..sensors.types import GESTURES, ApsFrame, EventArray, Session, SyncWindow
from .pipeline_config import PipelineConfig

logger = logging.getLogger(__name__)

POLL_S = 0.05
END_OF_STREAM = object()


class RunStopped(Exception):
    """Raised inside a role when another role failed"""


@dataclass(frozen=True, eq=False)
class WindowBatch:
    """The part of window n delivered by one source: events and APS frames, or EMG samples"""
    n: int
    t_start: int
    t_end: int
    events: Optional[EventArray] = None
    aps_frames: Tuple[ApsFrame, ...] = ()
    emg_samples: Optional[np.ndarray] = None
    label: Optional[str] = None
    position: int = 0
    subject_id: Optional[str] = None

    @classmethod
    def of_events(cls, window: SyncWindow) -> 'WindowBatch':
        return cls(window.n, window.t_start, window.t_end, events=window.events, aps_frames=window.aps_frames,
                   label=window.label, position=window.position, subject_id=window.subject_id)

    @classmethod
    def of_emg(cls, window: SyncWindow) -> 'WindowBatch':
        return cls(window.n, window.t_start, window.t_end, emg_samples=window.emg_samples)


@dataclass(frozen=True)
class ClassificationRecord:
    n: int
    t_start_us: int
    t_end_us: int
    label: str
    scores: Tuple[float, ...]
    latency_us: int
    true_label: Optional[str] = None

    def to_dict(self) -> Dict:
        return {
            'n': self.n,
            't_start_us': self.t_start_us,
            't_end_us': self.t_end_us,
            'label': self.label,
            'scores': list(self.scores),
            'latency_us': self.latency_us,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())


@dataclass
class ReplaySummary:
    windows_produced: int = 0
    windows_classified: int = 0
    windows_dropped: int = 0
    windows_skipped: int = 0
    labeled_windows: int = 0
    correct: int = 0
    per_class: Dict[str, Dict[str, int]] = field(default_factory=dict)
    latency_mean_us: float = 0.0
    latency_p95_us: float = 0.0
    elapsed_s: float = 0.0

    @property
    def accuracy(self) -> Optional[float]:
        if not self.labeled_windows:
            return None
        return self.correct / self.labeled_windows

    def to_dict(self) -> Dict:
        return {
            'windows_produced': self.windows_produced,
            'windows_classified': self.windows_classified,
            'windows_dropped': self.windows_dropped,
            'windows_skipped': self.windows_skipped,
            'accuracy': self.accuracy,
            'per_class': self.per_class,
            'latency_mean_us': self.latency_mean_us,
            'latency_p95_us': self.latency_p95_us,
            'elapsed_s': self.elapsed_s,
        }


@dataclass
class ReplayResult:
    records: List[ClassificationRecord]
    summary: ReplaySummary


class BoundedWindowQueue:
    """Fixed-capacity FIFO of window batches.

    With drop_oldest a put on a full queue evicts the oldest batch and reports
    it through on_drop instead of blocking. Without it, put blocks until the
    consumer makes room.
    """

    def __init__(self, capacity: int, drop_oldest: bool, on_drop: Optional[Callable[[int], None]] = None,
                 name: str = 'queue'):
        self.capacity = capacity
        self.drop_oldest = drop_oldest
        self.on_drop = on_drop
        self.name = name
        self.dropped: List[int] = []
        self._items = deque()
        self._closed = False
        self._changed = threading.Condition()

    def __len__(self) -> int:
        with self._changed:
            return len(self._items)

    def put(self, batch: WindowBatch, stop_event: Optional[threading.Event] = None):
        with self._changed:
            if self.drop_oldest:
                if len(self._items) >= self.capacity:
                    evicted = self._items.popleft()
                    self.dropped.append(evicted.n)
                    logger.debug(f"{self.name} full, dropped window {evicted.n}")
                    if self.on_drop:
                        self.on_drop(evicted.n)
            else:
                while len(self._items) >= self.capacity:
                    if stop_event is not None and stop_event.is_set():
                        raise RunStopped()
                    self._changed.wait(POLL_S)
            self._items.append(batch)
            self._changed.notify_all()

    def close(self):
        """Mark the end of the stream; queued batches stay readable"""
        with self._changed:
            self._closed = True
            self._changed.notify_all()

    def get(self, timeout: Optional[float] = None, stop_event: Optional[threading.Event] = None):
        """Next batch, END_OF_STREAM once closed and drained; queue.Empty on timeout"""
        deadline = None if timeout is None else time.monotonic() + timeout
        with self._changed:
            while not self._items:
                if self._closed:
                    return END_OF_STREAM
                if stop_event is not None and stop_event.is_set():
                    raise RunStopped()
                wait = POLL_S
                if deadline is not None:
                    remaining = deadline - time.monotonic()
                    if remaining <= 0:
                        raise queue.Empty()
                    wait = min(wait, remaining)
                self._changed.wait(wait)
            batch = self._items.popleft()
            self._changed.notify_all()
            return batch


class _Role(threading.Thread):
    """Runtime thread that reports its failure to the run instead of dying silently"""

    def __init__(self, run: '_ReplayRun', name: str):
        super().__init__(name=name, daemon=True)
        self.run_state = run

    def run(self):
        try:
            self.work()
        except RunStopped:
            logger.debug(f"{self.name} stopped")
        except Exception as e:
            logger.error(f"{self.name} failed: {type(e).__name__}: {str(e)}")
            self.run_state.fail(e)

    def work(self):
        raise NotImplementedError


class SourceRole(_Role):
    """Pushes its own part of every window, paced by the recording clock in realtime mode"""

    def __init__(self, run: '_ReplayRun', name: str, windows: Sequence[SyncWindow],
                 cut: Callable[[SyncWindow], WindowBatch], target: BoundedWindowQueue):
        super().__init__(run, name)
        self.windows = windows
        self.cut = cut
        self.target = target

    def work(self):
        config = self.run_state.config
        stop_event = self.run_state.stop_event
        origin_us = self.windows[0].t_start if self.windows else 0
        started = time.monotonic()
        try:
            for window in self.windows:
                if config.replay_speed == 'realtime':
                    delay = started + (window.t_end - origin_us) / 1e6 - time.monotonic()
                    if delay > 0 and stop_event.wait(delay):
                        raise RunStopped()
                if stop_event.is_set():
                    raise RunStopped()
                self.target.put(self.cut(window), stop_event)
        finally:
            self.target.close()


class ProcessingRole(_Role):
    """Joins the two batches of each window by index, then extracts features and predicts"""

    def __init__(self, run: '_ReplayRun', events: BoundedWindowQueue, emg: BoundedWindowQueue):
        super().__init__(run, 'processing')
        self.events = events
        self.emg = emg

    def _take(self, source: BoundedWindowQueue, partner_waiting: bool):
        config = self.run_state.config
        timeout = config.join_timeout_s if (partner_waiting and config.drops_enabled) else None
        return source.get(timeout=timeout, stop_event=self.run_state.stop_event)

    def work(self):
        run = self.run_state
        event_batch = emg_batch = None
        events_done = emg_done = False
        while True:
            if event_batch is None and not events_done:
                try:
                    event_batch = self._take(self.events, emg_batch is not None)
                except queue.Empty:
                    run.drop(emg_batch.n, 'no event batch within the join timeout')
                    emg_batch = None
                    continue
                if event_batch is END_OF_STREAM:
                    event_batch, events_done = None, True
            if emg_batch is None and not emg_done:
                try:
                    emg_batch = self._take(self.emg, event_batch is not None)
                except queue.Empty:
                    run.drop(event_batch.n, 'no EMG batch within the join timeout')
                    event_batch = None
                    continue
                if emg_batch is END_OF_STREAM:
                    emg_batch, emg_done = None, True

            if event_batch is not None and emg_batch is not None:
                if event_batch.n == emg_batch.n:
                    self.process(event_batch, emg_batch)
                    event_batch = emg_batch = None
                elif event_batch.n < emg_batch.n:
                    run.drop(event_batch.n, 'EMG batch was evicted')
                    event_batch = None
                else:
                    run.drop(emg_batch.n, 'event batch was evicted')
                    emg_batch = None
            elif event_batch is not None:
                run.drop(event_batch.n, 'EMG stream ended')
                event_batch = None
            elif emg_batch is not None:
                run.drop(emg_batch.n, 'event stream ended')
                emg_batch = None
            elif events_done and emg_done:
                break
        run.output.put(END_OF_STREAM)

    def process(self, event_batch: WindowBatch, emg_batch: WindowBatch):
        run = self.run_state
        window = SyncWindow(
            n=event_batch.n,
            t_start=event_batch.t_start,
            t_end=event_batch.t_end,
            emg_samples=emg_batch.emg_samples,
            events=event_batch.events,
            aps_frames=event_batch.aps_frames,
            label=event_batch.label,
            position=event_batch.position,
            subject_id=event_batch.subject_id,
        )
        started = time.perf_counter_ns()
        try:
            index, scores = run.classifier.predict_features(window, run.extractor)
        except FeatureError as e:
            logger.warning(f"Skipping window {window.n}: {str(e)}")
            run.output.put(('skip', window.n))
            return
        latency_us = (time.perf_counter_ns() - started) // 1000
        record = ClassificationRecord(
            n=window.n,
            t_start_us=window.t_start,
            t_end_us=window.t_end,
            label=GESTURES[index],
            scores=tuple(float(score) for score in scores),
            latency_us=int(latency_us),
            true_label=window.label,
        )
        run.output.put(('record', record))


class OutputRole(_Role):
    """Serializes records and accumulates the run summary"""

    def __init__(self, run: '_ReplayRun', sink: Optional[TextIO]):
        super().__init__(run, 'output')
        self.sink = sink
        self.records: List[ClassificationRecord] = []
        self.dropped = set()
        self.skipped = set()

    def work(self):
        run = self.run_state
        while True:
            try:
                item = run.output.get(timeout=POLL_S)
            except queue.Empty:
                if run.stop_event.is_set():
                    raise RunStopped()
                continue
            if item is END_OF_STREAM:
                break
            kind, payload = item
            if kind == 'record':
                self.records.append(payload)
                if self.sink is not None:
                    self.sink.write(payload.to_json() + '\n')
            elif kind == 'drop':
                self.dropped.add(payload)
            elif kind == 'skip':
                self.skipped.add(payload)
        if self.sink is not None:
            self.sink.flush()

    def summarize(self, produced: int) -> ReplaySummary:
        classified = {record.n for record in self.records}
        lost = (self.dropped | self.skipped) - classified
        summary = ReplaySummary(
            windows_produced=produced,
            windows_classified=len(self.records),
            windows_dropped=len(lost),
            windows_skipped=len(self.skipped),
        )
        for record in self.records:
            if record.true_label is None:
                continue
            counts = summary.per_class.setdefault(record.true_label, {'windows': 0, 'correct': 0})
            counts['windows'] += 1
            summary.labeled_windows += 1
            if record.label == record.true_label:
                counts['correct'] += 1
                summary.correct += 1
        latencies = np.array([record.latency_us for record in self.records], dtype=np.float64)
        if latencies.size:
            summary.latency_mean_us = float(latencies.mean())
            summary.latency_p95_us = float(np.percentile(latencies, 95))
        if summary.windows_classified + summary.windows_dropped != produced:
            logger.warning(
                f"Replay accounted for {summary.windows_classified + summary.windows_dropped} "
                f"of {produced} windows"
            )
        return summary


class _ReplayRun:
    """State shared by the four roles of one replay"""

    def __init__(self, config: PipelineConfig, classifier: GestureClassifier, extractor: WindowFeatureExtractor):
        self.config = config
        self.classifier = classifier
        self.extractor = extractor
        self.stop_event = threading.Event()
        self.output = queue.Queue()
        self.errors: List[BaseException] = []
        self._lock = threading.Lock()

    def fail(self, error: BaseException):
        with self._lock:
            self.errors.append(error)
        self.stop_event.set()

    def drop(self, n: int, reason: str):
        logger.warning(f"Dropped window {n}: {reason}")
        self.output.put(('drop', n))


def replay_windows(session: Session, T_ms: float) -> List[SyncWindow]:
    """Labeled gesture windows, or contiguous windows when the session has no annotations"""
    if session.annotations:
        return window_slices(session, T_ms)
    return stream_windows(session, T_ms)


def run_replay(session: Session, config: PipelineConfig, classifier: Optional[GestureClassifier] = None,
               sink: Optional[TextIO] = None) -> ReplayResult:
    """Replay a recorded session through the four-role runtime.

    Records reach the sink in increasing window order. A failure in any
    role stops the run and is re-raised here.
    """
    if classifier is None:
        if not config.model_path:
            raise MissingModel("No model path configured for replay")
        classifier = load_classifier(config.model_path)
    classifier.check_modality(config.modality)
    extractor = classifier.extractor_for(session.geometry)

    windows = replay_windows(session, config.window_ms)
    run = _ReplayRun(config, classifier, extractor)
    drops_enabled = config.drops_enabled
    event_queue = BoundedWindowQueue(config.queue_capacity, drops_enabled,
                                     on_drop=lambda n: run.drop(n, 'event queue full'), name='event queue')
    emg_queue = BoundedWindowQueue(config.queue_capacity, drops_enabled,
                                   on_drop=lambda n: run.drop(n, 'EMG queue full'), name='EMG queue')

    output = OutputRole(run, sink)
    roles = [
        SourceRole(run, 'event-source', windows, WindowBatch.of_events, event_queue),
        SourceRole(run, 'emg-source', windows, WindowBatch.of_emg, emg_queue),
        ProcessingRole(run, event_queue, emg_queue),
        output,
    ]
    logger.info(
        f"Replaying {session.subject_id}/{session.manifest.session_id}: {len(windows)} windows of "
        f"{config.window_ms:g} ms, {classifier.kind} {classifier.modality.value}, "
        f"speed={config.replay_speed}, drop policy={config.drop_policy}"
    )
    started = time.monotonic()
    for role in roles:
        role.start()
    for role in roles:
        role.join()
    if run.errors:
        raise run.errors[0]

    summary = output.summarize(len(windows))
    summary.elapsed_s = time.monotonic() - started
    logger.info(
        f"Replay done: {summary.windows_classified} classified, {summary.windows_dropped} dropped, "
        f"accuracy={summary.accuracy}, mean latency {summary.latency_mean_us:.0f} us"
    )
    return ReplayResult(records=output.records, summary=summary)
