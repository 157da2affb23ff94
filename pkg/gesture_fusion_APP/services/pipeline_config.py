"""
Runtime configuration of the replay pipeline.
Values come from the GESTURE_FUSION settings, then an optional JSON config
file, then explicit command-line overrides (last one wins).
Location: gesture_fusion_APP/services/pipeline_config.py
"""
import json
import logging
from dataclasses import asdict, dataclass, fields
from pathlib import Path
from typing import Dict, Optional, Union

from ..ai.fusion import Modality
from ..conf import get_setting
from ..exceptions import InvalidConfiguration, MissingFile

logger = logging.getLogger(__name__)

REPLAY_SPEEDS = ('max', 'realtime')
DROP_POLICIES = ('keep-latest', 'none')


@dataclass
class PipelineConfig:
    window_ms: float = 200.0
    modality: Optional[str] = None
    model_path: Optional[str] = None
    replay_speed: str = 'max'
    queue_capacity: int = 8
    drop_policy: str = 'keep-latest'
    join_timeout_factor: float = 2.0
    seed: int = 0

    @classmethod
    def from_settings(cls) -> 'PipelineConfig':
        return cls(
            window_ms=float(get_setting('WINDOW_MS', 200)),
            replay_speed=get_setting('REPLAY_SPEED', 'max'),
            queue_capacity=int(get_setting('QUEUE_CAPACITY', 8)),
            drop_policy=get_setting('DROP_POLICY', 'keep-latest'),
            join_timeout_factor=float(get_setting('JOIN_TIMEOUT_FACTOR', 2.0)),
            seed=int(get_setting('DEFAULT_SEED', 0)),
        )

    @classmethod
    def from_sources(cls, json_path: Optional[Union[str, Path]] = None, **overrides) -> 'PipelineConfig':
        """Settings defaults < JSON config file < explicit overrides (None means not given)"""
        values = asdict(cls.from_settings())
        if json_path:
            values.update(cls._read_json(json_path))
        values.update({key: value for key, value in overrides.items() if value is not None})
        config = cls(**values)
        config.validate()
        return config

    @classmethod
    def _read_json(cls, json_path: Union[str, Path]) -> Dict:
        path = Path(json_path)
        if not path.exists():
            raise MissingFile(f"Config file not found: {path}")
        try:
            document = json.loads(path.read_text(encoding='utf-8'))
        except json.JSONDecodeError as e:
            raise InvalidConfiguration(f"{path.name} is not valid JSON: {str(e)}")
        if not isinstance(document, dict):
            raise InvalidConfiguration(f"{path.name} must contain a JSON object")
        known = {f.name for f in fields(cls)}
        unknown = set(document) - known
        if unknown:
            raise InvalidConfiguration(f"Unknown config keys in {path.name}: {', '.join(sorted(unknown))}")
        return document

    def validate(self):
        try:
            self.window_ms = float(self.window_ms)
            self.queue_capacity = int(self.queue_capacity)
            self.join_timeout_factor = float(self.join_timeout_factor)
            self.seed = int(self.seed)
        except (TypeError, ValueError) as e:
            raise InvalidConfiguration(f"Invalid numeric config value: {str(e)}")
        if self.window_ms <= 0:
            raise InvalidConfiguration(f"Window length must be positive, got {self.window_ms} ms")
        if self.queue_capacity < 1:
            raise InvalidConfiguration(f"Queue capacity must be at least 1, got {self.queue_capacity}")
        if self.replay_speed not in REPLAY_SPEEDS:
            raise InvalidConfiguration(f"Replay speed must be one of {REPLAY_SPEEDS}, got '{self.replay_speed}'")
        if self.drop_policy not in DROP_POLICIES:
            raise InvalidConfiguration(f"Drop policy must be one of {DROP_POLICIES}, got '{self.drop_policy}'")
        if self.join_timeout_factor <= 0:
            raise InvalidConfiguration("Join timeout factor must be positive")
        if self.modality is not None:
            self.modality = Modality.parse(self.modality).value

    @property
    def drops_enabled(self) -> bool:
        return self.drop_policy == 'keep-latest'

    @property
    def join_timeout_s(self) -> float:
        return self.join_timeout_factor * self.window_ms / 1000.0
