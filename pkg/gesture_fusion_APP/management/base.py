"""
Shared base for the gesture-fusion management commands.
Adds the global --config/--seed/--json flags and turns pipeline errors into
CommandError so both manage.py and the gesture-fusion entry point report them
the same way.
Location: gesture_fusion_APP/management/base.py
"""
import json
import logging
from typing import Dict, Optional

from django.core.management.base import BaseCommand, CommandError

from ..exceptions import GestureFusionError, InvalidConfiguration
from ..services.pipeline_config import PipelineConfig

logger = logging.getLogger(__name__)


class GestureCommand(BaseCommand):
    requires_system_checks = []

    def add_arguments(self, parser):
        parser.add_argument('--config', help='JSON file with pipeline settings')
        parser.add_argument('--seed', type=int, help='Seed for every stochastic stage')
        parser.add_argument('--json', action='store_true', help='Machine-readable JSON-lines output')
        self.add_command_arguments(parser)

    def add_command_arguments(self, parser):
        pass

    def handle(self, *args, **options):
        self.json_output = options.get('json', False)
        try:
            self.run_command(**options)
        except InvalidConfiguration as e:
            raise CommandError(f"{type(e).__name__}: {str(e)}", returncode=2) from e
        except GestureFusionError as e:
            logger.error(f"{type(e).__name__}: {str(e)}")
            raise CommandError(f"{type(e).__name__}: {str(e)}") from e

    def run_command(self, **options):
        raise NotImplementedError

    def pipeline_config(self, options: Dict, **overrides) -> PipelineConfig:
        return PipelineConfig.from_sources(options.get('config'), seed=options.get('seed'), **overrides)

    def emit(self, document: Dict, text: Optional[str] = None):
        """One JSON line with --json, otherwise the human-readable text"""
        if self.json_output:
            self.stdout.write(json.dumps(document))
        elif text is not None:
            self.stdout.write(text)

    def success(self, message: str):
        if not self.json_output:
            self.stdout.write(self.style.SUCCESS(message))
