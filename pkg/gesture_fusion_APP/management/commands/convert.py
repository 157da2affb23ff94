"""
Model container conversion (FGCN <-> JSON) and synthetic session generation.
Location: gesture_fusion_APP/management/commands/convert.py
"""
import json
from pathlib import Path

from django.core.management.base import CommandError

from gesture_fusion_APP.ai.cnn.serialization import (
    MAGIC, from_json_document, read_bytes, to_json_document, write_bytes,
)
from gesture_fusion_APP.ai.synthetic import make_synthetic_session
from gesture_fusion_APP.exceptions import ModelFormatError
from gesture_fusion_APP.management.base import GestureCommand


class Command(GestureCommand):
    help = 'Convert an FGCN model to JSON and back, or write a synthetic recording session'

    def add_command_arguments(self, parser):
        parser.add_argument('input', nargs='?', help='FGCN container or FGCN JSON document')
        parser.add_argument('output', nargs='?', help='Destination file')
        parser.add_argument('--synthetic-session', metavar='DIR', help='Write a scripted session to DIR')
        parser.add_argument('--sensor', default='DVS128', choices=['DVS128', 'DAVIS240'])
        parser.add_argument('--gestures', type=int, default=25)
        parser.add_argument('--subject', default='s01')
        parser.add_argument('--session', default='1')

    def run_command(self, **options):
        if options['synthetic_session']:
            manifest = make_synthetic_session(
                options['synthetic_session'], subject_id=options['subject'], session_id=options['session'],
                kind=options['sensor'], gestures=options['gestures'], seed=self.pipeline_config(options).seed,
            )
            self.emit({'manifest': str(manifest)}, f"Wrote {manifest}")
            return

        if not options['input'] or not options['output']:
            raise CommandError('convert needs INPUT and OUTPUT (or --synthetic-session DIR)', returncode=2)
        data = read_bytes(options['input'])
        output = Path(options['output'])
        if data[:4] == MAGIC:
            document = to_json_document(data)
            output.parent.mkdir(parents=True, exist_ok=True)
            output.write_text(json.dumps(document), encoding='utf-8')
            direction = 'FGCN -> JSON'
        else:
            try:
                document = json.loads(data.decode('utf-8'))
            except (UnicodeDecodeError, json.JSONDecodeError):
                raise ModelFormatError(f"{options['input']} is neither an FGCN container nor JSON")
            write_bytes(output, from_json_document(document))
            direction = 'JSON -> FGCN'
        self.emit({'input': options['input'], 'output': str(output), 'direction': direction},
                  f"Converted {options['input']} ({direction}) to {output}")
