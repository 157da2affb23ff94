"""
Replay a recorded session through the four-role runtime.
Location: gesture_fusion_APP/management/commands/replay.py
"""
from contextlib import nullcontext

from gesture_fusion_APP.management.base import GestureCommand
from gesture_fusion_APP.sensors.session import load_session
from gesture_fusion_APP.services.replay_runtime import run_replay


class Command(GestureCommand):
    help = 'Classify a recorded session window by window, as the live application would'

    def add_command_arguments(self, parser):
        parser.add_argument('--session', required=True, help='Session manifest')
        parser.add_argument('--model', help='Trained model file')
        parser.add_argument('--modality')
        parser.add_argument('--window', type=float, help='Window length T in ms')
        parser.add_argument('--speed', choices=['max', 'realtime'])
        parser.add_argument('--queue-capacity', type=int)
        parser.add_argument('--no-drop', action='store_true', help='Block producers instead of dropping windows')
        parser.add_argument('--out', help='JSON-lines file for the records (default: standard output)')

    def run_command(self, **options):
        config = self.pipeline_config(
            options,
            window_ms=options['window'],
            modality=options['modality'],
            model_path=options['model'],
            replay_speed=options['speed'],
            queue_capacity=options['queue_capacity'],
            drop_policy='none' if options['no_drop'] else None,
        )
        session = load_session(options['session'])
        if options['out']:
            sink = open(options['out'], 'w', encoding='utf-8')
        else:
            sink = nullcontext(self.stdout if self.json_output else None)
        with sink as stream:
            result = run_replay(session, config, sink=stream)

        summary = result.summary
        if self.json_output:
            self.emit({'summary': summary.to_dict()})
        else:
            accuracy = 'n/a' if summary.accuracy is None else f"{100 * summary.accuracy:.1f}%"
            self.stdout.write(
                f"{summary.windows_classified} classified, {summary.windows_dropped} dropped "
                f"of {summary.windows_produced} windows; accuracy {accuracy}; "
                f"latency mean {summary.latency_mean_us / 1000:.2f} ms, p95 {summary.latency_p95_us / 1000:.2f} ms"
            )
