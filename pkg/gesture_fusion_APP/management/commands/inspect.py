"""
Dump event frames, hand patches and EMG features for visual inspection.
Location: gesture_fusion_APP/management/commands/inspect.py
"""
from pathlib import Path

from django.core.management.base import CommandError

from gesture_fusion_APP.conf import get_setting
from gesture_fusion_APP.exceptions import FeatureError
from gesture_fusion_APP.features.emg_features import emg_feature_vector, write_feature_csv
from gesture_fusion_APP.features.vision_features import (
    accumulate_event_frame, extract_patch, locate_hand, minmax_normalize,
)
from gesture_fusion_APP.management.base import GestureCommand
from gesture_fusion_APP.sensors.aedat import parse_aedat
from gesture_fusion_APP.sensors.session import load_session, session_from_events, stream_windows, window_slices
from gesture_fusion_APP.utils.images import write_pgm


class Command(GestureCommand):
    help = 'Write per-window event frames and patches (PGM) or per-window EMG features (CSV)'

    def add_command_arguments(self, parser):
        parser.add_argument('--events', help='AEDAT event file')
        parser.add_argument('--session', help='Session manifest')
        parser.add_argument('--window', type=float, help='Window length T in ms')
        parser.add_argument('--out', help='Directory for frame and patch images')
        parser.add_argument('--features', help='CSV file for the EMG feature vectors of --session')

    def run_command(self, **options):
        config = self.pipeline_config(options, window_ms=options['window'])
        if options['events']:
            geometry, events = parse_aedat(options['events'])
            session = session_from_events(geometry, events)
            windows = stream_windows(session, config.window_ms)
        elif options['session']:
            session = load_session(options['session'])
            windows = window_slices(session, config.window_ms)
        else:
            raise CommandError('inspect needs --events FILE or --session MANIFEST', returncode=2)

        if options['out']:
            self.write_frames(session.geometry, windows, Path(options['out']))
        if options['features']:
            if not options['session']:
                raise CommandError('--features needs --session', returncode=2)
            vectors = []
            for window in windows:
                try:
                    vectors.append(emg_feature_vector(window))
                except FeatureError as e:
                    self.stderr.write(f"window {window.n}: {str(e)}")
            write_feature_csv(vectors, options['features'])
            self.emit({'features': options['features'], 'windows': len(vectors)},
                      f"Wrote {len(vectors)} feature vectors to {options['features']}")

    def write_frames(self, geometry, windows, out_dir: Path):
        out_dir.mkdir(parents=True, exist_ok=True)
        side = get_setting('PATCH_SIDE', 60)
        written = 0
        for window in windows:
            frame = minmax_normalize(accumulate_event_frame(window, geometry))
            write_pgm(out_dir / f'frame_{window.n:05d}.pgm', frame.gray)
            if not len(window.events):
                continue
            patch = extract_patch(frame.gray, locate_hand(frame), min(side, geometry.width, geometry.height))
            write_pgm(out_dir / f'patch_{window.n:05d}.pgm', patch.pixels)
            written += 1
        self.emit({'out': str(out_dir), 'frames': len(windows), 'patches': written},
                  f"Wrote {len(windows)} frames and {written} patches to {out_dir}")
