"""
Cross-validated accuracy table over modalities, model kinds and window lengths.
Location: gesture_fusion_APP/management/commands/eval.py
"""
import json
from pathlib import Path

from django.core.management.base import CommandError

from gesture_fusion_APP.ai.dataset import GestureDataset, build_dataset
from gesture_fusion_APP.ai.evaluation import EvaluationOptions, ModelKind, evaluate_table, render_table
from gesture_fusion_APP.ai.fusion import FusionTrainingConfig, Modality
from gesture_fusion_APP.ai.synthetic import make_complementary_synthetic
from gesture_fusion_APP.management.base import GestureCommand
from gesture_fusion_APP.sensors.session import load_sessions


class Command(GestureCommand):
    help = 'K-fold evaluation of every requested modality and model kind'

    def add_command_arguments(self, parser):
        parser.add_argument('--data', help='Directory of session manifests')
        parser.add_argument('--synthetic', type=int, metavar='N', help='Use N paired synthetic samples per class')
        parser.add_argument('--noise', type=float, default=0.1)
        parser.add_argument('--modality', nargs='+', default=['all'])
        parser.add_argument('--model', nargs='+', default=['all'])
        parser.add_argument('--window', type=float, nargs='+', help='One or more window lengths T in ms')
        parser.add_argument('--folds', type=int)
        parser.add_argument('--strategy', choices=['mixed', 'subject'])
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--fusion-epochs', type=int)
        parser.add_argument('--out', help='Write the reports as a JSON list')

    def run_command(self, **options):
        config = self.pipeline_config(options)
        windows = options['window'] or [config.window_ms]
        modalities = None if 'all' in options['modality'] else [Modality.parse(m) for m in options['modality']]
        kinds = None if 'all' in options['model'] else [ModelKind.parse(k) for k in options['model']]
        evaluation = EvaluationOptions.from_settings(
            seed=config.seed, folds=options['folds'], strategy=options['strategy'],
            cnn=FusionTrainingConfig.from_settings(cnn_epochs=options['epochs'],
                                                   fusion_epochs=options['fusion_epochs']),
        )

        reports = []
        if options['synthetic']:
            paired = make_complementary_synthetic(options['synthetic'], noise=options['noise'], seed=config.seed)
            dataset = GestureDataset.from_synthetic(paired)
            reports.extend(evaluate_table(dataset, modalities, kinds, evaluation))
        elif options['data']:
            sessions = load_sessions(options['data'])
            for T_ms in windows:
                dataset = build_dataset(sessions, T_ms, modalities)
                reports.extend(evaluate_table(dataset, modalities, kinds, evaluation))
        else:
            raise CommandError('eval needs --data DIR or --synthetic N', returncode=2)

        if options['out']:
            out = Path(options['out'])
            out.parent.mkdir(parents=True, exist_ok=True)
            out.write_text(json.dumps([report.to_dict() for report in reports], indent=2), encoding='utf-8')
        if self.json_output:
            for report in reports:
                self.emit(report.to_dict())
        else:
            self.stdout.write(render_table(reports))
