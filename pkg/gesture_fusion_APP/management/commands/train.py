"""
Train one classifier on a directory of sessions and save it.
Location: gesture_fusion_APP/management/commands/train.py
"""
from django.core.management.base import CommandError

from gesture_fusion_APP.ai.dataset import GestureDataset, build_dataset
from gesture_fusion_APP.ai.evaluation import EvaluationOptions, ModelKind
from gesture_fusion_APP.ai.fusion import FusionTrainingConfig, Modality
from gesture_fusion_APP.ai.synthetic import make_complementary_synthetic
from gesture_fusion_APP.management.base import GestureCommand
from gesture_fusion_APP.sensors.session import load_sessions
from gesture_fusion_APP.services.pipeline_config import PipelineConfig
from gesture_fusion_APP.services.training import train_classifier


class Command(GestureCommand):
    help = 'Train a linear SVM, RBF SVM or CNN for one modality'

    def add_command_arguments(self, parser):
        parser.add_argument('--data', help='Directory of session manifests')
        parser.add_argument('--synthetic', type=int, metavar='N', help='Use N paired synthetic samples per class')
        parser.add_argument('--noise', type=float, default=0.1, help='Noise of the synthetic samples')
        parser.add_argument('--modality', required=True)
        parser.add_argument('--model', required=True, choices=[kind.value for kind in ModelKind])
        parser.add_argument('--window', type=float, help='Window length T in ms')
        parser.add_argument('--out', required=True, help='Model file to write')
        parser.add_argument('--epochs', type=int)
        parser.add_argument('--fusion-epochs', type=int)
        parser.add_argument('--batch-size', type=int)
        parser.add_argument('--C', type=float, help='Fixed slack instead of cross-validated selection')

    def run_command(self, **options):
        config = self.pipeline_config(options, window_ms=options['window'], modality=options['modality'])
        modality = Modality.parse(config.modality)
        dataset = self.load_dataset(options, config, modality)

        cnn = FusionTrainingConfig.from_settings(
            cnn_epochs=options['epochs'], fusion_epochs=options['fusion_epochs'], batch_size=options['batch_size'],
        )
        evaluation = EvaluationOptions.from_settings(seed=config.seed, cnn=cnn)
        classifier = train_classifier(
            dataset, modality, ModelKind.parse(options['model']), evaluation,
            C_grid=[options['C']] if options['C'] is not None else None,
        )
        path = classifier.save(options['out'])
        self.emit(
            {'model': str(path), 'kind': classifier.kind, 'modality': modality.value, 'windows': len(dataset)},
            None,
        )
        self.success(f"Saved {classifier.kind} {modality.value} model trained on {len(dataset)} windows to {path}")

    def load_dataset(self, options, config: PipelineConfig, modality: Modality) -> GestureDataset:
        if options['synthetic']:
            paired = make_complementary_synthetic(options['synthetic'], noise=options['noise'], seed=config.seed)
            return GestureDataset.from_synthetic(paired, vision=modality.vision or Modality.DVS)
        if not options['data']:
            raise CommandError('train needs --data DIR or --synthetic N', returncode=2)
        return build_dataset(load_sessions(options['data']), config.window_ms, [modality])
