"""
Per-window inference latency of a trained model.
Location: gesture_fusion_APP/management/commands/bench.py
"""
from gesture_fusion_APP.management.base import GestureCommand
from gesture_fusion_APP.services.benchmark import bench


class Command(GestureCommand):
    help = 'Time feature extraction plus inference on a synthetic window'

    def add_command_arguments(self, parser):
        parser.add_argument('--model', help='Trained model file')
        parser.add_argument('--modality')
        parser.add_argument('--iterations', type=int, default=100)

    def run_command(self, **options):
        config = self.pipeline_config(options, model_path=options['model'], modality=options['modality'])
        report = bench(config.model_path, config.modality, options['iterations'], seed=config.seed)
        self.emit(
            report.to_dict(),
            f"{report.model_kind} {report.modality}: min {report.min_ms:.3f} ms, mean {report.mean_ms:.3f} ms, "
            f"p95 {report.p95_ms:.3f} ms ({report.iterations} iterations)",
        )
