from collections import Counter, defaultdict

import numpy as np
from django.test import SimpleTestCase

from ..ai.cnn import build_emg_cnn, build_vision_cnn
from ..ai.dataset import GestureDataset
from ..ai.fusion import FusionModel, FusionTrainingConfig, Modality, concat_features, fusion_forward, train_two_step
from ..ai.svm import KernelSpec, SvmClassifier
from ..ai.synthetic import make_complementary_synthetic
from ..exceptions import EmptyDataset, InvalidConfiguration, ShapeMismatch, WindowIndexMismatch
from ..features.emg_features import EmgFeatureVector
from ..features.vision_features import HogDescriptor
from ..sensors.types import SensorKind

SMALL_VISION = {'channels': (2, 3), 'dense': (8,)}
SMALL_EMG = {'channels': (2, 3), 'dense': (8,)}


def bayes_accuracy(features: np.ndarray, labels: np.ndarray) -> float:
    """Best achievable accuracy on noise-free data: majority label per distinct feature vector"""
    groups = defaultdict(Counter)
    for row, label in zip(features.reshape(len(labels), -1), labels):
        groups[row.tobytes()][int(label)] += 1
    return sum(max(counter.values()) for counter in groups.values()) / len(labels)


def holdout(labels: np.ndarray):
    """Every fifth sample of each class is held out"""
    position = np.concatenate([np.arange(count) for count in np.bincount(labels)])
    test = position % 5 == 0
    return np.flatnonzero(~test), np.flatnonzero(test)


def small_fusion_model(seed=0, W=None, bias=None):
    emg_cnn = build_emg_cnn(seed=seed, **SMALL_EMG)
    vision_cnn = build_vision_cnn(input_side=20, seed=seed + 1, **SMALL_VISION)
    return FusionModel(emg_cnn, vision_cnn,
                       W=np.zeros((5, 10)) if W is None else W,
                       bias=np.zeros(5) if bias is None else bias,
                       modality=Modality.FUS_DVS)


class ModalityTests(SimpleTestCase):
    def test_fusion_pairs_emg_with_one_vision_modality(self):
        for modality in Modality:
            if modality.is_fusion:
                self.assertTrue(modality.uses_emg)
                self.assertIn(modality.vision, (Modality.DVS, Modality.DAV, Modality.FRM))
        self.assertIsNone(Modality.EMG.vision)

    def test_parse(self):
        self.assertIs(Modality.parse('fus_dvs'), Modality.FUS_DVS)
        self.assertIs(Modality.parse('FUS-FRM'), Modality.FUS_FRM)
        with self.assertRaises(InvalidConfiguration):
            Modality.parse('EEG')

    def test_sensor_support(self):
        self.assertEqual(Modality.for_sensor(SensorKind.DVS128), [Modality.EMG, Modality.DVS, Modality.FUS_DVS])
        self.assertNotIn(Modality.DVS, Modality.for_sensor(SensorKind.DAVIS240))


class ConcatFeaturesTests(SimpleTestCase):
    def test_emg_block_first(self):
        emg = EmgFeatureVector(values=np.arange(16.0), n=3)
        vision = HogDescriptor(values=np.linspace(0, 1, 900), n=3)
        fused = concat_features(emg, vision)
        self.assertEqual(len(fused), 916)
        np.testing.assert_array_equal(fused.values[:16], emg.values)
        np.testing.assert_array_equal(fused.values[16:], vision.values)
        self.assertEqual(fused.n, 3)

    def test_zero_vectors(self):
        fused = concat_features(EmgFeatureVector(np.zeros(16), 0), HogDescriptor(np.zeros(900), 0))
        np.testing.assert_array_equal(fused.values, np.zeros(916))

    def test_mismatched_windows(self):
        with self.assertRaises(WindowIndexMismatch):
            concat_features(EmgFeatureVector(np.zeros(16), 1), HogDescriptor(np.zeros(900), 2))


class FusionForwardTests(SimpleTestCase):
    def setUp(self):
        rng = np.random.default_rng(0)
        self.emg = rng.normal(0, 5, (1, 16))
        self.image = rng.random((1, 20, 20))

    def test_zero_layer_is_uniform(self):
        probabilities = fusion_forward(small_fusion_model(), self.emg, self.image)
        np.testing.assert_allclose(probabilities, np.full(5, 0.2))

    def test_vision_selecting_layer_follows_vision_cnn(self):
        W = np.hstack([np.zeros((5, 5)), np.eye(5)])
        rng = np.random.default_rng(1)
        for seed in range(5):
            model = small_fusion_model(seed=seed, W=W)
            image = rng.random((1, 20, 20))
            expected = int(np.argmax(model.vision_cnn.predict_proba(image[np.newaxis])[0]))
            self.assertEqual(int(np.argmax(fusion_forward(model, self.emg, image))), expected)

    def test_random_layer_sums_to_one(self):
        rng = np.random.default_rng(2)
        model = small_fusion_model(W=rng.normal(size=(5, 10)), bias=rng.normal(size=5))
        probabilities = fusion_forward(model, self.emg, self.image)
        self.assertAlmostEqual(float(probabilities.sum()), 1.0, delta=1e-6)

    def test_shift_of_all_logits_keeps_the_argmax(self):
        rng = np.random.default_rng(3)
        W, bias = rng.normal(size=(5, 10)), rng.normal(size=5)
        base = fusion_forward(small_fusion_model(W=W, bias=bias), self.emg, self.image)
        shifted = fusion_forward(small_fusion_model(W=W, bias=bias + 7.5), self.emg, self.image)
        np.testing.assert_allclose(shifted, base, rtol=1e-9)

    def test_input_shapes_are_checked(self):
        with self.assertRaises(ShapeMismatch):
            fusion_forward(small_fusion_model(), np.zeros((1, 15)), self.image)
        with self.assertRaises(ShapeMismatch):
            FusionModel(build_emg_cnn(**SMALL_EMG), build_vision_cnn(input_side=20, **SMALL_VISION),
                        W=np.zeros((5, 8)), bias=np.zeros(5))

    def test_container_keeps_predictions(self):
        rng = np.random.default_rng(4)
        model = small_fusion_model(W=rng.normal(size=(5, 10)), bias=rng.normal(size=5))
        restored = FusionModel.from_bytes(model.to_bytes())
        self.assertIs(restored.modality, Modality.FUS_DVS)
        np.testing.assert_array_equal(
            fusion_forward(restored, self.emg, self.image), fusion_forward(model, self.emg, self.image),
        )


class SyntheticDatasetTests(SimpleTestCase):
    def test_size(self):
        paired = make_complementary_synthetic(20, noise=0.1, seed=0)
        self.assertEqual(len(paired), 100)
        self.assertEqual(paired.emg_inputs.shape, (100, 1, 16))
        self.assertEqual(paired.vision_inputs.shape, (100, 1, 60, 60))
        self.assertEqual(np.bincount(paired.labels).tolist(), [20] * 5)

    def test_seeded(self):
        first = make_complementary_synthetic(20, noise=0.3, seed=5)
        second = make_complementary_synthetic(20, noise=0.3, seed=5)
        np.testing.assert_array_equal(first.emg, second.emg)
        np.testing.assert_array_equal(first.images, second.images)

    def test_bayes_accuracies_without_noise(self):
        paired = make_complementary_synthetic(40, noise=0.0, seed=0)
        self.assertAlmostEqual(bayes_accuracy(paired.emg, paired.labels), 0.9)
        self.assertAlmostEqual(bayes_accuracy(paired.images, paired.labels), 0.9)
        fused = np.hstack([paired.emg, paired.images.reshape(len(paired), -1)])
        self.assertAlmostEqual(bayes_accuracy(fused, paired.labels), 1.0)

    def test_confusable_pairs(self):
        paired = make_complementary_synthetic(20, noise=0.0, seed=0)
        emg_groups = defaultdict(set)
        for row, label in zip(paired.emg, paired.labels):
            emg_groups[row.tobytes()].add(int(label))
        self.assertIn({0, 1}, list(emg_groups.values()))
        image_groups = defaultdict(set)
        for image, label in zip(paired.images, paired.labels):
            image_groups[image.tobytes()].add(int(label))
        self.assertIn({3, 4}, list(image_groups.values()))

    def test_minimum_size(self):
        with self.assertRaises(InvalidConfiguration):
            make_complementary_synthetic(19)


class TwoStepTrainingTests(SimpleTestCase):
    def config(self, **overrides):
        values = dict(cnn_epochs=2, fusion_epochs=2, batch_size=10, emg_builder_options=SMALL_EMG,
                      vision_builder_options=SMALL_VISION)
        values.update(overrides)
        return FusionTrainingConfig(**values)

    def data(self):
        paired = make_complementary_synthetic(20, noise=0.05, seed=1)
        return paired.emg_inputs, paired.vision_inputs, paired.labels

    def test_zero_fusion_epochs_keeps_the_initial_layer(self):
        emg_X, vision_X, labels = self.data()
        result = train_two_step(emg_X, vision_X, labels, self.config(fusion_epochs=0), seed=0)
        np.testing.assert_array_equal(result.model.W, np.zeros((5, 10)))
        np.testing.assert_array_equal(result.model.bias, np.zeros(5))
        self.assertEqual(result.fusion_history, [])
        self.assertEqual(len(result.emg_history), 2)

        untrained = build_emg_cnn(seed=0, **SMALL_EMG).parameters()
        trained = result.model.emg_cnn.parameters()
        self.assertTrue(any(not np.array_equal(untrained[name], trained[name]) for name in untrained))

    def test_fixed_seed_gives_identical_bytes(self):
        emg_X, vision_X, labels = self.data()
        first = train_two_step(emg_X, vision_X, labels, self.config(), seed=3, modality=Modality.FUS_DVS)
        second = train_two_step(emg_X, vision_X, labels, self.config(), seed=3, modality=Modality.FUS_DVS)
        self.assertEqual(first.model.to_bytes(), second.model.to_bytes())

    def test_logit_inputs(self):
        emg_X, vision_X, labels = self.data()
        result = train_two_step(emg_X, vision_X, labels, self.config(fusion_input='logits'), seed=0)
        self.assertEqual(result.model.fusion_input, 'logits')
        self.assertEqual(result.model.predict(emg_X[:4], vision_X[:4]).shape, (4,))

    def test_empty_dataset(self):
        with self.assertRaises(EmptyDataset):
            train_two_step(np.zeros((0, 1, 16)), np.zeros((0, 1, 60, 60)), [], self.config())


class FusionBenefitTests(SimpleTestCase):
    """Each modality alone confuses one class pair; the fused model must not"""

    def setUp(self):
        self.paired = make_complementary_synthetic(100, noise=0.0, seed=0)
        self.train_index, self.test_index = holdout(self.paired.labels)
        self.test_labels = self.paired.labels[self.test_index]

    def accuracy(self, predicted):
        return float(np.mean(np.asarray(predicted) == self.test_labels))

    def test_svm_feature_concatenation(self):
        dataset = GestureDataset.from_synthetic(self.paired)
        accuracies = {}
        for modality in (Modality.EMG, Modality.DVS, Modality.FUS_DVS):
            X = dataset.svm_features(modality)
            classifier = SvmClassifier.fit(X[self.train_index], dataset.labels[self.train_index],
                                           KernelSpec.linear(), C=10)
            values = classifier.decision_values(X[self.test_index])
            accuracies[modality] = self.accuracy(np.argmax(values, axis=1))

        self.assertLessEqual(accuracies[Modality.EMG], 0.9)
        self.assertLessEqual(accuracies[Modality.DVS], 0.9)
        self.assertGreaterEqual(accuracies[Modality.FUS_DVS],
                                max(accuracies[Modality.EMG], accuracies[Modality.DVS]) + 0.05)

    def test_cnn_perceptron_fusion(self):
        config = FusionTrainingConfig(
            cnn_epochs=40, fusion_epochs=50, batch_size=16,
            vision_builder_options={'channels': (4, 8), 'dense': (32,)},
        )
        train, test = self.train_index, self.test_index
        result = train_two_step(self.paired.emg_inputs[train], self.paired.vision_inputs[train],
                                self.paired.labels[train], config, seed=0, modality=Modality.FUS_DVS)
        model = result.model

        emg_accuracy = self.accuracy(model.emg_cnn.predict(self.paired.emg_inputs[test]))
        vision_accuracy = self.accuracy(model.vision_cnn.predict(self.paired.vision_inputs[test]))
        fusion_accuracy = self.accuracy(model.predict(self.paired.emg_inputs[test], self.paired.vision_inputs[test]))

        self.assertLessEqual(emg_accuracy, 0.9)
        self.assertLessEqual(vision_accuracy, 0.9)
        self.assertGreaterEqual(fusion_accuracy, max(emg_accuracy, vision_accuracy) + 0.05)
