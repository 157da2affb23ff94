import math
import tempfile
from pathlib import Path

import numpy as np
import pandas as pd
from django.test import SimpleTestCase

from ..exceptions import EmptyWindow
from ..features.emg_features import emg_feature_matrix, emg_feature_vector, mav, rms, write_feature_csv
from .helpers import emg_window


def mav_oracle(values):
    return sum(abs(v) for v in values) / len(values)


def rms_oracle(values):
    return math.sqrt(sum(v * v for v in values) / len(values))


class MavRmsTests(SimpleTestCase):
    def test_zero_signal(self):
        self.assertEqual(mav([0, 0, 0, 0]), 0.0)
        self.assertEqual(rms([0, 0, 0, 0]), 0.0)

    def test_constant_signal(self):
        for c in (-7.5, 0.25, 3.0):
            self.assertAlmostEqual(mav([c] * 10), abs(c), places=12)
            self.assertAlmostEqual(rms([c] * 10), abs(c), places=12)

    def test_rms_closed_form(self):
        self.assertAlmostEqual(rms([3, 4]), math.sqrt(12.5), places=12)
        self.assertAlmostEqual(rms([3, 4]), 3.5355339, places=7)

    def test_random_windows_match_oracle(self):
        rng = np.random.default_rng(3)
        for _ in range(100):
            values = rng.uniform(-128, 127, 40).tolist()
            self.assertAlmostEqual(mav(values) / mav_oracle(values), 1.0, delta=1e-12)
            self.assertAlmostEqual(rms(values) / rms_oracle(values), 1.0, delta=1e-12)
            self.assertGreaterEqual(rms(values), mav(values))

    def test_empty_window(self):
        with self.assertRaises(EmptyWindow):
            mav([])
        with self.assertRaises(EmptyWindow):
            rms([])


class EmgFeatureVectorTests(SimpleTestCase):
    def test_eight_channels_give_sixteen_features(self):
        rng = np.random.default_rng(0)
        samples = rng.integers(-128, 128, (40, 8)).astype(float)
        vector = emg_feature_vector(emg_window(samples, n=4))
        self.assertEqual(len(vector), 16)
        self.assertEqual(vector.n, 4)
        self.assertEqual(vector.channel_count, 8)
        for channel in range(8):
            column = samples[:, channel].tolist()
            self.assertAlmostEqual(vector.values[channel], mav_oracle(column), places=10)
            self.assertAlmostEqual(vector.values[8 + channel], rms_oracle(column), places=10)

    def test_all_zero_window(self):
        vector = emg_feature_vector(emg_window(np.zeros((40, 8))))
        np.testing.assert_array_equal(vector.values, np.zeros(16))

    def test_single_constant_channel(self):
        samples = np.zeros((40, 8))
        samples[:, 3] = 5.0
        vector = emg_feature_vector(emg_window(samples))
        expected = np.zeros(16)
        expected[[3, 11]] = 5.0
        np.testing.assert_allclose(vector.values, expected)

    def test_window_without_samples(self):
        with self.assertRaises(EmptyWindow):
            emg_feature_vector(emg_window(np.zeros((0, 8))))

    def test_feature_matrix_layout(self):
        samples = np.array([[1.0, -2.0], [-3.0, 4.0]])
        np.testing.assert_allclose(
            emg_feature_matrix(samples),
            [2.0, 3.0, math.sqrt(5.0), math.sqrt(10.0)],
        )

    def test_positive_scaling(self):
        rng = np.random.default_rng(11)
        for n in range(100):
            samples = rng.uniform(-128, 127, (40, 8))
            alpha = rng.uniform(0.01, 20.0)
            scaled = emg_feature_vector(emg_window(alpha * samples, n=n)).values
            original = emg_feature_vector(emg_window(samples, n=n)).values
            np.testing.assert_allclose(scaled, alpha * original, rtol=1e-12)

    def test_channel_permutation(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            samples = rng.uniform(-128, 127, (40, 8))
            order = rng.permutation(8)
            features = emg_feature_matrix(samples)
            np.testing.assert_allclose(
                emg_feature_matrix(samples[:, order]),
                features[np.concatenate([order, 8 + order])],
                rtol=1e-12,
            )

    def test_feature_csv(self):
        vectors = [emg_feature_vector(emg_window(np.full((40, 8), float(i)), n=i)) for i in range(3)]
        with tempfile.TemporaryDirectory() as tmp:
            path = Path(tmp) / 'features.csv'
            write_feature_csv(vectors, path)
            frame = pd.read_csv(path)
        self.assertEqual(list(frame.columns), ['n'] + [f'f{i}' for i in range(16)])
        self.assertEqual(frame['n'].tolist(), [0, 1, 2])
        self.assertEqual(frame['f15'].tolist(), [0.0, 1.0, 2.0])
