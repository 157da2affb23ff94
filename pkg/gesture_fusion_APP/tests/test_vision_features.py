import math
from collections import Counter

import numpy as np
from django.test import SimpleTestCase

from ..ai.fusion import Modality
from ..exceptions import (
    ApsFrameSizeMismatch, EmptyFrame, FeatureError, ModelModalityMismatch, NoApsFrames, PatchLargerThanFrame,
    WrongPatchSize,
)
from ..features.pipeline import WindowFeatureExtractor
from ..features.vision_features import (
    EventFrame, HogParameters, Patch, accumulate_event_frame, accumulate_events, average_aps, extract_patch,
    hand_center, hog, hog_cell_histograms, locate_hand, minmax_normalize, subsample,
)
from ..sensors.types import ApsFrame, EventArray, SensorGeometry, SyncWindow
from .helpers import event_window, random_events

DVS = SensorGeometry.for_kind('DVS128')
DAVIS = SensorGeometry.for_kind('DAVIS240')


def frame_of(counts: np.ndarray) -> EventFrame:
    counts = np.asarray(counts, dtype=np.int64)
    return EventFrame(width=counts.shape[1], height=counts.shape[0], counts=counts)


def centroid_oracle(counts):
    total = sx = sy = 0
    for y, row in enumerate(counts.tolist()):
        for x, c in enumerate(row):
            total += c
            sx += x * c
            sy += y * c
    return math.floor(sx / total + 0.5), math.floor(sy / total + 0.5)


def cell_histogram_oracle(pixels, cell=10, bins=9):
    height, width = len(pixels), len(pixels[0])
    hist = [[[0.0] * bins for _ in range(width // cell)] for _ in range(height // cell)]
    for y in range(height):
        for x in range(width):
            gx = pixels[y][min(x + 1, width - 1)] - pixels[y][max(x - 1, 0)]
            gy = pixels[min(y + 1, height - 1)][x] - pixels[max(y - 1, 0)][x]
            angle = math.atan2(gy, gx) % math.pi
            index = min(int(angle / (math.pi / bins)), bins - 1)
            hist[y // cell][x // cell][index] += math.hypot(gx, gy)
    return np.array(hist)


def hog_oracle(pixels, epsilon=1e-6):
    cells = cell_histogram_oracle(pixels)
    values = []
    for by in range(cells.shape[0] - 1):
        for bx in range(cells.shape[1] - 1):
            block = [v for cy in (by, by + 1) for cx in (bx, bx + 1) for v in cells[cy][cx]]
            norm = math.sqrt(sum(v * v for v in block) + epsilon ** 2)
            values.extend(v / norm for v in block)
    return np.array(values)


class EventFrameTests(SimpleTestCase):
    def test_no_events_gives_zero_frame(self):
        frame = accumulate_event_frame(event_window([], []), DVS)
        self.assertEqual(frame.counts.shape, (128, 128))
        self.assertEqual(frame.counts.sum(), 0)

    def test_polarity_is_ignored(self):
        window = event_window([10] * 5, [20] * 5, polarity=[1, 1, 1, 0, 0])
        frame = accumulate_event_frame(window, DVS)
        self.assertEqual(frame.counts[20][10], 5)
        self.assertEqual(frame.counts.sum(), 5)

    def test_random_events_match_tally(self):
        rng = np.random.default_rng(5)
        for _ in range(100):
            geometry = DVS if rng.random() < 0.5 else DAVIS
            events = random_events(rng, int(rng.integers(1, 300)), geometry)
            frame = accumulate_events(events, geometry)
            tally = Counter(zip(events.x.tolist(), events.y.tolist()))
            expected = np.zeros((geometry.height, geometry.width), dtype=np.int64)
            for (x, y), count in tally.items():
                expected[y][x] = count
            np.testing.assert_array_equal(frame.counts, expected)

    def test_event_order_does_not_matter(self):
        rng = np.random.default_rng(9)
        events = random_events(rng, 200, DVS)
        order = rng.permutation(200)
        shuffled = EventArray(events.x[order], events.y[order], events.t, events.polarity[order])
        np.testing.assert_array_equal(accumulate_events(events, DVS).counts, accumulate_events(shuffled, DVS).counts)


class MinMaxTests(SimpleTestCase):
    def test_single_active_pixel(self):
        counts = np.zeros((128, 128))
        counts[7, 9] = 5
        gray = minmax_normalize(frame_of(counts)).gray
        self.assertEqual(gray[7, 9], 1.0)
        self.assertEqual(gray.sum(), 1.0)

    def test_uniform_frame_is_all_zero(self):
        gray = minmax_normalize(frame_of(np.full((128, 128), 3))).gray
        self.assertFalse(gray.any())

    def test_linear_map(self):
        gray = minmax_normalize(frame_of([[0, 2, 4]])).gray
        np.testing.assert_allclose(gray, [[0.0, 0.5, 1.0]])

    def test_range_and_argmax(self):
        rng = np.random.default_rng(1)
        counts = rng.integers(0, 20, (128, 128))
        gray = minmax_normalize(frame_of(counts)).gray
        self.assertGreaterEqual(gray.min(), 0.0)
        self.assertLessEqual(gray.max(), 1.0)
        self.assertEqual(np.argmax(gray), np.argmax(counts))


class HandCenterTests(SimpleTestCase):
    def test_single_pixel(self):
        counts = np.zeros((128, 128))
        counts[40, 30] = 1
        self.assertEqual(hand_center(frame_of(counts)), (30, 40))

    def test_symmetric_blob(self):
        counts = np.zeros((128, 128))
        counts[62:67, 62:67] = [[1, 2, 3, 2, 1]] * 5
        self.assertEqual(hand_center(frame_of(counts)), (64, 64))

    def test_random_sparse_frames_match_moments(self):
        rng = np.random.default_rng(2)
        for _ in range(100):
            counts = np.zeros((128, 128), dtype=np.int64)
            counts[rng.integers(0, 128, 30), rng.integers(0, 128, 30)] = rng.integers(1, 9, 30)
            self.assertEqual(hand_center(frame_of(counts)), centroid_oracle(counts))

    def test_translation_shifts_the_center(self):
        rng = np.random.default_rng(4)
        x = rng.integers(20, 60, 50)
        y = rng.integers(20, 60, 50)
        base = hand_center(accumulate_event_frame(event_window(x, y), DVS))
        moved = hand_center(accumulate_event_frame(event_window(x + 17, y + 31), DVS))
        self.assertEqual(moved, (base[0] + 17, base[1] + 31))

    def test_empty_frame(self):
        empty = frame_of(np.zeros((128, 128)))
        with self.assertRaises(EmptyFrame):
            hand_center(empty)
        self.assertEqual(locate_hand(empty), (64, 64))


class PatchTests(SimpleTestCase):
    def setUp(self):
        self.gray = np.arange(128 * 128, dtype=float).reshape(128, 128)

    def test_centered_patch(self):
        patch = extract_patch(self.gray, (64, 64), 60)
        np.testing.assert_array_equal(patch.pixels, self.gray[34:94, 34:94])

    def test_corner_is_clamped(self):
        patch = extract_patch(self.gray, (0, 0), 60)
        np.testing.assert_array_equal(patch.pixels, self.gray[0:60, 0:60])
        far = extract_patch(self.gray, (127, 127), 60)
        np.testing.assert_array_equal(far.pixels, self.gray[68:128, 68:128])

    def test_patch_larger_than_frame(self):
        with self.assertRaises(PatchLargerThanFrame):
            extract_patch(self.gray, (64, 64), 200)

    def test_davis_patch_always_fits(self):
        gray = np.zeros((180, 240))
        for center in ((0, 0), (239, 179), (120, 90), (5, 170)):
            self.assertEqual(extract_patch(gray, center, 120).pixels.shape, (120, 120))


class SubsampleTests(SimpleTestCase):
    def test_constant_patch(self):
        half = subsample(Patch(side=120, pixels=np.full((120, 120), 0.3), source_center=(0, 0)))
        np.testing.assert_allclose(half.pixels, np.full((60, 60), 0.3))

    def test_block_average(self):
        pixels = np.zeros((120, 120))
        pixels[1, 0:2] = 1.0
        self.assertEqual(subsample(Patch(120, pixels, (0, 0))).pixels[0, 0], 0.5)

    def test_random_patches_match_oracle(self):
        rng = np.random.default_rng(6)
        for _ in range(100):
            pixels = rng.random((120, 120))
            half = subsample(Patch(120, pixels, (0, 0))).pixels
            for r, c in zip(rng.integers(0, 60, 20), rng.integers(0, 60, 20)):
                block = [pixels[2 * r + i][2 * c + j] for i in (0, 1) for j in (0, 1)]
                self.assertAlmostEqual(half[r, c], sum(block) / 4.0, delta=1e-12)
            self.assertAlmostEqual(half.mean(), pixels.mean(), delta=1e-12)

    def test_wrong_size(self):
        with self.assertRaises(WrongPatchSize):
            subsample(Patch(60, np.zeros((60, 60)), (0, 0)))


class ApsAverageTests(SimpleTestCase):
    def window(self, frames):
        return SyncWindow(n=0, t_start=0, t_end=200_000, emg_samples=np.zeros((40, 8)),
                          events=EventArray.empty(), aps_frames=tuple(frames))

    def aps(self, pixels, t=0):
        return ApsFrame(width=pixels.shape[1], height=pixels.shape[0], pixels=pixels, t=t)

    def test_single_frame_is_unchanged(self):
        pixels = np.random.default_rng(0).random((180, 240))
        np.testing.assert_array_equal(average_aps(self.window([self.aps(pixels)])), pixels)

    def test_black_and_white_average_to_gray(self):
        frames = [self.aps(np.zeros((180, 240))), self.aps(np.ones((180, 240)), t=1)]
        np.testing.assert_allclose(average_aps(self.window(frames)), np.full((180, 240), 0.5))

    def test_random_frames_match_mean(self):
        rng = np.random.default_rng(8)
        stack = rng.random((4, 180, 240))
        average = average_aps(self.window([self.aps(p, t) for t, p in enumerate(stack)]))
        np.testing.assert_allclose(average, (stack[0] + stack[1] + stack[2] + stack[3]) / 4.0, rtol=1e-12)

    def test_window_without_frames(self):
        with self.assertRaises(NoApsFrames):
            average_aps(self.window([]))

    def test_frames_of_different_sizes(self):
        frames = [self.aps(np.zeros((180, 240))), self.aps(np.zeros((128, 128)), t=1)]
        with self.assertRaises(ApsFrameSizeMismatch) as caught:
            average_aps(self.window(frames))
        self.assertIsInstance(caught.exception, FeatureError)


class HogTests(SimpleTestCase):
    def patch(self, pixels):
        return Patch(side=60, pixels=np.asarray(pixels, dtype=float), source_center=(30, 30))

    def test_constant_patch_gives_zero_descriptor(self):
        descriptor = hog(self.patch(np.full((60, 60), 0.7)))
        self.assertEqual(len(descriptor), 900)
        self.assertFalse(descriptor.values.any())

    def test_descriptor_length(self):
        params = HogParameters()
        blocks = (60 // params.cell - params.block + 1) ** 2
        self.assertEqual(blocks * params.block ** 2 * params.bins, 900)
        self.assertEqual(hog(self.patch(np.random.default_rng(0).random((60, 60)))).d, 900)

    def test_vertical_step_edge(self):
        pixels = np.zeros((60, 60))
        pixels[:, 30:] = 1.0
        cells = hog_cell_histograms(pixels)
        self.assertEqual(cells.shape, (6, 6, 9))
        np.testing.assert_allclose(cells[:, 2, 0], 10.0)
        np.testing.assert_allclose(cells[:, 3, 0], 10.0)
        self.assertEqual(cells.sum(), 120.0)
        np.testing.assert_allclose(cells, cell_histogram_oracle(pixels.tolist()))

    def test_cell_histograms_match_oracle(self):
        rng = np.random.default_rng(12)
        for _ in range(100):
            pixels = rng.random((30, 30))
            expected = cell_histogram_oracle(pixels.tolist())
            np.testing.assert_allclose(hog_cell_histograms(pixels), expected, rtol=1e-12, atol=1e-14)

    def test_descriptor_matches_oracle(self):
        rng = np.random.default_rng(13)
        for _ in range(10):
            pixels = rng.random((60, 60))
            np.testing.assert_allclose(hog(self.patch(pixels)).values, hog_oracle(pixels.tolist()),
                                       rtol=1e-9, atol=1e-12)

    def test_brightness_offset_does_not_change_hog(self):
        pixels = np.random.default_rng(14).random((60, 60))
        np.testing.assert_allclose(hog(self.patch(pixels + 0.25)).values, hog(self.patch(pixels)).values,
                                   atol=1e-9)

    def test_wrong_size(self):
        with self.assertRaises(WrongPatchSize):
            hog(Patch(side=50, pixels=np.zeros((50, 50)), source_center=(0, 0)))


class WindowFeatureExtractorTests(SimpleTestCase):
    def dvs_window(self):
        rng = np.random.default_rng(21)
        window = event_window(rng.integers(40, 80, 400), rng.integers(40, 80, 400), n=7)
        return SyncWindow(n=7, t_start=0, t_end=200_000, emg_samples=rng.normal(0, 10, (40, 8)),
                          events=window.events)

    def test_feature_lengths_per_modality(self):
        extractor = WindowFeatureExtractor(DVS)
        window = self.dvs_window()
        self.assertEqual(extractor.svm_features(window, Modality.EMG).shape, (16,))
        self.assertEqual(extractor.svm_features(window, Modality.DVS).shape, (900,))
        fused = extractor.svm_features(window, Modality.FUS_DVS)
        self.assertEqual(fused.shape, (916,))
        np.testing.assert_array_equal(fused[:16], extractor.svm_features(window, Modality.EMG))
        np.testing.assert_array_equal(fused[16:], extractor.svm_features(window, Modality.DVS))

    def test_cnn_inputs(self):
        extractor = WindowFeatureExtractor(DVS)
        emg_input, vision_input = extractor.cnn_inputs(self.dvs_window(), Modality.FUS_DVS)
        self.assertEqual(emg_input.shape, (1, 16))
        self.assertEqual(vision_input.shape, (1, 60, 60))
        emg_only, none = extractor.cnn_inputs(self.dvs_window(), Modality.EMG)
        self.assertIsNone(none)
        self.assertEqual(emg_only.shape, (1, 16))

    def test_davis_frames_are_subsampled(self):
        rng = np.random.default_rng(22)
        events = EventArray(rng.integers(0, 240, 500), rng.integers(0, 180, 500), np.arange(500),
                            rng.integers(0, 2, 500))
        frame = ApsFrame(width=240, height=180, pixels=rng.random((180, 240)), t=10)
        window = SyncWindow(n=0, t_start=0, t_end=200_000, emg_samples=np.ones((40, 8)), events=events,
                            aps_frames=(frame,))
        extractor = WindowFeatureExtractor(DAVIS)
        for modality in (Modality.DAV, Modality.FRM):
            self.assertEqual(extractor.vision_patch(window, modality).pixels.shape, (60, 60))
        self.assertEqual(extractor.svm_features(window, Modality.FUS_FRM).shape, (916,))

    def test_dvs_modality_on_davis_recording(self):
        with self.assertRaises(ModelModalityMismatch):
            WindowFeatureExtractor(DAVIS).svm_features(self.dvs_window(), Modality.DVS)
