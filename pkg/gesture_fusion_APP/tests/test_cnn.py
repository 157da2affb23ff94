import math

import numpy as np
from django.test import SimpleTestCase

from ..ai.cnn import (
    Activation, AdadeltaState, CnnModel, Conv1D, Conv2D, Dense, MaxPool2D, Softmax, adadelta_step, backward,
    build_dense_cnn, build_emg_cnn, build_vision_cnn, cnn_from_bytes, cnn_to_bytes, forward,
    from_json_document, to_json_document, train,
)
from ..ai.cnn.serialization import unpack
from ..exceptions import EmptyDataset, InvalidLabel, ModelFormatError, ShapeMismatch


def relative_error(analytic, numeric):
    return abs(analytic - numeric) / max(abs(analytic) + abs(numeric), 1e-4)


def max_gradient_error(model: CnnModel, X, labels, step=1e-5, per_tensor=None, seed=0):
    """Largest relative error between analytic and central-difference gradients"""
    _, gradients = model.loss_and_gradients(X, labels)
    rng = np.random.default_rng(seed)
    worst = 0.0
    for name, param in model.parameters().items():
        indices = range(param.size)
        if per_tensor is not None and param.size > per_tensor:
            indices = rng.choice(param.size, per_tensor, replace=False)
        for index in indices:
            original = param.flat[index]
            param.flat[index] = original + step
            plus, _ = model.loss_and_gradients(X, labels)
            param.flat[index] = original - step
            minus, _ = model.loss_and_gradients(X, labels)
            param.flat[index] = original
            numeric = (plus - minus) / (2 * step)
            worst = max(worst, relative_error(gradients[name].flat[index], numeric))
    return worst


class ArchitectureTests(SimpleTestCase):
    def layer_shapes(self, model, kinds=('Conv2D', 'Conv1D', 'MaxPool2D', 'Dense')):
        return [shape for layer, shape in zip(model.layers, model.shapes[1:]) if layer.kind in kinds]

    def test_vision_shapes(self):
        model = build_vision_cnn()
        self.assertEqual(self.layer_shapes(model), [
            (6, 56, 56), (6, 28, 28), (16, 24, 24), (16, 12, 12), (120,), (84,), (5,),
        ])
        self.assertEqual(model.parameters()['layers.6.W'].shape, (120, 2304))

    def test_emg_shapes(self):
        model = build_emg_cnn()
        self.assertEqual(self.layer_shapes(model), [(6, 12), (16, 8), (64,), (5,)])
        self.assertEqual(model.parameters()['layers.4.W'].shape, (64, 128))

    def test_forward_outputs_probabilities(self):
        rng = np.random.default_rng(0)
        for model, shape in ((build_vision_cnn(), (1, 60, 60)), (build_emg_cnn(), (1, 16))):
            probabilities = forward(model, rng.random(shape))
            self.assertEqual(probabilities.shape, (5,))
            self.assertAlmostEqual(float(probabilities.sum()), 1.0, delta=1e-6)
            self.assertTrue(((probabilities > 0) & (probabilities < 1)).all())

    def test_wrong_input_shape(self):
        with self.assertRaises(ShapeMismatch):
            forward(build_emg_cnn(), np.zeros((1, 15)))

    def test_layers_must_compose(self):
        with self.assertRaises(ShapeMismatch):
            CnnModel([Conv2D(2, 4, 3), Dense(5), Softmax()], (1, 8, 8))
        with self.assertRaises(ShapeMismatch):
            CnnModel([Dense(5)], (4,))

    def test_same_seed_same_weights(self):
        first = build_emg_cnn(seed=3).parameters()
        second = build_emg_cnn(seed=3).parameters()
        for name in first:
            np.testing.assert_array_equal(first[name], second[name])


class GradientTests(SimpleTestCase):
    def check(self, model, X, labels, **kwargs):
        self.assertLessEqual(max_gradient_error(model, X, labels, **kwargs), 1e-4)

    def test_every_layer_kind(self):
        rng = np.random.default_rng(1)
        cases = [
            (CnnModel([Conv2D(1, 2, 3), Dense(5), Softmax()], (1, 6, 6), seed=1), (3, 1, 6, 6)),
            (CnnModel([Conv1D(2, 3, 3), Dense(5), Softmax()], (2, 8), seed=2), (3, 2, 8)),
            (CnnModel([Conv2D(1, 2, 3), MaxPool2D(), Dense(5), Softmax()], (1, 6, 6), seed=3), (3, 1, 6, 6)),
            (CnnModel([Dense(4), Dense(5), Softmax()], (7,), seed=4), (3, 7)),
            (CnnModel([Dense(6), Activation('tanh'), Dense(5), Softmax()], (4,), seed=5), (3, 4)),
            (CnnModel([Dense(6), Activation('relu'), Dense(5), Softmax()], (4,), seed=6), (3, 4)),
        ]
        for model, shape in cases:
            with self.subTest(layers=[layer.kind for layer in model.layers]):
                self.check(model, rng.normal(size=shape), [0, 3, 4])

    def test_reduced_vision_architecture(self):
        rng = np.random.default_rng(2)
        model = build_vision_cnn(input_side=20, channels=(2, 3), dense=(6,), activation='tanh', seed=7)
        self.check(model, rng.random((2, 1, 20, 20)), [1, 4])

    def test_vision_architecture_at_full_input_size(self):
        rng = np.random.default_rng(3)
        model = build_vision_cnn(channels=(2, 3), dense=(8,), activation='tanh', seed=8)
        self.check(model, rng.random((2, 1, 60, 60)), [2, 0], per_tensor=10)

    def test_reduced_emg_architecture(self):
        rng = np.random.default_rng(4)
        model = build_emg_cnn(channels=(2, 3), dense=(6,), activation='tanh', seed=9)
        self.check(model, rng.normal(0, 3, (3, 1, 16)), [0, 1, 2])

    def test_zero_weights_give_ln5(self):
        model = build_dense_cnn(4)
        model.set_parameters({name: np.zeros_like(value) for name, value in model.parameters().items()})
        gradients, loss = backward(model, np.array([1.0, -2.0, 0.5, 3.0]), 2)
        self.assertAlmostEqual(loss, math.log(5), places=12)
        self.assertAlmostEqual(loss, 1.6094, places=4)
        self.assertEqual(set(gradients), {'layers.0.W', 'layers.0.b'})

    def test_dense_model_matches_logistic_regression(self):
        rng = np.random.default_rng(5)
        model = build_dense_cnn(6, seed=3)
        X = rng.normal(size=(8, 6))
        labels = rng.integers(0, 5, 8)
        _, gradients = model.loss_and_gradients(X, labels)

        W, b = model.parameters()['layers.0.W'], model.parameters()['layers.0.b']
        logits = X @ W.T + b
        P = np.exp(logits - logits.max(axis=1, keepdims=True))
        P /= P.sum(axis=1, keepdims=True)
        Y = np.eye(5)[labels]
        np.testing.assert_allclose(gradients['layers.0.W'], (P - Y).T @ X / 8, rtol=1e-10, atol=1e-12)
        np.testing.assert_allclose(gradients['layers.0.b'], (P - Y).mean(axis=0), rtol=1e-10, atol=1e-12)

    def test_invalid_label(self):
        model = build_dense_cnn(3)
        with self.assertRaises(InvalidLabel):
            backward(model, np.zeros(3), 5)
        with self.assertRaises(InvalidLabel):
            backward(model, np.zeros(3), -1)


class AdadeltaTests(SimpleTestCase):
    def test_zero_gradient_only_decays_accumulators(self):
        state = AdadeltaState(rho=0.95, epsilon=1e-6)
        params = {'w': np.array([0.3, -0.2])}
        adadelta_step(params, {'w': np.array([1.0, -4.0])}, state)
        before = params['w'].copy()
        square_grad = state.square_grad['w'].copy()
        square_delta = state.square_delta['w'].copy()

        adadelta_step(params, {'w': np.zeros(2)}, state)
        np.testing.assert_array_equal(params['w'], before)
        np.testing.assert_allclose(state.square_grad['w'], 0.95 * square_grad)
        np.testing.assert_allclose(state.square_delta['w'], 0.95 * square_delta)

    def test_first_step(self):
        rho, eps, g = 0.95, 1e-6, 0.8
        params = {'w': np.array([2.0])}
        adadelta_step(params, {'w': np.array([g])}, AdadeltaState(rho=rho, epsilon=eps))
        expected = -math.sqrt(eps) / math.sqrt((1 - rho) * g * g + eps) * g
        self.assertAlmostEqual(params['w'][0] - 2.0, expected, delta=1e-15)

    def test_quadratic_bowl(self):
        rho, eps = 0.95, 1e-6
        params = {'w': np.array([1.0])}
        state = AdadeltaState(rho=rho, epsilon=eps)
        w, square_grad, square_delta = 1.0, 0.0, 0.0
        trajectory = [1.0]
        for _ in range(200):
            adadelta_step(params, {'w': 2.0 * params['w']}, state)
            g = 2.0 * w
            square_grad = rho * square_grad + (1 - rho) * g * g
            delta = -math.sqrt(square_delta + eps) / math.sqrt(square_grad + eps) * g
            square_delta = rho * square_delta + (1 - rho) * delta * delta
            w += delta
            self.assertAlmostEqual(params['w'][0], w, delta=1e-12)
            trajectory.append(abs(params['w'][0]))
        self.assertTrue(all(b < a for a, b in zip(trajectory, trajectory[1:])))
        self.assertLess(trajectory[-1], 0.5)

    def test_shape_mismatch(self):
        with self.assertRaises(ShapeMismatch):
            adadelta_step({'w': np.zeros(2)}, {'w': np.zeros(3)}, AdadeltaState())


class TrainingTests(SimpleTestCase):
    def toy_dataset(self, per_class=20):
        X = np.zeros((5 * per_class, 1, 16))
        labels = np.repeat(np.arange(5), per_class)
        for i, label in enumerate(labels):
            X[i, 0, 3 * label:3 * label + 3] = 1.0
        return X, labels

    def test_memorizes_distinct_inputs(self):
        X, labels = self.toy_dataset()
        result = train(build_emg_cnn(seed=0), X, labels, epochs=50, batch_size=5, seed=0)
        self.assertGreaterEqual(np.mean(result.model.predict(X) == labels), 0.99)
        self.assertLess(result.loss_history[-1], result.loss_history[0])
        self.assertEqual(len(result.loss_history), 50)

    def test_zero_epochs_returns_the_model_unchanged(self):
        model = build_emg_cnn(seed=1)
        X, labels = self.toy_dataset(per_class=2)
        result = train(model, X, labels, epochs=0, batch_size=4, seed=0)
        self.assertEqual(result.loss_history, [])
        for name, value in model.parameters().items():
            np.testing.assert_array_equal(result.model.parameters()[name], value)

    def test_same_seed_same_history(self):
        X, labels = self.toy_dataset(per_class=4)
        first = train(build_emg_cnn(seed=2), X, labels, epochs=3, batch_size=6, seed=11)
        second = train(build_emg_cnn(seed=2), X, labels, epochs=3, batch_size=6, seed=11)
        self.assertEqual(first.loss_history, second.loss_history)
        self.assertEqual(cnn_to_bytes(first.model), cnn_to_bytes(second.model))

    def test_input_model_is_not_modified(self):
        model = build_emg_cnn(seed=4)
        before = {name: value.copy() for name, value in model.parameters().items()}
        X, labels = self.toy_dataset(per_class=2)
        train(model, X, labels, epochs=2, batch_size=5, seed=0)
        for name, value in model.parameters().items():
            np.testing.assert_array_equal(value, before[name])

    def test_empty_dataset(self):
        with self.assertRaises(EmptyDataset):
            train(build_emg_cnn(), np.zeros((0, 1, 16)), [], epochs=1)


class SerializationTests(SimpleTestCase):
    def test_container_restores_predictions(self):
        model = build_vision_cnn(input_side=20, channels=(2, 3), dense=(6,), seed=5)
        data = cnn_to_bytes(model, modality='DVS')
        self.assertEqual(data[:4], b'FGCN')
        restored, descriptor = cnn_from_bytes(data)
        self.assertEqual(descriptor['modality'], 'DVS')
        X = np.random.default_rng(0).random((3, 1, 20, 20))
        np.testing.assert_array_equal(restored.predict_proba(X), model.predict_proba(X))

    def test_json_document_converts_back_to_the_same_bytes(self):
        data = cnn_to_bytes(build_emg_cnn(seed=6))
        self.assertEqual(from_json_document(to_json_document(data)), data)

    def test_rejects_damaged_containers(self):
        data = cnn_to_bytes(build_dense_cnn(3))
        with self.assertRaises(ModelFormatError):
            unpack(b'XXXX' + data[4:])
        with self.assertRaises(ModelFormatError):
            unpack(data[:-8])
        with self.assertRaises(ModelFormatError):
            unpack(data + b'\x00')
