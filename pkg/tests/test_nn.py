import numpy as np
import pytest

from aeboost import nn
from aeboost.exceptions import ConfigurationError

from oracles import finite_difference_grads, gradients_match, matmul_forward, random_network


def zero_layer(in_dim, out_dim, activation):
    return nn.DenseLayer(np.zeros((in_dim, out_dim)), np.zeros(out_dim), activation)


class TestForward:
    def test_zero_network_sigmoid_gives_half(self):
        layers = [zero_layer(3, 4, nn.Activation.SIGMOID),
                  zero_layer(4, 3, nn.Activation.SIGMOID)]
        out = nn.forward(layers, np.array([0.2, 0.9, -1.0]))
        np.testing.assert_allclose(out, 0.5, rtol=0, atol=0)

    def test_single_relu_layer_identity_weights(self):
        layer = nn.DenseLayer(np.eye(2), np.zeros(2), nn.Activation.RELU)
        out = nn.forward([layer], np.array([-1.0, 2.0]))
        np.testing.assert_array_equal(out, [0.0, 2.0])

    def test_matches_handrolled_three_layer_oracle(self):
        rng = np.random.default_rng(7)
        layers = [nn.glorot_layer(5, 4, nn.Activation.SIGMOID, rng),
                  nn.glorot_layer(4, 3, nn.Activation.RELU, rng),
                  nn.glorot_layer(3, 5, nn.Activation.SIGMOID, rng)]
        x = rng.uniform(0, 1, size=5)
        np.testing.assert_allclose(nn.forward(layers, x), matmul_forward(layers, x),
                                   rtol=0, atol=1e-12)

    def test_dimension_mismatch_raises(self):
        layers = [zero_layer(3, 2, nn.Activation.RELU)]
        with pytest.raises(ConfigurationError):
            nn.forward(layers, np.zeros(4))
        with pytest.raises(ConfigurationError):
            nn.forward([zero_layer(3, 2, nn.Activation.RELU),
                        zero_layer(3, 2, nn.Activation.RELU)], np.zeros(3))

    def test_sigmoid_output_stays_in_open_unit_interval(self):
        rng = np.random.default_rng(11)
        for _ in range(10):
            layers = random_network(rng)
            layers[-1].activation = nn.Activation.SIGMOID
            x = rng.uniform(0, 1, size=layers[0].in_dim)
            out = nn.forward(layers, x)
            assert np.all(out > 0.0) and np.all(out < 1.0)


class TestMseLoss:
    def test_identical_vectors(self):
        assert nn.mse_loss(np.array([1.0, 2.0]), np.array([1.0, 2.0])) == 0.0

    def test_three_four_five(self):
        assert nn.mse_loss(np.array([0.0, 0.0]), np.array([3.0, 4.0])) == 25.0

    def test_hand_arithmetic(self):
        loss = nn.mse_loss(np.array([0.1, 0.2, 0.3]), np.array([0.3, 0.2, 0.1]))
        assert loss == pytest.approx(0.08, abs=1e-12)

    def test_length_mismatch_raises(self):
        with pytest.raises(ConfigurationError):
            nn.mse_loss(np.zeros(2), np.zeros(3))

    def test_batch_reduction_is_row_mean(self):
        out = np.array([[0.0, 0.0], [0.0, 0.0]])
        tgt = np.array([[3.0, 4.0], [0.0, 0.0]])
        assert nn.mse_loss(out, tgt) == 12.5


class TestBackward:
    def test_zero_network_bias_gradients_match_finite_differences(self):
        layers = [zero_layer(2, 3, nn.Activation.SIGMOID),
                  zero_layer(3, 2, nn.Activation.SIGMOID)]
        x = np.zeros(2)
        target = np.zeros(2)
        bp = nn.flatten_grads(nn.backward(layers, x, target))
        fd = finite_difference_grads(layers, x, target)
        assert gradients_match(bp, fd)
        # at sigmoid(0)=0.5 with zero target: d(mse)/d(bias_j) = 2*0.5*0.25 = 0.25
        np.testing.assert_allclose(bp[3], 0.25, atol=1e-12)

    def test_exact_reconstruction_has_zero_gradients(self):
        layers = [zero_layer(2, 2, nn.Activation.SIGMOID)]
        x = np.array([0.3, 0.9])
        target = np.array([0.5, 0.5])  # sigmoid(0) exactly
        for d_w, d_b in nn.backward(layers, x, target):
            assert np.all(d_w == 0.0) and np.all(d_b == 0.0)

    def test_seeded_five_layer_network_against_central_differences(self):
        rng = np.random.default_rng(123)
        dims = [6, 5, 4, 5, 3, 6]
        acts = [nn.Activation.SIGMOID, nn.Activation.RELU, nn.Activation.RELU,
                nn.Activation.RELU, nn.Activation.SIGMOID]
        layers = [nn.glorot_layer(dims[k], dims[k + 1], acts[k], rng) for k in range(5)]
        x = rng.uniform(0, 1, size=6)
        target = rng.uniform(0, 1, size=6)
        bp = nn.flatten_grads(nn.backward(layers, x, target))
        fd = finite_difference_grads(layers, x, target)
        assert gradients_match(bp, fd)

    def test_random_networks_batch_inputs(self):
        rng = np.random.default_rng(2024)
        for _ in range(6):
            layers = random_network(rng, max_layers=4, max_dim=8)
            x = rng.uniform(0, 1, size=(3, layers[0].in_dim))
            target = rng.uniform(0, 1, size=(3, layers[-1].out_dim))
            bp = nn.flatten_grads(nn.backward(layers, x, target))
            fd = finite_difference_grads(layers, x, target)
            assert gradients_match(bp, fd)


class TestAdam:
    def test_first_step_on_unit_gradient(self):
        state = nn.AdamState(learning_rate=1e-3, weight_decay=0.0)
        params = [np.array([1.0])]
        nn.adam_step(params, [np.array([1.0])], state)
        # bias correction makes m_hat = v_hat = 1 on step one
        assert params[0][0] == pytest.approx(0.999, abs=1e-8)
        assert state.step_count == 1

    def test_zero_gradient_is_fixed_point(self):
        state = nn.AdamState(weight_decay=0.0)
        params = [np.array([0.7, -0.2])]
        nn.adam_step(params, [np.zeros(2)], state)
        np.testing.assert_array_equal(params[0], [0.7, -0.2])

    def test_descends_scalar_quadratic(self):
        state = nn.AdamState(learning_rate=1e-3, weight_decay=0.0)
        params = [np.array([1.0])]
        trail = []
        for _ in range(200):
            nn.adam_step(params, [2.0 * params[0]], state)
            trail.append(abs(float(params[0][0])))
        assert trail[-1] < 0.9
        window_means = [np.mean(trail[k:k + 20]) for k in range(0, 200, 20)]
        assert all(a > b for a, b in zip(window_means, window_means[1:]))

    def test_second_moment_stays_nonnegative(self):
        rng = np.random.default_rng(5)
        state = nn.AdamState()
        params = [rng.normal(size=(3, 2)), rng.normal(size=2)]
        for _ in range(50):
            nn.adam_step(params, [rng.normal(size=(3, 2)), rng.normal(size=2)], state)
        assert all(np.all(v >= 0) for v in state.second_moment)
        assert state.step_count == 50

    def test_weight_decay_pulls_toward_zero(self):
        state = nn.AdamState(learning_rate=1e-3, weight_decay=0.1)
        params = [np.array([1.0])]
        for _ in range(500):
            nn.adam_step(params, [np.zeros(1)], state)
        assert abs(params[0][0]) < 1.0


class TestDeterminismAndFiniteness:
    def run_training(self, seed):
        rng = np.random.default_rng(seed)
        layers = [nn.glorot_layer(4, 3, nn.Activation.SIGMOID, rng),
                  nn.glorot_layer(3, 4, nn.Activation.SIGMOID, rng)]
        data = np.random.default_rng(99).uniform(0, 1, size=(8, 4))
        state = nn.AdamState()
        for _ in range(30):
            grads = nn.flatten_grads(nn.backward(layers, data, data))
            nn.adam_step(nn.layer_params(layers), grads, state)
        return layers

    def test_identical_seed_gives_bit_identical_parameters(self):
        a = self.run_training(42)
        b = self.run_training(42)
        for la, lb in zip(a, b):
            assert np.array_equal(la.weights, lb.weights)
            assert np.array_equal(la.biases, lb.biases)

    def test_parameters_stay_finite(self):
        layers = self.run_training(7)
        for layer in layers:
            assert np.all(np.isfinite(layer.weights))
            assert np.all(np.isfinite(layer.biases))
