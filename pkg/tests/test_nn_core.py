import json

import numpy as np
import pytest

from fingan import nn_core
from fingan.errors import NonFiniteGradient, NonFiniteInput, ShapeMismatch
from fingan.nn_core import (
    AdamConfig,
    Layer,
    NetworkSpec,
    adam_step,
    backward,
    bce_loss,
    forward,
    init_network,
    state_from_dict,
    state_to_dict,
)

ALL_ACTIVATIONS = [
    Layer(4, nn_core.RELU),
    Layer(4, nn_core.LEAKY_RELU, 0.2),
    Layer(4, nn_core.SIGMOID),
    Layer(4, nn_core.TANH),
    Layer(4, nn_core.SOFTMAX),
    Layer(4, nn_core.IDENTITY),
]


def numeric_gradients(state, batch, upstream, h=1e-6):
    """Central finite differences of sum(output * upstream) w.r.t. weights."""
    def objective():
        return float((forward(state, batch)[-1] * upstream).sum())

    grads_w, grads_b = [], []
    for W in state.weights:
        g = np.zeros_like(W)
        for idx in np.ndindex(W.shape):
            orig = W[idx]
            W[idx] = orig + h
            plus = objective()
            W[idx] = orig - h
            minus = objective()
            W[idx] = orig
            g[idx] = (plus - minus) / (2 * h)
        grads_w.append(g)
    for b in state.biases:
        g = np.zeros_like(b)
        for idx in np.ndindex(b.shape):
            orig = b[idx]
            b[idx] = orig + h
            plus = objective()
            b[idx] = orig - h
            minus = objective()
            b[idx] = orig
            g[idx] = (plus - minus) / (2 * h)
        grads_b.append(g)
    return grads_w, grads_b


def assert_close_grads(analytic, numeric, rtol=1e-4, atol=1e-6):
    for a, n in zip(analytic, numeric):
        np.testing.assert_allclose(a, n, rtol=rtol, atol=atol)


class TestInit:
    def test_deterministic(self):
        spec = NetworkSpec(3, (Layer(5, nn_core.RELU), Layer(2, nn_core.SIGMOID)))
        s1 = init_network(spec, seed=42)
        s2 = init_network(spec, seed=42)
        for w1, w2 in zip(s1.weights, s2.weights):
            np.testing.assert_array_equal(w1, w2)

    def test_shapes(self):
        spec = NetworkSpec(32, (Layer(128, nn_core.LEAKY_RELU),))
        s = init_network(spec, seed=0)
        assert s.weights[0].shape == (128, 32)
        assert s.biases[0].shape == (128,)
        assert s.biases[0].sum() == 0.0

    def test_weight_mean_small(self):
        spec = NetworkSpec(128, (Layer(128, nn_core.RELU),))
        s = init_network(spec, seed=3)
        assert abs(s.weights[0].mean()) < 0.02


class TestForward:
    def test_zero_weights_sigmoid(self):
        spec = NetworkSpec(3, (Layer(2, nn_core.SIGMOID),))
        s = init_network(spec, seed=0)
        s.weights[0][:] = 0.0
        out = forward(s, np.ones((4, 3)))[-1]
        np.testing.assert_array_equal(out, np.full((4, 2), 0.5))

    def test_softmax_uniform(self):
        spec = NetworkSpec(3, (Layer(3, nn_core.SOFTMAX),))
        s = init_network(spec, seed=0)
        s.weights[0][:] = 0.0
        out = forward(s, np.zeros((1, 3)))[-1]
        np.testing.assert_allclose(out, np.full((1, 3), 1 / 3))

    def test_softmax_rows_sum_to_one(self):
        spec = NetworkSpec(5, (Layer(6, nn_core.SOFTMAX),))
        s = init_network(spec, seed=1)
        out = forward(s, np.random.default_rng(0).normal(size=(10, 5)))[-1]
        np.testing.assert_allclose(out.sum(axis=1), np.ones(10), atol=1e-9)
        assert np.all(out >= 0) and np.all(out <= 1)

    def test_leaky_relu_definition(self):
        spec = NetworkSpec(1, (Layer(1, nn_core.LEAKY_RELU, 0.2),))
        s = init_network(spec, seed=0)
        s.weights[0][:] = 1.0
        out = forward(s, np.array([[-1.0]]))[-1]
        assert out[0, 0] == pytest.approx(-0.2)

    def test_shape_and_finite_errors(self):
        spec = NetworkSpec(3, (Layer(2, nn_core.RELU),))
        s = init_network(spec, seed=0)
        with pytest.raises(ShapeMismatch):
            forward(s, np.ones((2, 4)))
        with pytest.raises(NonFiniteInput):
            forward(s, np.array([[1.0, np.nan, 0.0]]))


class TestBackward:
    @pytest.mark.parametrize("hidden", ALL_ACTIVATIONS, ids=lambda l: l.activation)
    def test_gradcheck_each_activation(self, hidden):
        spec = NetworkSpec(3, (hidden, Layer(2, nn_core.IDENTITY)))
        s = init_network(spec, seed=7)
        rng = np.random.default_rng(1)
        batch = rng.normal(size=(5, 3))
        upstream = rng.normal(size=(5, 2))
        acts = forward(s, batch)
        gw, gb, _ = backward(s, acts, upstream)
        nw, nb = numeric_gradients(s, batch, upstream)
        assert_close_grads(gw, nw)
        assert_close_grads(gb, nb)

    @pytest.mark.parametrize("seed", [0, 1, 2])
    def test_gradcheck_random_topologies(self, seed):
        rng = np.random.default_rng(seed)
        acts_pool = [nn_core.RELU, nn_core.LEAKY_RELU, nn_core.SIGMOID, nn_core.TANH]
        layers = tuple(
            Layer(int(rng.integers(2, 6)), acts_pool[rng.integers(len(acts_pool))])
            for _ in range(3)
        )
        spec = NetworkSpec(4, layers)
        s = init_network(spec, seed=seed + 10)
        batch = rng.normal(size=(4, 4))
        upstream = rng.normal(size=(4, layers[-1].width))
        acts = forward(s, batch)
        gw, gb, _ = backward(s, acts, upstream)
        nw, nb = numeric_gradients(s, batch, upstream)
        assert_close_grads(gw, nw)
        assert_close_grads(gb, nb)

    def test_input_gradient_matches_fd(self):
        spec = NetworkSpec(3, (Layer(4, nn_core.TANH), Layer(2, nn_core.SIGMOID)))
        s = init_network(spec, seed=2)
        rng = np.random.default_rng(5)
        batch = rng.normal(size=(2, 3))
        upstream = rng.normal(size=(2, 2))
        acts = forward(s, batch)
        _, _, gin = backward(s, acts, upstream)
        h = 1e-6
        for i in np.ndindex(batch.shape):
            b2 = batch.copy()
            b2[i] += h
            plus = float((forward(s, b2)[-1] * upstream).sum())
            b2[i] -= 2 * h
            minus = float((forward(s, b2)[-1] * upstream).sum())
            assert gin[i] == pytest.approx((plus - minus) / (2 * h), rel=1e-4, abs=1e-6)

    def test_zero_upstream(self):
        spec = NetworkSpec(3, (Layer(4, nn_core.RELU), Layer(1, nn_core.SIGMOID)))
        s = init_network(spec, seed=0)
        acts = forward(s, np.ones((3, 3)))
        gw, gb, gin = backward(s, acts, np.zeros((3, 1)))
        assert all(np.all(g == 0) for g in gw + gb)
        assert np.all(gin == 0)

    def test_duplicated_rows_double_gradient(self):
        spec = NetworkSpec(2, (Layer(3, nn_core.TANH), Layer(1, nn_core.IDENTITY)))
        s = init_network(spec, seed=4)
        batch = np.array([[0.3, -1.2], [0.8, 0.1]])
        up = np.ones((2, 1))
        acts = forward(s, batch)
        gw1, _, _ = backward(s, acts, up)
        doubled = np.vstack([batch, batch])
        acts2 = forward(s, doubled)
        gw2, _, _ = backward(s, acts2, np.ones((4, 1)))
        for a, b in zip(gw1, gw2):
            np.testing.assert_allclose(2 * a, b, rtol=1e-12)


class TestAdam:
    def test_first_step_scalar(self):
        spec = NetworkSpec(1, (Layer(1, nn_core.IDENTITY),))
        s = init_network(spec, seed=0)
        w0 = s.weights[0].copy()
        cfg = AdamConfig(learning_rate=0.01)
        adam_step(s, [np.array([[1.0]])], [np.array([0.0])], cfg)
        delta = s.weights[0][0, 0] - w0[0, 0]
        # first step: m_hat = g, v_hat = g^2 -> delta = -lr * g/(|g| + eps)
        assert delta == pytest.approx(-0.01, rel=1e-6)

    def test_zero_gradient_no_move(self):
        spec = NetworkSpec(2, (Layer(2, nn_core.RELU),))
        s = init_network(spec, seed=1)
        w0 = [w.copy() for w in s.weights]
        adam_step(s, [np.zeros((2, 2))], [np.zeros(2)], AdamConfig())
        for a, b in zip(w0, s.weights):
            np.testing.assert_array_equal(a, b)
        assert s.step == 1

    def test_deterministic(self):
        spec = NetworkSpec(2, (Layer(2, nn_core.SIGMOID),))
        g = np.random.default_rng(0).normal(size=(2, 2))
        s1 = init_network(spec, seed=3)
        s2 = init_network(spec, seed=3)
        for s in (s1, s2):
            adam_step(s, [g.copy()], [np.ones(2)], AdamConfig())
        np.testing.assert_array_equal(s1.weights[0], s2.weights[0])

    def test_nonfinite_rejected(self):
        spec = NetworkSpec(1, (Layer(1, nn_core.IDENTITY),))
        s = init_network(spec, seed=0)
        with pytest.raises(NonFiniteGradient):
            adam_step(s, [np.array([[np.nan]])], [np.zeros(1)], AdamConfig())


class TestBce:
    def test_half_prob(self):
        loss, _ = bce_loss(np.array([0.5]), np.array([1.0]))
        assert loss == pytest.approx(np.log(2))

    def test_perfect_prediction(self):
        loss, grad = bce_loss(np.array([1.0, 0.0]), np.array([1.0, 0.0]))
        assert loss <= 1e-6  # bounded by the clamp floor
        assert np.all(np.abs(grad) < 1e-4)

    def test_gradient_matches_fd(self):
        rng = np.random.default_rng(8)
        p = rng.uniform(0.05, 0.95, size=12)
        t = rng.integers(0, 2, size=12).astype(float)
        _, grad = bce_loss(p, t)
        h = 1e-7
        for i in range(len(p)):
            p_plus, p_minus = p.copy(), p.copy()
            p_plus[i] += h
            p_minus[i] -= h
            fd = (bce_loss(p_plus, t)[0] - bce_loss(p_minus, t)[0]) / (2 * h)
            assert grad[i] == pytest.approx(fd, rel=1e-5)


def test_serialization_round_trip():
    spec = NetworkSpec(3, (Layer(4, nn_core.LEAKY_RELU, 0.2), Layer(1, nn_core.SIGMOID)))
    s = init_network(spec, seed=13)
    d = json.loads(json.dumps(state_to_dict(s)))
    restored = state_from_dict(d)
    for a, b in zip(s.weights, restored.weights):
        np.testing.assert_array_equal(a, b)  # bit-exact through JSON
    batch = np.random.default_rng(0).normal(size=(2, 3))
    np.testing.assert_array_equal(forward(s, batch)[-1], forward(restored, batch)[-1])
