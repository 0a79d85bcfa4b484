"""Minimal feedforward network engine: manual backprop plus Adam.

Shared by the GAN generators/discriminators and the MLP classifier. A layer
is a dense affine map followed by an elementwise (or row-wise, for softmax)
activation. Gradients are sum-reduced over the batch, so loss functions that
want a mean should scale their output gradient by 1/batch.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import NonFiniteGradient, NonFiniteInput, ShapeMismatch

RELU = "relu"
LEAKY_RELU = "leaky_relu"
SIGMOID = "sigmoid"
SOFTMAX = "softmax"
TANH = "tanh"
IDENTITY = "identity"

PROB_EPS = 1e-7  # clamp for log() arguments


@dataclass(frozen=True)
class Layer:
    width: int
    activation: str
    slope: float = 0.2  # leaky ReLU only

    def __post_init__(self):
        if self.width < 1:
            raise ValueError("layer width must be >= 1")
        if self.activation == LEAKY_RELU and not 0 < self.slope < 1:
            raise ValueError("leaky ReLU slope must lie in (0, 1)")


@dataclass(frozen=True)
class NetworkSpec:
    input_dim: int
    layers: tuple  # of Layer


@dataclass
class AdamConfig:
    learning_rate: float = 0.001
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8

    def __post_init__(self):
        if self.learning_rate <= 0:
            raise ValueError("learning rate must be positive")


@dataclass
class NetworkState:
    spec: NetworkSpec
    weights: list  # per layer, (out, in)
    biases: list  # per layer, (out,)
    m_w: list
    v_w: list
    m_b: list
    v_b: list
    step: int = 0

    def copy(self):
        return NetworkState(
            self.spec,
            [w.copy() for w in self.weights],
            [b.copy() for b in self.biases],
            [m.copy() for m in self.m_w],
            [v.copy() for v in self.v_w],
            [m.copy() for m in self.m_b],
            [v.copy() for v in self.v_b],
            self.step,
        )


def init_network(spec, seed):
    """Glorot-uniform weights, zero biases and Adam moments."""
    rng = np.random.default_rng(seed)
    weights, biases = [], []
    fan_in = spec.input_dim
    for layer in spec.layers:
        bound = np.sqrt(6.0 / (fan_in + layer.width))
        weights.append(rng.uniform(-bound, bound, size=(layer.width, fan_in)))
        biases.append(np.zeros(layer.width))
        fan_in = layer.width
    zeros = lambda arrs: [np.zeros_like(a) for a in arrs]
    return NetworkState(spec, weights, biases, zeros(weights), zeros(weights),
                        zeros(biases), zeros(biases))


def _activate(z, layer):
    if layer.activation == RELU:
        return np.maximum(z, 0.0)
    if layer.activation == LEAKY_RELU:
        return np.where(z > 0, z, layer.slope * z)
    if layer.activation == SIGMOID:
        out = np.empty_like(z)
        pos = z >= 0
        out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
        ez = np.exp(z[~pos])
        out[~pos] = ez / (1.0 + ez)
        return out
    if layer.activation == TANH:
        return np.tanh(z)
    if layer.activation == SOFTMAX:
        shifted = z - z.max(axis=1, keepdims=True)
        e = np.exp(shifted)
        return e / e.sum(axis=1, keepdims=True)
    if layer.activation == IDENTITY:
        return z
    raise ValueError(f"unknown activation {layer.activation!r}")


def _activation_grad(a, upstream, layer):
    """Gradient w.r.t. pre-activation, from the activation output a."""
    if layer.activation == RELU:
        return upstream * (a > 0)
    if layer.activation == LEAKY_RELU:
        return upstream * np.where(a > 0, 1.0, layer.slope)
    if layer.activation == SIGMOID:
        return upstream * a * (1.0 - a)
    if layer.activation == TANH:
        return upstream * (1.0 - a * a)
    if layer.activation == SOFTMAX:
        inner = (upstream * a).sum(axis=1, keepdims=True)
        return a * (upstream - inner)
    if layer.activation == IDENTITY:
        return upstream
    raise ValueError(f"unknown activation {layer.activation!r}")


def forward(state, batch):
    """Run the network; returns all layer activations (input first)."""
    batch = np.atleast_2d(np.asarray(batch, dtype=float))
    if batch.shape[1] != state.spec.input_dim:
        raise ShapeMismatch(
            f"batch width {batch.shape[1]} != input_dim {state.spec.input_dim}")
    if not np.all(np.isfinite(batch)):
        raise NonFiniteInput("batch contains NaN or Inf")
    activations = [batch]
    a = batch
    for layer, W, b in zip(state.spec.layers, state.weights, state.biases):
        z = a @ W.T + b
        a = _activate(z, layer)
        activations.append(a)
    return activations


def backward(state, activations, loss_grad_at_output):
    """Backprop; returns (weight grads, bias grads, grad w.r.t. input).

    Weight/bias gradients are summed over the batch.
    """
    grad = np.atleast_2d(np.asarray(loss_grad_at_output, dtype=float))
    if grad.shape != activations[-1].shape:
        raise ShapeMismatch("output gradient shape differs from output activation")
    grad_w = [None] * len(state.weights)
    grad_b = [None] * len(state.biases)
    for i in range(len(state.weights) - 1, -1, -1):
        layer = state.spec.layers[i]
        dz = _activation_grad(activations[i + 1], grad, layer)
        grad_w[i] = dz.T @ activations[i]
        grad_b[i] = dz.sum(axis=0)
        grad = dz @ state.weights[i]
    return grad_w, grad_b, grad


def adam_step(state, grad_w, grad_b, config):
    """In-place Adam update with bias correction; returns the state."""
    for g in grad_w + grad_b:
        if not np.all(np.isfinite(g)):
            raise NonFiniteGradient("gradient contains NaN or Inf")
    state.step += 1
    t = state.step
    b1, b2 = config.beta1, config.beta2
    for params, grads, ms, vs in (
        (state.weights, grad_w, state.m_w, state.v_w),
        (state.biases, grad_b, state.m_b, state.v_b),
    ):
        for p, g, m, v in zip(params, grads, ms, vs):
            m *= b1
            m += (1 - b1) * g
            v *= b2
            v += (1 - b2) * g * g
            m_hat = m / (1 - b1 ** t)
            v_hat = v / (1 - b2 ** t)
            p -= config.learning_rate * m_hat / (np.sqrt(v_hat) + config.eps)
    return state


def bce_loss(predictions, targets):
    """Mean binary cross-entropy and its gradient w.r.t. the predictions."""
    raw = np.asarray(predictions, dtype=float)
    p = np.clip(raw, PROB_EPS, 1.0 - PROB_EPS)
    t = np.asarray(targets, dtype=float)
    n = p.size
    loss = -np.mean(t * np.log(p) + (1.0 - t) * np.log(1.0 - p))
    grad = (p - t) / (p * (1.0 - p)) / n
    # the clamp has zero derivative where it is active
    grad = np.where((raw > PROB_EPS) & (raw < 1.0 - PROB_EPS), grad, 0.0)
    return float(loss), grad


def clip_weights(state, bound):
    """Clamp every weight and bias into [-bound, bound] (WGAN critic)."""
    for arrs in (state.weights, state.biases):
        for a in arrs:
            np.clip(a, -bound, bound, out=a)
    return state


def assert_finite(state):
    for arrs in (state.weights, state.biases):
        for a in arrs:
            if not np.all(np.isfinite(a)):
                raise NonFiniteGradient("network state contains NaN or Inf")


def state_to_dict(state):
    """Versioned JSON-ready dict; weights flat row-major with shapes."""
    return {
        "format": "fingan-network-v1",
        "input_dim": state.spec.input_dim,
        "layers": [
            {"width": l.width, "activation": l.activation, "slope": l.slope}
            for l in state.spec.layers
        ],
        "weights": [
            {"shape": list(w.shape), "data": w.ravel().tolist()} for w in state.weights
        ],
        "biases": [b.tolist() for b in state.biases],
        "step": state.step,
    }


def state_from_dict(d):
    if d.get("format") != "fingan-network-v1":
        raise ValueError(f"unknown network format {d.get('format')!r}")
    spec = NetworkSpec(
        d["input_dim"],
        tuple(Layer(l["width"], l["activation"], l.get("slope", 0.2)) for l in d["layers"]),
    )
    state = init_network(spec, seed=0)
    state.weights = [
        np.array(w["data"]).reshape(w["shape"]) for w in d["weights"]
    ]
    state.biases = [np.array(b, dtype=float) for b in d["biases"]]
    state.step = d.get("step", 0)
    return state
