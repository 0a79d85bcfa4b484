"""Downstream classifier suite: logistic regression, CART tree, random
forest, MLP, and a linear-kernel SVM, all behind one fit/predict_proba
contract.

Logistic/SVM/MLP expect standardized + one-hot inputs; trees and forests
consume raw numerics with integer-coded categoricals treated as ordered.
The decision threshold is fixed at 0.5 throughout.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import nn_core
from .errors import SchemaMismatch
from .nn_core import AdamConfig, Layer, NetworkSpec, adam_step, backward, bce_loss, forward, init_network


@dataclass
class TreeParams:
    max_depth: int = 10
    min_samples_leaf: int = 10
    min_samples_split: int = 10
    max_features: str = "log2"  # "log2" or "all"

    def __post_init__(self):
        if min(self.max_depth, self.min_samples_leaf, self.min_samples_split) < 1:
            raise ValueError("tree limits must be >= 1")


@dataclass
class ForestParams:
    n_estimators: int = 100
    tree: TreeParams = field(default_factory=TreeParams)
    bootstrap: bool = True
    seed: int = 0

    def __post_init__(self):
        if self.n_estimators < 1:
            raise ValueError("n_estimators must be >= 1")


@dataclass
class MlpClfParams:
    hidden_width: int = 16
    epochs: int = 200
    batch_size: int = 32
    learning_rate: float = 0.001
    seed: int = 0


@dataclass
class FittedClassifier:
    kind: str  # "logistic", "tree", "forest", "mlp", "svm"
    n_features: int
    params: dict = field(default_factory=dict)

    def predict_proba(self, X):
        return predict_proba(self, X)

    def predict(self, X, threshold=0.5):
        return (self.predict_proba(X) >= threshold).astype(int)


def _check_rows(model, X):
    X = np.atleast_2d(np.asarray(X, dtype=float))
    if X.shape[1] != model.n_features:
        raise SchemaMismatch(
            f"row width {X.shape[1]} != training width {model.n_features}")
    return X


# --- logistic regression -------------------------------------------------

def _sigmoid(z):
    out = np.empty_like(z)
    pos = z >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-z[pos]))
    ez = np.exp(z[~pos])
    out[~pos] = ez / (1.0 + ez)
    return out


def fit_logistic(X, y, l2=0.0, epochs=5000, lr=0.1, seed=0):
    """Full-batch gradient descent on L2-regularized cross-entropy.

    The bias term is not penalized. Stops at gradient norm < 1e-6.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(y)) < 2:
        raise ValueError("both classes must be present")
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    for _ in range(epochs):
        p = _sigmoid(X @ w + b)
        gw = X.T @ (p - y) / n + l2 * w
        gb = float((p - y).mean())
        if np.sqrt((gw @ gw) + gb * gb) < 1e-6:
            break
        w -= lr * gw
        b -= lr * gb
    return FittedClassifier("logistic", d, {"w": w, "b": b, "l2": l2})


def logistic_objective(w, b, X, y, l2):
    z = X @ w + b
    # log(1 + exp(-margin)) via the stable softplus form
    margin = np.where(y == 1, z, -z)
    loss = np.mean(np.logaddexp(0.0, -margin))
    return float(loss + 0.5 * l2 * (w @ w))


# --- CART decision tree --------------------------------------------------

@dataclass
class TreeNode:
    feature: int = -1
    threshold: float = 0.0
    left: object = None
    right: object = None
    proba: float = 0.0  # positive fraction at this node
    n_samples: int = 0

    @property
    def is_leaf(self):
        return self.left is None


def gini(y):
    if len(y) == 0:
        return 0.0
    p = y.mean()
    return float(2.0 * p * (1.0 - p))


def _n_features_to_try(d, max_features):
    if max_features == "all":
        return d
    return max(1, int(math.floor(math.log2(d)))) if d > 1 else 1


def best_split(X, y, feature_subset, min_samples_leaf):
    """Lowest weighted-Gini (feature, threshold); ties break on lowest
    feature index then lowest threshold. Thresholds are midpoints between
    consecutive distinct sorted values. Returns None if nothing qualifies."""
    n = len(y)
    best = None  # (score, feature, threshold)
    for f in sorted(feature_subset):
        order = np.argsort(X[:, f], kind="stable")
        xs = X[order, f]
        ys = y[order]
        pos_cum = np.cumsum(ys)
        distinct_ends = np.flatnonzero(xs[:-1] < xs[1:])  # split after index i
        for i in distinct_ends:
            n_left = i + 1
            n_right = n - n_left
            if n_left < min_samples_leaf or n_right < min_samples_leaf:
                continue
            pos_left = pos_cum[i]
            pos_right = pos_cum[-1] - pos_left
            pl = pos_left / n_left
            pr = pos_right / n_right
            score = (n_left * 2 * pl * (1 - pl) + n_right * 2 * pr * (1 - pr)) / n
            thresh = (xs[i] + xs[i + 1]) / 2.0
            if best is None or score < best[0] - 1e-15:
                best = (score, f, thresh)
    if best is None:
        return None
    return best[1], best[2], best[0]


def _grow(X, y, depth, params, rng):
    node = TreeNode(proba=float(y.mean()) if len(y) else 0.0, n_samples=len(y))
    if (
        depth >= params.max_depth
        or len(y) < params.min_samples_split
        or y.min() == y.max()
    ):
        return node
    d = X.shape[1]
    k = _n_features_to_try(d, params.max_features)
    if k >= d:
        subset = range(d)
    else:
        subset = rng.choice(d, size=k, replace=False)
    found = best_split(X, y, subset, params.min_samples_leaf)
    if found is None:
        return node
    f, t, score = found
    if score >= gini(y) - 1e-15:  # split must reduce impurity
        return node
    mask = X[:, f] <= t
    node.feature = f
    node.threshold = t
    node.left = _grow(X[mask], y[mask], depth + 1, params, rng)
    node.right = _grow(X[~mask], y[~mask], depth + 1, params, rng)
    return node


def fit_tree(X, y, params=None, seed=0):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(y) == 0:
        raise ValueError("empty training set")
    params = params or TreeParams()
    rng = np.random.default_rng(seed)
    root = _grow(X, y, 0, params, rng)
    return FittedClassifier("tree", X.shape[1], {"root": root, "tree_params": params})


def _tree_proba_row(node, row):
    while not node.is_leaf:
        node = node.left if row[node.feature] <= node.threshold else node.right
    return node.proba


# --- random forest -------------------------------------------------------

def fit_forest(X, y, params=None):
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(y) == 0:
        raise ValueError("empty training set")
    params = params or ForestParams()
    n = len(y)
    trees = []
    for t in range(params.n_estimators):
        tree_seed = params.seed * 1_000_003 + t
        if params.bootstrap:
            idx = np.random.default_rng(tree_seed).integers(0, n, size=n)
            Xt, yt = X[idx], y[idx]
        else:
            Xt, yt = X, y
        trees.append(fit_tree(Xt, yt, params.tree, seed=tree_seed + 1))
    return FittedClassifier("forest", X.shape[1],
                            {"trees": trees, "forest_params": params})


# --- MLP -----------------------------------------------------------------

def fit_mlp_classifier(X, y, params=None):
    """Two 16-wide ReLU layers into a sigmoid unit, Adam at 0.001, BCE."""
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if len(np.unique(y)) < 2:
        raise ValueError("both classes must be present")
    params = params or MlpClfParams()
    spec = NetworkSpec(X.shape[1], (
        Layer(params.hidden_width, nn_core.RELU),
        Layer(params.hidden_width, nn_core.RELU),
        Layer(1, nn_core.SIGMOID),
    ))
    net = init_network(spec, params.seed)
    adam = AdamConfig(learning_rate=params.learning_rate)
    rng = np.random.default_rng(params.seed)
    n = len(y)
    for _ in range(params.epochs):
        order = rng.permutation(n)
        for start in range(0, n, params.batch_size):
            idx = order[start:start + params.batch_size]
            acts = forward(net, X[idx])
            loss, grad = bce_loss(acts[-1][:, 0], y[idx])
            gw, gb, _ = backward(net, acts, grad[:, None])
            adam_step(net, gw, gb, adam)
    return FittedClassifier("mlp", X.shape[1], {"net": net})


# --- linear SVM ----------------------------------------------------------

def svm_objective(w, b, X, y_pm, C):
    margins = y_pm * (X @ w + b)
    return float(0.5 * (w @ w) + C * np.maximum(0.0, 1.0 - margins).mean())


def fit_svm_linear(X, y, C=1.0, epochs=2000, seed=0):
    """Hinge + L2 by full-batch subgradient descent with averaged iterates.

    Probabilities come from a logistic link fitted on the training margins.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=int)
    if len(np.unique(y)) < 2:
        raise ValueError("both classes must be present")
    y_pm = np.where(y == 1, 1.0, -1.0)
    n, d = X.shape
    w = np.zeros(d)
    b = 0.0
    w_avg = np.zeros(d)
    b_avg = 0.0
    for t in range(1, epochs + 1):
        margins = y_pm * (X @ w + b)
        active = margins < 1.0
        gw = w - C * (y_pm[active][:, None] * X[active]).sum(axis=0) / n
        gb = -C * y_pm[active].sum() / n
        lr = 1.0 / (1.0 + 0.01 * t)  # deterministic decaying schedule
        w -= lr * gw
        b -= lr * gb
        w_avg += (w - w_avg) / t
        b_avg += (b - b_avg) / t
    w, b = w_avg, b_avg

    # Platt-style link: p = sigmoid(a*m + c) fitted on training margins
    m = X @ w + b
    a, c = 1.0, 0.0
    for _ in range(2000):
        p = _sigmoid(a * m + c)
        ga = float(((p - y) * m).mean())
        gc = float((p - y).mean())
        if math.hypot(ga, gc) < 1e-8:
            break
        a -= 0.1 * ga
        c -= 0.1 * gc
    return FittedClassifier("svm", d, {"w": w, "b": b, "platt": (a, c), "C": C})


# --- uniform prediction --------------------------------------------------

def predict_proba(model, X):
    X = _check_rows(model, X)
    if model.kind == "logistic":
        return _sigmoid(X @ model.params["w"] + model.params["b"])
    if model.kind == "tree":
        root = model.params["root"]
        return np.array([_tree_proba_row(root, row) for row in X])
    if model.kind == "forest":
        probas = np.stack([
            np.array([_tree_proba_row(t.params["root"], row) for row in X])
            for t in model.params["trees"]
        ])
        return probas.mean(axis=0)
    if model.kind == "mlp":
        return forward(model.params["net"], X)[-1][:, 0]
    if model.kind == "svm":
        a, c = model.params["platt"]
        return _sigmoid(a * (X @ model.params["w"] + model.params["b"]) + c)
    raise ValueError(f"unknown classifier kind {model.kind!r}")


def forest_vote(model, X, threshold=0.5):
    """Majority vote over per-tree labels, exposed alongside mean probability."""
    X = _check_rows(model, X)
    votes = np.stack([
        (np.array([_tree_proba_row(t.params["root"], row) for row in X]) >= threshold)
        for t in model.params["trees"]
    ])
    return (votes.mean(axis=0) > 0.5).astype(int)
