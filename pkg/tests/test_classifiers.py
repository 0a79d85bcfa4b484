import itertools

import numpy as np
import pytest

from fingan.classifiers import (
    FittedClassifier,
    ForestParams,
    MlpClfParams,
    TreeParams,
    best_split,
    fit_forest,
    fit_logistic,
    fit_mlp_classifier,
    fit_svm_linear,
    fit_tree,
    forest_vote,
    gini,
    logistic_objective,
    svm_objective,
)
from fingan.errors import SchemaMismatch


def separable(n=60, seed=0, gap=3.0):
    rng = np.random.default_rng(seed)
    X = np.vstack([rng.normal(0, 0.5, (n // 2, 2)),
                   rng.normal(gap, 0.5, (n // 2, 2))])
    y = np.repeat([0, 1], n // 2)
    return X, y


def exhaustive_best_split(X, y, min_leaf):
    """Independent oracle: try every midpoint of every feature."""
    n = len(y)
    best = None
    for f in range(X.shape[1]):
        values = np.unique(X[:, f])
        for a, b in zip(values[:-1], values[1:]):
            t = (a + b) / 2
            mask = X[:, f] <= t
            nl, nr = mask.sum(), n - mask.sum()
            if nl < min_leaf or nr < min_leaf:
                continue
            score = (nl * gini(y[mask]) + nr * gini(y[~mask])) / n
            if best is None or score < best[0] - 1e-15:
                best = (score, f, t)
    return best


class TestLogistic:
    def test_matches_independent_optimizer(self):
        from scipy.optimize import minimize

        X, y = separable(40, seed=1, gap=1.5)
        l2 = 0.5
        model = fit_logistic(X, y, l2=l2, epochs=200_000, lr=0.5)

        def obj(theta):
            return logistic_objective(theta[:-1], theta[-1], X, y, l2)

        ref = minimize(obj, np.zeros(3), method="BFGS")
        ours = logistic_objective(model.params["w"], model.params["b"], X, y, l2)
        assert ours <= ref.fun + 1e-6
        np.testing.assert_allclose(model.params["w"], ref.x[:-1], atol=1e-3)
        np.testing.assert_allclose(model.params["b"], ref.x[-1], atol=1e-3)

    def test_separable_accuracy(self):
        X, y = separable(80, seed=2)
        model = fit_logistic(X, y)
        assert (model.predict(X) == y).mean() == 1.0

    def test_probability_range(self):
        X, y = separable(40, seed=3)
        p = fit_logistic(X, y).predict_proba(X)
        assert np.all((p >= 0) & (p <= 1))

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            fit_logistic(np.ones((5, 2)), np.ones(5))

    def test_width_mismatch(self):
        X, y = separable(20, seed=4)
        with pytest.raises(SchemaMismatch):
            fit_logistic(X, y).predict_proba(np.ones((2, 3)))


class TestTree:
    def test_gini_values(self):
        assert gini(np.array([1, 1, 0, 0])) == pytest.approx(0.5)
        assert gini(np.array([1, 1, 1])) == 0.0
        assert gini(np.array([])) == 0.0

    @pytest.mark.parametrize("seed", range(5))
    def test_best_split_matches_exhaustive(self, seed):
        rng = np.random.default_rng(seed)
        X = rng.integers(0, 5, size=(12, 3)).astype(float)
        y = rng.integers(0, 2, size=12)
        if y.min() == y.max():
            y[0] = 1 - y[0]
        got = best_split(X, y, range(3), min_samples_leaf=2)
        want = exhaustive_best_split(X, y, min_leaf=2)
        if want is None:
            assert got is None
        else:
            f, t, score = got
            assert score == pytest.approx(want[0], abs=1e-12)
            assert (f, t) == (want[1], pytest.approx(want[2]))

    def test_tie_breaks_lowest_feature_then_threshold(self):
        # feature 0 and feature 1 both split the labels perfectly
        X = np.array([[0.0, 0.0], [0.0, 0.0], [1.0, 1.0], [1.0, 1.0]])
        y = np.array([0, 0, 1, 1])
        f, t, _ = best_split(X, y, range(2), min_samples_leaf=1)
        assert f == 0
        assert t == pytest.approx(0.5)

    def test_pure_node_is_leaf(self):
        X = np.arange(20, dtype=float)[:, None]
        model = fit_tree(X, np.ones(20, dtype=int),
                         TreeParams(max_features="all"))
        assert model.params["root"].is_leaf
        assert model.params["root"].proba == 1.0

    def test_depth_limit(self):
        rng = np.random.default_rng(0)
        X = rng.normal(size=(200, 3))
        y = rng.integers(0, 2, 200)
        model = fit_tree(X, y, TreeParams(max_depth=2, min_samples_leaf=1,
                                          min_samples_split=2,
                                          max_features="all"))

        def depth(node):
            if node.is_leaf:
                return 0
            return 1 + max(depth(node.left), depth(node.right))

        assert depth(model.params["root"]) <= 2

    def test_min_leaf_respected(self):
        rng = np.random.default_rng(1)
        X = rng.normal(size=(100, 2))
        y = rng.integers(0, 2, 100)
        model = fit_tree(X, y, TreeParams(min_samples_leaf=10,
                                          min_samples_split=10,
                                          max_features="all"))

        def leaves(node):
            if node.is_leaf:
                yield node
            else:
                yield from leaves(node.left)
                yield from leaves(node.right)

        assert all(leaf.n_samples >= 10 for leaf in leaves(model.params["root"]))

    def test_separable_accuracy(self):
        X, y = separable(100, seed=5)
        model = fit_tree(X, y, TreeParams(min_samples_leaf=1,
                                          min_samples_split=2,
                                          max_features="all"))
        assert (model.predict(X) == y).mean() == 1.0

    def test_log2_feature_budget(self):
        # with d=8 features, log2 gives 3 per split
        from fingan.classifiers import _n_features_to_try
        assert _n_features_to_try(8, "log2") == 3
        assert _n_features_to_try(1, "log2") == 1
        assert _n_features_to_try(5, "all") == 5

    def test_deterministic(self):
        rng = np.random.default_rng(6)
        X = rng.normal(size=(150, 6))
        y = rng.integers(0, 2, 150)
        a = fit_tree(X, y, seed=3).predict_proba(X)
        b = fit_tree(X, y, seed=3).predict_proba(X)
        np.testing.assert_array_equal(a, b)


class TestForest:
    def test_single_tree_no_bootstrap_equals_tree(self):
        rng = np.random.default_rng(7)
        X = rng.normal(size=(120, 2))
        y = (X[:, 0] + X[:, 1] > 0).astype(int)
        tp = TreeParams(max_features="all")
        forest = fit_forest(X, y, ForestParams(1, tp, bootstrap=False, seed=4))
        tree = fit_tree(X, y, tp, seed=4 * 1_000_003 + 1)
        np.testing.assert_array_equal(forest.predict_proba(X),
                                      tree.predict_proba(X))

    def test_mean_probability(self):
        # forest proba must equal the mean of its trees' probas
        rng = np.random.default_rng(8)
        X = rng.normal(size=(80, 3))
        y = rng.integers(0, 2, 80)
        forest = fit_forest(X, y, ForestParams(5, TreeParams(), seed=0))
        per_tree = np.stack([t.predict_proba(X) for t in forest.params["trees"]])
        np.testing.assert_allclose(forest.predict_proba(X), per_tree.mean(axis=0))

    def test_hand_tallied_vote(self):
        # three stumps voting (1, 1, 0) -> majority 1; (0, 0, 1) -> 0
        def stump(direction):
            from fingan.classifiers import TreeNode
            left = TreeNode(proba=0.0 if direction else 1.0, n_samples=1)
            right = TreeNode(proba=1.0 if direction else 0.0, n_samples=1)
            root = TreeNode(feature=0, threshold=0.0, left=left, right=right,
                            proba=0.5, n_samples=2)
            return FittedClassifier("tree", 1, {"root": root})

        forest = FittedClassifier("forest", 1,
                                  {"trees": [stump(True), stump(True), stump(False)]})
        votes = forest_vote(forest, np.array([[1.0], [-1.0]]))
        np.testing.assert_array_equal(votes, [1, 0])

    def test_default_hundred_trees(self):
        p = ForestParams()
        assert p.n_estimators == 100
        assert p.bootstrap

    def test_deterministic(self):
        rng = np.random.default_rng(9)
        X = rng.normal(size=(60, 2))
        y = rng.integers(0, 2, 60)
        a = fit_forest(X, y, ForestParams(3, seed=1)).predict_proba(X)
        b = fit_forest(X, y, ForestParams(3, seed=1)).predict_proba(X)
        np.testing.assert_array_equal(a, b)


class TestMlp:
    def test_xor(self):
        rng = np.random.default_rng(0)
        X = rng.uniform(-1, 1, (200, 2))
        y = ((X[:, 0] > 0) ^ (X[:, 1] > 0)).astype(int)
        model = fit_mlp_classifier(X, y, MlpClfParams(epochs=400, seed=0))
        assert (model.predict(X) == y).mean() >= 0.95

    def test_probability_range(self):
        X, y = separable(40, seed=10)
        p = fit_mlp_classifier(X, y, MlpClfParams(epochs=50)).predict_proba(X)
        assert np.all((p >= 0) & (p <= 1))

    def test_architecture(self):
        X, y = separable(30, seed=11)
        net = fit_mlp_classifier(X, y, MlpClfParams(epochs=1)).params["net"]
        widths = [l.width for l in net.spec.layers]
        assert widths == [16, 16, 1]

    def test_single_class_rejected(self):
        with pytest.raises(ValueError):
            fit_mlp_classifier(np.ones((5, 2)), np.zeros(5))


class TestSvm:
    def test_objective_near_optimum(self):
        from scipy.optimize import minimize

        X, y = separable(40, seed=12, gap=2.0)
        y_pm = np.where(y == 1, 1.0, -1.0)
        C = 1.0
        model = fit_svm_linear(X, y, C=C, epochs=5000)

        def obj(theta):
            return svm_objective(theta[:-1], theta[-1], X, y_pm, C)

        ref = minimize(obj, np.zeros(3), method="Powell",
                       options={"xtol": 1e-10, "ftol": 1e-12, "maxiter": 20000})
        ours = svm_objective(model.params["w"], model.params["b"], X, y_pm, C)
        assert ours <= ref.fun * 1.01 + 1e-9

    def test_separable_accuracy(self):
        X, y = separable(80, seed=13)
        model = fit_svm_linear(X, y)
        assert (model.predict(X) == y).mean() == 1.0

    def test_platt_probabilities_track_labels(self):
        X, y = separable(60, seed=14)
        p = fit_svm_linear(X, y).predict_proba(X)
        assert p[y == 1].min() > 0.5
        assert p[y == 0].max() < 0.5

    def test_label_flip_symmetry(self):
        X, y = separable(40, seed=15)
        a = fit_svm_linear(X, y).params["w"]
        b = fit_svm_linear(X, 1 - y).params["w"]
        np.testing.assert_allclose(a, -b, atol=1e-9)


def test_unknown_kind_rejected():
    model = FittedClassifier("nope", 2)
    with pytest.raises(ValueError):
        model.predict_proba(np.ones((1, 2)))
