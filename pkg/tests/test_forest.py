import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from cbsent.models import FitError, ParameterError, RFParams, ShapeError, rf_fit, rf_predict
from cbsent.models.forest import grow_tree, n_split_features
from cbsent.rng import Xoshiro256

import oracles


def small_dataset(seed, n_max=14, f_max=5, n_classes=3, levels=4):
    """Integer-valued features so threshold and score ties are common."""
    rng = np.random.default_rng(seed)
    n = int(rng.integers(4, n_max + 1))
    f = int(rng.integers(1, f_max + 1))
    X = rng.integers(0, levels, size=(n, f)).astype(float)
    y = rng.integers(0, n_classes, size=n)
    y[:2] = [0, 1]
    return X, y


def test_split_feature_counts():
    assert n_split_features("sqrt", 2058) == 46
    assert n_split_features("log2", 2058) == 12
    assert n_split_features("all", 7) == 7
    assert n_split_features("sqrt", 1) == n_split_features("log2", 1) == 1


def test_separating_feature_stump():
    X = np.array([[0.3, 0.0], [0.1, 1.0], [0.2, 2.0], [0.9, 3.0], [0.8, 4.0], [0.7, 5.0]])
    y = np.array([-1, -1, -1, 1, 1, 1])
    model = rf_fit(X, y, RFParams(n_estimators=1, max_depth=1, max_features="all", bootstrap=False))
    tree = model.trees[0]
    assert oracles.best_stump(X.tolist(), [0, 0, 0, 1, 1, 1]) == (0, 0.5)
    assert (int(tree.feature[0]), float(tree.threshold[0])) == (0, 0.5)
    assert tree.n_nodes == 3
    assert rf_predict(model, X).tolist() == y.tolist()


@settings(max_examples=60)
@given(st.integers(0, 10**6))
def test_depth_one_matches_exhaustive_search(seed):
    X, y = small_dataset(seed)
    model = rf_fit(X, y, RFParams(n_estimators=1, max_depth=1, max_features="all", bootstrap=False))
    tree = model.trees[0]
    expected = oracles.best_stump(X.tolist(), np.searchsorted(model.labels, y).tolist())
    if expected is None or len(set(y.tolist())) == 1:
        assert tree.n_nodes == 1
    else:
        assert (int(tree.feature[0]), float(tree.threshold[0])) == expected


@settings(max_examples=60)
@given(st.integers(0, 10**6), st.sampled_from(["sqrt", "log2", "all"]), st.integers(1, 6),
       st.integers(2, 5), st.booleans())
def test_full_forest_matches_reference_grower(seed, max_features, max_depth, min_split, bootstrap):
    X, y = small_dataset(seed, f_max=8)
    params = RFParams(n_estimators=3, max_depth=max_depth, min_samples_split=min_split,
                      max_features=max_features, seed=seed, bootstrap=bootstrap)
    model = rf_fit(X, y, params)
    y_index = np.searchsorted(model.labels, y).tolist()
    expected = oracles.reference_forest(X.tolist(), y_index, len(model.labels), params)
    assert [oracles.tree_as_nodes(t) for t in model.trees] == expected


def leaf_rows(tree, X):
    leaves = tree.apply(X)
    return {leaf: np.flatnonzero(leaves == leaf) for leaf in np.unique(leaves)}


@settings(max_examples=30)
@given(st.integers(0, 10**6), st.integers(1, 5), st.integers(2, 6))
def test_tree_structure_invariants(seed, max_depth, min_split):
    X, y = small_dataset(seed, n_max=30)
    params = RFParams(n_estimators=4, max_depth=max_depth, min_samples_split=min_split, seed=seed, bootstrap=False)
    model = rf_fit(X, y, params)
    assert len(model.trees) == 4
    _, y_index = np.unique(y, return_inverse=True)
    for tree in model.trees:
        assert tree.depth() <= max_depth
        # children are numbered after their parent (preorder), left before right
        internal = np.flatnonzero(tree.feature >= 0)
        assert np.all(tree.left[internal] == internal + 1)
        assert np.all(tree.right[internal] > tree.left[internal])
        depth = np.zeros(tree.n_nodes, dtype=int)
        for node in internal:
            depth[tree.left[node]] = depth[tree.right[node]] = depth[node] + 1
        for leaf, rows in leaf_rows(tree, X).items():
            labels = set(y_index[rows].tolist())
            pure = len(labels) == 1
            constant = np.all(X[rows] == X[rows][0])
            assert pure or len(rows) < min_split or depth[leaf] == max_depth or constant
            counts = np.bincount(y_index[rows], minlength=len(model.labels))
            assert tree.value[leaf] == np.argmax(counts)


@given(st.integers(0, 10**6))
def test_prediction_is_majority_vote(seed):
    X, y = small_dataset(seed, n_max=20)
    model = rf_fit(X, y, RFParams(n_estimators=7, max_depth=3, seed=seed))
    votes = model.tree_votes(X)
    for row, pred in zip(votes, rf_predict(model, X)):
        counts = np.bincount(row, minlength=len(model.labels))
        assert pred == model.labels[np.argmax(counts)]


def test_vote_tie_goes_to_smallest_label():
    X = np.array([[0.0], [1.0]])
    y = np.array([5, 9])
    model = rf_fit(X, y, RFParams(n_estimators=2, max_depth=1, max_features="all", bootstrap=False))
    model.trees[1].value = 1 - model.trees[0].value  # the two trees now always disagree
    assert rf_predict(model, X).tolist() == [5, 5]


def test_single_tree_forest_equals_tree():
    X, y = small_dataset(9, n_max=25)
    model = rf_fit(X, y, RFParams(n_estimators=1, seed=3))
    assert rf_predict(model, X).tolist() == model.labels[model.trees[0].predict_index(X)].tolist()


def test_identical_trees_without_bootstrap():
    X, y = small_dataset(4, n_max=25)
    model = rf_fit(X, y, RFParams(n_estimators=5, max_features="all", bootstrap=False))
    first = oracles.tree_as_nodes(model.trees[0])
    assert all(oracles.tree_as_nodes(t) == first for t in model.trees)
    assert rf_predict(model, X).tolist() == model.labels[model.trees[0].predict_index(X)].tolist()


def test_seed_determinism_and_tree_independence():
    X, y = small_dataset(17, n_max=30, f_max=8)
    a = rf_fit(X, y, RFParams(n_estimators=6, seed=99))
    b = rf_fit(X, y, RFParams(n_estimators=6, seed=99))
    c = rf_fit(X, y, RFParams(n_estimators=3, seed=99))
    as_nodes = lambda m: [oracles.tree_as_nodes(t) for t in m.trees]
    assert as_nodes(a) == as_nodes(b)
    assert as_nodes(a)[:3] == as_nodes(c)
    assert as_nodes(rf_fit(X, y, RFParams(n_estimators=6, seed=100))) != as_nodes(a)


def test_grow_tree_leaves_rng_untouched():
    X, y = small_dataset(2)
    rng = Xoshiro256(5)
    before = list(rng._s)
    grow_tree(X, np.unique(y, return_inverse=True)[1], 3, RFParams(), rng)
    assert rng._s == before


def test_adjacent_float_threshold():
    lo = 1.0
    hi = np.nextafter(lo, 2.0)
    X = np.array([[lo], [hi]])
    model = rf_fit(X, [0, 1], RFParams(n_estimators=1, max_features="all", bootstrap=False))
    tree = model.trees[0]
    assert tree.threshold[0] == lo
    assert rf_predict(model, X).tolist() == [0, 1]


def test_grid_tuple_valid():
    RFParams(n_estimators=100, max_depth=30, min_samples_split=2, max_features="sqrt")


@pytest.mark.parametrize("kwargs", [dict(n_estimators=0), dict(max_depth=0), dict(min_samples_split=0),
                                    dict(max_features="half")])
def test_param_errors(kwargs):
    with pytest.raises(ParameterError):
        RFParams(**kwargs)


def test_fit_predict_errors():
    X, y = small_dataset(1)
    with pytest.raises(FitError):
        rf_fit(X, np.zeros(len(y)))
    model = rf_fit(X, y, RFParams(n_estimators=2))
    with pytest.raises(ShapeError):
        rf_predict(model, np.zeros((1, X.shape[1] + 1)))
