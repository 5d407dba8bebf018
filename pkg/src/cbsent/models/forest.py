"""Random forest of Gini-impurity decision trees.

Tree ``t`` draws all of its randomness (bootstrap rows, then one feature
subset per splittable node, in depth-first left-first order) from a
xoshiro256** stream seeded with ``mix(seed, t)``. Trees are therefore
independent of each other and of the order they are built in.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from numba import njit

from ..rng import Xoshiro256, below_u64, mix, state_array
from ._common import ParameterError, as_dense, check_fit_inputs, check_predict_inputs

MAX_FEATURES = ("sqrt", "log2", "all")
# Relative slack when comparing split scores, so exact ties are resolved
# by (feature, threshold) order rather than by rounding noise.
SCORE_RTOL = 1e-12


@dataclass(frozen=True)
class RFParams:
    n_estimators: int = 100
    max_depth: int = 30
    min_samples_split: int = 2
    max_features: str = "sqrt"
    seed: int = 42
    bootstrap: bool = True

    def __post_init__(self):
        for name in ("n_estimators", "max_depth", "min_samples_split"):
            if int(getattr(self, name)) < 1:
                raise ParameterError(f"{name} must be a positive integer")
        if self.max_features not in MAX_FEATURES:
            raise ParameterError(f"max_features must be one of {MAX_FEATURES}, got {self.max_features!r}")


def n_split_features(max_features: str, n_features: int) -> int:
    if max_features == "sqrt":
        k = math.ceil(math.sqrt(n_features))
    elif max_features == "log2":
        k = math.ceil(math.log2(n_features)) if n_features > 1 else 1
    else:
        k = n_features
    return max(1, min(k, n_features))


@dataclass
class Tree:
    """Flat binary tree; node 0 is the root, nodes numbered in preorder.

    Internal nodes have ``feature >= 0`` and send ``x[feature] <= threshold``
    to ``left``. Leaves have ``feature == -1`` and predict class index
    ``value`` (an index into the forest's labels).
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=np.int64)
        for node in range(self.n_nodes):
            if self.feature[node] >= 0:
                depths[self.left[node]] = depths[self.right[node]] = depths[node] + 1
        return int(depths.max())

    def apply(self, X: np.ndarray) -> np.ndarray:
        """Leaf node id reached by each row of dense ``X``."""
        node = np.zeros(X.shape[0], dtype=np.int64)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            active = feat >= 0
            if not active.any():
                return node
            r, n, f = rows[active], node[active], feat[active]
            go_left = X[r, f] <= self.threshold[n]
            node[active] = np.where(go_left, self.left[n], self.right[n])

    def predict_index(self, X: np.ndarray) -> np.ndarray:
        return self.value[self.apply(X)]


@njit(cache=True)
def _bootstrap(state, n):
    out = np.empty(n, dtype=np.int64)
    for i in range(n):
        out[i] = below_u64(state, n)
    return out


@njit(cache=True)
def _grow(X, y_index, n_classes, sample, k, max_depth, min_samples_split, state):
    """Grow one tree on rows ``sample`` (repeats allowed) of column-major ``X``.

    Nodes are created and numbered in preorder. Each splittable node draws
    features by partial Fisher-Yates until ``k`` of them are non-constant on
    its rows (or every feature has been drawn). The split
    maximizes ``sum(left^2)/n_left + sum(right^2)/n_right`` over class counts,
    which is the same as minimizing the size-weighted Gini impurity of the
    children. Scores within ``SCORE_RTOL`` of the best count as ties and go
    to the lowest feature, then the lowest threshold.
    """
    n = sample.shape[0]
    n_features = X.shape[1]
    cap = 2 * n + 1
    feature = np.full(cap, -1, dtype=np.int64)
    threshold = np.zeros(cap)
    left = np.full(cap, -1, dtype=np.int64)
    right = np.full(cap, -1, dtype=np.int64)
    value = np.zeros(cap, dtype=np.int64)

    rows = sample.copy()
    tmp = np.empty(n, dtype=np.int64)
    perm = np.arange(n_features)
    drawn = np.empty(k, dtype=np.int64)
    touched = np.empty(n_features, dtype=np.int64)
    scores = np.empty((k, max(n - 1, 1)))
    sorted_vals = np.empty((k, n))
    order = np.empty(n, dtype=np.int64)
    nz_pos = np.empty(n, dtype=np.int64)
    nz_val = np.empty(n)
    counts = np.zeros(n_classes, dtype=np.int64)
    lc = np.zeros(n_classes, dtype=np.int64)

    st_start = np.empty(cap, dtype=np.int64)
    st_end = np.empty(cap, dtype=np.int64)
    st_depth = np.empty(cap, dtype=np.int64)
    st_parent = np.empty(cap, dtype=np.int64)
    st_left = np.empty(cap, dtype=np.bool_)
    sp = 0
    st_start[0], st_end[0], st_depth[0], st_parent[0], st_left[0] = 0, n, 0, -1, False
    sp = 1
    n_nodes = 0
    while sp > 0:
        sp -= 1
        start, end, depth = st_start[sp], st_end[sp], st_depth[sp]
        node = n_nodes
        n_nodes += 1
        if st_parent[sp] >= 0:
            if st_left[sp]:
                left[st_parent[sp]] = node
            else:
                right[st_parent[sp]] = node

        counts[:] = 0
        for i in range(start, end):
            counts[y_index[rows[i]]] += 1
        value[node] = np.argmax(counts)
        m = end - start
        n_present = 0
        for c in range(n_classes):
            if counts[c] > 0:
                n_present += 1
        if depth >= max_depth or m < min_samples_split or n_present == 1:
            continue

        # Draw features without replacement until k of them vary on this
        # node's rows; constant features cannot split and do not count.
        n_drawn = 0
        n_found = 0
        best = -np.inf
        while n_found < k and n_drawn < n_features:
            j = n_drawn + below_u64(state, n_features - n_drawn)
            f = perm[j]
            touched[n_drawn] = j
            perm[j] = perm[n_drawn]
            n_drawn += 1

            # Only nonzero values need sorting: TF-IDF columns are mostly
            # zero, so the order is (sorted negatives, zeros, sorted positives).
            n_nz = 0
            n_neg = 0
            first = X[rows[start], f]
            constant = True
            for t in range(m):
                v = X[rows[start + t], f]
                if v != first:
                    constant = False
                if v != 0.0:
                    nz_pos[n_nz] = t
                    nz_val[n_nz] = v
                    n_nz += 1
                    if v < 0.0:
                        n_neg += 1
            if constant:
                continue
            fi = n_found
            drawn[fi] = f
            n_found += 1
            nz_order = np.argsort(nz_val[:n_nz], kind="mergesort")
            q = 0
            for t in range(n_neg):
                order[q] = nz_pos[nz_order[t]]
                q += 1
            if n_nz < m:
                t_nz = 0
                for t in range(m):
                    if t_nz < n_nz and nz_pos[t_nz] == t:
                        t_nz += 1
                    else:
                        order[q] = t
                        q += 1
            for t in range(n_neg, n_nz):
                order[q] = nz_pos[nz_order[t]]
                q += 1
            for t in range(m):
                sorted_vals[fi, t] = X[rows[start + order[t]], f]
            lc[:] = 0
            for p in range(m - 1):
                lc[y_index[rows[start + order[p]]]] += 1
                if sorted_vals[fi, p] < sorted_vals[fi, p + 1]:
                    nl = p + 1
                    nr = m - nl
                    sl = 0.0
                    sr = 0.0
                    for c in range(n_classes):
                        sl += lc[c] * lc[c]
                        rc = counts[c] - lc[c]
                        sr += rc * rc
                    score = sl / nl + sr / nr
                    scores[fi, p] = score
                    if score > best:
                        best = score
                else:
                    scores[fi, p] = -np.inf
        for i in range(n_drawn):
            perm[i] = i
            perm[touched[i]] = touched[i]
        if best == -np.inf:
            continue

        cut = best - SCORE_RTOL * abs(best)
        slots = np.argsort(drawn[:n_found])
        bf, bp = -1, -1
        for fi in slots:
            for p in range(m - 1):
                if scores[fi, p] >= cut:
                    bf, bp = fi, p
                    break
            if bf >= 0:
                break
        lo, hi = sorted_vals[bf, bp], sorted_vals[bf, bp + 1]
        thr = (lo + hi) / 2.0
        if not thr < hi:
            # adjacent floats: the midpoint rounds up, keep the lower value
            thr = lo
        f = drawn[bf]

        nl = 0
        for i in range(start, end):
            if X[rows[i], f] <= thr:
                tmp[nl] = rows[i]
                nl += 1
        nr = nl
        for i in range(start, end):
            if not X[rows[i], f] <= thr:
                tmp[nr] = rows[i]
                nr += 1
        for i in range(m):
            rows[start + i] = tmp[i]
        feature[node] = f
        threshold[node] = thr

        # right pushed first so the left subtree is grown (and numbered) first
        st_start[sp], st_end[sp], st_depth[sp], st_parent[sp], st_left[sp] = start + nl, end, depth + 1, node, False
        sp += 1
        st_start[sp], st_end[sp], st_depth[sp], st_parent[sp], st_left[sp] = start, start + nl, depth + 1, node, True
        sp += 1

    return (feature[:n_nodes].copy(), threshold[:n_nodes].copy(), left[:n_nodes].copy(),
            right[:n_nodes].copy(), value[:n_nodes].copy())


def grow_tree(X: np.ndarray, y_index: np.ndarray, n_classes: int, params: RFParams,
              rng: Xoshiro256, sample: np.ndarray | None = None) -> Tree:
    """Grow one tree greedily; ``rng`` is left untouched (its state is copied)."""
    return _grow_with_state(np.asfortranarray(X, dtype=np.float64), y_index, n_classes, params,
                            state_array(rng), sample)


def _grow_with_state(Xf, y_index, n_classes, params, state, sample=None) -> Tree:
    sample = np.arange(Xf.shape[0], dtype=np.int64) if sample is None else np.asarray(sample, dtype=np.int64)
    k = n_split_features(params.max_features, Xf.shape[1])
    arrays = _grow(Xf, np.asarray(y_index, dtype=np.int64), n_classes, sample, k,
                   int(params.max_depth), int(params.min_samples_split), state)
    return Tree(*arrays)


@dataclass
class RFModel:
    labels: np.ndarray
    params: RFParams
    trees: list[Tree]
    n_features: int

    family = "rf"

    def tree_votes(self, X) -> np.ndarray:
        """Class index voted by each tree: shape ``(n_rows, n_trees)``."""
        X = as_dense(check_predict_inputs(X, self.n_features))
        return np.stack([t.predict_index(X) for t in self.trees], axis=1)

    def predict(self, X) -> np.ndarray:
        votes = self.tree_votes(X)
        counts = np.zeros((votes.shape[0], len(self.labels)), dtype=np.int64)
        for c in range(len(self.labels)):
            counts[:, c] = (votes == c).sum(axis=1)
        # first maximum = smallest label on ties
        return self.labels[np.argmax(counts, axis=1)]


def rf_fit(X, y, params: RFParams = RFParams()) -> RFModel:
    X, y, labels, y_index = check_fit_inputs(X, y)
    Xf = np.asfortranarray(as_dense(X))
    n = Xf.shape[0]
    trees = []
    for t in range(params.n_estimators):
        state = state_array(Xoshiro256(mix(params.seed, t)))
        sample = _bootstrap(state, n) if params.bootstrap else None
        trees.append(_grow_with_state(Xf, y_index, len(labels), params, state, sample))
    return RFModel(labels, params, trees, Xf.shape[1])


def rf_predict(model: RFModel, X) -> np.ndarray:
    return model.predict(X)
