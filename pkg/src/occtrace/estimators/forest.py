"""Bagged decision trees whose leaves expose class counts.

Each tree trains on a bootstrap resample; at every split a fresh random
subset of attributes is drawn without replacement and the best threshold is
chosen by information gain. Trees grow until nodes are pure, the optional
depth cap is hit, or no gainful split remains. Leaves keep their target and
artificial counts so a tree reports the relative class frequency of the leaf
a query lands in, and the forest averages those frequencies.
"""

import math
from dataclasses import dataclass

import numpy as np

from ..base import as_float_matrix, ensure_fitted
from ..errors import DimensionError, SingleClassError
from .contract import ProbabilityEstimator

SPLIT_FEATURE_PRESETS = ("log2", "half-sqrt", "sqrt", "double-sqrt")


def resolve_split_features(spec, n_features):
    """Number of attributes sampled per split; supports named presets."""
    if isinstance(spec, str):
        if spec == "log2":
            k = round(math.log2(n_features)) if n_features > 1 else 1
        elif spec == "half-sqrt":
            k = round(0.5 * math.sqrt(n_features))
        elif spec == "sqrt":
            k = round(math.sqrt(n_features))
        elif spec == "double-sqrt":
            k = round(2.0 * math.sqrt(n_features))
        else:
            raise ValueError(f"unknown split-feature preset {spec!r}; choose from {SPLIT_FEATURE_PRESETS}")
    else:
        k = int(spec)
    return int(min(max(k, 1), n_features))


@dataclass(eq=False)
class DecisionTree:
    """Flat node arrays; feature == -1 marks a leaf."""

    feature: np.ndarray      # (nodes,) int64
    threshold: np.ndarray    # (nodes,) float64
    left: np.ndarray         # (nodes,) int64
    right: np.ndarray        # (nodes,) int64
    count_target: np.ndarray     # (nodes,) int64
    count_artificial: np.ndarray # (nodes,) int64
    n_features: int

    @property
    def n_nodes(self):
        return int(self.feature.shape[0])


def _entropy_bits(t, n):
    # binary entropy of t/n in bits, vectorized, 0*log(0) treated as 0
    t = np.asarray(t, dtype=np.float64)
    n = np.asarray(n, dtype=np.float64)
    p = t / n
    left = np.where(p > 0.0, p, 1.0)
    right = np.where(p < 1.0, 1.0 - p, 1.0)
    return -(p * np.log2(left) + (1.0 - p) * np.log2(right))


def _best_split(X, y, idx, attrs, min_leaf):
    n = idx.shape[0]
    y_node = y[idx]
    n_target = int(y_node.sum())
    parent = float(_entropy_bits(n_target, n))
    best_gain = 1e-12
    best = None
    for attr in attrs:
        x = X[idx, attr]
        order = np.argsort(x, kind="stable")
        xs = x[order]
        ys = y_node[order]
        cut = np.flatnonzero(xs[1:] != xs[:-1])
        if cut.size == 0:
            continue
        n_left = cut + 1
        if min_leaf > 1:
            ok = (n_left >= min_leaf) & (n - n_left >= min_leaf)
            cut = cut[ok]
            n_left = n_left[ok]
            if cut.size == 0:
                continue
        t_left = np.cumsum(ys)[cut]
        h_left = _entropy_bits(t_left, n_left)
        h_right = _entropy_bits(n_target - t_left, n - n_left)
        gain = parent - (n_left * h_left + (n - n_left) * h_right) / n
        j = int(np.argmax(gain))
        if gain[j] > best_gain:
            lo = float(xs[cut[j]])
            hi = float(xs[cut[j] + 1])
            mid = 0.5 * (lo + hi)
            # a midpoint that rounds up to the higher value would leave the
            # right child empty; fall back to the lower value in that case
            threshold = mid if mid < hi else lo
            best_gain = float(gain[j])
            best = (int(attr), threshold)
    return best


def grow_tree(X, y, split_features, min_leaf, max_depth, rng):
    """Grow one tree with an explicit stack (no recursion-depth limit)."""
    n_features = X.shape[1]
    k = resolve_split_features(split_features, n_features)
    feature, threshold, left, right, c_t, c_a = [], [], [], [], [], []

    stack = [(np.arange(X.shape[0]), 0, -1, False)]
    while stack:
        idx, depth, parent, is_right = stack.pop()
        node_id = len(feature)
        n_target = int(y[idx].sum())
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        c_t.append(n_target)
        c_a.append(int(idx.shape[0]) - n_target)
        if parent >= 0:
            (right if is_right else left)[parent] = node_id

        if n_target == 0 or n_target == idx.shape[0]:
            continue
        if max_depth is not None and depth >= max_depth:
            continue
        if idx.shape[0] < 2 * min_leaf:
            continue
        attrs = rng.choice(n_features, size=k, replace=False)
        best = _best_split(X, y, idx, attrs, min_leaf)
        if best is None:
            continue
        attr, thr = best
        feature[node_id] = attr
        threshold[node_id] = thr
        go_left = X[idx, attr] <= thr
        # push right first so the left subtree is built first (preorder)
        stack.append((idx[~go_left], depth + 1, node_id, True))
        stack.append((idx[go_left], depth + 1, node_id, False))

    return DecisionTree(
        feature=np.asarray(feature, dtype=np.int64),
        threshold=np.asarray(threshold, dtype=np.float64),
        left=np.asarray(left, dtype=np.int64),
        right=np.asarray(right, dtype=np.int64),
        count_target=np.asarray(c_t, dtype=np.int64),
        count_artificial=np.asarray(c_a, dtype=np.int64),
        n_features=int(n_features),
    )


def tree_apply(tree, X):
    """Vectorized leaf lookup: route every row to its leaf node id."""
    node = np.zeros(X.shape[0], dtype=np.int64)
    while True:
        f = tree.feature[node]
        rows = np.flatnonzero(f >= 0)
        if rows.size == 0:
            return node
        at = node[rows]
        go_left = X[rows, f[rows]] <= tree.threshold[at]
        node[rows] = np.where(go_left, tree.left[at], tree.right[at])


def tree_class_probability(tree, x):
    """Relative target frequency at the leaf ``x`` reaches (unclamped)."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 1 or x.shape[0] != tree.n_features:
        raise DimensionError(f"expected a vector of width {tree.n_features}")
    node = 0
    while tree.feature[node] >= 0:
        branch = tree.left if x[tree.feature[node]] <= tree.threshold[node] else tree.right
        node = int(branch[node])
    n_t = int(tree.count_target[node])
    n_a = int(tree.count_artificial[node])
    return n_t / (n_t + n_a)


def forest_class_probability(forest, x):
    """Average of the per-tree relative class frequencies (unclamped)."""
    ensure_fitted(forest, "trees_")
    return float(np.mean([tree_class_probability(t, x) for t in forest.trees_]))


class ForestEstimator(ProbabilityEstimator):
    """Bagged-tree estimator of the target-class probability."""

    def __init__(self, n_trees=100, split_features="log2", min_leaf=1,
                 max_depth=None, bootstrap=True, seed=0):
        self.n_trees = n_trees
        self.split_features = split_features
        self.min_leaf = min_leaf
        self.max_depth = max_depth
        self.bootstrap = bootstrap
        self.seed = seed
        self.trees_ = None
        self._n_features = None

    def fit(self, X, y):
        X = as_float_matrix(X, "X")
        y = np.asarray(y)
        if y.shape != (X.shape[0],):
            raise DimensionError("labels must align one-to-one with rows")
        y = (y != 0).astype(np.int64)
        if X.shape[0] < 2:
            raise SingleClassError("need at least two labeled rows")
        if y.min() == y.max():
            raise SingleClassError("fit requires both target and artificial rows")
        n = X.shape[0]
        trees = []
        for g in range(int(self.n_trees)):
            # per-tree streams derived by xor so parallel induction would
            # reproduce the sequential result exactly
            rng = np.random.default_rng(int(self.seed) ^ g)
            if self.bootstrap:
                rows = rng.integers(0, n, size=n)
            else:
                rows = np.arange(n)
            trees.append(
                grow_tree(X[rows], y[rows], self.split_features,
                          int(self.min_leaf), self.max_depth, rng)
            )
        self.trees_ = trees
        self._n_features = int(X.shape[1])
        return self

    def _raw_estimate(self, X):
        ensure_fitted(self, "trees_")
        total = np.zeros(X.shape[0])
        for tree in self.trees_:
            leaf = tree_apply(tree, X)
            n_t = tree.count_target[leaf].astype(np.float64)
            n_a = tree.count_artificial[leaf].astype(np.float64)
            total += n_t / (n_t + n_a)
        return total / len(self.trees_)

    @property
    def n_features_(self):
        ensure_fitted(self, "trees_")
        return self._n_features

    def to_payload(self):
        ensure_fitted(self, "trees_")
        return {
            "kind": "forest",
            "n_trees": int(self.n_trees),
            "split_features": self.split_features,
            "min_leaf": int(self.min_leaf),
            "max_depth": self.max_depth,
            "bootstrap": bool(self.bootstrap),
            "seed": int(self.seed),
            "n_features": int(self._n_features),
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "count_target": t.count_target.tolist(),
                    "count_artificial": t.count_artificial.tolist(),
                }
                for t in self.trees_
            ],
        }

    @classmethod
    def from_payload(cls, payload):
        est = cls(
            n_trees=int(payload["n_trees"]),
            split_features=payload["split_features"],
            min_leaf=int(payload["min_leaf"]),
            max_depth=payload["max_depth"],
            bootstrap=bool(payload["bootstrap"]),
            seed=int(payload["seed"]),
        )
        est._n_features = int(payload["n_features"])
        est.trees_ = [
            DecisionTree(
                feature=np.asarray(t["feature"], dtype=np.int64),
                threshold=np.asarray(t["threshold"], dtype=np.float64),
                left=np.asarray(t["left"], dtype=np.int64),
                right=np.asarray(t["right"], dtype=np.int64),
                count_target=np.asarray(t["count_target"], dtype=np.int64),
                count_artificial=np.asarray(t["count_artificial"], dtype=np.int64),
                n_features=int(payload["n_features"]),
            )
            for t in payload["trees"]
        ]
        return est
