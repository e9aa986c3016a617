"""Random-forest classifier with per-tree bootstrap logs for out-of-bag prediction."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from numpy.typing import NDArray

from ..errors import ParameterError


@dataclass(frozen=True)
class Tree:
    """Flat-array binary tree; ``feature == -1`` marks a leaf."""

    feature: NDArray    # (nodes,) int split feature, -1 for leaf
    threshold: NDArray  # (nodes,) float; go left when x[f] <= threshold
    left: NDArray       # (nodes,) int child id
    right: NDArray      # (nodes,) int child id
    value: NDArray      # (nodes,) float class-1 frequency

    def predict(self, X: NDArray) -> NDArray:
        node = np.zeros(len(X), dtype=np.int64)
        rows = np.flatnonzero(self.feature[node] >= 0)
        while len(rows):
            current = node[rows]
            feat = self.feature[current]
            go_left = X[rows, feat] <= self.threshold[current]
            node[rows] = np.where(go_left, self.left[current], self.right[current])
            rows = rows[self.feature[node[rows]] >= 0]
        return self.value[node]


@dataclass(frozen=True)
class ForestModel:
    """Bootstrap ensemble of Gini-greedy trees with in-bag multisets retained."""

    trees: tuple[Tree, ...]
    in_bag_counts: NDArray  # (T, n_train) bootstrap multiplicity per tree/sample
    n_train: int
    n_features: int
    max_depth: int | None
    min_leaf: int
    seed: int

    def predict_proba(self, X: NDArray) -> NDArray:
        return predict_forest(self, X, mode="regular")

    def oob_tree_sets(self) -> NDArray:
        """Boolean (T, n_train): True where the tree's bootstrap excludes the sample."""
        return self.in_bag_counts == 0

    def to_json_dict(self) -> dict:
        return {
            "kind": "forest",
            "n_trees": len(self.trees),
            "max_depth": self.max_depth,
            "min_leaf": self.min_leaf,
            "seed": self.seed,
            "trees": [
                {
                    "feature": t.feature.tolist(),
                    "threshold": t.threshold.tolist(),
                    "left": t.left.tolist(),
                    "right": t.right.tolist(),
                    "value": t.value.tolist(),
                }
                for t in self.trees
            ],
        }


def _grow_tree(
    X: NDArray,
    y: NDArray,
    rng: np.random.Generator,
    max_depth: int | None,
    min_leaf: int,
    mtry: int,
) -> Tree:
    n, d = X.shape
    feature: list[int] = []
    threshold: list[float] = []
    left: list[int] = []
    right: list[int] = []
    value: list[float] = []

    def new_node(mean: float) -> int:
        feature.append(-1)
        threshold.append(0.0)
        left.append(-1)
        right.append(-1)
        value.append(mean)
        return len(feature) - 1

    root = new_node(float(y.mean()))
    stack = [(root, np.arange(n), 0)]
    while stack:
        node_id, idx, depth = stack.pop()
        m = len(idx)
        pos = y[idx].sum()
        if (
            m < 2 * min_leaf
            or pos == 0.0
            or pos == float(m)
            or (max_depth is not None and depth >= max_depth)
        ):
            continue

        feats = rng.permutation(d)[:mtry]
        Xn = X[np.ix_(idx, feats)]
        order = np.argsort(Xn, axis=0, kind="stable")
        xs = np.take_along_axis(Xn, order, axis=0)
        ys = y[idx][order]

        # Candidate split after sorted position i: left block size i+1.
        left_pos = np.cumsum(ys, axis=0)[:-1]
        left_n = np.arange(1, m, dtype=float)[:, None]
        right_n = m - left_n
        right_pos = pos - left_pos
        score = (
            left_pos * (left_n - left_pos) / left_n
            + right_pos * (right_n - right_pos) / right_n
        )
        invalid = xs[1:] == xs[:-1]
        if min_leaf > 1:
            sizes = np.arange(1, m)
            invalid |= ((sizes < min_leaf) | (m - sizes < min_leaf))[:, None]
        score[invalid] = np.inf

        flat = int(np.argmin(score))
        if not np.isfinite(score.flat[flat]):
            continue
        cut, fcol = divmod(flat, score.shape[1])
        split_feature = int(feats[fcol])
        thr = float(0.5 * (xs[cut, fcol] + xs[cut + 1, fcol]))

        left_idx = idx[order[: cut + 1, fcol]]
        right_idx = idx[order[cut + 1 :, fcol]]
        left_id = new_node(float(y[left_idx].mean()))
        right_id = new_node(float(y[right_idx].mean()))
        feature[node_id] = split_feature
        threshold[node_id] = thr
        left[node_id] = left_id
        right[node_id] = right_id
        stack.append((right_id, right_idx, depth + 1))
        stack.append((left_id, left_idx, depth + 1))

    return Tree(
        feature=np.array(feature, dtype=np.int64),
        threshold=np.array(threshold),
        left=np.array(left, dtype=np.int64),
        right=np.array(right, dtype=np.int64),
        value=np.array(value),
    )


def fit_forest(
    X: NDArray,
    y: NDArray,
    n_trees: int = 500,
    max_depth: int | None = None,
    min_leaf: int = 1,
    seed: int = 0,
) -> ForestModel:
    """Fit a classification forest on bootstrap resamples.

    Each tree draws n samples with replacement and splits greedily on Gini
    gain over a fresh sqrt(d) feature subset per node. Tree t uses the RNG
    stream seeded by (seed, t), so results do not depend on build order.
    """
    X = np.asarray(X, dtype=float)
    y = np.asarray(y, dtype=float)
    if X.ndim != 2 or len(X) != len(y):
        raise ParameterError("X must be (n, d) with matching y")
    n, d = X.shape
    if n < 2:
        raise ParameterError("forest fitting needs at least 2 samples")
    if n_trees < 1:
        raise ParameterError("n_trees must be >= 1")
    if min_leaf < 1:
        raise ParameterError("min_leaf must be >= 1")
    if not np.isin(y, (0.0, 1.0)).all():
        raise ParameterError("forest v1 is a binary classifier; labels must be 0/1")

    mtry = max(1, int(np.sqrt(d)))
    trees = []
    in_bag = np.zeros((n_trees, n), dtype=np.int64)
    for t in range(n_trees):
        rng = np.random.default_rng((seed, t))
        bootstrap = rng.integers(0, n, size=n)
        in_bag[t] = np.bincount(bootstrap, minlength=n)
        trees.append(_grow_tree(X[bootstrap], y[bootstrap], rng, max_depth, min_leaf, mtry))

    return ForestModel(
        trees=tuple(trees),
        in_bag_counts=in_bag,
        n_train=n,
        n_features=d,
        max_depth=max_depth,
        min_leaf=min_leaf,
        seed=seed,
    )


def predict_forest(
    forest: ForestModel,
    X: NDArray,
    mode: str = "regular",
    train_index: NDArray | None = None,
) -> NDArray:
    """Predict class-1 probability as a tree average.

    ``regular`` averages every tree. ``oob`` averages only the trees whose
    bootstrap excluded the sample, so it needs ``train_index`` mapping each
    row of ``X`` back to the original training-sample index; rows whose OOB
    tree set is empty come back as NaN.
    """
    X = np.asarray(X, dtype=float)
    if X.ndim != 2 or X.shape[1] != forest.n_features:
        raise ParameterError(f"X must be (rows, {forest.n_features})")
    per_tree = np.stack([tree.predict(X) for tree in forest.trees])

    if mode == "regular":
        return per_tree.mean(axis=0)
    if mode != "oob":
        raise ParameterError(f"unknown prediction mode {mode!r}")

    if train_index is None:
        raise ParameterError("oob mode requires train_index")
    train_index = np.asarray(train_index)
    if len(train_index) != len(X):
        raise ParameterError("train_index length does not match X rows")
    if train_index.min() < 0 or train_index.max() >= forest.n_train:
        raise ParameterError("train_index refers to rows outside the training set")

    oob_mask = forest.in_bag_counts[:, train_index] == 0
    counts = oob_mask.sum(axis=0)
    sums = np.where(oob_mask, per_tree, 0.0).sum(axis=0)
    out = np.full(len(X), np.nan)
    covered = counts > 0
    out[covered] = sums[covered] / counts[covered]
    return out
