"""Exact greedy CART regression tree on squared error."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

LEAF = -1


@dataclass(frozen=True)
class DecisionTree:
    """Flat preorder node arrays; ``feature == LEAF`` marks a leaf.

    ``gain`` holds the drop in summed squared error achieved by each split
    (``n_node * variance_decrease``), zero at leaves.
    """

    feature: np.ndarray
    threshold: np.ndarray
    left: np.ndarray
    right: np.ndarray
    value: np.ndarray
    n_samples: np.ndarray
    gain: np.ndarray
    n_features: int
    max_depth: int | None = None
    min_samples_split: int = 2

    @property
    def n_nodes(self) -> int:
        return len(self.feature)

    @property
    def n_leaves(self) -> int:
        return int(np.sum(self.feature == LEAF))

    def depth(self) -> int:
        depths = np.zeros(self.n_nodes, dtype=int)
        for i in range(self.n_nodes):
            if self.feature[i] != LEAF:
                depths[self.left[i]] = depths[self.right[i]] = depths[i] + 1
        return int(depths.max())

    def apply(self, X) -> np.ndarray:
        """Leaf index reached by every row."""
        X = np.asarray(X, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != self.n_features:
            raise ValueError(f"expected (n, {self.n_features}) input, got {X.shape}")
        node = np.zeros(X.shape[0], dtype=np.intp)
        rows = np.arange(X.shape[0])
        while True:
            feat = self.feature[node]
            internal = feat != LEAF
            if not internal.any():
                return node
            x = X[rows, np.where(internal, feat, 0)]
            nxt = np.where(x <= self.threshold[node], self.left[node], self.right[node])
            node = np.where(internal, nxt, node)

    def predict(self, X) -> np.ndarray:
        return self.value[self.apply(X)]

    def to_dict(self) -> dict:
        def node(i: int) -> dict:
            if self.feature[i] == LEAF:
                return {"value": float(self.value[i]), "n_samples": int(self.n_samples[i])}
            return {
                "feature": int(self.feature[i]),
                "threshold": float(self.threshold[i]),
                "gain": float(self.gain[i]),
                "value": float(self.value[i]),
                "n_samples": int(self.n_samples[i]),
                "left": node(int(self.left[i])),
                "right": node(int(self.right[i])),
            }

        return {"n_features": self.n_features, "max_depth": self.max_depth,
                "min_samples_split": self.min_samples_split, "root": node(0)}

    @classmethod
    def from_dict(cls, d: dict) -> "DecisionTree":
        b = _Builder()

        def walk(nd: dict) -> int:
            i = b.add(float(nd["value"]), int(nd["n_samples"]))
            if "feature" in nd:
                left = walk(nd["left"])
                right = walk(nd["right"])
                b.split(i, int(nd["feature"]), float(nd["threshold"]), float(nd["gain"]), left, right)
            return i

        walk(d["root"])
        return b.finish(int(d["n_features"]), d.get("max_depth"), int(d.get("min_samples_split", 2)))


class _Builder:
    def __init__(self):
        self.feature: list[int] = []
        self.threshold: list[float] = []
        self.left: list[int] = []
        self.right: list[int] = []
        self.value: list[float] = []
        self.n_samples: list[int] = []
        self.gain: list[float] = []

    def add(self, value: float, n: int) -> int:
        self.feature.append(LEAF)
        self.threshold.append(0.0)
        self.left.append(LEAF)
        self.right.append(LEAF)
        self.value.append(value)
        self.n_samples.append(n)
        self.gain.append(0.0)
        return len(self.feature) - 1

    def split(self, i: int, feature: int, threshold: float, gain: float, left: int, right: int) -> None:
        self.feature[i] = feature
        self.threshold[i] = threshold
        self.gain[i] = gain
        self.left[i] = left
        self.right[i] = right

    def finish(self, n_features: int, max_depth, min_samples_split: int) -> DecisionTree:
        return DecisionTree(
            feature=np.asarray(self.feature, dtype=np.intp),
            threshold=np.asarray(self.threshold, dtype=np.float64),
            left=np.asarray(self.left, dtype=np.intp),
            right=np.asarray(self.right, dtype=np.intp),
            value=np.asarray(self.value, dtype=np.float64),
            n_samples=np.asarray(self.n_samples, dtype=np.intp),
            gain=np.asarray(self.gain, dtype=np.float64),
            n_features=n_features,
            max_depth=max_depth,
            min_samples_split=min_samples_split,
        )


def best_split(X: np.ndarray, y: np.ndarray) -> tuple[int, float, float, np.ndarray] | None:
    """Best (feature, threshold, gain, left_mask) over all midpoints, or None.

    Ties go to the lowest feature index, then the lowest threshold.
    """
    n, d = X.shape
    if n < 2:
        return None
    yc = y - y.mean()
    sse = float(yc @ yc)
    if sse <= 0.0:
        return None
    order = np.argsort(X, axis=0, kind="stable")
    xs = np.take_along_axis(X, order, axis=0)
    csum = np.cumsum(yc[order], axis=0)[:-1]
    total = float(yc.sum())
    nl = np.arange(1, n, dtype=np.float64)[:, None]
    nr = n - nl
    # SSE(parent) - SSE(left) - SSE(right), written without differences of squares
    gain = csum ** 2 / nl + (total - csum) ** 2 / nr - total ** 2 / n
    gain = np.where(xs[1:] > xs[:-1], gain, -np.inf).T
    flat = int(np.argmax(gain))
    f, pos = divmod(flat, n - 1)
    best = float(gain[f, pos])
    # float noise around a zero gain must not create a split
    if not best > 1e-12 * sse:
        return None
    lo, hi = xs[pos, f], xs[pos + 1, f]
    thr = lo + (hi - lo) / 2.0
    if not lo <= thr < hi:
        thr = lo
    return f, float(thr), best, X[:, f] <= thr


def fit_tree(X, y, max_depth: int | None = None, min_samples_split: int = 2) -> DecisionTree:
    """Grow a regression tree greedily.

    A node becomes a leaf when it reaches ``max_depth``, holds fewer than
    ``min_samples_split`` rows, has zero target variance, or has no split
    that strictly lowers the squared error.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    if X.ndim != 2 or y.ndim != 1 or X.shape[0] != y.shape[0]:
        raise ValueError(f"shape mismatch: X {X.shape}, y {y.shape}")
    if X.shape[0] == 0:
        raise ValueError("cannot fit a tree on an empty training set")
    if max_depth is not None and max_depth < 0:
        raise ValueError("max_depth must be non-negative")
    min_samples_split = max(int(min_samples_split), 2)
    b = _Builder()

    def grow(idx: np.ndarray, depth: int) -> int:
        ys = y[idx]
        node = b.add(float(ys.mean()), len(idx))
        if (max_depth is not None and depth >= max_depth) or len(idx) < min_samples_split:
            return node
        if np.all(ys == ys[0]):
            return node
        found = best_split(X[idx], ys)
        if found is None:
            return node
        f, thr, gain, mask = found
        left = grow(idx[mask], depth + 1)
        right = grow(idx[~mask], depth + 1)
        b.split(node, f, thr, gain, left, right)
        return node

    grow(np.arange(X.shape[0]), 0)
    return b.finish(X.shape[1], max_depth, min_samples_split)
