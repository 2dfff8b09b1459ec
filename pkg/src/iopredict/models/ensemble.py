"""Random forest and gradient-boosted trees built on :mod:`.tree`."""

from __future__ import annotations

import logging
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .tree import LEAF, DecisionTree, fit_tree

log = logging.getLogger(__name__)


def tree_rng(seed: int, index: int) -> np.random.Generator:
    """Independent stream per (master seed, tree index); order of fitting is irrelevant."""
    return np.random.default_rng(np.random.SeedSequence([int(seed), int(index)]))


@dataclass(frozen=True)
class ForestConfig:
    n_estimators: int = 100
    max_depth: int | None = 10
    min_samples_split: int = 5
    bootstrap: bool = True
    seed: int = 0


@dataclass(frozen=True)
class ForestModel:
    trees: tuple[DecisionTree, ...]
    config: ForestConfig
    n_train: int

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        if not self.trees:
            raise ValueError("forest has no trees")
        return np.mean([t.predict(X) for t in self.trees], axis=0)

    def to_dict(self) -> dict:
        return {"config": asdict(self.config), "n_train": self.n_train,
                "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "ForestModel":
        return cls(tuple(DecisionTree.from_dict(t) for t in d["trees"]), ForestConfig(**d["config"]),
                   int(d["n_train"]))


def fit_random_forest(X, y, cfg: ForestConfig = ForestConfig()) -> ForestModel:
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("random forest needs at least 2 rows")
    if cfg.n_estimators < 1:
        raise ValueError("n_estimators must be at least 1")
    trees = []
    for i in range(cfg.n_estimators):
        if cfg.bootstrap:
            idx = tree_rng(cfg.seed, i).integers(0, n, size=n)
            trees.append(fit_tree(X[idx], y[idx], cfg.max_depth, cfg.min_samples_split))
        else:
            trees.append(fit_tree(X, y, cfg.max_depth, cfg.min_samples_split))
    return ForestModel(tuple(trees), cfg, n)


@dataclass(frozen=True)
class GbdtConfig:
    n_estimators: int = 100
    max_depth: int | None = 6
    learning_rate: float = 0.1
    subsample: float = 0.8
    min_samples_split: int = 2
    seed: int = 0


@dataclass(frozen=True)
class GbdtModel:
    init_value: float
    trees: tuple[DecisionTree, ...]
    config: GbdtConfig
    train_loss: tuple[float, ...] = field(default=())

    def predict(self, X) -> np.ndarray:
        X = np.asarray(X, dtype=np.float64)
        out = np.full(X.shape[0], self.init_value)
        for t in self.trees:
            out += self.config.learning_rate * t.predict(X)
        return out

    def to_dict(self) -> dict:
        return {"config": asdict(self.config), "init_value": self.init_value,
                "train_loss": list(self.train_loss), "trees": [t.to_dict() for t in self.trees]}

    @classmethod
    def from_dict(cls, d: dict) -> "GbdtModel":
        return cls(float(d["init_value"]), tuple(DecisionTree.from_dict(t) for t in d["trees"]),
                   GbdtConfig(**d["config"]), tuple(d.get("train_loss", ())))


def fit_gbdt(X, y, cfg: GbdtConfig = GbdtConfig()) -> GbdtModel:
    """Squared-error gradient boosting with shrinkage and row subsampling.

    Each round fits a tree to the current residuals on ceil(subsample * n)
    rows drawn without replacement, then updates every row's prediction.
    ``train_loss[i]`` is the training MSE after ``i`` rounds.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n = X.shape[0]
    if n < 2:
        raise ValueError("gradient boosting needs at least 2 rows")
    if not 0.0 < cfg.subsample <= 1.0:
        raise ValueError("subsample must lie in (0, 1]")
    if cfg.n_estimators < 0:
        raise ValueError("n_estimators must be non-negative")
    init = float(y.mean())
    F = np.full(n, init)
    m = min(n, math.ceil(cfg.subsample * n - 1e-9))
    trees = []
    losses = [float(np.mean((y - F) ** 2))]
    for i in range(cfg.n_estimators):
        if m < n:
            idx = np.sort(tree_rng(cfg.seed, i).choice(n, size=m, replace=False))
        else:
            idx = np.arange(n)
        resid = y - F
        tree = fit_tree(X[idx], resid[idx], cfg.max_depth, cfg.min_samples_split)
        F = F + cfg.learning_rate * tree.predict(X)
        trees.append(tree)
        losses.append(float(np.mean((y - F) ** 2)))
    return GbdtModel(init, tuple(trees), cfg, tuple(losses))


def _uniform(d: int) -> np.ndarray:
    log.warning("ensemble has no splits; returning uniform feature importance")
    return np.full(d, 1.0 / d)


def feature_importance(model: ForestModel | GbdtModel) -> np.ndarray:
    """Normalized split-gain importance per feature.

    Forest: each tree's summed ``gain / n_root`` is averaged over trees.
    Boosted: raw gains are summed across all rounds.
    """
    if not model.trees:
        raise ValueError("ensemble has no trees")
    d = model.trees[0].n_features
    total = np.zeros(d)
    for t in model.trees:
        internal = t.feature != LEAF
        per = np.bincount(t.feature[internal], weights=t.gain[internal], minlength=d)
        if isinstance(model, ForestModel):
            per = per / t.n_samples[0]
        total += per
    if isinstance(model, ForestModel):
        total /= len(model.trees)
    s = total.sum()
    if s <= 0:
        return _uniform(d)
    return total / s
