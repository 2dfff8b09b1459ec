"""Metrics, k-fold cross-validation, leaderboards and residual analysis."""

from __future__ import annotations

import logging
from dataclasses import asdict, dataclass, field
from typing import Sequence

import numpy as np

from .dataset import LOG1P, Dataset, SplitIndices
from .models import ModelRecipe, TrainedModel

log = logging.getLogger(__name__)


def _pair(actual, predicted, min_len: int) -> tuple[np.ndarray, np.ndarray]:
    a = np.asarray(actual, dtype=np.float64).ravel()
    p = np.asarray(predicted, dtype=np.float64).ravel()
    if a.shape != p.shape:
        raise ValueError(f"length mismatch: {a.size} actual vs {p.size} predicted")
    if a.size < min_len:
        raise ValueError(f"need at least {min_len} value(s), got {a.size}")
    return a, p


def r2(actual, predicted) -> float:
    a, p = _pair(actual, predicted, 2)
    ss_tot = float(np.sum((a - a.mean()) ** 2))
    if ss_tot == 0.0:
        raise ValueError("R^2 is undefined when the actual values have zero variance")
    return 1.0 - float(np.sum((a - p) ** 2)) / ss_tot


def mae(actual, predicted) -> float:
    a, p = _pair(actual, predicted, 1)
    return float(np.mean(np.abs(a - p)))


def percentage_errors(actual_linear, predicted_linear) -> tuple[float, float]:
    """(mean, median) of 100 * |p - a| / a."""
    a, p = _pair(actual_linear, predicted_linear, 1)
    if np.any(a <= 0):
        raise ValueError("percentage error needs strictly positive actual values")
    e = 100.0 * np.abs(p - a) / a
    return float(e.mean()), float(np.median(e))


@dataclass(frozen=True)
class Metrics:
    r2: float
    mae_log: float
    mean_pct_err: float
    median_pct_err: float

    @classmethod
    def from_dict(cls, d: dict) -> "Metrics":
        return cls(float(d["r2"]), float(d["mae_log"]), float(d["mean_pct_err"]), float(d["median_pct_err"]))


def compute_metrics(actual, predicted, log_space: bool = True) -> Metrics:
    """Metrics for targets in model space; percentage errors use the MB/s scale."""
    a, p = _pair(actual, predicted, 2)
    if log_space:
        a_lin, p_lin = np.expm1(a), np.maximum(np.expm1(p), 0.0)
    else:
        a_lin, p_lin = a, np.maximum(p, 0.0)
    mean_pe, median_pe = percentage_errors(a_lin, p_lin)
    return Metrics(r2(a, p), mae(a, p), mean_pe, median_pe)


def kfold_indices(n: int, k: int = 5, seed: int = 42) -> list[np.ndarray]:
    """Shuffled k-fold partition of range(n); the first ``n % k`` folds get one extra row."""
    if not 2 <= k <= n:
        raise ValueError(f"k must lie in [2, n={n}], got {k}")
    perm = np.random.default_rng(seed).permutation(n)
    base, rem = divmod(n, k)
    folds = []
    start = 0
    for i in range(k):
        size = base + (1 if i < rem else 0)
        folds.append(np.sort(perm[start:start + size]))
        start += size
    return folds


class FoldError(RuntimeError):
    def __init__(self, fold: int, cause: Exception):
        super().__init__(f"fold {fold}: {cause}")
        self.fold = fold
        self.cause = cause


@dataclass(frozen=True)
class CvResult:
    model_name: str
    fold_r2: tuple[float, ...]
    mean_r2: float
    std_r2: float
    k: int
    seed: int

    def to_dict(self) -> dict:
        d = asdict(self)
        d["fold_r2"] = list(self.fold_r2)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "CvResult":
        return cls(d["model_name"], tuple(float(v) for v in d["fold_r2"]), float(d["mean_r2"]),
                   float(d["std_r2"]), int(d["k"]), int(d["seed"]))


def _is_log(dataset: Dataset) -> bool:
    return dataset.target_transform == LOG1P


def cross_validate(recipe: ModelRecipe, dataset: Dataset, k: int = 5, seed: int = 42) -> CvResult:
    """Refit ``recipe`` (scaler included) on k-1 folds and score R^2 on the held-out fold."""
    X, y = dataset.X, dataset.y
    if np.isnan(X).any() or np.isnan(y).any():
        raise ValueError("cross_validate needs a cleaned dataset (missing values present)")
    folds = kfold_indices(len(y), k, seed)
    scores = []
    for i, test in enumerate(folds):
        train = np.setdiff1d(np.arange(len(y)), test, assume_unique=True)
        try:
            model = recipe.fit(X[train], y[train], seed=seed, log_target=_is_log(dataset))
            scores.append(r2(y[test], model.predict(X[test])))
        except Exception as exc:
            raise FoldError(i, exc) from exc
    arr = np.asarray(scores)
    return CvResult(recipe.name, tuple(float(s) for s in arr), float(arr.mean()), float(arr.std()), k, seed)


@dataclass(frozen=True)
class LeaderboardRow:
    name: str
    kind: str
    train: Metrics | None
    test: Metrics | None
    error: str | None = None
    test_actual: tuple[float, ...] = field(default=(), repr=False)
    test_predicted: tuple[float, ...] = field(default=(), repr=False)

    @property
    def ok(self) -> bool:
        return self.error is None

    @property
    def overfit_gap(self) -> float | None:
        if self.train is None or self.test is None:
            return None
        return self.train.r2 - self.test.r2

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "kind": self.kind,
            "train": None if self.train is None else asdict(self.train),
            "test": None if self.test is None else asdict(self.test),
            "overfit_gap": self.overfit_gap,
            "error": self.error,
            "test_actual": list(self.test_actual),
            "test_predicted": list(self.test_predicted),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "LeaderboardRow":
        return cls(d["name"], d["kind"],
                   None if d.get("train") is None else Metrics.from_dict(d["train"]),
                   None if d.get("test") is None else Metrics.from_dict(d["test"]),
                   d.get("error"),
                   tuple(float(v) for v in d.get("test_actual", ())),
                   tuple(float(v) for v in d.get("test_predicted", ())))


@dataclass(frozen=True)
class Leaderboard:
    rows: tuple[LeaderboardRow, ...]

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(sorted(self.rows, key=_row_key)))

    def names(self) -> list[str]:
        return [r.name for r in self.rows]

    def row(self, name: str) -> LeaderboardRow:
        for r in self.rows:
            if r.name == name:
                return r
        raise KeyError(name)

    @property
    def best(self) -> LeaderboardRow | None:
        ok = [r for r in self.rows if r.ok]
        return ok[0] if ok else None

    def to_dict(self) -> dict:
        return {"rows": [r.to_dict() for r in self.rows]}

    @classmethod
    def from_dict(cls, d: dict) -> "Leaderboard":
        return cls(tuple(LeaderboardRow.from_dict(r) for r in d["rows"]))


def _row_key(r: LeaderboardRow):
    if r.test is None:
        return (1, 0.0, r.name)
    return (0, -r.test.r2, r.name)


def evaluate_model(model: TrainedModel, dataset: Dataset, split: SplitIndices) -> LeaderboardRow:
    X, y = dataset.X, dataset.y
    tr, te = split.train, split.test
    logged = model.log_target
    train_m = compute_metrics(y[tr], model.predict(X[tr]), logged)
    pred_te = model.predict(X[te])
    test_m = compute_metrics(y[te], pred_te, logged)
    return LeaderboardRow(model.name, model.kind, train_m, test_m, None,
                          tuple(float(v) for v in y[te]), tuple(float(v) for v in pred_te))


def compare_models(recipes: Sequence[ModelRecipe], dataset: Dataset, split: SplitIndices,
                   seed: int | None = None) -> tuple[Leaderboard, dict[str, TrainedModel]]:
    """Fit each recipe on the training split and rank by test R^2.

    A recipe that fails is kept as an error row rather than aborting.
    """
    if not recipes:
        raise ValueError("compare_models needs at least one recipe")
    seed = split.seed if seed is None else seed
    X, y = dataset.X, dataset.y
    rows = []
    fitted: dict[str, TrainedModel] = {}
    for recipe in recipes:
        try:
            model = recipe.fit(X[split.train], y[split.train], seed=seed, log_target=_is_log(dataset))
            rows.append(evaluate_model(model, dataset, split))
            fitted[recipe.name] = model
        except Exception as exc:
            log.warning("model %s failed: %s", recipe.name, exc)
            rows.append(LeaderboardRow(recipe.name, recipe.kind, None, None, f"{type(exc).__name__}: {exc}"))
    return Leaderboard(tuple(rows)), fitted


def leaderboard_from_models(models: Sequence[TrainedModel], dataset: Dataset,
                            split: SplitIndices) -> Leaderboard:
    rows = []
    for m in models:
        try:
            rows.append(evaluate_model(m, dataset, split))
        except Exception as exc:
            rows.append(LeaderboardRow(m.name, m.kind, None, None, f"{type(exc).__name__}: {exc}"))
    return Leaderboard(tuple(rows))


@dataclass(frozen=True)
class ResidualReport:
    residuals: np.ndarray
    mean: float
    std: float
    bin_edges: np.ndarray
    counts: np.ndarray

    def to_dict(self) -> dict:
        return {"residuals": self.residuals.tolist(), "mean": self.mean, "std": self.std,
                "bin_edges": self.bin_edges.tolist(), "counts": self.counts.tolist()}


def residual_report(actual, predicted, n_bins: int = 15) -> ResidualReport:
    """Residuals ``actual - predicted`` with a uniform histogram over their range."""
    a, p = _pair(actual, predicted, 2)
    res = a - p
    counts, edges = np.histogram(res, bins=n_bins)
    return ResidualReport(res, float(res.mean()), float(res.std()), edges, counts)


@dataclass(frozen=True)
class EvalReport:
    """Everything ``evaluate`` produces; the report generator reads only this."""

    leaderboard: Leaderboard
    cv: tuple[CvResult, ...]
    dataset_summary: dict
    split: dict
    importances: dict[str, list[float]] = field(default_factory=dict)

    def to_dict(self) -> dict:
        return {"leaderboard": self.leaderboard.to_dict(), "cv": [c.to_dict() for c in self.cv],
                "dataset_summary": self.dataset_summary, "split": self.split,
                "importances": {k: list(v) for k, v in self.importances.items()}}

    @classmethod
    def from_dict(cls, d: dict) -> "EvalReport":
        return cls(Leaderboard.from_dict(d["leaderboard"]), tuple(CvResult.from_dict(c) for c in d["cv"]),
                   d["dataset_summary"], d["split"],
                   {k: [float(x) for x in v] for k, v in d.get("importances", {}).items()})
