"""Uniform fit/predict/serialize wrapper over the seven regressors."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, replace
from pathlib import Path
from typing import Any, Union

import numpy as np

from ..dataset import FEATURES, ScalerState, apply_scaler, fit_scaler
from ..io import read_json, write_json
from .ensemble import ForestConfig, ForestModel, GbdtConfig, GbdtModel, feature_importance, fit_gbdt, fit_random_forest
from .linear import LinearModel, fit_elasticnet, fit_lasso, fit_ols, fit_ridge
from .mlp import MlpConfig, MlpModel, fit_mlp

SCHEMA_VERSION = 1

MODEL_NAMES = ("ols", "ridge", "lasso", "elasticnet", "forest", "gbdt", "mlp")
LINEAR_KINDS = ("ols", "ridge", "lasso", "elasticnet")
TREE_KINDS = ("forest", "gbdt")


def _without_seed(cfg) -> dict:
    d = asdict(cfg)
    d.pop("seed")
    return d


DEFAULT_HYPERPARAMETERS: dict[str, dict[str, Any]] = {
    "ols": {},
    "ridge": {"alpha": 1.0},
    "lasso": {"alpha": 0.1},
    "elasticnet": {"alpha": 0.1, "l1_ratio": 0.5},
    "forest": _without_seed(ForestConfig()),
    "gbdt": _without_seed(GbdtConfig()),
    "mlp": {**_without_seed(MlpConfig()), "hidden": [64, 32, 16]},
}

Fitted = Union[LinearModel, ForestModel, GbdtModel, MlpModel]


class SchemaVersionError(ValueError):
    pass


@dataclass(frozen=True)
class ModelRecipe:
    """An untrained model: kind, hyperparameters and whether inputs are z-scored."""

    kind: str
    hyperparameters: dict = field(default_factory=dict)
    scale: bool = True
    name: str = ""

    def __post_init__(self):
        if self.kind not in MODEL_NAMES:
            raise ValueError(f"unknown model {self.kind!r}; expected one of {', '.join(MODEL_NAMES)}")
        unknown = set(self.hyperparameters) - set(DEFAULT_HYPERPARAMETERS[self.kind])
        if unknown:
            raise ValueError(f"unknown hyperparameter(s) for {self.kind}: {', '.join(sorted(unknown))}")
        if self.kind == "mlp" and not self.scale:
            raise ValueError("the MLP always trains on standardized inputs")
        if not self.name:
            object.__setattr__(self, "name", self.kind)

    @property
    def params(self) -> dict:
        return {**DEFAULT_HYPERPARAMETERS[self.kind], **self.hyperparameters}

    def fit(self, X, y, *, seed: int = 0, log_target: bool = True, metadata: dict | None = None) -> "TrainedModel":
        X = np.asarray(X, dtype=np.float64)
        y = np.asarray(y, dtype=np.float64)
        if X.ndim != 2 or X.shape[1] != len(FEATURES):
            raise ValueError(f"expected (n, {len(FEATURES)}) feature matrix, got {X.shape}")
        scaler = fit_scaler(X) if self.scale else None
        Z = apply_scaler(scaler, X) if scaler is not None else X
        hp = self.params
        kind = self.kind
        if kind == "ols":
            model: Fitted = fit_ols(Z, y)
        elif kind == "ridge":
            model = fit_ridge(Z, y, alpha=hp["alpha"])
        elif kind == "lasso":
            model = fit_lasso(Z, y, alpha=hp["alpha"])
        elif kind == "elasticnet":
            model = fit_elasticnet(Z, y, alpha=hp["alpha"], l1_ratio=hp["l1_ratio"])
        elif kind == "forest":
            model = fit_random_forest(Z, y, ForestConfig(**hp, seed=seed))
        elif kind == "gbdt":
            model = fit_gbdt(Z, y, GbdtConfig(**hp, seed=seed))
        else:
            model = fit_mlp(Z, y, MlpConfig(**{**hp, "hidden": tuple(hp["hidden"])}, seed=seed))
        return TrainedModel(
            name=self.name, kind=kind, model=model, hyperparameters=hp, scaler=scaler,
            log_target=log_target, seed=seed,
            feature_min=X.min(axis=0), feature_max=X.max(axis=0),
            metadata=dict(metadata or {}),
        )


def make_recipe(kind: str, name: str = "", scale: bool | None = None, **hyperparameters) -> ModelRecipe:
    """Recipe with the reference defaults; linear models and the MLP are scaled unless told otherwise."""
    if scale is None:
        scale = kind not in TREE_KINDS
    return ModelRecipe(kind, dict(hyperparameters), scale, name)


def default_recipes() -> list[ModelRecipe]:
    return [make_recipe(k) for k in MODEL_NAMES]


@dataclass(frozen=True)
class TrainedModel:
    name: str
    kind: str
    model: Fitted
    hyperparameters: dict
    scaler: ScalerState | None
    log_target: bool
    seed: int
    feature_min: np.ndarray
    feature_max: np.ndarray
    metadata: dict = field(default_factory=dict)

    def _inputs(self, X) -> np.ndarray:
        X = np.atleast_2d(np.asarray(X, dtype=np.float64))
        if X.shape[1] != len(FEATURES):
            raise ValueError(f"expected rows of width {len(FEATURES)}, got {X.shape[1]}")
        return apply_scaler(self.scaler, X) if self.scaler is not None else X

    def predict(self, X) -> np.ndarray:
        """Prediction in the training target space (log1p MB/s when ``log_target``)."""
        return self.model.predict(self._inputs(X))

    def predict_linear_space(self, X) -> np.ndarray:
        """Prediction in MB/s, clamped at zero."""
        out = self.predict(X)
        if self.log_target:
            out = np.expm1(out)
        return np.maximum(out, 0.0)

    def recipe(self) -> ModelRecipe:
        defaults = DEFAULT_HYPERPARAMETERS[self.kind]
        overrides = {k: v for k, v in self.hyperparameters.items() if defaults.get(k) != v}
        return ModelRecipe(self.kind, overrides, self.scaler is not None, self.name)

    def feature_importance(self) -> np.ndarray:
        if self.kind not in TREE_KINDS:
            raise ValueError(f"feature importance is only defined for tree ensembles, not {self.kind}")
        return feature_importance(self.model)

    def to_envelope(self) -> dict:
        hp = dict(self.hyperparameters)
        if "hidden" in hp:
            hp["hidden"] = list(hp["hidden"])
        return {
            "schema_version": SCHEMA_VERSION,
            "model_kind": self.kind,
            "name": self.name,
            "seed": self.seed,
            "hyperparameters": hp,
            "transforms": {"log1p_target": self.log_target, "scaled": self.scaler is not None},
            "scaler": None if self.scaler is None else self.scaler.to_dict(),
            "feature_order": list(FEATURES),
            "feature_min": self.feature_min.tolist(),
            "feature_max": self.feature_max.tolist(),
            "metadata": self.metadata,
            "parameters": self.model.to_dict(),
        }

    @classmethod
    def from_envelope(cls, env: dict) -> "TrainedModel":
        version = env.get("schema_version")
        if version != SCHEMA_VERSION:
            raise SchemaVersionError(f"model schema_version {version!r} is not supported (expected {SCHEMA_VERSION})")
        if env.get("feature_order", list(FEATURES)) != list(FEATURES):
            raise SchemaVersionError("model was trained on a different feature order")
        kind = env["model_kind"]
        p = env["parameters"]
        if kind in LINEAR_KINDS:
            model: Fitted = LinearModel.from_dict(p)
        elif kind == "forest":
            model = ForestModel.from_dict(p)
        elif kind == "gbdt":
            model = GbdtModel.from_dict(p)
        elif kind == "mlp":
            model = MlpModel.from_dict(p)
        else:
            raise ValueError(f"unknown model kind {kind!r}")
        return cls(
            name=env["name"], kind=kind, model=model, hyperparameters=env["hyperparameters"],
            scaler=None if env["scaler"] is None else ScalerState.from_dict(env["scaler"]),
            log_target=bool(env["transforms"]["log1p_target"]), seed=int(env["seed"]),
            feature_min=np.asarray(env["feature_min"], dtype=np.float64),
            feature_max=np.asarray(env["feature_max"], dtype=np.float64),
            metadata=env.get("metadata", {}),
        )

    def with_metadata(self, **kw) -> "TrainedModel":
        return replace(self, metadata={**self.metadata, **kw})


def save_model(model: TrainedModel, path: str | Path) -> Path:
    return write_json(path, model.to_envelope())


def load_model(path: str | Path) -> TrainedModel:
    path = Path(path)
    if not path.is_file():
        raise FileNotFoundError(f"model file not found: {path}")
    return TrainedModel.from_envelope(read_json(path))


def predict(model: TrainedModel, rows) -> np.ndarray:
    return model.predict(rows)


def predict_linear_space(model: TrainedModel, rows) -> np.ndarray:
    return model.predict_linear_space(rows)
