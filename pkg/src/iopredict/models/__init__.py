"""Regressors: linear family, CART trees, forest, boosting and an MLP."""

from .ensemble import (ForestConfig, ForestModel, GbdtConfig, GbdtModel, feature_importance,
                       fit_gbdt, fit_random_forest)
from .linear import (ConvergenceError, LinearModel, RankDeficientError, fit_elasticnet, fit_lasso,
                     fit_ols, fit_ridge)
from .mlp import DivergenceError, MlpConfig, MlpModel, fit_mlp
from .trained import (DEFAULT_HYPERPARAMETERS, LINEAR_KINDS, MODEL_NAMES, TREE_KINDS, ModelRecipe, SchemaVersionError,
                      TrainedModel, default_recipes, load_model, make_recipe, predict,
                      predict_linear_space, save_model)
from .tree import DecisionTree, fit_tree

__all__ = [
    "ConvergenceError", "DEFAULT_HYPERPARAMETERS", "DecisionTree", "DivergenceError", "ForestConfig",
    "ForestModel", "GbdtConfig", "GbdtModel", "LINEAR_KINDS", "LinearModel", "MODEL_NAMES", "MlpConfig", "MlpModel",
    "ModelRecipe", "RankDeficientError", "SchemaVersionError", "TREE_KINDS", "TrainedModel", "default_recipes",
    "feature_importance", "fit_elasticnet", "fit_gbdt", "fit_lasso", "fit_mlp", "fit_ols",
    "fit_random_forest", "fit_ridge", "fit_tree", "load_model", "make_recipe", "predict",
    "predict_linear_space", "save_model",
]
