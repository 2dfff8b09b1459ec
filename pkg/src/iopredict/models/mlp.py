"""Fully connected ReLU regressor trained full-batch with Adam.

Objective: ``mean((f(X) - y)**2) + l2_alpha * sum(||W||**2)`` over weight
matrices (biases unpenalized).
"""

from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field

import numpy as np


class DivergenceError(RuntimeError):
    pass


@dataclass(frozen=True)
class MlpConfig:
    hidden: tuple[int, ...] = (64, 32, 16)
    l2_alpha: float = 1e-3
    learning_rate: float = 1e-3
    beta1: float = 0.9
    beta2: float = 0.999
    eps: float = 1e-8
    max_epochs: int = 1000
    patience: int = 10
    validation_fraction: float = 0.1
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "hidden", tuple(int(h) for h in self.hidden))


Params = list[tuple[np.ndarray, np.ndarray]]


def init_params(sizes: list[int], rng: np.random.Generator) -> Params:
    """Glorot-uniform weights, zero biases."""
    params = []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        bound = math.sqrt(6.0 / (fan_in + fan_out))
        params.append((rng.uniform(-bound, bound, size=(fan_in, fan_out)), np.zeros(fan_out)))
    return params


def forward(params: Params, X: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    acts = [X]
    h = X
    for i, (W, b) in enumerate(params):
        z = h @ W + b
        h = z if i == len(params) - 1 else np.maximum(z, 0.0)
        acts.append(h)
    return h[:, 0], acts


def loss_and_grads(params: Params, X: np.ndarray, y: np.ndarray, l2_alpha: float) -> tuple[float, Params]:
    pred, acts = forward(params, X)
    n = X.shape[0]
    err = pred - y
    loss = float(err @ err / n + l2_alpha * sum(np.sum(W * W) for W, _ in params))
    delta = (2.0 / n) * err[:, None]
    grads: Params = []
    for i in range(len(params) - 1, -1, -1):
        W, _ = params[i]
        gW = acts[i].T @ delta + 2.0 * l2_alpha * W
        gb = delta.sum(axis=0)
        grads.append((gW, gb))
        if i:
            delta = (delta @ W.T) * (acts[i] > 0)
    grads.reverse()
    return loss, grads


@dataclass(frozen=True)
class MlpModel:
    params: tuple[tuple[np.ndarray, np.ndarray], ...]
    config: MlpConfig
    best_epoch: int = 0
    epochs_run: int = 0
    val_loss: tuple[float, ...] = field(default=())

    @property
    def layer_sizes(self) -> list[int]:
        return [self.params[0][0].shape[0]] + [W.shape[1] for W, _ in self.params]

    def predict(self, X) -> np.ndarray:
        return forward(list(self.params), np.asarray(X, dtype=np.float64))[0]

    def to_dict(self) -> dict:
        cfg = asdict(self.config)
        cfg["hidden"] = list(cfg["hidden"])
        return {"config": cfg, "best_epoch": self.best_epoch, "epochs_run": self.epochs_run,
                "val_loss": list(self.val_loss),
                "layers": [{"weights": W.tolist(), "bias": b.tolist()} for W, b in self.params]}

    @classmethod
    def from_dict(cls, d: dict) -> "MlpModel":
        params = tuple((np.asarray(layer["weights"], dtype=np.float64).reshape(len(layer["weights"]), -1),
                        np.asarray(layer["bias"], dtype=np.float64)) for layer in d["layers"])
        return cls(params, MlpConfig(**d["config"]), int(d["best_epoch"]), int(d["epochs_run"]),
                   tuple(d.get("val_loss", ())))


def fit_mlp(X, y, cfg: MlpConfig = MlpConfig()) -> MlpModel:
    """Train on standardized inputs with a seeded validation holdout.

    Stops after ``patience`` epochs without a new best validation loss (or at
    ``max_epochs``) and returns the parameters of the best epoch.
    """
    X = np.asarray(X, dtype=np.float64)
    y = np.asarray(y, dtype=np.float64)
    n, d = X.shape
    if n < 5:
        raise ValueError("MLP training needs at least 5 rows")
    rng = np.random.default_rng(cfg.seed)
    perm = rng.permutation(n)
    n_val = max(1, math.ceil(cfg.validation_fraction * n - 1e-9))
    val, tr = perm[:n_val], perm[n_val:]
    Xt, yt, Xv, yv = X[tr], y[tr], X[val], y[val]

    sizes = [d, *cfg.hidden, 1]
    params = init_params(sizes, rng)
    m = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
    v = [(np.zeros_like(W), np.zeros_like(b)) for W, b in params]
    b1, b2 = cfg.beta1, cfg.beta2

    best = math.inf
    best_params = [(W.copy(), b.copy()) for W, b in params]
    best_epoch = 0
    stale = 0
    history = []
    epoch = 0
    for epoch in range(1, cfg.max_epochs + 1):
        loss, grads = loss_and_grads(params, Xt, yt, cfg.l2_alpha)
        if not math.isfinite(loss):
            raise DivergenceError(f"training loss became non-finite at epoch {epoch}")
        corr1 = 1.0 - b1 ** epoch
        corr2 = 1.0 - b2 ** epoch
        new_params = []
        for i, ((W, b), (gW, gb)) in enumerate(zip(params, grads)):
            mW, mb = m[i]
            vW, vb = v[i]
            mW = b1 * mW + (1 - b1) * gW
            mb = b1 * mb + (1 - b1) * gb
            vW = b2 * vW + (1 - b2) * gW * gW
            vb = b2 * vb + (1 - b2) * gb * gb
            m[i] = (mW, mb)
            v[i] = (vW, vb)
            W = W - cfg.learning_rate * (mW / corr1) / (np.sqrt(vW / corr2) + cfg.eps)
            b = b - cfg.learning_rate * (mb / corr1) / (np.sqrt(vb / corr2) + cfg.eps)
            new_params.append((W, b))
        params = new_params
        pred_v, _ = forward(params, Xv)
        val_loss = float(np.mean((pred_v - yv) ** 2))
        if not math.isfinite(val_loss):
            raise DivergenceError(f"validation loss became non-finite at epoch {epoch}")
        history.append(val_loss)
        if val_loss < best:
            best = val_loss
            best_params = [(W.copy(), b.copy()) for W, b in params]
            best_epoch = epoch
            stale = 0
        else:
            stale += 1
            if stale >= cfg.patience:
                break
    return MlpModel(tuple(best_params), cfg, best_epoch, epoch, tuple(history))
