"""Rank candidate configurations by predicted throughput.

Ranking uses the model's native output (log1p space for log-target models)
with ties broken by enumeration order; since expm1 is monotone the MB/s
column is non-increasing down the ranking.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .dataset import FEATURES
from .io import sha256_json
from .models import TrainedModel

MAX_GRID = 1_000_000


class GridError(ValueError):
    pass


@dataclass(frozen=True)
class CandidateGrid:
    tunable: dict[str, list[float]]
    fixed: dict[str, float] = field(default_factory=dict)

    def __post_init__(self):
        unknown = (set(self.tunable) | set(self.fixed)) - set(FEATURES)
        if unknown:
            raise GridError(f"unknown feature(s) in grid: {', '.join(sorted(unknown))}")
        both = set(self.tunable) & set(self.fixed)
        if both:
            raise GridError(f"feature(s) both tunable and fixed: {', '.join(sorted(both))}")
        missing = [f for f in FEATURES if f not in self.tunable and f not in self.fixed]
        if missing:
            raise GridError(f"feature(s) neither tunable nor fixed: {', '.join(missing)}")
        for name, values in self.tunable.items():
            if len(values) == 0:
                raise GridError(f"tunable feature {name} has an empty value list")

    @property
    def size(self) -> int:
        return math.prod(len(v) for v in self.tunable.values())

    def to_dict(self) -> dict:
        return {"tunable": {f: [float(v) for v in self.tunable[f]] for f in FEATURES if f in self.tunable},
                "fixed": {f: float(self.fixed[f]) for f in FEATURES if f in self.fixed}}

    def digest(self) -> str:
        return sha256_json(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "CandidateGrid":
        tunable = {k: [float(x) for x in (v if isinstance(v, (list, tuple)) else [v])]
                   for k, v in (d.get("tunable") or {}).items()}
        fixed = {k: float(v) for k, v in (d.get("fixed") or {}).items()}
        return cls(tunable, fixed)


def enumerate_candidates(grid: CandidateGrid) -> np.ndarray:
    """Cartesian product in feature order, last tunable feature varying fastest."""
    size = grid.size
    if size > MAX_GRID:
        raise GridError(f"grid has {size} cells, above the {MAX_GRID} limit")
    names = [f for f in FEATURES if f in grid.tunable]
    out = np.empty((size, len(FEATURES)))
    for j, f in enumerate(FEATURES):
        if f in grid.fixed:
            out[:, j] = grid.fixed[f]
    cols = [FEATURES.index(f) for f in names]
    for i, combo in enumerate(itertools.product(*(grid.tunable[f] for f in names))):
        out[i, cols] = combo
    return out


@dataclass(frozen=True)
class RankedCandidate:
    rank: int
    index: int
    features: dict[str, float]
    predicted_mb_s: float
    predicted_model_space: float
    extrapolated: tuple[str, ...] = ()

    def to_dict(self) -> dict:
        return {"rank": self.rank, "index": self.index, "features": self.features,
                "predicted_mb_s": self.predicted_mb_s,
                "predicted_model_space": self.predicted_model_space,
                "extrapolated": list(self.extrapolated)}


@dataclass(frozen=True)
class Recommendation:
    candidates: tuple[RankedCandidate, ...]
    model_name: str
    model_kind: str
    grid_digest: str
    grid_size: int
    tunable_features: tuple[str, ...] = ()
    note: str | None = None

    def to_dict(self) -> dict:
        return {"model_name": self.model_name, "model_kind": self.model_kind,
                "grid_digest": self.grid_digest, "grid_size": self.grid_size, "note": self.note,
                "tunable_features": list(self.tunable_features),
                "candidates": [c.to_dict() for c in self.candidates]}

    def table(self) -> str:
        tuned = list(self.tunable_features)
        head = ["rank", *tuned, "pred_MB/s", "flags"]
        lines = [head]
        for c in self.candidates:
            flags = ("extrapolated: " + ",".join(c.extrapolated)) if c.extrapolated else ""
            lines.append([str(c.rank), *(f"{c.features[k]:g}" for k in tuned),
                          f"{c.predicted_mb_s:.2f}", flags])
        widths = [max(len(row[i]) for row in lines) for i in range(len(head))]
        text = "\n".join("  ".join(cell.ljust(w) for cell, w in zip(row, widths)).rstrip() for row in lines)
        if self.note:
            text += f"\nnote: {self.note}"
        return text


def rank_order(scores) -> np.ndarray:
    """Indices sorted by descending score, ties kept in original order."""
    s = np.asarray(scores, dtype=np.float64)
    return np.argsort(-s, kind="stable")


def recommend(model: TrainedModel, grid: CandidateGrid, top_k: int = 5) -> Recommendation:
    if top_k < 1:
        raise ValueError("top_k must be at least 1")
    cands = enumerate_candidates(grid)
    scores = model.predict(cands)
    linear = model.predict_linear_space(cands)
    order = rank_order(scores)
    note = None
    if top_k > len(order):
        note = f"top_k={top_k} exceeds grid size {len(order)}; returning the full ranking"
    tuned = [FEATURES.index(f) for f in FEATURES if f in grid.tunable]
    lo, hi = model.feature_min, model.feature_max
    out = []
    for rank, i in enumerate(order[:top_k], start=1):
        row = cands[i]
        extrap = tuple(FEATURES[j] for j in range(len(FEATURES)) if row[j] < lo[j] or row[j] > hi[j])
        out.append(RankedCandidate(rank, int(i), dict(zip(FEATURES, map(float, row))),
                                   float(linear[i]), float(scores[i]), extrap))
    return Recommendation(tuple(out), model.name, model.kind, grid.digest(), len(order),
                          tuple(FEATURES[j] for j in tuned), note)
