"""Observation schema, CSV persistence, cleaning and preprocessing.

Every benchmark family populates a different subset of the eleven feature
columns. Missing cells stay explicit (``None``) until :func:`clean` imputes
them.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Iterable, Sequence

import numpy as np

from .io import atomic_write_text

FEATURES: tuple[str, ...] = (
    "block_kb",
    "file_size_mb",
    "n_samples",
    "throughput_mb_s",
    "iops",
    "n_threads",
    "batch_size",
    "samples_per_second",
    "data_loading_ratio",
    "num_workers",
    "aggregate_throughput_mb_s",
)
BENCHMARK_TYPES = ("seq_read", "random_read", "concurrent_read", "pipeline")
CSV_COLUMNS: tuple[str, ...] = ("benchmark_type", *FEATURES, "target", "source_tag")

LOG1P = "log1p"


class SchemaError(ValueError):
    """Raised when a CSV file does not follow the observation schema."""


@dataclass(frozen=True)
class Observation:
    benchmark_type: str
    features: tuple[float | None, ...]
    target: float | None
    source_tag: str = ""

    def __post_init__(self):
        if len(self.features) != len(FEATURES):
            raise ValueError(f"expected {len(FEATURES)} feature slots, got {len(self.features)}")
        for name, v in zip(FEATURES, self.features):
            if v is not None and not math.isfinite(v):
                raise ValueError(f"feature {name} must be finite or missing, got {v}")
        ratio = self.features[FEATURES.index("data_loading_ratio")]
        if ratio is not None and not 0.0 <= ratio <= 1.0:
            raise ValueError(f"data_loading_ratio must lie in [0, 1], got {ratio}")

    @classmethod
    def from_mapping(cls, benchmark_type: str, values: dict, target: float | None,
                     source_tag: str = "") -> "Observation":
        feats = tuple(None if values.get(f) is None else float(values[f]) for f in FEATURES)
        return cls(benchmark_type, feats, None if target is None else float(target), source_tag)

    def feature(self, name: str) -> float | None:
        return self.features[FEATURES.index(name)]

    def as_dict(self) -> dict:
        out = {"benchmark_type": self.benchmark_type}
        out.update(zip(FEATURES, self.features))
        out["target"] = self.target
        out["source_tag"] = self.source_tag
        return out


@dataclass(frozen=True)
class Dataset:
    rows: tuple[Observation, ...]
    target_transform: str | None = None
    feature_order: tuple[str, ...] = field(default=FEATURES)

    def __post_init__(self):
        object.__setattr__(self, "rows", tuple(self.rows))
        if tuple(self.feature_order) != FEATURES:
            raise SchemaError("feature order is fixed and cannot be changed")

    def __len__(self) -> int:
        return len(self.rows)

    @property
    def X(self) -> np.ndarray:
        """Feature matrix (n, 11); missing cells are NaN."""
        data = [[np.nan if v is None else v for v in r.features] for r in self.rows]
        return np.asarray(data, dtype=np.float64).reshape(len(self.rows), len(FEATURES))

    @property
    def y(self) -> np.ndarray:
        return np.asarray([np.nan if r.target is None else r.target for r in self.rows],
                          dtype=np.float64)

    def subset(self, indices: Iterable[int]) -> "Dataset":
        return replace(self, rows=tuple(self.rows[i] for i in indices))


@dataclass(frozen=True)
class CleanReport:
    imputed: int
    dropped: int


@dataclass(frozen=True)
class ScalerState:
    means: np.ndarray
    stds: np.ndarray

    def to_dict(self) -> dict:
        return {"means": self.means.tolist(), "stds": self.stds.tolist()}

    @classmethod
    def from_dict(cls, d: dict) -> "ScalerState":
        return cls(np.asarray(d["means"], dtype=np.float64), np.asarray(d["stds"], dtype=np.float64))


@dataclass(frozen=True)
class SplitIndices:
    train: np.ndarray
    test: np.ndarray
    seed: int


# -- persistence -----------------------------------------------------------

def _fmt(v: float | None) -> str:
    return "" if v is None else format(v, ".17g")


def save_csv(dataset: Dataset, path: str | Path) -> None:
    lines: list[list[str]] = [list(CSV_COLUMNS)]
    for r in dataset.rows:
        lines.append([r.benchmark_type, *(_fmt(v) for v in r.features), _fmt(r.target), r.source_tag])
    buf = _csv_text(lines)
    atomic_write_text(path, buf)


def _csv_text(lines: list[list[str]]) -> str:
    out = io.StringIO()
    writer = csv.writer(out, lineterminator="\n")
    writer.writerows(lines)
    return out.getvalue()


def load_csv(path: str | Path) -> Dataset:
    path = Path(path)
    with path.open(newline="") as fh:
        reader = csv.reader(fh)
        try:
            header = next(reader)
        except StopIteration:
            raise SchemaError(f"{path}: empty file") from None
        missing = [c for c in CSV_COLUMNS if c not in header]
        if missing:
            raise SchemaError(f"{path}: header is missing column(s) {', '.join(missing)}")
        extra = [c for c in header if c not in CSV_COLUMNS]
        if extra:
            raise SchemaError(f"{path}: unexpected column(s) {', '.join(extra)}")
        pos = {c: header.index(c) for c in CSV_COLUMNS}
        rows = []
        for lineno, cells in enumerate(reader, start=2):
            if not cells:
                continue
            if len(cells) != len(header):
                raise SchemaError(f"{path}:{lineno}: expected {len(header)} cells, got {len(cells)}")

            def num(col: str) -> float | None:
                text = cells[pos[col]].strip()
                if text == "":
                    return None
                try:
                    return float(text)
                except ValueError:
                    raise SchemaError(
                        f"{path}: row {lineno}, column {col}: non-numeric value {text!r}") from None

            feats = tuple(num(f) for f in FEATURES)
            rows.append(Observation(cells[pos["benchmark_type"]], feats, num("target"),
                                    cells[pos["source_tag"]]))
    return Dataset(tuple(rows))


def concat(datasets: Sequence[Dataset]) -> Dataset:
    rows: list[Observation] = []
    for d in datasets:
        rows.extend(d.rows)
    return Dataset(tuple(rows))


# -- cleaning and transforms ----------------------------------------------

def clean(dataset: Dataset) -> tuple[Dataset, CleanReport]:
    """Impute missing features with 0.0 and drop rows without a target.

    Zero reads as "not applicable": seq_read rows have no batch_size, etc.
    """
    rows = []
    imputed = dropped = 0
    for r in dataset.rows:
        if r.target is None:
            dropped += 1
            continue
        n_missing = sum(v is None for v in r.features)
        if n_missing:
            imputed += n_missing
            r = replace(r, features=tuple(0.0 if v is None else v for v in r.features))
        rows.append(r)
    if not rows:
        raise ValueError("cleaning dropped every row (no row has a target)")
    return replace(dataset, rows=tuple(rows)), CleanReport(imputed, dropped)


def skewness(values: Sequence[float]) -> float:
    """Sample skewness g1 = m3 / m2**1.5 using population (1/n) moments."""
    x = np.asarray(values, dtype=np.float64)
    if x.size < 3:
        raise ValueError("skewness needs at least 3 values")
    d = x - x.mean()
    m2 = np.mean(d * d)
    if m2 <= 0.0 or m2 <= (np.finfo(float).eps * np.abs(x).max()) ** 2:
        raise ValueError("skewness is undefined for zero variance")
    m3 = np.mean(d * d * d)
    return float(m3 / m2 ** 1.5)


def log1p_target(dataset: Dataset) -> Dataset:
    if dataset.target_transform == LOG1P:
        raise ValueError("target is already log-transformed")
    rows = []
    for r in dataset.rows:
        if r.target is not None and r.target < 0:
            raise ValueError(f"negative target {r.target} cannot be log-transformed")
        rows.append(r if r.target is None else replace(r, target=math.log1p(r.target)))
    return replace(dataset, rows=tuple(rows), target_transform=LOG1P)


def inverse_target(value):
    """Undo the log1p target transform (scalar or array)."""
    if np.isscalar(value):
        return math.expm1(value)
    return np.expm1(np.asarray(value, dtype=np.float64))


def _matrix(data) -> np.ndarray:
    return data.X if isinstance(data, Dataset) else np.asarray(data, dtype=np.float64)


def fit_scaler(data: Dataset | np.ndarray, train_indices: Sequence[int] | None = None) -> ScalerState:
    X = _matrix(data)
    if train_indices is not None:
        idx = np.asarray(train_indices, dtype=np.intp)
        if idx.size == 0:
            raise ValueError("cannot fit a scaler on an empty index list")
        X = X[idx]
    if X.shape[0] == 0:
        raise ValueError("cannot fit a scaler on zero rows")
    means = X.mean(axis=0)
    stds = X.std(axis=0)
    # exact-zero spread only arises for constant columns; float noise below this is treated as constant
    stds = np.where(stds <= 1e-12 * np.maximum(np.abs(means), 1.0), 0.0, stds)
    return ScalerState(means, stds)


def apply_scaler(state: ScalerState, features) -> np.ndarray:
    X = np.asarray(features, dtype=np.float64)
    safe = np.where(state.stds > 0, state.stds, 1.0)
    return np.where(state.stds > 0, (X - state.means) / safe, 0.0)


def invert_scaler(state: ScalerState, scaled) -> np.ndarray:
    Z = np.asarray(scaled, dtype=np.float64)
    return np.where(state.stds > 0, Z * state.stds + state.means, state.means)


def train_test_split(n_rows: int, test_fraction: float = 0.2, seed: int = 42) -> SplitIndices:
    """Seeded shuffle split; test size is ceil(n * fraction), at least 1."""
    if n_rows < 2:
        raise ValueError("need at least 2 rows to split")
    if not 0.0 < test_fraction < 1.0:
        raise ValueError(f"test_fraction must lie in (0, 1), got {test_fraction}")
    # 1e-9 slack keeps 10 * 0.7 = 7.000000000000001 from rounding up to 8
    n_test = max(1, math.ceil(n_rows * test_fraction - 1e-9))
    n_test = min(n_test, n_rows - 1)
    perm = np.random.default_rng(seed).permutation(n_rows)
    return SplitIndices(train=np.sort(perm[n_test:]), test=np.sort(perm[:n_test]), seed=seed)


def summarize(dataset: Dataset) -> dict:
    """Row counts per family and target skewness before/after log1p."""
    y = dataset.y
    if dataset.target_transform == LOG1P:
        raw, logged = np.expm1(y), y
    else:
        raw, logged = y, np.log1p(y)
    counts: dict[str, int] = {}
    for r in dataset.rows:
        counts[r.benchmark_type] = counts.get(r.benchmark_type, 0) + 1

    def safe_skew(v):
        try:
            return skewness(v)
        except ValueError:
            return None

    return {
        "n_rows": len(dataset),
        "rows_by_type": dict(sorted(counts.items())),
        "target_min": float(raw.min()),
        "target_max": float(raw.max()),
        "skewness_raw": safe_skew(raw),
        "skewness_log1p": safe_skew(logged),
    }
