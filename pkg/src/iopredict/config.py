"""Declarative experiment config: targets, bench grids, model recipes, candidate grid.

One YAML (or JSON) file may hold any subset of these sections::

    seed: 42
    repeats: 3
    targets:
      - {name: shm, root_path: /dev/shm/iopredict, kind: memory_fs}
    sequential: {block_kb: [4, 64, 1024, 4096], file_size_mb: [10, 100]}
    random:     {block_kb: [4], file_size_mb: [100], n_samples: [1000, 10000]}
    concurrent: {block_kb: [1024], file_size_mb: [100], n_threads: [1, 2, 4, 8]}
    pipeline:   {batch_size: [16, 32], num_workers: [0, 2], n_batches: 20,
                 sample_bytes: 3072, synthetic_compute_ms_per_batch: 1.0}
    models:
      - {kind: gbdt}
      - {kind: ridge, hyperparameters: {alpha: 1.0}}
    grid:
      tunable: {batch_size: [16, 32, 64, 128], num_workers: [0, 1, 2, 3, 4]}
      fixed: {block_kb: 0, ...}

Scalars in a grid section are treated as one-element lists.
"""

from __future__ import annotations

import itertools
from pathlib import Path
from typing import Any

import yaml

from . import bench
from .bench import BenchConfig, PipelineBenchConfig, StorageTarget
from .models import ModelRecipe, make_recipe
from .recommender import CandidateGrid

FAMILY_KEYS = {
    "sequential": ("block_kb", "file_size_mb"),
    "random": ("block_kb", "file_size_mb", "n_samples"),
    "concurrent": ("block_kb", "file_size_mb", "n_threads"),
    "pipeline": ("batch_size", "num_workers", "n_batches", "sample_bytes",
                 "synthetic_compute_ms_per_batch"),
}
TOP_LEVEL_KEYS = {"seed", "repeats", "warmup", "targets", "models", "grid", *FAMILY_KEYS}


class ConfigError(ValueError):
    pass


def load_config(path: str | Path) -> dict[str, Any]:
    path = Path(path)
    if not path.is_file():
        raise ConfigError(f"config file not found: {path}")
    try:
        data = yaml.safe_load(path.read_text())
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: invalid YAML: {exc}") from exc
    if not isinstance(data, dict):
        raise ConfigError(f"{path}: top level must be a mapping")
    unknown = set(data) - TOP_LEVEL_KEYS
    if unknown:
        raise ConfigError(f"{path}: unknown section(s) {', '.join(sorted(unknown))}")
    return data


def _listify(v) -> list:
    return list(v) if isinstance(v, (list, tuple)) else [v]


def parse_targets(cfg: dict) -> list[StorageTarget]:
    raw = cfg.get("targets")
    if not raw:
        return [bench.default_target()]
    out = []
    for t in raw:
        try:
            out.append(StorageTarget(str(t["name"]), Path(t["root_path"]), t.get("kind", "other_mounted")))
        except (KeyError, TypeError) as exc:
            raise ConfigError(f"target entry {t!r} needs name and root_path") from exc
    return out


def _family_grid(cfg: dict, family: str) -> list[dict]:
    section = cfg.get(family)
    if section is None:
        return []
    if not isinstance(section, dict):
        raise ConfigError(f"section {family} must be a mapping")
    keys = FAMILY_KEYS[family]
    unknown = set(section) - set(keys) - {"seed", "pool_samples"}
    if unknown:
        raise ConfigError(f"section {family}: unknown key(s) {', '.join(sorted(unknown))}")
    required = [k for k in keys if k not in section and not (family == "pipeline" and k in
                ("sample_bytes", "synthetic_compute_ms_per_batch"))]
    if required:
        raise ConfigError(f"section {family}: missing key(s) {', '.join(required)}")
    present = [k for k in keys if k in section]
    lists = [_listify(section[k]) for k in present]
    if any(len(v) == 0 for v in lists):
        raise ConfigError(f"section {family}: empty value list")
    extra = {k: section[k] for k in ("pool_samples",) if k in section}
    return [dict(zip(present, combo), **extra) for combo in itertools.product(*lists)]


def expand_suite(cfg: dict, seed: int | None = None) -> list[BenchConfig | PipelineBenchConfig]:
    """Cartesian expansion, ordered target > family > grid values (last key fastest)."""
    seed = int(cfg.get("seed", 0) if seed is None else seed)
    repeats = int(cfg.get("repeats", 3))
    warmup = int(cfg.get("warmup", 1))
    cells: list[BenchConfig | PipelineBenchConfig] = []
    try:
        for target in parse_targets(cfg):
            for family in ("sequential", "random", "concurrent"):
                for params in _family_grid(cfg, family):
                    cells.append(BenchConfig(target=target, pattern=family, seed=seed, warmup=warmup,
                                             repeats=repeats, **params))
            for params in _family_grid(cfg, "pipeline"):
                cells.append(PipelineBenchConfig(target=target, seed=seed, warmup=warmup,
                                                 repeats=repeats, **params))
    except (TypeError, ValueError) as exc:
        if isinstance(exc, ConfigError):
            raise
        raise ConfigError(f"invalid benchmark grid: {exc}") from exc
    if not cells:
        raise ConfigError("config defines no benchmark cells")
    return cells


def reference_suite(target: StorageTarget, seed: int = 0, repeats: int = 3) -> list[BenchConfig | PipelineBenchConfig]:
    """Default sweep over the grid endpoints named for the three benchmark families."""
    cfg = {
        "seed": seed,
        "repeats": repeats,
        "sequential": {"block_kb": list(bench.DEFAULT_BLOCK_KB), "file_size_mb": list(bench.DEFAULT_FILE_SIZE_MB)},
        "random": {"block_kb": list(bench.DEFAULT_BLOCK_KB), "file_size_mb": list(bench.DEFAULT_FILE_SIZE_MB),
                   "n_samples": [1_000, 2_000, 5_000, 10_000, 50_000, 100_000]},
        "concurrent": {"block_kb": [1024], "file_size_mb": [1024], "n_threads": list(bench.DEFAULT_N_THREADS)},
        "pipeline": {"batch_size": list(bench.DEFAULT_BATCH_SIZES), "num_workers": list(bench.DEFAULT_NUM_WORKERS),
                     "n_batches": [50], "sample_bytes": [3072, 256], "synthetic_compute_ms_per_batch": [2.0]},
    }
    cells = []
    for family in ("sequential", "random", "concurrent"):
        for params in _family_grid(cfg, family):
            cells.append(BenchConfig(target=target, pattern=family, seed=seed, repeats=repeats, **params))
    for params in _family_grid(cfg, "pipeline"):
        cells.append(PipelineBenchConfig(target=target, seed=seed, repeats=repeats, **params))
    return cells


def parse_models(cfg: dict) -> list[ModelRecipe]:
    out = []
    for entry in cfg.get("models") or []:
        if isinstance(entry, str):
            entry = {"kind": entry}
        try:
            out.append(make_recipe(entry["kind"], name=entry.get("name", ""), scale=entry.get("scale"),
                                   **(entry.get("hyperparameters") or {})))
        except (KeyError, TypeError, ValueError) as exc:
            raise ConfigError(f"invalid model entry {entry!r}: {exc}") from exc
    return out


def parse_grid(cfg: dict) -> CandidateGrid:
    section = cfg.get("grid")
    if not isinstance(section, dict):
        raise ConfigError("config has no 'grid' section")
    try:
        return CandidateGrid.from_dict(section)
    except (TypeError, ValueError) as exc:
        raise ConfigError(f"invalid candidate grid: {exc}") from exc
