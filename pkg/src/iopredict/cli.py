"""``iopredict`` command line: bench -> dataset -> analyze -> train -> evaluate -> recommend -> report.

Every command that writes files also writes a run manifest next to them
(``<output>.manifest.json``, or ``manifest.json`` inside a report directory).
Exit codes: 0 success, 1 runtime failure, 2 usage error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import time
from dataclasses import dataclass, field
from datetime import datetime, timezone
from pathlib import Path
from typing import Sequence

import numpy as np

from . import __version__
from .bench import FakeClock, monotonic_clock, run_suite
from .config import ConfigError, expand_suite, load_config, parse_grid, parse_models
from .dataset import (FEATURES, Dataset, apply_scaler, clean, concat, fit_scaler, load_csv, log1p_target,
                      save_csv, summarize, train_test_split)
from .evaluation import EvalReport, cross_validate, leaderboard_from_models
from .io import atomic_write_text, read_json, sha256_file, write_json
from .models import MODEL_NAMES, TREE_KINDS, TrainedModel, load_model, make_recipe, save_model
from .pca import PcaModel, components_for_threshold, fit_pca
from .recommender import recommend
from .report import REPORT_FILES, THRESHOLDS, write_report

log = logging.getLogger("iopredict")

VERBS = ("bench", "build-dataset", "analyze", "train", "evaluate", "importance", "recommend", "report")


class UsageError(Exception):
    pass


@dataclass
class RunManifest:
    argv: list[str]
    seeds: dict = field(default_factory=dict)
    inputs: dict = field(default_factory=dict)
    outputs: dict = field(default_factory=dict)
    extra: dict = field(default_factory=dict)
    started: float = field(default_factory=time.monotonic)

    def add_inputs(self, paths: Sequence[Path]) -> None:
        for p in paths:
            self.inputs[str(p)] = sha256_file(p)

    def add_outputs(self, paths: Sequence[Path]) -> None:
        for p in paths:
            self.outputs[str(p)] = sha256_file(p)

    def to_dict(self) -> dict:
        return {
            "tool": "iopredict", "version": __version__, "argv": self.argv, "seeds": self.seeds,
            "inputs": self.inputs, "outputs": self.outputs, **({"extra": self.extra} if self.extra else {}),
            "created_utc": datetime.now(timezone.utc).isoformat(),
            "wall_time_s": time.monotonic() - self.started,
        }

    def write(self, path: Path) -> Path:
        return write_json(path, self.to_dict())


def manifest_path(output: Path) -> Path:
    return output / "manifest.json" if output.is_dir() else output.with_name(output.name + ".manifest.json")


# -- argument parsing -------------------------------------------------------

class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        raise UsageError(f"{self.prog}: error: {message}")


def _unit_interval(text: str) -> float:
    v = float(text)
    if not 0.0 < v < 1.0:
        raise argparse.ArgumentTypeError(f"must lie strictly between 0 and 1, got {text}")
    return v


def _nonneg_int(text: str) -> int:
    v = int(text)
    if v < 0:
        raise argparse.ArgumentTypeError(f"must be a non-negative integer, got {text}")
    return v


def _positive_int(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError(f"must be a positive integer, got {text}")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="iopredict", description="Benchmark storage, model I/O throughput, recommend configurations.")
    p.add_argument("--version", action="version", version=f"iopredict {__version__}")
    p.add_argument("-v", "--verbose", action="store_true", help="log progress to stderr")
    sub = p.add_subparsers(dest="verb", metavar="VERB", parser_class=_Parser)
    sub.required = True

    b = sub.add_parser("bench", help="run a benchmark suite and write a raw observation CSV")
    b.add_argument("--suite", required=True, type=Path, help="YAML config with targets and bench grids")
    b.add_argument("--out", required=True, type=Path, help="output CSV")
    b.add_argument("--jsonl", type=Path, help="also write full records (with timestamps) as JSON lines")
    b.add_argument("--seed", type=_nonneg_int, help="override the suite seed")
    b.add_argument("--fake-clock-ns", type=_positive_int, metavar="STEP",
                   help="replace the wall clock with one advancing STEP ns per reading (deterministic runs)")

    d = sub.add_parser("build-dataset", help="merge and clean raw observation CSVs")
    d.add_argument("--in", dest="inputs", required=True, nargs="+", type=Path)
    d.add_argument("--out", required=True, type=Path)

    a = sub.add_parser("analyze", help="target skewness and PCA scree of the standardized features")
    a.add_argument("--data", required=True, type=Path)
    a.add_argument("--out", type=Path, help="write analysis JSON (needed by report)")

    t = sub.add_parser("train", help="fit one model on the training split")
    t.add_argument("--data", required=True, type=Path)
    t.add_argument("--model", required=True, help=f"model kind ({', '.join(MODEL_NAMES)}) or a name from --config")
    t.add_argument("--seed", type=_nonneg_int, default=42, help="split and model seed (default 42)")
    t.add_argument("--test-fraction", type=_unit_interval, default=0.2)
    t.add_argument("--config", type=Path, help="YAML config whose models section supplies hyperparameters")
    t.add_argument("--out", required=True, type=Path)

    e = sub.add_parser("evaluate", help="leaderboard on the held-out split plus k-fold CV")
    e.add_argument("--data", required=True, type=Path)
    e.add_argument("--models", required=True, nargs="+", type=Path)
    e.add_argument("--k", type=int, default=5, help="CV folds (default 5)")
    e.add_argument("--seed", type=_nonneg_int, help="CV seed (default: the models' split seed)")
    e.add_argument("--out", type=Path, default=Path("evaluation.json"))

    i = sub.add_parser("importance", help="feature importance of a tree-ensemble model")
    i.add_argument("--model", required=True, type=Path)
    i.add_argument("--out", type=Path)

    r = sub.add_parser("recommend", help="rank a candidate grid by predicted throughput")
    r.add_argument("--model", required=True, type=Path)
    r.add_argument("--grid", required=True, type=Path, help="YAML config with a grid section")
    r.add_argument("--top", type=_positive_int, default=5)
    r.add_argument("--out", type=Path)

    rp = sub.add_parser("report", help="markdown report and plot-data CSVs")
    rp.add_argument("--in", dest="in_dir", required=True, type=Path,
                    help="directory holding evaluation.json and analysis.json")
    rp.add_argument("--out", required=True, type=Path)
    return p


def _require_files(paths: Sequence[Path]) -> None:
    for p in paths:
        if not p.is_file():
            raise FileNotFoundError(f"input file not found: {p}")


def _load_clean(path: Path) -> Dataset:
    return clean(load_csv(path))[0]


# -- verbs ------------------------------------------------------------------

def cmd_bench(args, argv) -> int:
    cfg = load_config(args.suite)
    cells = expand_suite(cfg, args.seed)
    clock = FakeClock(args.fake_clock_ns) if args.fake_clock_ns else monotonic_clock
    log.info("running %d benchmark cells", len(cells))
    result = run_suite(cells, clock)
    save_csv(Dataset(tuple(r.to_observation() for r in result.records)), args.out)
    man = RunManifest(argv, seeds={"suite": cells[0].seed})
    man.add_inputs([args.suite])
    outputs = [args.out]
    if args.jsonl:
        lines = "".join(json.dumps(r.to_json_dict(), sort_keys=True) + "\n" for r in result.records)
        atomic_write_text(args.jsonl, lines)
        outputs.append(args.jsonl)
    man.add_outputs(outputs)
    man.extra = {"cells": len(cells), "records": len(result.records),
                 "failures": [{"cell": f.index, "error": f.error} for f in result.failures],
                 "clock": f"fake:{args.fake_clock_ns}" if args.fake_clock_ns else "perf_counter_ns"}
    man.write(manifest_path(args.out))
    print(f"{len(result.records)} of {len(cells)} cells recorded -> {args.out}")
    for f in result.failures:
        print(f"cell {f.index} failed: {f.error}", file=sys.stderr)
    return 1 if result.failures else 0


def cmd_build_dataset(args, argv) -> int:
    _require_files(args.inputs)
    merged = concat([load_csv(p) for p in args.inputs])
    ds, report = clean(merged)
    save_csv(ds, args.out)
    man = RunManifest(argv)
    man.add_inputs(args.inputs)
    man.add_outputs([args.out])
    man.extra = {"rows": len(ds), "imputed_cells": report.imputed, "dropped_rows": report.dropped}
    man.write(manifest_path(args.out))
    print(f"{len(ds)} rows ({report.imputed} cells imputed, {report.dropped} rows dropped) -> {args.out}")
    return 0


def analyze_dataset(ds) -> tuple[dict, PcaModel]:
    X = ds.X
    pca = fit_pca(apply_scaler(fit_scaler(X), X))
    return summarize(ds), pca


def cmd_analyze(args, argv) -> int:
    _require_files([args.data])
    ds = _load_clean(args.data)
    summary, pca = analyze_dataset(ds)
    counts = {f"{t:.2f}": components_for_threshold(pca, t) for t in THRESHOLDS}
    print(f"rows: {summary['n_rows']}  by type: {summary['rows_by_type']}")
    print(f"skewness raw: {summary['skewness_raw']}  after log1p: {summary['skewness_log1p']}")
    print("component  eigenvalue  ratio  cumulative")
    for k, ev, r, c in pca.scree_rows():
        print(f"{k:9d}  {ev:10.4f}  {r:.4f}  {c:.4f}")
    for t, k in counts.items():
        print(f"components for {t} variance: {k}")
    if args.out:
        write_json(args.out, {"summary": summary, "pca": pca.to_dict(), "standardized": True,
                              "components_for_threshold": counts})
        man = RunManifest(argv)
        man.add_inputs([args.data])
        man.add_outputs([args.out])
        man.write(manifest_path(args.out))
    return 0


def _recipe_for(args):
    if args.config:
        for recipe in parse_models(load_config(args.config)):
            if recipe.name == args.model:
                return recipe
        for recipe in parse_models(load_config(args.config)):
            if recipe.kind == args.model:
                return recipe
    if args.model not in MODEL_NAMES:
        raise UsageError(f"unknown model {args.model!r}; expected one of {', '.join(MODEL_NAMES)}")
    return make_recipe(args.model)


def cmd_train(args, argv) -> int:
    _require_files([args.data] + ([args.config] if args.config else []))
    recipe = _recipe_for(args)
    ds = log1p_target(_load_clean(args.data))
    split = train_test_split(len(ds), args.test_fraction, args.seed)
    meta = {"data_sha256": sha256_file(args.data), "split_seed": args.seed, "test_fraction": args.test_fraction,
            "n_train": len(split.train), "n_test": len(split.test)}
    model = recipe.fit(ds.X[split.train], ds.y[split.train], seed=args.seed, log_target=True, metadata=meta)
    save_model(model, args.out)
    man = RunManifest(argv, seeds={"split": args.seed, "model": args.seed})
    man.add_inputs([args.data] + ([args.config] if args.config else []))
    man.add_outputs([args.out])
    man.write(manifest_path(args.out))
    print(f"trained {model.name} ({model.kind}) on {len(split.train)} rows -> {args.out}")
    return 0


def _shared_split(models: Sequence[TrainedModel], data_sha: str) -> tuple[int, float]:
    keys = set()
    for m in models:
        meta = m.metadata
        if "split_seed" not in meta or "test_fraction" not in meta:
            raise ValueError(f"model {m.name} carries no split metadata; retrain it with `iopredict train`")
        if meta.get("data_sha256") not in (None, data_sha):
            raise ValueError(f"model {m.name} was trained on different data (digest mismatch)")
        keys.add((int(meta["split_seed"]), float(meta["test_fraction"])))
    if len(keys) != 1:
        raise ValueError(f"models were trained on different splits: {sorted(keys)}")
    return keys.pop()


def cmd_evaluate(args, argv) -> int:
    if args.k < 2:
        raise UsageError("--k must be at least 2")
    _require_files([args.data, *args.models])
    models = [load_model(p) for p in args.models]
    names = [m.name for m in models]
    if len(set(names)) != len(names):
        raise ValueError(f"model names must be unique, got {names}")
    ds = log1p_target(_load_clean(args.data))
    seed, frac = _shared_split(models, sha256_file(args.data))
    split = train_test_split(len(ds), frac, seed)
    cv_seed = seed if args.seed is None else args.seed
    lb = leaderboard_from_models(models, ds, split)
    cv = tuple(cross_validate(m.recipe(), ds, args.k, cv_seed) for m in models)
    importances = {m.name: [float(v) for v in m.feature_importance()] for m in models if m.kind in TREE_KINDS}
    bundle = EvalReport(lb, cv, summarize(ds),
                        {"seed": seed, "test_fraction": frac, "n_train": len(split.train), "n_test": len(split.test)},
                        importances)
    write_json(args.out, bundle.to_dict())
    man = RunManifest(argv, seeds={"split": seed, "cv": cv_seed})
    man.add_inputs([args.data, *args.models])
    man.add_outputs([args.out])
    man.write(manifest_path(args.out))
    print(f"{'model':12s} {'test R2':>9s} {'MAE log':>9s} {'mean%':>8s} {'CV mean':>8s} {'CV std':>7s}")
    cv_by = {c.model_name: c for c in cv}
    for r in lb.rows:
        c = cv_by.get(r.name)
        if r.ok:
            print(f"{r.name:12s} {r.test.r2:9.4f} {r.test.mae_log:9.4f} {r.test.mean_pct_err:8.2f} "
                  f"{c.mean_r2:8.4f} {c.std_r2:7.4f}")
        else:
            print(f"{r.name:12s} failed: {r.error}")
    return 0


def cmd_importance(args, argv) -> int:
    _require_files([args.model])
    model = load_model(args.model)
    imp = model.feature_importance()
    for j in np.argsort(-imp, kind="stable"):
        print(f"{FEATURES[j]:28s} {imp[j]:.4f}")
    if args.out:
        write_json(args.out, {"model": model.name, "kind": model.kind,
                              "importance": {f: float(w) for f, w in zip(FEATURES, imp)}})
        man = RunManifest(argv)
        man.add_inputs([args.model])
        man.add_outputs([args.out])
        man.write(manifest_path(args.out))
    return 0


def cmd_recommend(args, argv) -> int:
    _require_files([args.model, args.grid])
    model = load_model(args.model)
    grid = parse_grid(load_config(args.grid))
    rec = recommend(model, grid, args.top)
    print(rec.table())
    if args.out:
        write_json(args.out, rec.to_dict())
        man = RunManifest(argv)
        man.add_inputs([args.model, args.grid])
        man.add_outputs([args.out])
        man.write(manifest_path(args.out))
    return 0


def cmd_report(args, argv) -> int:
    ev, an = args.in_dir / "evaluation.json", args.in_dir / "analysis.json"
    _require_files([ev, an])
    bundle = EvalReport.from_dict(read_json(ev))
    pca = PcaModel.from_dict(read_json(an)["pca"])
    paths = write_report(bundle, pca, None, args.out)
    man = RunManifest(argv)
    man.add_inputs([ev, an])
    man.add_outputs(paths)
    man.write(args.out / "manifest.json")
    print(f"wrote {', '.join(REPORT_FILES)} to {args.out}")
    return 0


COMMANDS = {
    "bench": cmd_bench, "build-dataset": cmd_build_dataset, "analyze": cmd_analyze, "train": cmd_train,
    "evaluate": cmd_evaluate, "importance": cmd_importance, "recommend": cmd_recommend, "report": cmd_report,
}


def run_cli(argv: Sequence[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except UsageError as exc:
        print(exc, file=sys.stderr)
        return 2
    except SystemExit as exc:  # --help / --version
        return int(exc.code or 0)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return COMMANDS[args.verb](args, ["iopredict", *argv])
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"iopredict: error: {exc}", file=sys.stderr)
        return 2
    except (ConfigError, FileNotFoundError) as exc:
        print(f"iopredict: error: {exc}", file=sys.stderr)
        return 1
    except Exception as exc:
        if args.verbose:
            log.exception("command failed")
        print(f"iopredict: error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def main() -> None:
    sys.exit(run_cli())


if __name__ == "__main__":
    main()
