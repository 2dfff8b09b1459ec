"""Markdown report plus one CSV of plot data per figure.

Files written to ``out_dir`` (names are stable):

===========================  ==================================================
report.md                    leaderboard, CV, importance and dataset tables
scree.csv                    component, eigenvalue, ratio, cumulative ratio
model_r2.csv                 per-model train/test metrics and overfitting gap
cv_folds.csv                 per-model, per-fold R^2
feature_importance.csv       per tree-model, per-feature normalized importance
predicted_vs_actual.csv      best model's test predictions, log and MB/s
residual_histogram.csv       best model's test residual histogram (log space)
===========================  ==================================================

Output is a pure function of the inputs, so re-running on unchanged inputs
gives byte-identical files.
"""

from __future__ import annotations

import csv
import io
import math
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import numpy as np

from .dataset import FEATURES
from .evaluation import EvalReport, residual_report
from .io import atomic_write_text
from .pca import PcaModel, components_for_threshold

REPORT_FILES = ("report.md", "scree.csv", "model_r2.csv", "cv_folds.csv", "feature_importance.csv",
                "predicted_vs_actual.csv", "residual_histogram.csv")
THRESHOLDS = (0.80, 0.95)


def _num(v) -> str:
    if v is None:
        return ""
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(int(v))
    return repr(float(v))


def _csv(header: Sequence[str], rows: Iterable[Sequence]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([c if isinstance(c, str) else _num(c) for c in r])
    return buf.getvalue()


def _fmt(v, digits: int = 4) -> str:
    if v is None or (isinstance(v, float) and not math.isfinite(v)):
        return "n/a"
    return f"{v:.{digits}f}"


def _md_table(header: Sequence[str], rows: Iterable[Sequence[str]]) -> str:
    lines = ["| " + " | ".join(header) + " |", "|" + "|".join("---" for _ in header) + "|"]
    lines += ["| " + " | ".join(r) + " |" for r in rows]
    return "\n".join(lines)


def write_report(bundle: EvalReport, pca: PcaModel, importances: Mapping[str, Sequence[float]] | None,
                 out_dir: str | Path) -> list[Path]:
    """Write every file in ``REPORT_FILES``; returns their paths in that order."""
    out = Path(out_dir)
    try:
        out.mkdir(parents=True, exist_ok=True)
    except OSError as exc:
        raise OSError(f"cannot create report directory {out}: {exc}") from exc
    importances = dict(bundle.importances if importances is None else importances)
    lb = bundle.leaderboard
    best = lb.best

    files: dict[str, str] = {}
    files["scree.csv"] = _csv(("component", "eigenvalue", "explained_variance_ratio", "cumulative_ratio"),
                              pca.scree_rows())
    files["model_r2.csv"] = _csv(
        ("model", "kind", "train_r2", "test_r2", "test_mae_log", "test_mean_pct_err", "test_median_pct_err",
         "overfit_gap", "error"),
        ((r.name, r.kind, r.train and r.train.r2, r.test and r.test.r2, r.test and r.test.mae_log,
          r.test and r.test.mean_pct_err, r.test and r.test.median_pct_err, r.overfit_gap, r.error or "")
         for r in lb.rows))
    files["cv_folds.csv"] = _csv(("model", "fold", "r2"),
                                 ((c.model_name, i, v) for c in bundle.cv for i, v in enumerate(c.fold_r2)))
    files["feature_importance.csv"] = _csv(
        ("model", "feature", "importance"),
        ((name, f, w) for name in sorted(importances) for f, w in zip(FEATURES, importances[name])))

    if best is not None and best.test_actual:
        a = np.asarray(best.test_actual)
        p = np.asarray(best.test_predicted)
        files["predicted_vs_actual.csv"] = _csv(
            ("model", "actual_log1p", "predicted_log1p", "actual_mb_s", "predicted_mb_s"),
            ((best.name, x, y, float(np.expm1(x)), float(max(np.expm1(y), 0.0))) for x, y in zip(a, p)))
        res = residual_report(a, p) if len(a) >= 2 else None
    else:
        files["predicted_vs_actual.csv"] = _csv(
            ("model", "actual_log1p", "predicted_log1p", "actual_mb_s", "predicted_mb_s"), ())
        res = None
    files["residual_histogram.csv"] = _csv(
        ("bin_left", "bin_right", "count"),
        () if res is None else zip(res.bin_edges[:-1], res.bin_edges[1:], (int(c) for c in res.counts)))
    files["report.md"] = _markdown(bundle, pca, importances, res)

    paths = []
    for name in REPORT_FILES:
        path = out / name
        atomic_write_text(path, files[name])
        paths.append(path)
    return paths


def _markdown(bundle: EvalReport, pca: PcaModel, importances: Mapping[str, Sequence[float]], res) -> str:
    lb = bundle.leaderboard
    s = bundle.dataset_summary
    sp = bundle.split
    parts = ["# I/O throughput prediction report", ""]

    parts += ["## Dataset", ""]
    parts.append(_md_table(("quantity", "value"), [
        ("rows", str(s.get("n_rows", ""))),
        *((f"rows ({k})", str(v)) for k, v in s.get("rows_by_type", {}).items()),
        ("target min (MB/s)", _fmt(s.get("target_min"))),
        ("target max (MB/s)", _fmt(s.get("target_max"))),
        ("skewness, raw target", _fmt(s.get("skewness_raw"))),
        ("skewness, log1p target", _fmt(s.get("skewness_log1p"))),
        ("train / test rows", f"{sp.get('n_train', '')} / {sp.get('n_test', '')}"),
        ("split seed", str(sp.get("seed", ""))),
    ]))

    parts += ["", "## Principal components", ""]
    parts.append(_md_table(("threshold", "components"),
                           [(f"{t:.2f}", str(components_for_threshold(pca, t))) for t in THRESHOLDS]))
    parts += ["", "Per-component values are in `scree.csv`."]

    parts += ["", "## Leaderboard (test split, log1p space)", ""]
    parts.append(_md_table(
        ("rank", "model", "kind", "train R2", "test R2", "MAE (log)", "mean % err", "median % err", "gap", "error"),
        [(str(i), r.name, r.kind, _fmt(r.train and r.train.r2), _fmt(r.test and r.test.r2),
          _fmt(r.test and r.test.mae_log), _fmt(r.test and r.test.mean_pct_err, 2),
          _fmt(r.test and r.test.median_pct_err, 2), _fmt(r.overfit_gap), r.error or "")
         for i, r in enumerate(lb.rows, start=1)]))

    parts += ["", "## Cross-validation", ""]
    if bundle.cv:
        k = max(c.k for c in bundle.cv)
        parts.append(_md_table(
            ("model", *(f"fold {i + 1}" for i in range(k)), "mean R2", "std R2"),
            [(c.model_name, *(_fmt(v) for v in c.fold_r2), *([""] * (k - len(c.fold_r2))),
              _fmt(c.mean_r2), _fmt(c.std_r2)) for c in bundle.cv]))
    else:
        parts.append("No cross-validation results.")

    parts += ["", "## Feature importance", ""]
    if importances:
        names = sorted(importances)
        parts.append(_md_table(("feature", *names),
                               [(f, *(_fmt(importances[n][j]) for n in names)) for j, f in enumerate(FEATURES)]))
    else:
        parts.append("No tree ensemble was evaluated.")

    parts += ["", "## Residuals of the best model", ""]
    if res is None:
        parts.append("No successful model.")
    else:
        parts.append(f"Model `{lb.best.name}`: mean residual {_fmt(res.mean)}, std {_fmt(res.std)} "
                     f"over {len(res.residuals)} test rows; histogram in `residual_histogram.csv`.")
    return "\n".join(parts) + "\n"
