"""Acceptance criteria 1-11; the session summary prints one PASS/FAIL line per criterion."""

import time

import numpy as np
import pytest

from iopredict.bench import (MIB, BenchConfig, FakeClock, PipelineBenchConfig, generate_test_file, partition_regions,
                             run_concurrent_read, run_random_read, run_sequential_read, run_suite, sequential_offsets)
from iopredict.dataset import (FEATURES, Dataset, Observation, clean, inverse_target, log1p_target, skewness,
                               train_test_split)
from iopredict.evaluation import compare_models, cross_validate, kfold_indices
from iopredict.models import (ForestConfig, GbdtConfig, LINEAR_KINDS, default_recipes, fit_elasticnet, fit_gbdt,
                              fit_lasso, fit_ols, fit_random_forest, fit_ridge, fit_tree, make_recipe)
from iopredict.models.mlp import init_params, loss_and_grads
from iopredict.pca import components_for_threshold, fit_pca, project, ratios_for_threshold, reconstruct
from iopredict.recommender import CandidateGrid, enumerate_candidates, recommend
from iopredict.synthetic import make_synthetic_dataset

from chain import artifacts, run_chain
from oracles import (cartesian_rows, finite_difference_grads, ols_normal_equations, pca_eigh,
                     reconstruction_sse, ridge_normal_equations, stable_descending, well_conditioned)

SEEDS = range(10)


def criterion(n):
    return pytest.mark.criterion(n)


def synthetic(seed):
    return log1p_target(clean(make_synthetic_dataset(141, seed=seed))[0])


# 1 ---------------------------------------------------------------------------

@criterion(1)
def test_linear_family_oracles():
    start = time.perf_counter()
    rng = np.random.default_rng(2024)
    for _ in range(50):
        n, d = int(rng.integers(20, 61)), int(rng.integers(2, 7))
        X = well_conditioned(rng, n, d, cond=float(rng.uniform(2, 100))) + rng.uniform(-3, 3, d)
        y = X @ rng.standard_normal(d) + 0.5 * rng.standard_normal(n) + rng.uniform(-5, 5)
        alpha = float(rng.uniform(0.01, 10))

        ols = fit_ols(X, y)
        w, b = ols_normal_equations(X, y)
        np.testing.assert_allclose(ols.weights, w, rtol=1e-8, atol=1e-12)
        assert ols.intercept == pytest.approx(b, rel=1e-8, abs=1e-12)

        ridge = fit_ridge(X, y, alpha)
        w, b = ridge_normal_equations(X, y, alpha)
        np.testing.assert_allclose(ridge.weights, w, rtol=1e-8, atol=1e-12)
        assert ridge.intercept == pytest.approx(b, rel=1e-8, abs=1e-12)

        np.testing.assert_allclose(fit_lasso(X, y, alpha=0.0).weights, ols.weights, rtol=1e-6, atol=1e-9)
    assert time.perf_counter() - start < 5.0


# 2 ---------------------------------------------------------------------------

@criterion(2)
def test_hand_derived_shrinkage():
    X, y = np.array([[-1.0], [1.0]]), np.array([-1.0, 1.0])
    assert fit_lasso(X, y, alpha=0.1).weights[0] == pytest.approx(0.9, abs=1e-6)
    assert fit_elasticnet(X, y, alpha=0.1, l1_ratio=0.5).weights[0] == pytest.approx(0.9048, abs=1e-4)
    assert fit_elasticnet(X, y, alpha=0.1, l1_ratio=0.5).weights[0] == pytest.approx(0.95 / 1.05, abs=1e-6)


# 3 ---------------------------------------------------------------------------

@criterion(3)
def test_tree_and_ensemble_oracles():
    start = time.perf_counter()
    XS, YS = np.array([[0.0], [0.0], [1.0], [1.0]]), np.array([0.0, 0.0, 10.0, 10.0])
    np.testing.assert_array_equal(fit_tree(XS, YS, max_depth=1).predict(XS), YS)

    rng = np.random.default_rng(3)
    for trial in range(10):
        X = rng.standard_normal((60, 3))
        y = rng.standard_normal(60)
        np.testing.assert_array_equal(fit_tree(X, y, max_depth=None, min_samples_split=2).predict(X), y)

        forest = fit_random_forest(X, y, ForestConfig(n_estimators=1, bootstrap=False, max_depth=8,
                                                      min_samples_split=4, seed=trial))
        np.testing.assert_array_equal(forest.predict(X), fit_tree(X, y, 8, 4).predict(X))

        m = fit_gbdt(X, y, GbdtConfig(n_estimators=100, subsample=1.0, seed=trial))
        loss = np.asarray(m.train_loss)
        assert len(loss) == 101 and np.all(np.diff(loss) <= 1e-12)
    assert time.perf_counter() - start < 10.0


# 4 ---------------------------------------------------------------------------

@criterion(4)
def test_mlp_gradient_check():
    rng = np.random.default_rng(0)
    params = init_params([3, 4, 3, 2, 1], rng)
    params = [(W, rng.normal(0, 0.5, b.shape)) for W, b in params]
    X, y = rng.standard_normal((3, 3)), rng.standard_normal(3)
    _, grads = loss_and_grads(params, X, y, 1e-3)
    fd = finite_difference_grads(params, X, y, 1e-3, h=1e-5)
    worst = 0.0
    for (gW, gb), (fW, fb) in zip(grads, fd):
        for a, b in ((gW, fW), (gb, fb)):
            worst = max(worst, float(np.max(np.abs(a - b) / np.maximum(np.abs(a) + np.abs(b), 1e-8))))
    assert worst < 1e-4


# 5, 6 ------------------------------------------------------------------------

@criterion(5)
def test_ensembles_beat_linear_models_on_synthetic_data():
    start = time.perf_counter()
    held = []
    for seed in SEEDS:
        ds = synthetic(seed)
        split = train_test_split(len(ds), 0.2, seed)
        lb, _ = compare_models(default_recipes(), ds, split, seed=seed)
        names = lb.names()
        linear = [r for r in lb.rows if r.kind in LINEAR_KINDS and r.ok]
        best_linear = max(r.test.r2 for r in linear)
        gbdt = lb.row("gbdt").test.r2
        ranked = all(names.index(e) < names.index(r.name) for e in ("gbdt", "forest") for r in linear)
        ok = ranked and gbdt >= 0.90 and best_linear <= 0.80
        held.append(ok)
        print(f"seed {seed}: gbdt {gbdt:.3f} forest {lb.row('forest').test.r2:.3f} "
              f"best linear {best_linear:.3f} ensembles first {ranked} -> {'ok' if ok else 'miss'}")
    elapsed = time.perf_counter() - start
    print(f"held on {sum(held)}/10 seeds in {elapsed:.1f} s")
    assert elapsed < 60.0
    assert sum(held) >= 9


@criterion(6)
def test_gbdt_cv_is_stable_on_synthetic_data():
    stds = [cross_validate(make_recipe("gbdt"), synthetic(seed), 5, seed).std_r2 for seed in SEEDS]
    print("gbdt 5-fold CV std per seed:", " ".join(f"{s:.4f}" for s in stds))
    assert sum(s < 0.1 for s in stds) >= 9


# 7 ---------------------------------------------------------------------------

@criterion(7)
def test_pca_criteria():
    rng = np.random.default_rng(7)
    for _ in range(20):
        d = int(rng.integers(2, 8))
        m = fit_pca(rng.standard_normal((50, d)) @ rng.standard_normal((d, d)))
        assert m.explained_variance_ratio.sum() == pytest.approx(1.0, abs=1e-9)

    Z = rng.standard_normal((2000, 2))
    Z -= Z.mean(axis=0)
    Z = Z @ np.linalg.inv(np.linalg.cholesky(np.cov(Z, rowvar=False))).T * [2.0, 1.0]
    np.testing.assert_allclose(fit_pca(Z).explained_variance_ratio, [0.8, 0.2], atol=1e-6)

    for _ in range(20):
        X = rng.standard_normal((5, 3)) * [3.0, 1.0, 0.3]
        m = fit_pca(X)
        vals, _ = pca_eigh(X)
        for k in (1, 2, 3):
            R = X - reconstruct(m, project(m, X, k))
            got = float(np.sum(R * R))
            assert got == pytest.approx(reconstruction_sse(X, k), rel=1e-6, abs=1e-9)
            assert got == pytest.approx(vals[k:].sum() * 4, rel=1e-6, abs=1e-9)

    assert ratios_for_threshold([0.8, 0.2], 0.8) == 1
    assert ratios_for_threshold([0.8, 0.2], 0.81) == 2
    assert ratios_for_threshold([0.5, 0.3, 0.15, 0.05], 0.95) == 3
    assert ratios_for_threshold([0.25] * 4, 0.95) == 4
    assert components_for_threshold(fit_pca(Z), 0.8) == 1


# 8 ---------------------------------------------------------------------------

@criterion(8)
def test_dataset_protocol():
    s = train_test_split(141, 0.2, 42)
    assert (len(s.train), len(s.test)) == (112, 29)
    assert sorted((len(f) for f in kfold_indices(141, 5, 42)), reverse=True) == [29, 28, 28, 28, 28]
    y = np.geomspace(1.1, 48_211.0, 5000)
    ds = log1p_target(Dataset(tuple(Observation.from_mapping("seq_read", {}, float(v), "t") for v in y)))
    np.testing.assert_allclose(inverse_target(ds.y), y, rtol=1e-12)
    assert skewness([0.0, 0.0, 0.0, 1.0]) == pytest.approx(1.1547, abs=1e-4)


# 9 ---------------------------------------------------------------------------

@criterion(9)
def test_harness_arithmetic(target):
    generate_test_file(target, 1, seed=9)
    generate_test_file(target, 2, seed=9)
    cells = [BenchConfig(target, "sequential", b, 1, seed=9) for b in (4, 64, 1024)]
    cells += [BenchConfig(target, "random", 4, 1, n_samples=500, seed=9)]
    cells += [BenchConfig(target, "concurrent", 64, 2, n_threads=t, seed=9) for t in (1, 3, 4)]
    cells += [PipelineBenchConfig(target, 16, w, 4, sample_bytes=512, synthetic_compute_ms_per_batch=0.01, seed=9)
              for w in (0, 1, 2)]
    for step in (1, 997, 123_457):
        res = run_suite(cells, FakeClock(step))
        assert not res.failures
        for r in res.records:
            assert abs(r.target_throughput_mb_s - r.bytes_read / r.elapsed_s / 2 ** 20) \
                <= 1e-9 * r.target_throughput_mb_s
            if r.benchmark_type == "pipeline":
                assert r.data_loading_ratio + r.simulated_gpu_utilization == 1.0

    for t in (1, 3, 4):
        trace: list = []
        run_concurrent_read(BenchConfig(target, "concurrent", 64, 2, n_threads=t, seed=9), FakeClock(), trace)
        assert sorted(trace) == sequential_offsets(2 * MIB, 64 * 1024)
        regions = partition_regions(2 * MIB, t, 64 * 1024)
        assert regions[0][0] == 0 and regions[-1][1] == 2 * MIB
        assert all(a[1] == b[0] for a, b in zip(regions, regions[1:]))

    for cfg in (cells[0], cells[3]):
        runner = run_sequential_read if cfg.pattern == "sequential" else run_random_read
        a, b = [], []
        runner(cfg, FakeClock(5), a)
        runner(cfg, FakeClock(11), b)
        assert a == b


# 10 --------------------------------------------------------------------------

@criterion(10)
@pytest.mark.parametrize("kind", ["gbdt", "forest", "ridge"])
def test_recommender_matches_exhaustive_sort(kind):
    rng = np.random.default_rng(10)
    X = rng.uniform(0, 8, (100, len(FEATURES)))
    y = np.log1p(X[:, 6] * (1 + X[:, 9]) + X[:, 0])
    model = make_recipe(kind, **({} if kind == "ridge" else {"n_estimators": 20})).fit(X, y, seed=1)
    fixed = {f: 1.0 for f in FEATURES}
    tunable = {"batch_size": [2.0 ** i for i in range(10)], "num_workers": list(range(10)),
               "block_kb": [0.5 + i for i in range(10)], "n_threads": [1.0, 2.0, 4.0, 8.0, 16.0, 32.0, 64.0,
                                                                       128.0, 256.0, 512.0]}
    grid = CandidateGrid(tunable, {f: v for f, v in fixed.items() if f not in tunable})
    assert grid.size == 10_000
    rows = np.asarray(cartesian_rows(grid.tunable, grid.fixed, FEATURES))
    np.testing.assert_array_equal(enumerate_candidates(grid), rows)
    expected = stable_descending(model.predict(rows))
    rec = recommend(model, grid, top_k=grid.size)
    assert [c.index for c in rec.candidates] == expected
    lin = [c.predicted_mb_s for c in rec.candidates]
    assert all(a >= b for a, b in zip(lin, lin[1:]))


# 11 --------------------------------------------------------------------------

@criterion(11)
def test_end_to_end_determinism(tmp_path):
    root = tmp_path / "target"
    codes_a = run_chain(tmp_path / "a", root, seed=11)
    codes_b = run_chain(tmp_path / "b", root, seed=11)
    assert set(codes_a.values()) == {0} and codes_a == codes_b
    a, b = artifacts(tmp_path / "a"), artifacts(tmp_path / "b")
    assert a.keys() == b.keys()
    for key in ("gbdt.json", "forest.json", "ridge.json", "out/evaluation.json", "report/model_r2.csv",
                "report/scree.csv", "report/predicted_vs_actual.csv"):
        assert key in a
    differing = [k for k in a if a[k] != b[k]]
    assert differing == []
