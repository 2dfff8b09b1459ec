import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iopredict.dataset import FEATURES
from iopredict.models import make_recipe
from iopredict.recommender import (MAX_GRID, CandidateGrid, GridError, enumerate_candidates, rank_order,
                                   recommend)

from oracles import cartesian_rows, stable_descending

D = len(FEATURES)
FIXED = {f: 1.0 for f in FEATURES}


def grid(**tunable):
    return CandidateGrid({k: list(v) for k, v in tunable.items()},
                         {f: v for f, v in FIXED.items() if f not in tunable})


def make_model(kind="gbdt", seed=0, n=80, **hp):
    rng = np.random.default_rng(seed)
    X = rng.uniform(0, 8, (n, D))
    X[:, FEATURES.index("batch_size")] = rng.choice([16, 32, 64, 128], n)
    X[:, FEATURES.index("num_workers")] = rng.integers(0, 5, n)
    y = np.log1p(X[:, 6] * (1 + X[:, 9]) + X[:, 0])
    return make_recipe(kind, **hp).fit(X, y, seed=seed)


@pytest.fixture(scope="module")
def gbdt():
    return make_model("gbdt", n_estimators=30)


def test_enumeration_examples():
    g = grid(batch_size=[16, 32, 64, 128], num_workers=[0, 1, 2, 3, 4])
    assert g.size == 20
    C = enumerate_candidates(g)
    assert C.shape == (20, D)
    assert C[1, FEATURES.index("num_workers")] == 1.0  # last tunable varies fastest
    assert C[5, FEATURES.index("batch_size")] == 32.0
    assert enumerate_candidates(CandidateGrid({}, FIXED)).shape == (1, D)


def test_enumeration_matches_recursive_oracle():
    g = grid(block_kb=[4, 64], batch_size=[16, 32, 64], n_threads=[1, 8])
    assert enumerate_candidates(g).tolist() == cartesian_rows(g.tunable, g.fixed, FEATURES)


def test_grid_validation():
    with pytest.raises(GridError, match="empty"):
        grid(batch_size=[])
    with pytest.raises(GridError, match="neither"):
        CandidateGrid({"batch_size": [16]}, {})
    with pytest.raises(GridError, match="unknown"):
        CandidateGrid({"gpu": [1]}, FIXED)
    with pytest.raises(GridError, match="both"):
        CandidateGrid({"block_kb": [1]}, FIXED)
    big = CandidateGrid({f: list(range(10)) for f in FEATURES[:7]}, {f: 0.0 for f in FEATURES[7:]})
    assert big.size > MAX_GRID
    with pytest.raises(GridError, match="limit"):
        enumerate_candidates(big)


def test_rank_order_ties_keep_enumeration_order():
    assert rank_order([1.0, 3.0, 3.0, 2.0, 3.0]).tolist() == [1, 2, 4, 3, 0]


@given(st.lists(st.integers(-3, 3), min_size=1, max_size=200))
def test_rank_order_equals_stable_sort(scores):
    assert rank_order(scores).tolist() == stable_descending(scores)


def test_single_cell_grid(gbdt):
    rec = recommend(gbdt, CandidateGrid({}, FIXED), top_k=3)
    assert len(rec.candidates) == 1 and rec.candidates[0].rank == 1
    assert rec.note and "exceeds" in rec.note


def test_top1_is_exhaustive_argmax(gbdt):
    g = grid(batch_size=[16, 32, 64, 128], num_workers=[0, 1, 2, 3, 4], block_kb=[1, 4, 7])
    rec = recommend(gbdt, g, top_k=5)
    per_cell = [float(gbdt.predict(np.asarray(row)[None, :])[0]) for row in cartesian_rows(g.tunable, g.fixed, FEATURES)]
    assert rec.candidates[0].index == stable_descending(per_cell)[0]
    mbs = [c.predicted_mb_s for c in rec.candidates]
    assert mbs == sorted(mbs, reverse=True)


def test_monotone_linear_model_picks_largest_batch():
    rng = np.random.default_rng(1)
    X = rng.uniform(0, 1, (40, D))
    y = 3.0 * X[:, FEATURES.index("batch_size")] + 0.1 * rng.standard_normal(40)
    m = make_recipe("ols").fit(X, y, log_target=False)
    rec = recommend(m, grid(batch_size=[16, 32, 64, 128]), top_k=1)
    assert rec.candidates[0].features["batch_size"] == 128.0
    assert "batch_size" in rec.candidates[0].extrapolated


@pytest.mark.parametrize("kind", ["gbdt", "forest", "ridge"])
def test_ranking_matches_oracle_with_ties(kind):
    # tree models are piecewise constant, so this grid has many exactly tied scores
    m = make_model(kind, n_estimators=10) if kind != "ridge" else make_model(kind)
    g = grid(batch_size=[8, 16, 32, 64, 128, 256, 512, 1024, 2048, 4096], num_workers=list(range(10)),
             block_kb=[0.5, 1, 2, 3, 4, 5, 6, 7, 8, 9], n_threads=[1.0])
    assert g.size == 1000
    C = enumerate_candidates(g)
    scores = m.predict(C)
    rec = recommend(m, g, top_k=g.size)
    got = [c.index for c in rec.candidates]
    assert got == stable_descending(scores)
    if kind != "ridge":
        assert len(np.unique(scores)) < len(scores)


@given(st.integers(0, 50))
def test_linear_and_log_rankings_agree(seed):
    m = make_model("gbdt", seed=seed % 3, n_estimators=8)
    rng = np.random.default_rng(seed)
    g = grid(batch_size=sorted(rng.choice(200, 6, replace=False).tolist()),
             num_workers=list(range(int(rng.integers(1, 6)))))
    C = enumerate_candidates(g)
    rec = recommend(m, g, top_k=g.size)
    lin = m.predict_linear_space(C)
    assert [c.index for c in rec.candidates] == stable_descending(m.predict(C))
    ranked_lin = [lin[c.index] for c in rec.candidates]
    assert all(a >= b for a, b in zip(ranked_lin, ranked_lin[1:]))


def test_determinism_and_serialization(gbdt):
    g = grid(batch_size=[16, 32], num_workers=[0, 2])
    a, b = recommend(gbdt, g, 3), recommend(gbdt, g, 3)
    assert a == b and a.to_dict() == b.to_dict()
    assert a.grid_digest == CandidateGrid.from_dict(g.to_dict()).digest()
    table = a.table()
    assert table.splitlines()[0].split()[:3] == ["rank", "batch_size", "num_workers"]
    with pytest.raises(ValueError):
        recommend(gbdt, g, 0)
