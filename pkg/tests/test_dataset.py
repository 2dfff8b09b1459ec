import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from iopredict.dataset import (CSV_COLUMNS, FEATURES, LOG1P, Dataset, Observation, SchemaError, apply_scaler,
                               clean, concat, fit_scaler, inverse_target, invert_scaler, load_csv, log1p_target,
                               save_csv, skewness, summarize, train_test_split)
from iopredict.synthetic import make_synthetic_dataset

from oracles import skewness_loops


def obs(target=1.0, kind="seq_read", **values):
    return Observation.from_mapping(kind, values, target, "t")


finite = st.floats(min_value=-1e6, max_value=1e6, allow_nan=False, allow_infinity=False)


# -- schema ----------------------------------------------------------------

def test_csv_header_order():
    assert CSV_COLUMNS == ("benchmark_type", "block_kb", "file_size_mb", "n_samples", "throughput_mb_s", "iops",
                           "n_threads", "batch_size", "samples_per_second", "data_loading_ratio", "num_workers",
                           "aggregate_throughput_mb_s", "target", "source_tag")


def test_observation_rejects_nonfinite_and_bad_ratio():
    with pytest.raises(ValueError, match="block_kb"):
        obs(block_kb=float("inf"))
    with pytest.raises(ValueError, match="data_loading_ratio"):
        obs(data_loading_ratio=1.5)


def test_feature_order_is_fixed():
    with pytest.raises(SchemaError):
        Dataset((obs(),), feature_order=tuple(reversed(FEATURES)))


# -- persistence -----------------------------------------------------------

def test_csv_round_trip_is_bitwise(tmp_path):
    ds = make_synthetic_dataset(141, seed=3)
    path = tmp_path / "d.csv"
    save_csv(ds, path)
    back = load_csv(path)
    assert len(back) == 141
    assert back.rows == ds.rows
    np.testing.assert_array_equal(back.X, ds.X)


@given(st.lists(st.one_of(st.none(), finite), min_size=len(FEATURES), max_size=len(FEATURES)),
       st.one_of(st.none(), st.floats(min_value=0, max_value=1e9)))
def test_csv_round_trip_property(tmp_path_factory, values, target):
    values[FEATURES.index("data_loading_ratio")] = None
    row = Observation("pipeline", tuple(values), target, "x,with \"quotes\"")
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    save_csv(Dataset((row,)), path)
    assert load_csv(path).rows == (row,)


def test_empty_cell_is_missing(tmp_path):
    path = tmp_path / "d.csv"
    save_csv(Dataset((obs(block_kb=4),)), path)
    row = load_csv(path).rows[0]
    assert row.feature("block_kb") == 4.0
    assert row.feature("batch_size") is None


def test_header_missing_iops_names_it(tmp_path):
    path = tmp_path / "d.csv"
    save_csv(Dataset((obs(),)), path)
    text = path.read_text().replace(",iops", "", 1)
    path.write_text(text)
    with pytest.raises(SchemaError, match="iops"):
        load_csv(path)


def test_non_numeric_cell_reports_row_and_column(tmp_path):
    path = tmp_path / "d.csv"
    save_csv(Dataset((obs(block_kb=4),)), path)
    lines = path.read_text().splitlines()
    lines[1] = lines[1].replace(",4,", ",four,", 1)
    path.write_text("\n".join(lines) + "\n")
    with pytest.raises(SchemaError, match=r"row 2, column block_kb"):
        load_csv(path)


def test_concat_preserves_order():
    a, b = Dataset((obs(1.0),)), Dataset((obs(2.0), obs(3.0)))
    assert [r.target for r in concat([a, b]).rows] == [1.0, 2.0, 3.0]


# -- clean -----------------------------------------------------------------

def test_clean_imputes_zero_and_drops_missing_target():
    ds = Dataset((obs(5.0, block_kb=4), obs(None, block_kb=8)))
    out, report = clean(ds)
    assert len(out) == 1
    assert out.rows[0].feature("batch_size") == 0.0
    assert report.dropped == 1
    assert report.imputed == len(FEATURES) - 1
    assert ds.rows[0].feature("batch_size") is None  # input untouched


def test_clean_identity_on_clean_data():
    ds, _ = clean(Dataset((obs(5.0, block_kb=4),)))
    again, report = clean(ds)
    assert again == ds
    assert (report.imputed, report.dropped) == (0, 0)


def test_clean_all_dropped_is_error():
    with pytest.raises(ValueError):
        clean(Dataset((obs(None),)))


@given(st.integers(0, 1000))
def test_clean_idempotent(seed):
    raw = make_synthetic_dataset(20, seed=seed)
    once, _ = clean(raw)
    twice, _ = clean(once)
    assert once == twice


# -- skewness ----------------------------------------------------------------

def test_skewness_examples():
    assert skewness([1, 2, 3]) == pytest.approx(0.0, abs=1e-12)
    assert skewness([0, 0, 0, 1]) == pytest.approx(2 / math.sqrt(3), abs=1e-4)
    assert skewness([0, 0, 0, 1]) == pytest.approx(1.1547, abs=1e-4)


def test_skewness_errors():
    with pytest.raises(ValueError):
        skewness([1, 2])
    with pytest.raises(ValueError):
        skewness([4, 4, 4])


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=40))
def test_skewness_matches_loop_oracle(xs):
    if np.std(xs) < 1e-3:
        return
    assert skewness(xs) == pytest.approx(skewness_loops(xs), rel=1e-7, abs=1e-9)


@given(st.lists(st.floats(-100, 100), min_size=3, max_size=40), st.floats(-50, 50), st.floats(0.1, 10))
def test_skewness_affine_invariance(xs, a, b):
    if np.std(xs) < 1e-2:
        return
    shifted = [a + b * x for x in xs]
    assert skewness(shifted) == pytest.approx(skewness(xs), abs=1e-9 * max(1.0, abs(skewness(xs))) + 1e-7)


# -- log1p -----------------------------------------------------------------

def test_log1p_examples():
    ds = log1p_target(Dataset((obs(0.0), obs(48_211.0), obs(1.1))))
    assert ds.target_transform == LOG1P
    y = ds.y
    assert y[0] == 0.0
    assert y[1] == pytest.approx(10.7832, abs=1e-3)
    assert inverse_target(y[2]) == pytest.approx(1.1, rel=1e-12)


def test_log1p_rejects_negative_and_double_transform():
    with pytest.raises(ValueError):
        log1p_target(Dataset((obs(-1.0),)))
    with pytest.raises(ValueError):
        log1p_target(log1p_target(Dataset((obs(1.0),))))


@given(st.lists(st.floats(0, 1e6), min_size=2, max_size=30))
def test_log1p_monotone_and_invertible(ts):
    ds = log1p_target(Dataset(tuple(obs(t) for t in ts)))
    y = ds.y
    for i in range(len(ts)):
        for j in range(len(ts)):
            if ts[i] < ts[j]:
                assert y[i] <= y[j]  # adjacent doubles may collapse after rounding
    np.testing.assert_allclose(inverse_target(y), ts, rtol=1e-12, atol=1e-300)


# -- scaler ----------------------------------------------------------------

def test_scaler_examples():
    X = np.array([[2.0, 5.0], [4.0, 5.0]])
    s = fit_scaler(X)
    Z = apply_scaler(s, X)
    np.testing.assert_array_equal(Z[:, 0], [-1.0, 1.0])
    np.testing.assert_array_equal(Z[:, 1], [0.0, 0.0])
    assert apply_scaler(fit_scaler(np.full((3, 1), 5.0)), np.full((3, 1), 5.0)).tolist() == [[0.0]] * 3


def test_scaler_uses_training_rows_only():
    X = np.array([[2.0], [4.0], [100.0]])
    s = fit_scaler(X, train_indices=[0, 1])
    assert apply_scaler(s, [[100.0]])[0, 0] == pytest.approx(97.0)
    with pytest.raises(ValueError):
        fit_scaler(X, train_indices=[])


@given(st.integers(0, 10_000))
def test_scaler_moments_and_inverse(seed):
    rng = np.random.default_rng(seed)
    X = rng.normal(rng.uniform(-50, 50, 4), rng.uniform(0.1, 20, 4), size=(30, 4))
    X[:, 2] = 7.0
    s = fit_scaler(X)
    Z = apply_scaler(s, X)
    np.testing.assert_allclose(Z[:, [0, 1, 3]].mean(axis=0), 0.0, atol=1e-9)
    np.testing.assert_allclose(Z[:, [0, 1, 3]].var(axis=0), 1.0, atol=1e-9)
    assert np.all(Z[:, 2] == 0.0)
    np.testing.assert_allclose(invert_scaler(s, Z), X, rtol=1e-12, atol=1e-12)


# -- split -----------------------------------------------------------------

def test_split_141():
    s = train_test_split(141, 0.2, seed=42)
    assert (len(s.train), len(s.test)) == (112, 29)


def test_split_small_and_deterministic():
    assert len(train_test_split(10, 0.2).test) == 2
    a, b = train_test_split(50, 0.3, seed=7), train_test_split(50, 0.3, seed=7)
    np.testing.assert_array_equal(a.train, b.train)
    np.testing.assert_array_equal(a.test, b.test)


@pytest.mark.parametrize("frac", [0.0, 1.0, -0.1, 1.5])
def test_split_degenerate_fraction(frac):
    with pytest.raises(ValueError):
        train_test_split(10, frac)


@given(st.integers(2, 2000), st.floats(0.01, 0.99), st.integers(0, 2**32))
def test_split_partitions(n, frac, seed):
    s = train_test_split(n, frac, seed)
    assert len(np.intersect1d(s.train, s.test)) == 0
    assert sorted(np.concatenate([s.train, s.test]).tolist()) == list(range(n))
    assert len(s.test) >= 1 and len(s.train) >= 1


def test_summarize_reports_skew_before_and_after():
    ds, _ = clean(make_synthetic_dataset(141, seed=0))
    raw = summarize(ds)
    logged = summarize(log1p_target(ds))
    assert raw["skewness_raw"] == pytest.approx(logged["skewness_raw"], rel=1e-9)
    assert raw["skewness_raw"] > logged["skewness_log1p"]
    assert sum(raw["rows_by_type"].values()) == 141
