import json
import random

import numpy as np
import pytest
from hypothesis import given, strategies as st

from chanpred.errors import DataFormatError, InvalidInputError
from chanpred.harness import (
    SweepGrid,
    load_report,
    run_prediction,
    split_equally_spaced,
    sweep,
    sweep_report,
)
from chanpred.networks import NetworkConfig, NetworkKind, predict
from chanpred.pipeline import ChannelTrace, LogDistanceModel


def _line_trace(n=300):
    d = 50 + 1.42 * np.arange(n)
    return ChannelTrace(d, LogDistanceModel(30.0, 3.5)(d))


def _noisy_trace(n=300, seed=0):
    rng = np.random.default_rng(seed)
    d = 50 + 1.42 * np.arange(n)
    return ChannelTrace(d, LogDistanceModel(30.0, 3.5)(d) + np.cumsum(rng.normal(0, 0.3, n)))


# ---------------------------------------------------------------- split


def test_split_examples():
    s = split_equally_spaced(3000, 1)
    assert s.train_indices.size == 1501
    assert s.train_indices[-1] == 2999 and s.train_indices[-2] == 2998
    assert s.ratio == pytest.approx(0.5, abs=1e-3)

    s = split_equally_spaced(3000, 6)
    np.testing.assert_array_equal(s.train_indices, np.append(np.arange(0, 2997, 7), 2999))
    assert s.ratio == pytest.approx(0.143, abs=1e-3)

    s = split_equally_spaced(5, 0)
    assert s.train_indices.tolist() == [0, 1, 2, 3, 4]
    assert s.predict_indices.size == 0


def test_split_rejects_bad_arguments():
    for n, q in [(5, 5), (1, 0), (10, -1), (10, 1.5)]:
        with pytest.raises(InvalidInputError):
            split_equally_spaced(n, q)


@given(st.integers(2, 5000).flatmap(lambda n: st.tuples(st.just(n), st.integers(0, n - 1))))
def test_split_is_a_partition(args):
    n, q = args
    s = split_equally_spaced(n, q)
    both = np.concatenate([s.train_indices, s.predict_indices])
    assert np.array_equal(np.sort(both), np.arange(n))
    assert np.all(np.diff(s.train_indices) > 0)
    assert np.all(np.diff(s.predict_indices) > 0)
    assert s.train_indices[0] == 0 and s.train_indices[-1] == n - 1
    gaps = np.diff(s.train_indices)
    assert np.all(gaps[:-1] == q + 1)
    assert abs(s.ratio - 1 / (q + 1)) <= 2 / n


# ---------------------------------------------------------------- single runs


def test_elm_on_clean_line_predicts_within_tenth_db():
    trace = _line_trace()
    q = 2
    n_train = split_equally_spaced(len(trace), q).train_indices.size
    run = run_prediction(trace, q, NetworkConfig(NetworkKind.ELM, n_train, seed=0))
    assert run.rmse_pl_db < 0.1
    assert run.predicted_pl_db.size == run.split.predict_indices.size


def test_elm_full_width_reproduces_training_targets():
    trace = _noisy_trace()
    q = 3
    split = split_equally_spaced(len(trace), q)
    run = run_prediction(trace, q, NetworkConfig(NetworkKind.ELM, split.train_indices.size, seed=1))
    assert np.max(np.abs(run.fitted_pl_db - trace.pl_db[split.train_indices])) < 1e-4


def test_degenerate_split_has_no_metrics():
    run = run_prediction(_line_trace(20), 0, NetworkConfig(NetworkKind.RBF, 3))
    assert run.rmse_pl_db is None and run.rmse_lsf_db is None
    assert run.predicted_pl_db.size == 0


def test_rmse_values_nonnegative_and_aligned():
    run = run_prediction(_noisy_trace(), 4, NetworkConfig(NetworkKind.RBF, 10))
    assert run.rmse_pl_db >= 0 and run.rmse_lsf_db >= 0
    assert run.predicted_lsf_db.shape == run.split.predict_indices.shape


def test_predicted_lsf_uses_training_fit():
    trace = _noisy_trace()
    run = run_prediction(trace, 2, NetworkConfig(NetworkKind.ELM, 20))
    d = trace.distances_m[run.split.predict_indices]
    np.testing.assert_allclose(run.predicted_lsf_db, run.predicted_pl_db - run.train_fit(d), rtol=1e-12)


@pytest.mark.parametrize("kind", list(NetworkKind))
def test_withheld_values_never_reach_training(kind):
    trace = _noisy_trace()
    q = 3
    cfg = NetworkConfig(kind, 12, max_iterations=30, seed=5)
    split = split_equally_spaced(len(trace), q)
    mutated_pl = trace.pl_db.copy()
    mutated_pl[split.predict_indices] += np.random.default_rng(0).normal(0, 20, split.predict_indices.size)
    mutated = trace.with_pl(mutated_pl)
    a = run_prediction(trace, q, cfg)
    b = run_prediction(mutated, q, cfg)
    assert a.model.dumps() == b.model.dumps()
    assert a.train_fit == b.train_fit
    np.testing.assert_array_equal(a.predicted_pl_db, b.predicted_pl_db)


def test_all_points_scope_includes_training_fit():
    trace = _noisy_trace()
    cfg = NetworkConfig(NetworkKind.ELM, 30)
    only = run_prediction(trace, 3, cfg)
    every = run_prediction(trace, 3, cfg, rmse_scope="all_points")
    full = trace.pl_db.copy()
    full[only.split.train_indices] = only.fitted_pl_db
    full[only.split.predict_indices] = only.predicted_pl_db
    assert every.rmse_pl_db == pytest.approx(np.sqrt(np.mean((full - trace.pl_db) ** 2)), rel=1e-12)
    with pytest.raises(InvalidInputError):
        run_prediction(trace, 3, cfg, rmse_scope="train")


def test_reconstructed_series_keeps_measured_training_points():
    trace = _noisy_trace()
    run = run_prediction(trace, 2, NetworkConfig(NetworkKind.RBF, 8))
    rec = run.reconstructed_pl_db(trace)
    np.testing.assert_array_equal(rec[run.split.train_indices], trace.pl_db[run.split.train_indices])
    np.testing.assert_array_equal(rec[run.split.predict_indices], run.predicted_pl_db)
    np.testing.assert_allclose(predict(run.model, trace.distances_m[run.split.predict_indices]),
                               run.predicted_pl_db)


# ---------------------------------------------------------------- sweeps


def test_sweep_cardinality_and_order():
    runs = sweep(_noisy_trace(), SweepGrid(["BPN"], [10], [1], [2, 0, 1], max_iterations=3))
    assert [r.seed for r in runs] == [0, 1, 2]


def test_sweep_runs_one_per_tuple_sorted():
    grid = SweepGrid(["RBF", "ELM", "BPN"], [20, 10], [2, 1], max_iterations=3)
    runs = sweep(_noisy_trace(), grid)
    keys = [r.sort_key() for r in runs]
    assert len(keys) == 12 == len(set(keys))
    assert keys == sorted(keys)


def test_sweep_report_independent_of_axis_order():
    trace = _noisy_trace()
    axes = (["ELM", "RBF", "BPN"], [10, 20, 30], [1, 2, 4], [0, 1])
    texts = set()
    for seed in range(3):
        rnd = random.Random(seed)
        shuffled = [rnd.sample(a, len(a)) for a in axes]
        grid = SweepGrid(*shuffled, max_iterations=2)
        texts.add(sweep_report(sweep(trace, grid), grid))
    assert len(texts) == 1


def test_parallel_sweep_matches_serial():
    trace = _noisy_trace()
    grid = SweepGrid(["ELM", "RBF"], [5, 10], [1, 3], max_iterations=2)
    assert sweep_report(sweep(trace, grid, jobs=2), grid) == sweep_report(sweep(trace, grid), grid)


def test_failed_runs_are_kept_with_marker():
    # 10 points, q=4 -> 3 training points; RBF cannot place 10 centers
    trace = _noisy_trace(10)
    runs = sweep(trace, SweepGrid(["RBF", "ELM"], [10], [4]))
    rbf = next(r for r in runs if r.kind == "RBF")
    assert rbf.error.startswith("InvalidInputError")
    assert rbf.rmse_pl_db is None
    assert next(r for r in runs if r.kind == "ELM").error is None
    doc, records = load_report(sweep_report(runs))
    assert [r.error is not None for r in records] == [False, True]


def test_sweep_grid_validation():
    with pytest.raises(InvalidInputError):
        SweepGrid([], [10], [1])
    with pytest.raises(InvalidInputError):
        SweepGrid(["ELM"], [10], [0])
    with pytest.raises(InvalidInputError):
        SweepGrid(["MLP"], [10], [1])


def test_report_round_trip_and_contents():
    grid = SweepGrid(["ELM"], [10], [1, 2])
    runs = sweep(_noisy_trace(), grid)
    text = sweep_report(runs, grid)
    doc, records = load_report(text)
    assert doc["grid"] == grid.to_dict()
    assert [(r.q, r.rmse_pl_db) for r in records] == [(r.q, r.rmse_pl_db) for r in runs]
    assert "train_seconds" not in text


@pytest.mark.parametrize("text", ["not json", "[]", json.dumps({"format": "other"}),
                                  json.dumps({"format": "chanpred-sweep/1", "runs": [{"kind": "ELM"}]})])
def test_load_report_rejects_malformed(text):
    with pytest.raises(DataFormatError):
        load_report(text)
