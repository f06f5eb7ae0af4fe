"""The compiled and vectorized kernel paths must agree."""

import os
import subprocess
import sys

import numpy as np
import pytest

from chanpred import kernels
from chanpred._backend import HAVE_NUMBA

needs_numba = pytest.mark.skipif(not HAVE_NUMBA, reason="numba not installed")


def _bpn_case(seed, n=40, m=7):
    rng = np.random.default_rng(seed)
    x = np.sort(rng.uniform(0.1, 0.9, n))
    t = rng.uniform(0.1, 0.9, n)
    w = rng.uniform(-0.5, 0.5, m)
    v = rng.uniform(-0.5, 0.5, m)
    return x, t, w, v


@needs_numba
@pytest.mark.parametrize("seed", range(3))
def test_bpn_backends_agree(seed):
    x, t, w, v = _bpn_case(seed)
    args = (x, t, w, v, 0.05, 1e-5, 60)
    a = kernels._bpn_train_jit(*args)
    b = kernels._bpn_train_numpy(*args)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-10)
    np.testing.assert_allclose(a[1], b[1], rtol=1e-10)
    assert a[3] == b[3]
    np.testing.assert_allclose(a[4], b[4], rtol=1e-10)


@needs_numba
def test_bpn_loops_uncompiled_match_compiled():
    x, t, w, v = _bpn_case(7, n=10, m=3)
    args = (x, t, w, v, 0.1, 1e-5, 5)
    a = kernels._bpn_train_jit(*args)
    b = kernels._bpn_train_loops(*args)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-13)
    np.testing.assert_allclose(a[4], b[4], rtol=1e-13)


def test_bpn_kernel_does_not_mutate_inputs():
    x, t, w, v = _bpn_case(1)
    w0, v0 = w.copy(), v.copy()
    kernels.bpn_train(x, t, w, v, 0.1, 1e-5, 3)
    np.testing.assert_array_equal(w, w0)
    np.testing.assert_array_equal(v, v0)


@needs_numba
@pytest.mark.parametrize("half", [0, 1, 9, 40])
def test_window_backends_agree(half):
    vals = 100 + np.random.default_rng(half).standard_normal(300)
    np.testing.assert_allclose(kernels._window_mean_jit(vals, half), kernels._window_mean_numpy(vals, half),
                               rtol=1e-12)


@needs_numba
@pytest.mark.parametrize("seed", range(5))
def test_kmeans_backends_agree(seed):
    rng = np.random.default_rng(seed)
    pts = rng.uniform(0, 1, 200)
    init = rng.choice(pts, 8, replace=False)
    a = kernels._kmeans_lloyd_jit(pts, init.copy(), 100)
    b = kernels._kmeans_lloyd_numpy(pts, init.copy(), 100)
    np.testing.assert_allclose(a[0], b[0], rtol=1e-12)
    np.testing.assert_array_equal(a[1], b[1])
    assert a[2] == b[2]


@pytest.mark.parametrize("impl", ["_kmeans_lloyd_loops", "_kmeans_lloyd_numpy"])
def test_kmeans_tie_goes_to_lower_index(impl):
    centers, labels, _, _ = getattr(kernels, impl)(np.array([1.0]), np.array([0.0, 2.0]), 0)
    assert labels[0] == 0


@pytest.mark.parametrize("impl", ["_kmeans_lloyd_loops", "_kmeans_lloyd_numpy"])
def test_kmeans_empty_cluster_reseeded_at_farthest_point(impl):
    # both start clusters collapse onto center 0; center 1 (at 100) empties,
    # the mean of {0,1,2} is 1, and the farthest point from it is 0 (first of a tie)
    centers, labels, _, _ = getattr(kernels, impl)(np.array([0.0, 1.0, 2.0]), np.array([0.0, 100.0]), 100)
    np.testing.assert_allclose(np.sort(centers), [0.0, 1.5])
    assert set(labels) == {0, 1}


def test_env_flag_selects_numpy_backend():
    env = dict(os.environ, CHANPRED_DISABLE_NUMBA="1")
    out = subprocess.run(
        [sys.executable, "-c",
         "from chanpred import kernels, _backend; "
         "print(_backend.backend_name(), kernels.bpn_train is kernels._bpn_train_numpy)"],
        env=env, capture_output=True, text=True, check=True,
    )
    assert out.stdout.split() == ["numpy", "True"]


def test_benchmark_script_runs():
    from pathlib import Path

    script = Path(__file__).resolve().parents[1] / "benchmarks" / "bench_kernels.py"
    out = subprocess.run([sys.executable, str(script), "--repeat", "1"], capture_output=True, text=True, check=True)
    assert "bpn_train" in out.stdout and "kmeans_lloyd" in out.stdout
