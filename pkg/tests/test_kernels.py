from __future__ import annotations

import os
import subprocess
import sys

import numpy as np
import pytest

from robba_kit import _kernels as K
from robba_kit.laurent import LaurentSeries


@pytest.fixture(params=[True, False], ids=["numba", "numpy"])
def path(request):
    before = K.numba_enabled()
    K.set_numba(request.param)
    yield request.param
    K.set_numba(before)


def _naive_sparse(ka, a, kb, b, p, m):
    # e = 1 only: plain dictionary convolution
    out = {}
    for i, x in zip(ka, a[:, 0]):
        for j, y in zip(kb, b[:, 0]):
            out[int(i + j)] = (out.get(int(i + j), 0) + int(x) * int(y)) % m
    keys = sorted(out)
    return keys, [out[k] for k in keys]


def test_sparse_mul_matches_dictionary(path):
    rng = np.random.default_rng(11)
    m = 5 ** 12
    for _ in range(20):
        ka = np.unique(rng.integers(-50, 50, 30))
        kb = np.unique(rng.integers(-50, 50, 25))
        a = rng.integers(0, m, (ka.size, 1))
        b = rng.integers(0, m, (kb.size, 1))
        keys, coeffs = K.sparse_mul(ka, a, kb, b, 5, m)
        want_k, want_c = _naive_sparse(ka, a, kb, b, 5, m)
        assert list(keys) == want_k
        assert [int(c) for c in coeffs[:, 0]] == want_c


def test_mulmod_matches_python_ints(path):
    rng = np.random.default_rng(3)
    m = 3 ** 29
    a = rng.integers(0, m, 500)
    b = rng.integers(0, m, 500)
    got = K.mulmod(a, b, m)
    assert [int(x) for x in got] == [int(x) * int(y) % m for x, y in zip(a, b)]


def test_valuation_kernel(path):
    x = np.array([0, 1, 5, 50, 625 * 3, 7 * 5 ** 9], dtype=np.int64)
    assert list(K.valuation(x, 5, 20)) == [20, 0, 1, 2, 4, 9]


def test_large_moduli_use_object_arrays(path):
    m = 5 ** 40
    assert K.coeff_dtype(m) is object
    a = np.array([[m - 1]], dtype=object)
    keys, coeffs = K.sparse_mul(np.array([2]), a, np.array([3]), a, 5, m)
    assert list(keys) == [5] and int(coeffs[0, 0]) == 1


def test_series_product_independent_of_path(cfg):
    x = LaurentSeries.from_terms(cfg, {i: 7 * i + 3 for i in range(-30, 30)})
    y = LaurentSeries.from_terms(cfg, {i: 11 * i - 2 for i in range(-20, 40, 3)})
    before = K.numba_enabled()
    try:
        K.set_numba(True)
        fast = x * y
        K.set_numba(False)
        slow = x * y
    finally:
        K.set_numba(before)
    assert fast.equals(slow) and list(fast.exps) == list(slow.exps)


@pytest.mark.parametrize("value,expected", [("0", "False"), ("off", "False"), ("1", "True")])
def test_environment_switch(value, expected):
    env = dict(os.environ, ROBBA_KIT_NUMBA=value)
    out = subprocess.run([sys.executable, "-c",
                          "from robba_kit import _kernels as K; print(K.numba_enabled())"],
                         env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == expected


def _both_paths(fn):
    before = K.numba_enabled()
    try:
        K.set_numba(True)
        fast = fn()
        K.set_numba(False)
        slow = fn()
    finally:
        K.set_numba(before)
    return fast, slow


def test_mulmod_near_the_int64_limit():
    m = 5 ** 20                      # just below 2**47
    assert m < K.INT64_LIMIT
    a = np.array([m - 1, m - 2, 1, 12345678901234, 0], dtype=np.int64)
    b = np.array([m - 1, m - 1, m - 1, 98765432109876 % m, m - 1], dtype=np.int64)
    fast, slow = _both_paths(lambda: K.mulmod(a, b, m))
    want = [int(x) * int(y) % m for x, y in zip(a, b)]
    assert [int(x) for x in fast] == want == [int(x) for x in slow]


def test_sparse_mul_ramified_and_sparse_keys():
    rng = np.random.default_rng(8)
    m = 3 ** 20
    # keys far apart force the sorted branch; e = 2 exercises the pi^2 = p fold
    ka = np.unique(rng.integers(-10 ** 12, 10 ** 12, 40))
    kb = np.unique(rng.integers(-10 ** 12, 10 ** 12, 30))
    a = rng.integers(0, m, (ka.size, 2))
    b = rng.integers(0, m, (kb.size, 2))
    (k1, c1), (k2, c2) = _both_paths(lambda: K.sparse_mul(ka, a, kb, b, 3, m))
    assert np.array_equal(k1, k2) and np.array_equal(np.asarray(c1, np.int64), np.asarray(c2, np.int64))
    dense_a = np.arange(50, dtype=np.int64)
    (k1, c1), (k2, c2) = _both_paths(lambda: K.sparse_mul(dense_a, np.full((50, 2), 7),
                                                          dense_a, np.full((50, 2), m - 1), 3, m))
    assert np.array_equal(k1, k2) and np.array_equal(np.asarray(c1, np.int64), np.asarray(c2, np.int64))
