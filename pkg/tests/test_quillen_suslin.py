from __future__ import annotations

import random
from fractions import Fraction

import numpy as np
import pytest

from robba_kit.errors import NoUnitLeadingEntry, NotAUnit
from robba_kit.quillen_suslin import (_charpoly, check_kernel_basis, complete_to_square, determinant,
                                      exact_search, kernel_free_basis, matmul, matvec, poly_reduce,
                                      unimodular_reduce, verify_certificate, verify_unimodular)
from robba_kit.selftest import random_unimodular
from robba_kit.tate import PolyRadius, TateSeries


def T(cfg, terms, n=1, cap=256):
    return TateSeries.from_terms(cfg, PolyRadius.unit(n), terms, 12, cap)


def _small(x, target=10):
    return x.is_zero() or x.gauss_valuation() >= target


def _is_e1(v):
    return all(_small(x - (1 if i == 0 else 0)) for i, x in enumerate(v))


def _is_identity(P):
    m = len(P)
    return all(_small(P[i][k] - (1 if i == k else 0)) for i in range(m) for k in range(m))


def test_trivial_tuple_gives_identity(cfg):
    f = [T(cfg, {(0,): 1}), T(cfg, {})]
    cert = unimodular_reduce(f, N=12)
    assert cert.verified
    assert _is_identity(cert.M) and _is_identity(cert.M_inv)


def test_euclidean_example(cfg):
    # f = (t, 1 + t) with witness (-1, 1)
    f = [T(cfg, {(1,): 1}), T(cfg, {(0,): 1, (1,): 1})]
    w = [T(cfg, {(0,): -1}), T(cfg, {(0,): 1})]
    cert = unimodular_reduce(f, w, N=12)
    assert _is_e1(matvec(cert.M, f))
    assert _is_identity(matmul(cert.M, cert.M_inv))


def test_quadratic_example_without_witness(cfg):
    # gcd(t^2 + 1, t) = 1; the univariate reduction finds its own witness
    f = [T(cfg, {(2,): 1, (0,): 1}), T(cfg, {(1,): 1})]
    cert = unimodular_reduce(f, N=12)
    assert verify_certificate(f, cert.M, cert.M_inv, 12)


def test_determinant_of_completion_is_unit(cfg):
    f = [T(cfg, {(1,): 1}), T(cfg, {(0,): 1, (1,): 1}), T(cfg, {(3,): 5})]
    C = complete_to_square(f, N=12)
    assert all(C[i][0].equals(f[i]) for i in range(3))
    assert determinant(C).is_unit()


@pytest.mark.parametrize("n", [1, 2, 3])
def test_random_round_trip(cfg, n):
    rng = random.Random(100 + n)
    for case in range(12):
        f, g = random_unimodular(rng, cfg, n)
        cert = unimodular_reduce(f, g if n >= 2 else None, N=12, seed=case)
        assert verify_certificate(f, cert.M, cert.M_inv, 12)
        kb = kernel_free_basis(f, certificate=cert)
        assert check_kernel_basis(f, kb, 12)
        assert len(kb.basis) == len(f) - 1


def test_kernel_basis_annihilates(cfg):
    f = [T(cfg, {(1, 0): 1}, 2), T(cfg, {(0, 0): 1, (1, 1): 1}, 2), T(cfg, {(0, 2): 3}, 2)]
    w = [T(cfg, {(0, 1): -1}, 2), T(cfg, {(0, 0): 1}, 2), T(cfg, {}, 2)]
    kb = kernel_free_basis(f, w, N=12)
    for vec in kb.basis:
        dot = sum((a * b for a, b in zip(f, vec)), T(cfg, {}, 2))
        assert dot.is_zero() or dot.gauss_valuation() >= 10


def test_bad_witness_rejected(cfg):
    f = [T(cfg, {(1,): 1}), T(cfg, {(0,): 1, (1,): 1})]
    w = [T(cfg, {(0,): 1}), T(cfg, {(0,): 1})]
    assert not verify_unimodular(f, w, 12)
    with pytest.raises(NotAUnit):
        unimodular_reduce(f, w, N=12)


def test_witness_required_for_several_variables(cfg):
    f = [T(cfg, {(0, 0): 1}, 2), T(cfg, {}, 2)]
    with pytest.raises(ValueError):
        unimodular_reduce(f, N=12)


def test_tampered_certificate_fails(cfg):
    f = [T(cfg, {(1,): 1}), T(cfg, {(0,): 1, (1,): 1})]
    cert = unimodular_reduce(f, N=12)
    M = [row[:] for row in cert.M]
    M[0][0] = M[0][0] + T(cfg, {(2,): 1})
    assert not verify_certificate(f, M, cert.M_inv, 12)


def test_poly_reduce_needs_unit_leading_entry(cfg):
    f = [T(cfg, {(1, 1): 1}, 2), T(cfg, {(0, 0): 1, (1, 1): -1}, 2)]
    w = [T(cfg, {(0, 0): 1}, 2), T(cfg, {(0, 0): 1}, 2)]
    with pytest.raises(NoUnitLeadingEntry):
        poly_reduce(f, w, var=1, N=12)


def test_certificate_json_shape(cfg):
    f = [T(cfg, {(1,): 1}), T(cfg, {(0,): 1, (1,): 1})]
    obj = unimodular_reduce(f, N=12).to_json()
    assert set(obj) == {"f", "witness", "M", "M_inv", "moves", "verified"}
    assert obj["verified"] is True


def test_exact_search_reaches_easy_end():
    # f = (x, 1 + x), g = (-1, 1): one move f_2 -= f_1 leaves the constant 1
    f = [{(1,): Fraction(1)}, {(0,): Fraction(1), (1,): Fraction(1)}, {(2,): Fraction(1)}]
    g = [{(0,): Fraction(-1)}, {(0,): Fraction(1)}, {}]
    moves = exact_search(f, g)
    assert moves is not None and len(moves) <= 2


def test_charpoly_matches_numpy():
    rng = np.random.default_rng(5)
    for n in range(1, 6):
        A = rng.integers(-5, 6, (n, n))
        got = _charpoly([[Fraction(int(x)) for x in row] for row in A], Fraction(1))
        want = np.round(np.poly(A.astype(float))).astype(int)
        assert [int(c) for c in got] == list(want)
