from __future__ import annotations

from fractions import Fraction

import pytest

from robba_kit import matrices as mx
from robba_kit.laurent import LaurentSeries
from robba_kit.padic import OElem
from robba_kit.sigma_module import (SigmaModule, check_nabla_compat, eigenvector_check, fixed_vectors_constant,
                                    frobenius_power, hom_apply, hom_module, newton_slopes, smith_form,
                                    tate_twist)


def test_slopes_of_diagonal(cfg):
    est = newton_slopes(SigmaModule(mx.constant_matrix(cfg, [[1, 0], [0, 5]], 12)), 8)
    assert est.exact and est.slopes == [0, 1]


def test_slopes_of_antidiagonal_square_root(cfg):
    # A sigma(A) = p I, so both slopes are 1/2
    A = mx.constant_matrix(cfg, [[0, 5], [1, 0]], 12)
    est = newton_slopes(SigmaModule(A), 8)
    assert not est.exact
    assert est.slopes == [Fraction(1, 2), Fraction(1, 2)]
    assert est.det_valuations[-1] == 8


def test_triangular_exact_tier_agrees_with_compounds(cfg):
    A = mx.constant_matrix(cfg, [[25, 0], [0, 5]], 12)
    A[0][1] = LaurentSeries.from_terms(cfg, {-1: 1, 2: 3})
    est = newton_slopes(SigmaModule(A), 8)
    assert est.exact and sorted(est.slopes) == [1, 2]
    assert est.log[-1][-1] == 3


def test_tate_twist_shifts_slopes(cfg):
    M = SigmaModule(mx.constant_matrix(cfg, [[1, 0], [0, 5]], 12))
    assert newton_slopes(tate_twist(M, 2), 4).slopes == [2, 3]


def test_frobenius_power_of_scalar(cfg):
    u = LaurentSeries.monomial(cfg, 1)
    M = SigmaModule([[u]])
    # u * u^5 * u^25 = u^31
    assert frobenius_power(M, 3)[0][0].equals(LaurentSeries.monomial(cfg, 31))


def test_hom_module_matches_direct_action(cfg, rng):
    A1 = mx.constant_matrix(cfg, [[1, 5], [0, 25]], 12)
    A2 = mx.constant_matrix(cfg, [[5, 0], [1, 1]], 12)
    M1, M2 = SigmaModule(A1), SigmaModule(A2)
    X = [[LaurentSeries.from_terms(cfg, {rng.randint(-3, 3): rng.randint(1, 40)}) for _ in range(2)]
         for _ in range(2)]
    H = hom_module(M1, M2, twist=1)
    direct = hom_apply(M1, M2, X, twist=1)
    via_kron = mx.unvec(H.apply(mx.vec(X)), 2, 2)
    assert mx.equal(direct, via_kron, 8)


def test_eigenvector_check(cfg):
    M = SigmaModule(mx.constant_matrix(cfg, [[5, 0], [0, 1]], 12))
    e1 = [LaurentSeries.constant(cfg, 1), LaurentSeries.zero(cfg)]
    assert eigenvector_check(M, e1, 5)
    assert not eigenvector_check(M, e1, 1)
    with pytest.raises(ValueError):
        eigenvector_check(M, [LaurentSeries.zero(cfg)] * 2, 1)


def test_nabla_compatibility_rank_one(cfg):
    A = [[LaurentSeries.monomial(cfg, 4)]]
    good = SigmaModule(A, [[LaurentSeries.monomial(cfg, -1)]])
    bad = SigmaModule(A, [[LaurentSeries.monomial(cfg, -1, 2)]])
    assert check_nabla_compat(good)
    assert not check_nabla_compat(bad)


def test_smith_form_reconstructs(cfg):
    rows = [[10, 5, 3], [25, 0, 15], [1, 2, 6]]
    B = [[OElem.from_int(cfg, x) for x in row] for row in rows]
    d, U, V = smith_form(B)
    n = 3
    UBV = [[sum((U[i][a] * B[a][b] * V[b][j] for a in range(n) for b in range(n)), OElem.zero(cfg))
            for j in range(n)] for i in range(n)]
    for i in range(n):
        for j in range(n):
            assert UBV[i][j].equals(d[i] if i == j else OElem.zero(cfg))
    vals = [x.vpi() for x in d]
    assert vals == sorted(vals)


def test_fixed_vectors(cfg):
    M = SigmaModule(mx.constant_matrix(cfg, [[1, 0], [0, 6]], 12))
    basis = fixed_vectors_constant(M)
    assert len(basis) == 1
    v = basis[0]
    Av = M.apply(v)
    assert all(a.equals(b) for a, b in zip(Av, v))
    assert len(fixed_vectors_constant(SigmaModule(mx.identity(cfg, 3, 12)))) == 3


def test_rejects_non_square(cfg):
    with pytest.raises(ValueError):
        SigmaModule([[LaurentSeries.constant(cfg, 1), LaurentSeries.constant(cfg, 1)]])


def test_deep_estimate_keeps_relative_precision(cfg):
    # products of constants carry their valuation into the precision, so depth 30 is fine
    A = mx.constant_matrix(cfg, [[0, 5], [5, 0]], 12)
    est = newton_slopes(SigmaModule(A), 30)
    assert est.slopes == [1, 1] and all(all(row) for row in est.monotone)
