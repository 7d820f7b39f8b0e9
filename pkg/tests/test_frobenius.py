from __future__ import annotations

import math
from fractions import Fraction

import pytest

from robba_kit import matrices as mx
from robba_kit.errors import LambdaIsUnit, NoContraction
from robba_kit.frobenius import block_conjugation_check, solve_twisted, split_extension, twisted_residual
from robba_kit.laurent import LaurentSeries, SigmaAction, Tag


def test_scalar_twisted_closed_form(cfg):
    # p sigma(y) - y = 1 has the constant solution y = 1/(p - 1)
    sol = solve_twisted(5, LaurentSeries.constant(cfg, 1), 12)
    assert sol.y.equals(LaurentSeries.constant(cfg, Fraction(1, 4)), 12)


def test_twisted_series_closed_form(cfg):
    # x = u: y = -sum_k p^k u^(5^k), four terms survive modulo p^4
    x = LaurentSeries.monomial(cfg, 1, prec=4)
    sol = solve_twisted(5, x, 4)
    want = LaurentSeries.from_terms(cfg, {5 ** k: -(5 ** k) for k in range(4)}, prec=4)
    assert sol.y.equals(want, 4)


def test_residual_and_orders_agree(cfg, rng):
    for _ in range(20):
        x = LaurentSeries.from_terms(cfg, {rng.randint(-5, 5): rng.randint(1, 99) for _ in range(4)})
        lam = 25 * rng.choice((1, 2, 3))
        fwd = solve_twisted(lam, x, 12)
        bwd = solve_twisted(lam, x, 12, order="backward")
        rv = twisted_residual(lam, x, fwd.y).vpi_min()
        assert rv is None or rv >= 12
        assert fwd.y.equals(bwd.y, 12)


def test_unit_lambda_rejected(cfg):
    with pytest.raises(LambdaIsUnit):
        solve_twisted(3, LaurentSeries.constant(cfg, 1))


def test_overconvergence_report(cfg):
    x = LaurentSeries.from_terms(cfg, {-2: 1, 1: 5}, tag=Tag("GammaCon", Fraction(1, 2)))
    sol = solve_twisted(5, x, 12)
    assert sol.r_in == Fraction(1, 2)
    assert sol.r_out == Fraction(1, 2) / Fraction(5) ** (sol.terms - 1)
    assert sol.w_out != math.inf and sol.w_out == sol.y.wr(sol.r_out)
    assert sol.w_out >= min(sol.w_in, 0)


def test_twisted_with_general_action(cfg):
    act = SigmaAction(cfg, LaurentSeries.from_terms(cfg, {5: 1, 0: 5}))
    x = LaurentSeries.from_terms(cfg, {1: 1, 0: 2})
    sol = solve_twisted(25, x, 10, action=act)
    rv = twisted_residual(25, x, sol.y, act).vpi_min()
    assert rv is None or rv >= 10


def _scalar(cfg, c, prec=12):
    return [[LaurentSeries.constant(cfg, c, prec=prec)]]


def test_split_scalar_closed_form(cfg):
    # -X + p sigma(X) = 3 has X = -3/(1 - p) = 3/4
    cert = split_extension(_scalar(cfg, 5), _scalar(cfg, 3), _scalar(cfg, 1), 12)
    assert cert.X[0][0].equals(LaurentSeries.constant(cfg, Fraction(3, 4)), 10)
    assert cert.equation_ok and cert.conjugation_ok


def test_split_zero_data_gives_zero(cfg):
    cert = split_extension(_scalar(cfg, 5), _scalar(cfg, 0), _scalar(cfg, 1), 12)
    assert cert.X[0][0].is_zero()


def test_split_block_matrices(cfg):
    A = mx.constant_matrix(cfg, [[25, 1], [0, 5]], 12)
    D = mx.constant_matrix(cfg, [[1, 0], [2, 1]], 12)
    B = [[LaurentSeries.from_terms(cfg, {-1: i + 1, 2: j + 3}) for j in range(2)] for i in range(2)]
    cert = split_extension(A, B, D, 12)
    lhs = mx.add(mx.neg(cert.X), mx.mul(mx.mul(A, mx.sigma(cert.X)), mx.inverse(D)))
    assert mx.is_zero(mx.sub(lhs, B), 10)
    block, ok = block_conjugation_check(A, B, D, cert.X, 10)
    assert ok and len(block) == 4


def test_split_designed_rejection(cfg):
    with pytest.raises(NoContraction):
        split_extension(_scalar(cfg, 1), _scalar(cfg, 1), _scalar(cfg, 5), 12)


def test_split_kmax_too_small(cfg):
    # [[0, p^-1], [p^2, 0]] only contracts after two steps
    A = [[LaurentSeries.zero(cfg), LaurentSeries.constant(cfg, Fraction(1, 5))],
         [LaurentSeries.constant(cfg, 25), LaurentSeries.zero(cfg)]]
    D = _scalar(cfg, 1)
    B = [[LaurentSeries.constant(cfg, 1)], [LaurentSeries.constant(cfg, 1)]]
    with pytest.raises(NoContraction):
        split_extension(A, B, D, 12, kmax=1)
    assert split_extension(A, B, D, 12).contraction_block == 2
