from __future__ import annotations

import math
from fractions import Fraction

import pytest

from robba_kit.errors import BadCalibration, JMaxExceeded, LeadingCoeffNotUnit, WindowOverflow, ZeroAtPrecision
from robba_kit.padic import vp_int
from robba_kit.tate import (PolyRadius, TateSeries, calibration, tj_find, tj_map, tj_transform,
                            unit_conditions_hold, weierstrass_divide, weierstrass_prepare)

UNIT1 = PolyRadius.unit(1)
UNIT2 = PolyRadius.unit(2)


def T(cfg, terms, radius=UNIT1, prec=12, cap=64):
    return TateSeries.from_terms(cfg, radius, terms, prec, cap)


def _poly(rng, n, count=4):
    terms = {}
    for _ in range(count):
        I = tuple(rng.randint(0, 3) for _ in range(n))
        terms[I] = terms.get(I, 0) + rng.randint(-30, 30) * 5 ** rng.randint(0, 2)
    return terms


def _convolve(a, b):
    out = {}
    for I, x in a.items():
        for J, y in b.items():
            K = tuple(i + j for i, j in zip(I, J))
            out[K] = out.get(K, 0) + x * y
    return out


def test_product_matches_convolution(cfg, rng):
    for _ in range(30):
        a, b = _poly(rng, 2), _poly(rng, 2)
        assert (T(cfg, a, UNIT2) * T(cfg, b, UNIT2)).equals(T(cfg, _convolve(a, b), UNIT2))


def test_gauss_valuation_definition(cfg):
    radius = PolyRadius((Fraction(1, 2), Fraction(-1, 3)))
    f = T(cfg, {(0, 0): 25, (1, 0): 5, (0, 3): 1}, radius)
    # terms: 2, 1 + 1/2, 0 - 1
    assert f.gauss_valuation() == -1
    with pytest.raises(ZeroAtPrecision):
        T(cfg, {}).gauss_valuation()


def test_gauss_norm_is_multiplicative(cfg, rng):
    radius = PolyRadius((Fraction(1, 2), Fraction(-1, 2)))
    for _ in range(30):
        f, g = T(cfg, _poly(rng, 2), radius), T(cfg, _poly(rng, 2), radius)
        if f.is_zero() or g.is_zero():
            continue
        assert (f * g).gauss_valuation() == f.gauss_valuation() + g.gauss_valuation()


def test_unit_inverse_geometric(cfg):
    f = T(cfg, {(0,): 1, (1,): 5})
    g = f.inverse()
    assert (f * g).equals(T(cfg, {(0,): 1}))
    # coefficients of the inverse are (-p)^k
    terms = g.balanced_terms()
    for k in range(5):
        assert terms[(k,)] == (-5) ** k


def test_is_unit(cfg):
    assert T(cfg, {(0,): 3, (2,): 5}).is_unit()
    assert not T(cfg, {(0,): 1, (2,): 1}).is_unit()
    assert not T(cfg, {(1,): 1}).is_unit()


def test_leading_term_and_degree(cfg):
    f = T(cfg, {(0, 0): 1, (2, 1): 1, (0, 3): 5}, UNIT2)
    assert f.leading_term(1)[0] == 1
    assert f.degree_in(0) == 2
    assert f.leading_term(1)[1].equals(T(cfg, {(2, 0): 1}, UNIT2))


def test_degree_additivity_example(cfg):
    f = T(cfg, {(0,): 1, (1,): 5, (2,): 1, (3,): 25})
    g = T(cfg, {(0,): 1, (1,): 1})
    assert (f * g).degree_in(0) == f.degree_in(0) + g.degree_in(0) == 3


def test_prepare_module_example(cfg):
    f = T(cfg, {(1,): 1, (2,): 5})
    prep = weierstrass_prepare(f)
    assert prep.degree == 1
    assert prep.P.equals(T(cfg, {(1,): 1}))
    assert prep.u.equals(T(cfg, {(0,): 1, (1,): 5}))
    assert unit_conditions_hold(prep)


@pytest.mark.parametrize("log_radius", [Fraction(0), Fraction(1, 2), Fraction(-1, 2)])
def test_prepare_random(cfg, rng, log_radius):
    radius = PolyRadius((log_radius,))
    for _ in range(10):
        j = rng.randint(0, 5)
        # every other term sits at least one unit of valuation below the dominant one
        terms = {}
        for i in range(8):
            if i != j:
                v = max(1, math.ceil((j - i) * log_radius) + 1) + rng.randint(0, 1)
                terms[(i,)] = rng.randint(1, 20) * 5 ** v
        terms[(j,)] = rng.choice((1, 2, 3, 4))
        f = T(cfg, terms, radius, cap=512)
        prep = weierstrass_prepare(f)
        assert prep.degree == j == prep.P.max_degree_in(0)
        r = f - prep.u * prep.P
        assert r.is_zero() or r.gauss_valuation() >= 10
        assert unit_conditions_hold(prep)
        one = prep.u * prep.u_inv - 1
        assert one.is_zero() or one.gauss_valuation() >= 10


def test_prepare_needs_unit_leading_coefficient(cfg):
    f = T(cfg, {(1, 1): 1}, UNIT2)
    with pytest.raises(LeadingCoeffNotUnit):
        weierstrass_prepare(f, 1)


def test_weierstrass_division(cfg, rng):
    P = T(cfg, {(0,): 5, (1,): 2, (2,): 1})
    for _ in range(10):
        h = T(cfg, {(i,): rng.randint(-9, 9) for i in range(7)})
        q, r = weierstrass_divide(h, P, 0)
        assert r.max_degree_in(0) < 2
        assert (q * P + r).equals(h, 11)


def test_calibration_values():
    assert calibration(PolyRadius((Fraction(0), Fraction(1, 2))), 1) == (2, -1)
    assert calibration(PolyRadius((Fraction(-1), Fraction(-2, 3))), 1) == (3, 2)
    with pytest.raises(BadCalibration):
        calibration(PolyRadius((Fraction(1, 2), Fraction(0))), 1)


def test_tj_find_example(cfg):
    f = T(cfg, {(1, 1): 1}, UNIT2)
    Tm, g = tj_find(f)
    assert Tm.j == 1
    assert g.equals(T(cfg, {(1, 1): 1, (0, 2): 1}, UNIT2))
    assert Tm.inverse(g).equals(f)


def test_tj_round_trip_three_variables(cfg, rng):
    radius = PolyRadius((Fraction(0), Fraction(-1, 2), Fraction(1, 2)))
    for j in range(1, 4):
        f = T(cfg, _poly(rng, 3), radius, cap=256)
        Tm, g = tj_transform(f, j)
        assert Tm.inverse(g).equals(f)


def test_tj_jmax(cfg):
    f = T(cfg, {(1, 1): 1}, UNIT2, cap=4)
    with pytest.raises(JMaxExceeded):
        tj_find(f, jmax=0)


def test_degree_cap_overflow(cfg):
    with pytest.raises(WindowOverflow):
        T(cfg, {(5,): 1}, cap=4)


def test_ring_mode(cfg):
    radius = PolyRadius((Fraction(-1, 2), Fraction(-1, 2)))
    f = T(cfg, {(1, 1): 1, (0, 0): 1}, radius)
    Tm, g = tj_transform(f, 1, mode="ring")
    assert Tm.mode == "ring" and 0 < Tm.lam <= 1
    assert g.radius == radius.scaled(Tm.lam)
    _, c = g.leading_term(1)
    assert c.is_unit() and vp_int(c.constant_term().numerator, 5) == 0
    with pytest.raises(BadCalibration):
        tj_map(UNIT2, 1, mode="ring")


def test_balanced_terms_are_small(cfg):
    f = T(cfg, {(0,): -1, (1,): Fraction(-3, 25)})
    assert f.balanced_terms() == {(0,): Fraction(-1), (1,): Fraction(-3, 25)}
