from __future__ import annotations

import math
from fractions import Fraction

import pytest

from robba_kit.errors import IncompatibleOperands, UncertifiedWindow, WindowOverflow
from robba_kit.laurent import EXP_CAP, LaurentSeries, SigmaAction, Tag
from robba_kit.padic import RingConfig, vp_int


def _random_terms(rng, lo=-6, hi=6, count=5, max_val=3):
    terms = {}
    for _ in range(count):
        i = rng.randint(lo, hi)
        c = rng.randrange(1, 5 ** 4) * 5 ** rng.randint(0, max_val)
        terms[i] = terms.get(i, 0) + c
    return terms


def _convolve(a: dict, b: dict) -> dict:
    out: dict = {}
    for i, x in a.items():
        for j, y in b.items():
            out[i + j] = out.get(i + j, 0) + x * y
    return out


def _wr_oracle(terms: dict, r, p: int):
    # min_n (r v_n + n) equals min_i (r i + v_p(a_i)) over the nonzero terms
    vals = [r * i + vp_int(c, p) for i, c in terms.items() if c]
    return min(vals) if vals else math.inf


def test_product_matches_convolution(cfg, rng):
    for _ in range(50):
        a, b = _random_terms(rng), _random_terms(rng)
        x = LaurentSeries.from_terms(cfg, a)
        y = LaurentSeries.from_terms(cfg, b)
        assert (x * y).equals(LaurentSeries.from_terms(cfg, _convolve(a, b)))


def test_sum_and_difference(cfg, rng):
    a, b = _random_terms(rng), _random_terms(rng)
    x, y = LaurentSeries.from_terms(cfg, a), LaurentSeries.from_terms(cfg, b)
    both = {i: a.get(i, 0) + b.get(i, 0) for i in set(a) | set(b)}
    assert (x + y).equals(LaurentSeries.from_terms(cfg, both))
    assert (x - x).is_zero()


def test_wr_against_definition(cfg, rng):
    for _ in range(100):
        a = _random_terms(rng, -20, 20)
        x = LaurentSeries.from_terms(cfg, a)
        for r in (Fraction(1, 4), Fraction(1, 2), Fraction(1)):
            assert x.wr(r) == _wr_oracle({i: c % 5 ** 12 for i, c in a.items()}, r, 5)


def test_wr_of_negative_power():
    cfg = RingConfig(5)
    x = LaurentSeries.monomial(cfg, -4)
    assert x.wr(Fraction(1, 2)) == -2
    assert x.vn_naive(0) == -4


def test_vn_naive_levels(cfg):
    x = LaurentSeries.from_terms(cfg, {-3: 125, 0: 5, 2: 1})
    assert [x.vn_naive(n) for n in range(4)] == [2, 0, 0, -3]
    with pytest.raises(UncertifiedWindow):
        x.vn_naive(12)


def test_zero_has_infinite_wr(cfg):
    assert LaurentSeries.zero(cfg).wr(1) == math.inf
    assert LaurentSeries.zero(cfg).vn_naive(3) == math.inf


def test_denominators_are_tracked(cfg):
    x = LaurentSeries.from_terms(cfg, {1: Fraction(1, 25)})
    assert x.den == 2 and x.valuation() == -2
    assert (x * 25).equals(LaurentSeries.monomial(cfg, 1))


def test_sigma_standard_raises_exponents(cfg):
    x = LaurentSeries.from_terms(cfg, {-2: 3, 1: 7})
    assert x.sigma().equals(LaurentSeries.from_terms(cfg, {-10: 3, 5: 7}))
    assert x.sigma().tag.r == Fraction(1, 5)


def test_sigma_is_a_ring_map(cfg, rng):
    x = LaurentSeries.from_terms(cfg, _random_terms(rng))
    y = LaurentSeries.from_terms(cfg, _random_terms(rng))
    assert (x * y).sigma().equals(x.sigma() * y.sigma())


def test_general_sigma_action_matches_substitution(cfg):
    # u -> u^5 + 5 u: sigma(u^2) = u^10 + 10 u^6 + 25 u^2
    img = LaurentSeries.from_terms(cfg, {5: 1, 1: 5})
    act = SigmaAction(cfg, img)
    x = LaurentSeries.monomial(cfg, 2)
    assert x.sigma(act).equals(LaurentSeries.from_terms(cfg, {10: 1, 6: 10, 2: 25}))


def test_general_sigma_action_rejects_bad_image(cfg):
    with pytest.raises(ValueError):
        SigmaAction(cfg, LaurentSeries.from_terms(cfg, {4: 1}))


def test_derivative(cfg):
    x = LaurentSeries.from_terms(cfg, {-4: 1, 3: 2})
    assert x.derive().equals(LaurentSeries.from_terms(cfg, {-5: -4, 2: 6}))


def test_inverse_round_trip(cfg):
    x = LaurentSeries.from_terms(cfg, {0: 1, 1: 1, -2: 5})
    y = x.inverse()
    assert y.open_right
    one = x * y
    assert one.equals(LaurentSeries.constant(cfg, 1))


def test_inverse_of_monomial_is_exact(cfg):
    x = LaurentSeries.from_terms(cfg, {3: 25})
    y = x.inverse()
    assert not y.open_right and y.equals(LaurentSeries.from_terms(cfg, {-3: Fraction(1, 25)}))


def test_open_window_blocks_uncertified_questions(cfg):
    x = LaurentSeries.from_terms(cfg, {0: 5, 2: 1}).truncate(1)
    with pytest.raises(UncertifiedWindow):
        x.coeff(3)
    with pytest.raises(UncertifiedWindow):
        x.vn_naive(0)


def test_exponent_cap(cfg):
    with pytest.raises(WindowOverflow):
        LaurentSeries.monomial(cfg, EXP_CAP + 1)
    with pytest.raises(WindowOverflow):
        LaurentSeries.monomial(cfg, EXP_CAP // 2).sigma()


def test_mixed_rings_refused(cfg):
    other = RingConfig(3)
    with pytest.raises(IncompatibleOperands):
        LaurentSeries.constant(cfg, 1) + LaurentSeries.constant(other, 1)


def test_tag_combination():
    a, b = Tag("GammaCon", Fraction(1, 2)), Tag("GammaCon", Fraction(1, 4))
    assert a.combine(b).r == Fraction(1, 4)


def test_ramified_product(cfg_ram):
    pi = LaurentSeries.from_terms(cfg_ram, {0: (0, 1)})
    three = LaurentSeries.constant(cfg_ram, 3)
    assert (pi * pi).equals(three)
    assert pi.valuation() == Fraction(1, 2)
    assert (pi.shift(-2)).wr(1) == -2 + Fraction(1, 2)
