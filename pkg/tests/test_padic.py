from __future__ import annotations

from fractions import Fraction

import pytest

from robba_kit.errors import NotAUnit, PrecisionExhausted
from robba_kit.padic import AtLeast, OElem, RingConfig, guard_digits, is_prime, sigma0_coeff, teichmuller, vp_int


def test_is_prime_small_table():
    primes = [n for n in range(60) if is_prime(n)]
    assert primes == [2, 3, 5, 7, 11, 13, 17, 19, 23, 29, 31, 37, 41, 43, 47, 53, 59]


def test_ring_config_rejects_composite():
    with pytest.raises(ValueError):
        RingConfig(6)


@pytest.mark.parametrize("n,want", [(1, 0), (5, 1), (250, 3), (-125, 3), (0, None)])
def test_vp_int(n, want):
    assert vp_int(n, 5) == want


def test_arithmetic_matches_integers_mod_p_power(cfg, rng):
    m = 5 ** 12
    for _ in range(200):
        a, b = rng.randrange(m), rng.randrange(m)
        x, y = OElem.from_int(cfg, a), OElem.from_int(cfg, b)
        assert (x + y).to_int() == (a + b) % m
        assert (x - y).to_int() == (a - b) % m
        # the product of x and y is only known modulo p**(12 + min valuation)
        z = x * y
        assert z.to_int() % 5 ** 12 == (a * b) % m


def test_inverse_matches_pow(cfg, rng):
    m = 5 ** 12
    for _ in range(100):
        a = rng.randrange(1, m)
        if a % 5 == 0:
            continue
        assert OElem.from_int(cfg, a).inv().to_int() == pow(a, -1, m)


def test_rational_embedding(cfg):
    x = OElem.from_rational(cfg, Fraction(1, 4))
    assert (x * 4).equals(OElem.one(cfg))
    with pytest.raises(NotAUnit):
        OElem.from_rational(cfg, Fraction(1, 5))


def test_valuation_and_zero_sentinel(cfg):
    assert OElem.from_int(cfg, 250).valuation() == 3
    assert OElem.from_int(cfg, 250).abs_value() == Fraction(1, 125)
    z = OElem.zero(cfg, 7)
    assert isinstance(z.valuation(), AtLeast) and z.valuation().bound == 7


def test_precision_tracking_in_products(cfg):
    # (p + O(p^12)) * (p + O(p^12)) = p^2 + O(p^13)
    x = OElem.from_int(cfg, 5) * OElem.from_int(cfg, 5)
    assert x.prec == 13
    assert (OElem.from_int(cfg, 5) * OElem.from_int(cfg, 3)).prec == 12


def test_div_pi_exact_and_errors(cfg):
    x = OElem.from_int(cfg, 50)
    assert x.div_pi(2).to_int() == 2 and x.div_pi(2).prec == 10
    with pytest.raises(NotAUnit):
        OElem.from_int(cfg, 7).div_pi(1)
    with pytest.raises(PrecisionExhausted):
        OElem.zero(cfg, 3).div_pi(3)


def test_ramified_uniformizer(cfg_ram):
    pi = OElem.pi_power(cfg_ram, 1)
    assert pi.vpi() == 1 and pi.valuation() == Fraction(1, 2)
    assert (pi * pi).equals(OElem.from_int(cfg_ram, 3))
    u = OElem(cfg_ram, (2, 1), 10)           # 2 + pi, a unit
    assert (u * u.inv()).equals(OElem.one(cfg_ram))


def test_encoding_round_trip(cfg_ram):
    x = OElem(cfg_ram, (7, 11), 10)
    assert OElem.from_encoded(cfg_ram, x.to_int(), 10) == x


def test_teichmuller_is_fixed_by_p_power(cfg):
    for a in range(5):
        w = teichmuller(cfg, a)
        assert (w ** 5).equals(w)
        assert w.to_int() % 5 == a


def test_sigma0_is_identity_on_zp(cfg):
    x = OElem.from_int(cfg, 123456)
    assert sigma0_coeff(x) == x


def test_guard_digits_env(monkeypatch):
    monkeypatch.setenv("ROBBA_KIT_GUARD_DIGITS", "4")
    assert guard_digits() == 4
    monkeypatch.delenv("ROBBA_KIT_GUARD_DIGITS")
    assert guard_digits() == 2
