"""Truncated series in the Tate algebra ``K<t_1, ..., t_n>_rho`` over ``K = Q_p``.

A radius is stored by its log-radii ``e_k`` (``rho_k = p**(-e_k)``), so the
Gauss valuation of ``sum c_I t^I`` is ``min_I v_p(c_I) + sum_k i_k e_k``.  A
series is known modulo elements of Gauss valuation ``>= prec``: the term at
``I`` keeps ``ceil(den + prec - w_I)`` p-adic digits of its numerator, where
``w_I = sum_k i_k e_k`` and the value of a coefficient is ``num / p**den``.
Terms with no digits left are negligible and dropped; a non-negligible term
beyond the per-variable degree cap raises :class:`WindowOverflow`.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

import numpy as np

from . import _kernels as K
from .errors import (BadCalibration, IncompatibleOperands, JMaxExceeded, LeadingCoeffNotUnit,
                     NoContraction, NotAUnit, WindowOverflow, ZeroAtPrecision)
from .padic import RingConfig, guard_digits

DEFAULT_CAP = 64
_SAFE = 1 << 62


@dataclass(frozen=True)
class PolyRadius:
    """Log-radii ``e_k`` with ``rho_k = p**(-e_k)``."""

    logs: tuple

    def __post_init__(self):
        object.__setattr__(self, "logs", tuple(Fraction(x) for x in self.logs))

    @classmethod
    def unit(cls, n: int) -> "PolyRadius":
        return cls((Fraction(0),) * n)

    @property
    def n(self) -> int:
        return len(self.logs)

    @property
    def denominator(self) -> int:
        d = 1
        for x in self.logs:
            d = d * x.denominator // math.gcd(d, x.denominator)
        return d

    def scaled(self, lam: Fraction) -> "PolyRadius":
        return PolyRadius(tuple(Fraction(lam) * x for x in self.logs))

    def to_json(self) -> list:
        return [[x.numerator, x.denominator] for x in self.logs]


@lru_cache(maxsize=64)
def _pow_table(p: int, size: int) -> np.ndarray:
    return np.array([p ** k for k in range(size)], dtype=object)


@lru_cache(maxsize=16)
def _binomials(size: int) -> np.ndarray:
    tab = np.zeros((size + 1, size + 1), dtype=object)
    for a in range(size + 1):
        for k in range(a + 1):
            tab[a, k] = math.comb(a, k)
    return tab


def _to_store(nums: np.ndarray, bound: int) -> np.ndarray:
    if bound < _SAFE:
        return np.asarray(nums, dtype=object).astype(np.int64)
    return np.asarray(nums, dtype=object)


def _valuations(nums: np.ndarray, p: int, cap: int) -> np.ndarray:
    from .padic import _digit_valuations
    if nums.size == 0:
        return np.zeros(0, dtype=np.int64)
    return _digit_valuations(np.asarray(nums), p, cap)


@dataclass(frozen=True, eq=False)
class TateSeries:
    cfg: RingConfig
    radius: PolyRadius
    exps: np.ndarray
    nums: np.ndarray
    den: int
    prec: Fraction
    cap: int = DEFAULT_CAP

    # ------------------------------------------------------------ building
    @classmethod
    def _make(cls, cfg, radius, exps, nums, den, prec, cap) -> "TateSeries":
        if cfg.e != 1:
            raise IncompatibleOperands("Tate series are implemented over Q_p (e = 1) only")
        p = cfg.p
        n = radius.n
        prec = Fraction(prec)
        exps = np.asarray(exps, dtype=np.int64).reshape(-1, n)
        nums = np.asarray(nums, dtype=object).reshape(-1)
        D = radius.denominator * prec.denominator
        a = np.array([int(x * D) for x in radius.logs], dtype=np.int64)
        if exps.shape[0]:
            W = exps @ a
            Pd = int((den + prec) * D)
            digits = -((W - Pd) // D)
            keep = digits > 0
            exps, nums, digits = exps[keep], nums[keep], digits[keep]
        if exps.shape[0]:
            mods = _pow_table(p, int(digits.max()) + 1)[digits]
            nums = nums % mods
            keep = nums != 0
            exps, nums, digits = exps[keep], nums[keep], digits[keep]
        if exps.shape[0]:
            if np.any(exps < 0):
                raise ValueError("negative exponent in a Tate series")
            if int(exps.max()) > cap:
                raise WindowOverflow(f"a non-negligible term exceeds the degree cap {cap}")
            if den > 0:
                vmin = int(_valuations(nums, p, den + 1).min())
                s = min(den, vmin)
                if s > 0:
                    nums = nums // (p ** s)
                    den -= s
                    digits = digits - s
            order = np.lexsort(exps.T[::-1])
            exps, nums = exps[order], nums[order]
            bound = p ** int(digits.max())
        else:
            den = 0
            bound = 1
        return cls(cfg, radius, exps, _to_store(nums, bound), int(den), prec, int(cap))

    @classmethod
    def from_terms(cls, cfg: RingConfig, radius, terms, prec=None, cap: int = DEFAULT_CAP) -> "TateSeries":
        """Build from ``{exponent tuple: coefficient}`` with int or Fraction coefficients."""
        radius = radius if isinstance(radius, PolyRadius) else PolyRadius(tuple(radius))
        prec = Fraction(cfg.N_default if prec is None else prec)
        n = radius.n
        items = [(tuple(int(x) for x in (I if isinstance(I, (tuple, list)) else (I,))), Fraction(c))
                 for I, c in dict(terms).items()]
        for I, _ in items:
            if len(I) != n:
                raise ValueError("exponent tuple has the wrong length")
        den = 0
        parsed = []
        for I, c in items:
            num, d = _split_rational(cfg.p, c, prec, I, radius)
            parsed.append((I, num, d))
            den = max(den, d)
        exps = [I for I, _, _ in parsed] or np.zeros((0, n), dtype=np.int64)
        nums = [num * cfg.p ** (den - d) for _, num, d in parsed]
        return cls._combine(cfg, radius, np.array(exps, dtype=np.int64).reshape(-1, n),
                            np.array(nums, dtype=object), den, prec, cap)

    @classmethod
    def _combine(cls, cfg, radius, exps, nums, den, prec, cap) -> "TateSeries":
        """Sum duplicate exponents, then canonicalise."""
        n = radius.n
        if exps.shape[0] > 1:
            keys, inv = np.unique(exps, axis=0, return_inverse=True)
            inv = inv.reshape(-1)
            if keys.shape[0] < exps.shape[0]:
                acc = np.zeros(keys.shape[0], dtype=object)
                np.add.at(acc, inv, np.asarray(nums, dtype=object))
                exps, nums = keys, acc
        return cls._make(cfg, radius, exps.reshape(-1, n), nums, den, prec, cap)

    @classmethod
    def zero(cls, cfg, radius, prec=None, cap: int = DEFAULT_CAP) -> "TateSeries":
        return cls.from_terms(cfg, radius, {}, prec, cap)

    @classmethod
    def constant(cls, cfg, radius, c, prec=None, cap: int = DEFAULT_CAP) -> "TateSeries":
        radius = radius if isinstance(radius, PolyRadius) else PolyRadius(tuple(radius))
        return cls.from_terms(cfg, radius, {(0,) * radius.n: c}, prec, cap)

    @classmethod
    def variable(cls, cfg, radius, k: int, prec=None, cap: int = DEFAULT_CAP) -> "TateSeries":
        radius = radius if isinstance(radius, PolyRadius) else PolyRadius(tuple(radius))
        I = [0] * radius.n
        I[k] = 1
        return cls.from_terms(cfg, radius, {tuple(I): 1}, prec, cap)

    def _like(self, exps, nums, den, prec, radius=None, cap=None) -> "TateSeries":
        return TateSeries._make(self.cfg, self.radius if radius is None else radius, exps, nums, den,
                                prec, self.cap if cap is None else cap)

    def lift(self, prec) -> "TateSeries":
        """Treat the stored representative as exact and set precision ``prec``."""
        return self._like(self.exps, self.nums, self.den, prec)

    def with_prec(self, prec) -> "TateSeries":
        return self._like(self.exps, self.nums, self.den, min(Fraction(prec), self.prec))

    def with_cap(self, cap: int) -> "TateSeries":
        return self._like(self.exps, self.nums, self.den, self.prec, cap=cap)

    # ------------------------------------------------------------ queries
    @property
    def n(self) -> int:
        return self.radius.n

    def __len__(self) -> int:
        return int(self.exps.shape[0])

    def is_zero(self) -> bool:
        return self.exps.shape[0] == 0

    def terms(self) -> dict:
        """``{exponent tuple: Fraction}``."""
        scale = Fraction(1, self.cfg.p ** self.den)
        return {tuple(int(x) for x in I): int(c) * scale for I, c in zip(self.exps, self.nums)}

    def balanced_numerators(self) -> list:
        """Numerators as balanced residues modulo the digits each term carries."""
        p = self.cfg.p
        W, D = self._weights()
        out = []
        for c, w in zip(self.nums, W):
            digits = math.ceil(self.den + self.prec - Fraction(int(w), D))
            mod = p ** max(digits, 0)
            c = int(c)
            out.append(c - mod if mod and c > mod // 2 else c)
        return out

    def balanced_terms(self) -> dict:
        """``{exponent tuple: Fraction}`` using the smallest representatives."""
        scale = Fraction(1, self.cfg.p ** self.den)
        return {tuple(int(x) for x in I): c * scale
                for I, c in zip(self.exps, self.balanced_numerators()) if c}

    def _weights(self) -> tuple[np.ndarray, int]:
        D = self.radius.denominator
        a = np.array([int(x * D) for x in self.radius.logs], dtype=np.int64)
        return self.exps @ a, D

    def _term_vals(self) -> tuple[np.ndarray, int]:
        """Scaled Gauss valuations of the stored terms (divide by the returned D)."""
        W, D = self._weights()
        cap = int(math.ceil(self.prec + self.den)) + 2 + int(max(0, -W.min()) // D if W.size else 0)
        v = _valuations(self.nums, self.cfg.p, max(cap, 1))
        return (v - self.den) * D + W, D

    def gauss_valuation(self) -> Fraction:
        """``min_I v_p(c_I) + sum_k i_k e_k``; raises when zero at precision."""
        if self.is_zero():
            raise ZeroAtPrecision("series is zero at this precision")
        vals, D = self._term_vals()
        return Fraction(int(vals.min()), D)

    def valuation_or_prec(self) -> Fraction:
        return self.prec if self.is_zero() else self.gauss_valuation()

    def degree_in(self, var: int) -> int:
        return self.leading_term(var)[0]

    def leading_term(self, var: int):
        """``(j, c_j)`` for f viewed as a series in ``t_var`` over the other variables.

        ``j`` is the largest exponent whose coefficient attains the Gauss norm;
        ``c_j`` is returned as a series in all n variables with no ``t_var``.
        """
        if self.is_zero():
            raise ZeroAtPrecision("series is zero at this precision")
        vals, _ = self._term_vals()
        best = vals.min()
        j = int(self.exps[vals == best, var].max())
        return j, self.coeff_in(var, j)

    def coeff_in(self, var: int, j: int) -> "TateSeries":
        """Coefficient of ``t_var**j`` (a series free of ``t_var``)."""
        sel = self.exps[:, var] == j
        exps = self.exps[sel].copy()
        exps[:, var] = 0
        shift = j * self.radius.logs[var]
        return self._like(exps, self.nums[sel], self.den, self.prec - shift)

    def max_degree_in(self, var: int) -> int:
        return int(self.exps[:, var].max()) if self.exps.shape[0] else -1

    def free_of(self, var: int) -> bool:
        return self.max_degree_in(var) <= 0

    def is_constant(self) -> bool:
        return self.is_zero() or (self.exps.shape[0] == 1 and not self.exps.any())

    def constant_term(self) -> Fraction:
        sel = ~self.exps.any(axis=1)
        if not sel.any():
            return Fraction(0)
        return Fraction(int(self.nums[sel][0]), self.cfg.p ** self.den)

    def is_unit(self) -> bool:
        """Unit test in the Tate algebra: the constant term strictly dominates."""
        if self.is_zero():
            return False
        vals, D = self._term_vals()
        const = ~self.exps.any(axis=1)
        if not const.any():
            return False
        vc = int(vals[const][0])
        rest = vals[~const]
        limit = (self.prec) * D
        if vc >= limit:
            return False
        return rest.size == 0 or int(rest.min()) > vc

    def is_unit_leading(self, var: int) -> bool:
        if self.is_zero():
            return False
        return self.leading_term(var)[1].is_unit()

    # ------------------------------------------------------------ arithmetic
    def _check(self, other: "TateSeries") -> None:
        if not isinstance(other, TateSeries) or other.cfg != self.cfg or other.radius != self.radius:
            raise IncompatibleOperands("Tate series over different rings or radii")

    def _coerce(self, other) -> "TateSeries":
        if isinstance(other, TateSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction)):
            return TateSeries.constant(self.cfg, self.radius, other, self.prec, self.cap)
        return NotImplemented

    def __add__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        den = max(self.den, other.den)
        p = self.cfg.p
        a = np.asarray(self.nums, dtype=object) * p ** (den - self.den)
        b = np.asarray(other.nums, dtype=object) * p ** (den - other.den)
        exps = np.concatenate([self.exps, other.exps])
        nums = np.concatenate([a, b])
        return TateSeries._combine(self.cfg, self.radius, exps, nums, den,
                                   min(self.prec, other.prec), max(self.cap, other.cap))

    __radd__ = __add__

    def __neg__(self):
        return self._like(self.exps, -np.asarray(self.nums, dtype=object), self.den, self.prec)

    def __sub__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return self + (-other)

    def __rsub__(self, other):
        return (-self) + other

    def __mul__(self, other):
        other = self._coerce(other)
        if other is NotImplemented:
            return other
        return _tate_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = TateSeries.constant(self.cfg, self.radius, 1, self.prec, self.cap)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base if k > 1 else base
            k >>= 1
        return out

    def scale(self, c) -> "TateSeries":
        c = Fraction(c)
        if c == 0:
            return TateSeries.zero(self.cfg, self.radius, self.prec + 0, self.cap)
        return self * TateSeries.constant(self.cfg, self.radius, c, self.prec - _vp_fraction(self.cfg.p, c), self.cap)

    def shift(self, var: int, d: int) -> "TateSeries":
        """Multiply by ``t_var**d`` (d may be negative when every term allows it)."""
        exps = self.exps.copy()
        exps[:, var] += d
        return self._like(exps, self.nums, self.den, self.prec + d * self.radius.logs[var])

    def split(self, var: int, d: int):
        """``(alpha, beta)`` with ``self = alpha * t_var**d + beta`` and ``deg beta < d``."""
        hi = self.exps[:, var] >= d
        ea = self.exps[hi].copy()
        ea[:, var] -= d
        alpha = self._like(ea, self.nums[hi], self.den, self.prec - d * self.radius.logs[var])
        beta = self._like(self.exps[~hi], self.nums[~hi], self.den, self.prec)
        return alpha, beta

    def equals(self, other, prec=None) -> bool:
        d = self - other
        limit = d.prec if prec is None else min(Fraction(prec), d.prec)
        return d.is_zero() or d.gauss_valuation() >= limit

    def inverse(self) -> "TateSeries":
        """Inverse of a unit: ``c0^-1 * sum_k (-h)^k`` with ``h = f/c0 - 1``."""
        if not self.is_unit():
            raise NotAUnit("series is not a unit of the Tate algebra")
        c0 = self.constant_term()
        v = _vp_fraction(self.cfg.p, c0)
        out_prec = self.prec - 2 * v
        inv0 = TateSeries.constant(self.cfg, self.radius, 1 / c0, out_prec + v, self.cap)
        h = (self * TateSeries.constant(self.cfg, self.radius, 1 / c0, self.prec - v, self.cap)) - 1
        h = h.with_prec(self.prec - v)
        total = TateSeries.constant(self.cfg, self.radius, 1, h.prec, self.cap)
        power = total
        target = self.prec - v
        for _ in range(_iteration_bound(h, target)):
            power = -(power * h)
            if power.is_zero() or power.gauss_valuation() >= target:
                break
            total = total + power
        return (total * inv0).with_prec(out_prec)

    def substitute(self, var: int, target: int, power: int, coeff_exp: int, sign: int = 1) -> "TateSeries":
        """Apply ``t_var -> t_var + sign * p**coeff_exp * t_target**power``.

        The map is treated as exact; the precision is kept (it is an isometry
        in the calibrated settings used by :func:`tj_transform`).
        """
        if self.is_zero():
            return self
        a = self.exps[:, var]
        counts = a + 1
        total = int(counts.sum())
        rep = np.repeat(np.arange(len(self)), counts)
        offsets = np.repeat(np.cumsum(counts) - counts, counts)
        k = np.arange(total) - offsets
        exps = self.exps[rep].copy()
        exps[:, var] = a[rep] - k
        exps[:, target] += power * k
        amax = int(a.max())
        table = _binomials(amax)
        mult = table[a[rep], k]
        p = self.cfg.p
        extra = max(0, -coeff_exp) * amax
        scale = _pow_table(p, amax * abs(coeff_exp) + extra + 1)
        mult = mult * scale[coeff_exp * k + extra]
        if sign < 0:
            mult = np.where(k % 2 == 1, -mult, mult)
        nums = np.asarray(self.nums, dtype=object)[rep] * mult
        return TateSeries._combine(self.cfg, self.radius, exps, nums, self.den + extra, self.prec, self.cap)

    def permute(self, perm) -> "TateSeries":
        """Rename variables: new variable ``q`` is old variable ``perm[q]``."""
        perm = list(perm)
        logs = tuple(self.radius.logs[k] for k in perm)
        return TateSeries._make(self.cfg, PolyRadius(logs), self.exps[:, perm], self.nums, self.den,
                                self.prec, self.cap)

    def drop_variable(self, var: int) -> "TateSeries":
        """View a series free of ``t_var`` as a series in the remaining variables."""
        if not self.free_of(var):
            raise ValueError("series depends on the variable being dropped")
        logs = tuple(x for k, x in enumerate(self.radius.logs) if k != var)
        exps = np.delete(self.exps, var, axis=1)
        return TateSeries._make(self.cfg, PolyRadius(logs), exps, self.nums, self.den, self.prec, self.cap)

    def to_json(self) -> dict:
        from .serialize import tate_to_json
        return tate_to_json(self)

    def __repr__(self) -> str:
        parts = []
        for I, c in list(self.terms().items())[:6]:
            mono = "*".join(f"t{k + 1}^{e}" for k, e in enumerate(I) if e) or "1"
            parts.append(f"({c})*{mono}")
        more = " + ..." if len(self) > 6 else ""
        return f"TateSeries({' + '.join(parts) or '0'}{more} mod v>={self.prec})"


# ---------------------------------------------------------------- helpers

def _vp_fraction(p: int, c: Fraction) -> int:
    c = Fraction(c)
    if c == 0:
        raise ZeroAtPrecision("zero has no valuation")
    v = 0
    a, b = c.numerator, c.denominator
    while a % p == 0:
        a //= p
        v += 1
    while b % p == 0:
        b //= p
        v -= 1
    return v


def _split_rational(p: int, c: Fraction, prec: Fraction, I, radius: PolyRadius):
    """Return ``(numerator, den)`` with ``c = numerator / p**den`` to enough digits."""
    if c == 0:
        return 0, 0
    b = c.denominator
    den = 0
    while b % p == 0:
        b //= p
        den += 1
    w = sum(Fraction(i) * e for i, e in zip(I, radius.logs))
    digits = max(1, math.ceil(den + prec - w))
    m = p ** digits
    return c.numerator * pow(b, -1, m) % m, den


def _iteration_bound(h: TateSeries, target: Fraction) -> int:
    if h.is_zero():
        return 0
    vh = h.gauss_valuation()
    if vh <= 0:
        raise NoContraction("perturbation does not shrink")
    return int(math.ceil((target - 0) / vh)) + 2


def _encode(exps: np.ndarray, base: int) -> np.ndarray:
    key = np.zeros(exps.shape[0], dtype=np.int64)
    for k in range(exps.shape[1] - 1, -1, -1):
        key = key * base + exps[:, k]
    return key


def _decode(keys: np.ndarray, base: int, n: int) -> np.ndarray:
    out = np.zeros((keys.shape[0], n), dtype=np.int64)
    rest = keys.copy()
    for k in range(n):
        out[:, k] = rest % base
        rest //= base
    return out


def _tate_mul(x: TateSeries, y: TateSeries) -> TateSeries:
    cfg, radius = x.cfg, x.radius
    vx = x.valuation_or_prec()
    vy = y.valuation_or_prec()
    prec = min(x.prec + vy, y.prec + vx)
    cap = max(x.cap, y.cap)
    if x.is_zero() or y.is_zero():
        return TateSeries._make(cfg, radius, np.zeros((0, radius.n)), [], 0, prec, cap)
    den = x.den + y.den
    Wx, D = x._weights()
    Wy, _ = y._weights()
    top = den + prec - Fraction(int(Wx.min()) + int(Wy.min()), D)
    digits = int(math.ceil(top))
    if digits <= 0:
        return TateSeries._make(cfg, radius, np.zeros((0, radius.n)), [], 0, prec, cap)
    m = cfg.p ** digits
    base = 2 * max(int(x.exps.max()), int(y.exps.max()), 1) + 1
    if base ** radius.n >= _SAFE:
        raise WindowOverflow("exponent encoding does not fit in 64 bits")
    ka = _encode(x.exps, base)
    kb = _encode(y.exps, base)
    a = K.as_residues(np.asarray(x.nums, dtype=object), m).reshape(-1, 1)
    b = K.as_residues(np.asarray(y.nums, dtype=object), m).reshape(-1, 1)
    keys, rows = K.sparse_mul(ka, a, kb, b, cfg.p, m)
    exps = _decode(keys, base, radius.n)
    return TateSeries._make(cfg, radius, exps, np.asarray(rows[:, 0], dtype=object), den, prec, cap)


def tate_sum(items: list) -> TateSeries:
    out = items[0]
    for x in items[1:]:
        out = out + x
    return out


# ---------------------------------------------------------------- Weierstrass

def weierstrass_divide(h: TateSeries, P: TateSeries, var: int, lead_inv: TateSeries | None = None):
    """``h = q P + r`` with ``deg_var r < deg_var P`` for a polynomial P in ``t_var``.

    P's top coefficient (in the polynomial sense) must be a unit of the
    coefficient ring; its inverse may be supplied as ``lead_inv``.
    """
    d = P.max_degree_in(var)
    if lead_inv is None:
        lead_inv = P.coeff_in(var, d).inverse()
    lower = P.split(var, d)[1]
    # the quotient is known to the dividend's precision relative to |P|
    q = TateSeries.zero(h.cfg, h.radius, h.prec - P.gauss_valuation(), h.cap)
    for _ in range(h.cap + 2):
        alpha, beta = h.split(var, d)
        if alpha.is_zero():
            return q, h
        a = alpha * lead_inv
        q = q + a
        h = beta - a * lower
    raise NoContraction("Weierstrass division did not terminate")


@dataclass(frozen=True)
class Preparation:
    """``f = u * P`` with ``u`` a unit, P a polynomial in ``t_var`` of degree ``j``."""

    u: TateSeries
    u_inv: TateSeries
    P: TateSeries
    degree: int
    var: int
    iterations: int
    residual_val: object

    def coefficients(self) -> list:
        return [self.P.coeff_in(self.var, i) for i in range(self.degree + 1)]


def weierstrass_prepare(f: TateSeries, var: int | None = None, prec=None) -> Preparation:
    """Successive approximation ``u_{k+1} = u_k + Q``, ``P_{k+1} = P_k + S``.

    Starting from ``u = 1`` and the truncation P of f to degrees ``<= j``,
    the residual ``R = f - uP`` is divided by P, ``R = QP + S``; the new
    residual is ``-(u - 1 + Q) S`` whose valuation must strictly increase.
    """
    var = f.n - 1 if var is None else var
    j, cj = f.leading_term(var)
    if not cj.is_unit():
        raise LeadingCoeffNotUnit("leading coefficient is not a unit of the coefficient ring")
    target = f.prec if prec is None else min(Fraction(prec), f.prec)
    lead_inv = cj.inverse()
    P = f.split(var, j + 1)[1]
    one = TateSeries.constant(f.cfg, f.radius, 1, f.prec - P.gauss_valuation(), f.cap)
    u = one
    R = f - P
    last = None
    iterations = 0
    while not (R.is_zero() or R.gauss_valuation() >= target):
        vR = R.gauss_valuation()
        if last is not None and vR <= last:
            raise NoContraction("Weierstrass residual valuation did not increase")
        last = vR
        Q, S = weierstrass_divide(R, P, var, lead_inv)
        u = u + Q
        P = P + S
        R = f - u * P
        iterations += 1
    u_inv = u.inverse()
    residual_val = R.prec if R.is_zero() else R.gauss_valuation()
    return Preparation(u, u_inv, P, j, var, iterations, residual_val)


def unit_conditions_hold(prep: Preparation) -> bool:
    """``b_j`` a unit and ``|b_i| rho^i <= |b_j| rho^j`` for ``i < j``."""
    coeffs = prep.coefficients()
    e = prep.P.radius.logs[prep.var]
    bj = coeffs[-1]
    if not bj.is_unit():
        return False
    top = bj.gauss_valuation() + prep.degree * e
    for i, b in enumerate(coeffs[:-1]):
        if not b.is_zero() and b.gauss_valuation() + i * e < top:
            return False
    return True


# ---------------------------------------------------------------- T_j maps

@dataclass(frozen=True)
class TjMap:
    """``t_i -> t_i + sign * (u t_s^m)^(j^(s-i))`` for ``i < s``, ``u = p**u_exp``."""

    j: int
    special: int
    m: int
    u_exp: int
    mode: str = "field"
    lam: Fraction = Fraction(1)

    def shifts(self):
        for i in range(self.special):
            J = self.j ** (self.special - i)
            yield i, self.m * J, self.u_exp * J

    def apply(self, f: TateSeries, sign: int = 1) -> TateSeries:
        if self.j == 0:
            return f
        out = f
        for i, power, cexp in self.shifts():
            out = out.substitute(i, self.special, power, cexp, sign)
        return out

    def inverse(self, f: TateSeries) -> TateSeries:
        return self.apply(f, -1)

    def to_json(self) -> dict:
        return {"j": self.j, "special": self.special, "m": self.m, "u": ["p", self.u_exp],
                "mode": self.mode, "lambda": [self.lam.numerator, self.lam.denominator]}


def calibration(radius: PolyRadius, special: int) -> tuple[int, int]:
    """``(m, u_exp)`` with ``|p^u_exp| rho_s^m = 1``, m minimal.

    Substituting ``t_i + (u t_s^m)^J`` stays inside the algebra only when
    ``rho_i >= 1`` for the other active variables.
    """
    es = radius.logs[special]
    m = es.denominator
    for i in range(special):
        if radius.logs[i] > 0:
            raise BadCalibration(f"radius of t_{i + 1} is below 1; T_j would not preserve the algebra")
    return m, int(-m * es)


def tj_map(radius: PolyRadius, j: int, special: int | None = None, mode: str = "field") -> TjMap:
    special = radius.n - 1 if special is None else special
    if mode == "field":
        m, u_exp = calibration(radius, special)
        return TjMap(j, special, m, u_exp, "field")
    if mode == "ring":
        if any(x >= 0 for x in radius.logs[:special + 1]):
            raise BadCalibration("ring mode needs every radius strictly above 1")
        return TjMap(j, special, 1, 0, "ring")
    raise ValueError(f"unknown mode {mode!r}")


def tj_transform(f: TateSeries, j: int, mode: str = "field", special: int | None = None):
    """Apply ``T_j``.  In ring mode returns the series over the rescaled radius.

    Ring mode picks the largest ``lambda = 1/2^k`` (``k <= 10``) for which the
    leading coefficient in ``t_s`` over ``(rho')^lambda, rho_s^lambda`` is a
    unit with integral constant term, and reports it on the returned map.
    """
    T = tj_map(f.radius, j, special, mode)
    g = T.apply(f)
    if mode == "field":
        return T, g
    for k in range(11):
        lam = Fraction(1, 2 ** k)
        h = TateSeries._make(g.cfg, g.radius.scaled(lam), g.exps, g.nums, g.den, g.prec, g.cap)
        if h.is_zero():
            break
        _, c = h.leading_term(T.special)
        if c.is_unit() and _vp_fraction(h.cfg.p, c.constant_term()) == 0:
            return TjMap(T.j, T.special, T.m, T.u_exp, "ring", lam), h
    raise LeadingCoeffNotUnit(f"no lambda = 1/2^k (k <= 10) makes the leading coefficient a unit for j={j}")


def tj_find(f: TateSeries, jmax: int = 16, mode: str = "field", special: int | None = None):
    """Smallest ``j <= jmax`` for which ``T_j(f)`` is unit-leading in ``t_s``."""
    special = f.n - 1 if special is None else special
    if f.is_zero():
        raise ZeroAtPrecision("series is zero at this precision")
    for j in range(jmax + 1):
        try:
            T, g = tj_transform(f, j, mode, special)
        except WindowOverflow as exc:
            raise JMaxExceeded(f"degree cap reached at j={j} before a unit leading coefficient") from exc
        except LeadingCoeffNotUnit:
            continue
        if g.is_unit_leading(special):
            return T, g
    raise JMaxExceeded(f"no j <= {jmax} gives a unit leading coefficient")


def default_guard() -> int:
    return guard_digits()
