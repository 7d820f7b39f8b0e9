"""Arithmetic in the coefficient ring O with explicit precision.

O is ``Z_p[pi]`` with ``pi**e = p`` (Eisenstein polynomial ``x**e - p``); for
``e = 1`` it is just ``Z_p``.  An element is stored as its coordinates
``(a_0, ..., a_{e-1})`` in the basis ``1, pi, ..., pi**(e-1)``, known modulo
``pi**N``.  Valuations are tracked internally in pi-units (``v_pi = e*v_p``)
and reported as exact :class:`~fractions.Fraction` values of ``v_p``.
"""
from __future__ import annotations

import math
import os
from dataclasses import dataclass
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .errors import IncompatibleOperands, NotAUnit, PrecisionExhausted

_I64_SAFE = 1 << 62

DEFAULT_GUARD_DIGITS = 2


def guard_digits() -> int:
    """Guard digits used internally (``ROBBA_KIT_GUARD_DIGITS`` overrides)."""
    raw = os.environ.get("ROBBA_KIT_GUARD_DIGITS")
    if raw is None or raw.strip() == "":
        return DEFAULT_GUARD_DIGITS
    value = int(raw)
    if value < 0:
        raise ValueError("ROBBA_KIT_GUARD_DIGITS must be nonnegative")
    return value


def is_prime(n: int) -> bool:
    if n < 2:
        return False
    if n % 2 == 0:
        return n == 2
    k = 3
    while k * k <= n:
        if n % k == 0:
            return False
        k += 2
    return True


def vp_int(n: int, p: int) -> int | None:
    """p-adic valuation of a Python integer (``None`` for zero)."""
    if n == 0:
        return None
    n = abs(n)
    v = 0
    while n % p == 0:
        n //= p
        v += 1
    return v


def ceil_div(a: int, b: int) -> int:
    return -((-a) // b)


@dataclass(frozen=True)
class RingConfig:
    """Coefficient ring data: residue field F_p, q = p**f, ramification e."""

    p: int
    f: int = 1
    e: int = 1
    N_default: int = 12

    def __post_init__(self):
        if not is_prime(self.p):
            raise ValueError(f"p={self.p} is not prime")
        if self.f < 1 or self.e < 1 or self.N_default < 1:
            raise ValueError("need f >= 1, e >= 1 and N_default >= 1")

    @property
    def q(self) -> int:
        return self.p ** self.f

    def digits(self, prec: int) -> int:
        """Number of p-adic digits needed to hold pi-adic precision ``prec``."""
        return max(0, ceil_div(prec, self.e))

    def modulus(self, prec: int) -> int:
        return self.p ** self.digits(prec)

    def component_digits(self, prec: int) -> list[int]:
        """p-adic digits kept in coordinate ``c`` at pi-adic precision ``prec``."""
        return [max(0, ceil_div(prec - c, self.e)) for c in range(self.e)]

    def to_json(self) -> dict:
        return {"p": self.p, "f": self.f, "e": self.e, "N": self.N_default}


@dataclass(frozen=True)
class AtLeast:
    """Sentinel valuation: the element is zero at the working precision."""

    bound: Fraction

    def __str__(self) -> str:
        return f">={self.bound}"

    def __float__(self) -> float:  # pragma: no cover - convenience only
        return math.inf


# ----------------------------------------------------- vectorised pi-helpers

def canon_rows(arr: np.ndarray, cfg: RingConfig, prec: int) -> np.ndarray:
    """Reduce each coordinate column to the digits allowed by ``prec``.

    ``arr`` has shape ``(L, e)``.  Returns an object array.
    """
    out = np.array(arr, dtype=object)
    if out.size == 0:
        return out.reshape(-1, cfg.e)
    for c, d in enumerate(cfg.component_digits(prec)):
        out[:, c] = out[:, c] % (cfg.p ** d)
    return out


def pi_mul_rows(arr: np.ndarray, cfg: RingConfig, s: int) -> np.ndarray:
    """Multiply every row (an element of O) by ``pi**s`` for ``s >= 0``."""
    if s < 0:
        raise ValueError("use pi_div_rows for negative shifts")
    a, b = divmod(s, cfg.e)
    src = np.array(arr, dtype=object)
    out = np.zeros_like(src)
    for c in range(cfg.e):
        t = c + b
        if t >= cfg.e:
            out[:, t - cfg.e] = src[:, c] * cfg.p
        else:
            out[:, t] = src[:, c]
    if a:
        out = out * (cfg.p ** a)
    return out


def pi_div_rows(arr: np.ndarray, cfg: RingConfig, s: int) -> np.ndarray:
    """Exact division of every row by ``pi**s`` (caller guarantees divisibility)."""
    if s <= 0:
        return pi_mul_rows(arr, cfg, -s)
    a, b = divmod(s, cfg.e)
    out = np.array(arr, dtype=object)
    if b:
        out = pi_mul_rows(out, cfg, cfg.e - b)
        a += 1
    if a:
        div = cfg.p ** a
        if np.any(out % div != 0):
            raise ArithmeticError("inexact division by a power of pi")
        out = out // div
    return out


def _digit_valuations(col: np.ndarray, p: int, cap: int) -> np.ndarray:
    """p-adic valuations (capped) of nonzero integers, in int64-sized chunks."""
    if col.dtype != object:
        return K.valuation(col.astype(np.int64), p, cap)
    k = 1
    while p ** (k + 1) < _I64_SAFE:
        k += 1
    block = p ** k
    out = np.full(col.shape[0], cap, dtype=np.int64)
    idx = np.arange(col.shape[0])
    rest = col
    base = 0
    while idx.size and base < cap:
        low = (rest % block).astype(np.int64)
        hit = low != 0
        out[idx[hit]] = base + K.valuation(low[hit], p, k)
        idx = idx[~hit]
        rest = rest[~hit] // block
        base += k
    return np.minimum(out, cap)


def row_valuations(arr: np.ndarray, cfg: RingConfig, cap: int) -> np.ndarray:
    """pi-adic valuation of every row, ``cap`` for rows that are zero."""
    arr = np.asarray(arr)
    n = arr.shape[0]
    best = np.full(n, cap, dtype=np.int64)
    for c in range(cfg.e):
        col = arr[:, c]
        nz = col != 0
        if not np.any(nz):
            continue
        v = np.full(n, cap, dtype=np.int64)
        v[nz] = cfg.e * _digit_valuations(col[nz], cfg.p, cap // cfg.e + 1) + c
        best = np.minimum(best, v)
    return best


def mul_components(a, b, cfg: RingConfig) -> list[int]:
    """Product of two coordinate tuples, folding ``pi**e = p``."""
    e = cfg.e
    out = [0] * e
    for i, x in enumerate(a):
        if x == 0:
            continue
        for j, y in enumerate(b):
            if y == 0:
                continue
            k = i + j
            if k >= e:
                out[k - e] += x * y * cfg.p
            else:
                out[k] += x * y
    return out


# ------------------------------------------------------------------- OElem

@dataclass(frozen=True)
class OElem:
    """An element of O known modulo ``pi**prec``."""

    cfg: RingConfig
    comps: tuple
    prec: int

    def __post_init__(self):
        if self.prec < 0:
            raise PrecisionExhausted("negative precision")
        if len(self.comps) != self.cfg.e:
            raise ValueError("wrong number of coordinates")
        digits = self.cfg.component_digits(self.prec)
        object.__setattr__(
            self, "comps", tuple(int(c) % (self.cfg.p ** d) for c, d in zip(self.comps, digits))
        )

    # construction ---------------------------------------------------------
    @classmethod
    def from_int(cls, cfg: RingConfig, n: int, prec: int | None = None) -> "OElem":
        prec = cfg.N_default if prec is None else prec
        return cls(cfg, (n,) + (0,) * (cfg.e - 1), prec)

    @classmethod
    def from_rational(cls, cfg: RingConfig, x, prec: int | None = None) -> "OElem":
        """Embed a rational whose denominator is prime to p."""
        prec = cfg.N_default if prec is None else prec
        x = Fraction(x)
        if x.denominator % cfg.p == 0:
            raise NotAUnit(f"{x} is not integral at p={cfg.p}")
        m = cfg.modulus(prec)
        return cls.from_int(cfg, x.numerator * pow(x.denominator, -1, m), prec)

    @classmethod
    def pi_power(cls, cfg: RingConfig, k: int, prec: int | None = None) -> "OElem":
        prec = cfg.N_default if prec is None else prec
        a, b = divmod(k, cfg.e)
        comps = [0] * cfg.e
        comps[b] = cfg.p ** a
        return cls(cfg, tuple(comps), prec)

    @classmethod
    def zero(cls, cfg: RingConfig, prec: int | None = None) -> "OElem":
        return cls.from_int(cfg, 0, prec)

    @classmethod
    def one(cls, cfg: RingConfig, prec: int | None = None) -> "OElem":
        return cls.from_int(cfg, 1, prec)

    # queries --------------------------------------------------------------
    def vpi(self) -> int | None:
        """pi-adic valuation, or ``None`` when zero at precision."""
        best = None
        for c, a in enumerate(self.comps):
            if a:
                v = self.cfg.e * vp_int(a, self.cfg.p) + c
                best = v if best is None else min(best, v)
        if best is None or best >= self.prec:
            return None
        return best

    def valuation(self):
        """Exact ``v_p`` as a Fraction, or :class:`AtLeast` when zero at precision."""
        v = self.vpi()
        if v is None:
            return AtLeast(Fraction(self.prec, self.cfg.e))
        return Fraction(v, self.cfg.e)

    def is_zero(self) -> bool:
        return self.vpi() is None

    def is_unit(self) -> bool:
        return self.vpi() == 0

    def abs_value(self) -> Fraction:
        """``|x| = p**(-v_p(x))``; zero at precision gives 0."""
        v = self.valuation()
        if isinstance(v, AtLeast):
            return Fraction(0)
        return Fraction(self.cfg.p) ** (-v)

    def to_int(self) -> int:
        """Single integer encoding ``sum a_c * (p**K)**c`` with ``K = ceil(N/e)``."""
        base = self.cfg.p ** self.cfg.digits(self.prec)
        return sum(a * base ** c for c, a in enumerate(self.comps))

    @classmethod
    def from_encoded(cls, cfg: RingConfig, value: int, prec: int) -> "OElem":
        base = cfg.p ** cfg.digits(prec)
        comps = []
        for _ in range(cfg.e):
            value, r = divmod(value, base)
            comps.append(r)
        if value:
            raise ValueError("encoded value out of range")
        return cls(cfg, tuple(comps), prec)

    # arithmetic -----------------------------------------------------------
    def _check(self, other: "OElem") -> None:
        if not isinstance(other, OElem) or other.cfg != self.cfg:
            raise IncompatibleOperands("operands live in different rings")

    def _coerce(self, other) -> "OElem":
        if isinstance(other, int):
            return OElem.from_int(self.cfg, other, self.prec)
        self._check(other)
        return other

    def __add__(self, other):
        other = self._coerce(other)
        prec = min(self.prec, other.prec)
        return OElem(self.cfg, tuple(a + b for a, b in zip(self.comps, other.comps)), prec)

    __radd__ = __add__

    def __neg__(self):
        return OElem(self.cfg, tuple(-a for a in self.comps), self.prec)

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        vx = self.vpi()
        vy = other.vpi()
        vx = self.prec if vx is None else vx
        vy = other.prec if vy is None else vy
        prec = min(self.prec + vy, other.prec + vx)
        return OElem(self.cfg, tuple(mul_components(self.comps, other.comps, self.cfg)), prec)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inv() ** (-k)
        out = OElem.one(self.cfg, self.prec)
        base = self
        while k:
            if k & 1:
                out = out * base
            base = base * base
            k >>= 1
        return out

    def inv(self) -> "OElem":
        """Inverse of a unit, exact modulo ``pi**prec``."""
        if self.prec == 0:
            raise PrecisionExhausted("no digits left to invert")
        if not self.is_unit():
            raise NotAUnit(f"v_p = {self.valuation()} is positive")
        m = self.cfg.modulus(self.prec)
        if self.cfg.e == 1:
            return OElem(self.cfg, (pow(self.comps[0], -1, m),), self.prec)
        # Newton iteration y <- y(2 - x y), starting from the residue inverse.
        y = OElem.from_int(self.cfg, pow(self.comps[0], -1, self.cfg.p), self.prec)
        two = OElem.from_int(self.cfg, 2, self.prec)
        good = 1
        while good < self.prec:
            y = y * (two - self * y)
            y = OElem(self.cfg, y.comps, self.prec)
            good *= 2
        return y

    def div_pi(self, k: int) -> "OElem":
        """Exact division by ``pi**k``; precision drops by ``k``."""
        if k < 0:
            return self * OElem.pi_power(self.cfg, -k, self.prec)
        if self.prec - k <= 0:
            raise PrecisionExhausted("all digits cancelled")
        v = self.vpi()
        if v is not None and v < k:
            raise NotAUnit(f"not divisible by pi^{k}")
        rows = np.array([self.comps], dtype=object)
        rows = canon_rows(rows, self.cfg, self.prec)
        # the part beyond precision is junk; clear it before dividing
        shifted = pi_div_rows(_clear_below(rows, self.cfg, k), self.cfg, k)
        return OElem(self.cfg, tuple(int(x) for x in shifted[0]), self.prec - k)

    def with_prec(self, prec: int) -> "OElem":
        return OElem(self.cfg, self.comps, min(prec, self.prec))

    def lift(self, prec: int) -> "OElem":
        """Treat the stored representative as exact and raise the precision."""
        return OElem(self.cfg, self.comps, prec)

    def equals(self, other: "OElem", prec: int | None = None) -> bool:
        """Congruence modulo ``pi**prec`` (default: the common precision)."""
        other = self._coerce(other)
        d = self - other
        limit = d.prec if prec is None else min(prec, d.prec)
        v = d.vpi()
        return v is None or v >= limit

    def __eq__(self, other):
        if isinstance(other, (OElem, int)):
            return self.equals(other)
        return NotImplemented

    def __hash__(self):
        return hash((self.cfg, self.comps, self.prec))

    def __repr__(self) -> str:
        if self.cfg.e == 1:
            return f"OElem({self.comps[0]} mod {self.cfg.p}^{self.prec})"
        return f"OElem({list(self.comps)} mod pi^{self.prec})"


def _clear_below(rows: np.ndarray, cfg: RingConfig, k: int) -> np.ndarray:
    """Zero the digits of weight below ``pi**k`` (they must vanish for exact division)."""
    out = np.array(rows, dtype=object)
    for c in range(cfg.e):
        need = ceil_div(k - c, cfg.e)
        if need > 0:
            m = cfg.p ** need
            out[:, c] = out[:, c] - out[:, c] % m
    return out


def teichmuller(cfg: RingConfig, a: int, prec: int | None = None) -> OElem:
    """Teichmuller lift of ``a`` in F_p: the fixed point of ``x -> x**p``."""
    if cfg.e != 1:
        raise ValueError("Teichmuller lifts are provided for e = 1 only")
    if not 0 <= a < cfg.p:
        raise ValueError("residue must satisfy 0 <= a < p")
    prec = cfg.N_default if prec is None else prec
    m = cfg.p ** prec
    x = a % m
    # each application of x -> x^p gains one p-adic digit
    for _ in range(prec + 1):
        x = pow(x, cfg.p, m)
    return OElem.from_int(cfg, x, prec)


def sigma0_coeff(x: OElem) -> OElem:
    """The Frobenius lift on O.

    The residue field is F_p and ``pi`` is fixed, so this is the identity; it
    is kept as the single place a nontrivial lift would be installed.
    """
    return x
