"""Truncated bidirectional series: models of Gamma, Gamma_con and the Robba ring.

A :class:`LaurentSeries` stands for ``pi**(-den) * sum_i A_i u**i`` with
``A_i`` in O.  It is known modulo ``pi**prec`` (absolute precision, pi-units)
on a *window*:

* below ``lo`` every coefficient is zero modulo ``pi**prec`` (the truncated
  form of ``v_p(x_i) -> oo`` as ``i -> -oo``);
* when ``open_right`` is set, coefficients beyond ``hi`` are unknown;
  otherwise the series is a Laurent polynomial and ``hi`` bounds its support.

Operations shrink the right edge conservatively and refuse to answer
questions that depend on unknown coefficients.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction

import numpy as np

from . import _kernels as K
from .errors import (
    IncompatibleOperands,
    NotInvertibleAtPrecision,
    PrecisionExhausted,
    UncertifiedWindow,
    WindowEmpty,
    WindowOverflow,
    ZeroAtPrecision,
)
from .padic import (
    AtLeast,
    OElem,
    RingConfig,
    canon_rows,
    ceil_div,
    pi_div_rows,
    pi_mul_rows,
    row_valuations,
    vp_int,
)

#: largest absolute exponent a series may carry
EXP_CAP = 1 << 60
#: right edge used when inverting a series whose inverse is not a polynomial
DEFAULT_INVERSE_WINDOW = 64

INF = math.inf


@dataclass(frozen=True)
class Tag:
    """Ring tag: ``Gamma``, ``GammaCon`` (with r) or ``Robba`` (with r)."""

    kind: str = "GammaCon"
    r: Fraction | None = Fraction(1)

    def __post_init__(self):
        if self.kind not in ("Gamma", "GammaCon", "Robba"):
            raise ValueError(f"unknown ring tag {self.kind!r}")
        if self.kind == "Gamma":
            object.__setattr__(self, "r", None)
        else:
            r = Fraction(self.r if self.r is not None else 1)
            if r <= 0:
                raise ValueError("overconvergence parameter must be positive")
            object.__setattr__(self, "r", r)

    def combine(self, other: "Tag") -> "Tag":
        kinds = {self.kind, other.kind}
        if kinds == {"Gamma", "Robba"}:
            raise IncompatibleOperands("cannot combine Gamma and Robba elements")
        if "Gamma" in kinds:
            return Tag("Gamma")
        kind = "Robba" if "Robba" in kinds else "GammaCon"
        return Tag(kind, min(self.r, other.r))

    def scaled(self, factor: Fraction) -> "Tag":
        if self.kind == "Gamma":
            return self
        return Tag(self.kind, self.r * factor)

    def to_json(self) -> dict:
        out = {"tag": self.kind}
        if self.r is not None:
            out["r"] = [self.r.numerator, self.r.denominator]
        return out


def _to_dtype(rows: np.ndarray, modulus: int) -> np.ndarray:
    if modulus < K.INT64_LIMIT:
        return np.asarray(rows, dtype=object).astype(np.int64).reshape(rows.shape)
    return np.asarray(rows, dtype=object)


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    cfg: RingConfig
    exps: np.ndarray
    coeffs: np.ndarray
    den: int
    prec: int
    lo: int
    hi: int
    open_right: bool = False
    tag: Tag = field(default_factory=Tag)

    # ------------------------------------------------------------ building
    @classmethod
    def _make(cls, cfg, exps, coeffs, den, prec, lo, hi, open_right, tag) -> "LaurentSeries":
        exps = np.asarray(exps, dtype=np.int64).reshape(-1)
        coeffs = np.asarray(coeffs, dtype=object).reshape(-1, cfg.e)
        numer_prec = prec + den
        if numer_prec <= 0:
            exps = exps[:0]
            coeffs = coeffs[:0]
        else:
            coeffs = canon_rows(coeffs, cfg, numer_prec)
        if exps.size:
            keep = np.any(coeffs != 0, axis=1)
            if open_right:
                keep &= exps <= hi
            exps = exps[keep]
            coeffs = coeffs[keep]
        if exps.size:
            order = np.argsort(exps, kind="stable")
            exps = exps[order]
            coeffs = coeffs[order]
            if np.any(exps[1:] == exps[:-1]):
                raise ValueError("duplicate exponents")
            if exps[0] < lo:
                lo = int(exps[0])
            if not open_right and exps[-1] > hi:
                hi = int(exps[-1])
        if open_right and hi < lo:
            raise WindowEmpty(f"certified window [{lo}, {hi}] is empty")
        if max(abs(lo), abs(hi)) > EXP_CAP:
            raise WindowOverflow(f"exponent window [{lo}, {hi}] exceeds cap 2^60")
        # move common pi-powers out of the denominator
        if den > 0 and exps.size:
            vmin = int(row_valuations(coeffs, cfg, den + 1).min())
            s = min(den, vmin)
            if s > 0:
                coeffs = pi_div_rows(coeffs, cfg, s)
                den -= s
        elif den > 0:
            den = 0
        modulus = cfg.modulus(prec + den)
        return cls(cfg, exps, _to_dtype(coeffs, modulus), int(den), int(prec), int(lo), int(hi),
                   bool(open_right), tag)

    @classmethod
    def from_terms(cls, cfg: RingConfig, terms, prec: int | None = None, window=None,
                   open_right: bool = False, tag: Tag | None = None) -> "LaurentSeries":
        """Build a series from ``{exponent: coefficient}``.

        Coefficients may be ints, Fractions (p-power denominators allowed),
        coordinate tuples of length ``e`` or :class:`OElem` values.
        """
        prec = cfg.N_default if prec is None else prec
        tag = Tag() if tag is None else tag
        items = sorted((int(i), c) for i, c in dict(terms).items())
        den = 0
        parsed = []
        for i, c in items:
            rows, d = _parse_coeff(cfg, c, prec)
            parsed.append((i, rows, d))
            den = max(den, d)
        exps = [i for i, _, _ in parsed]
        rows = []
        for i, r, d in parsed:
            rows.append(pi_mul_rows(np.array([r], dtype=object), cfg, den - d)[0])
        coeffs = np.array(rows, dtype=object).reshape(-1, cfg.e)
        if window is None:
            lo = min(exps) if exps else 0
            hi = max(exps) if exps else 0
        else:
            lo, hi = int(window[0]), int(window[1])
            if exps and (min(exps) < lo or max(exps) > hi):
                raise ValueError("terms fall outside the declared window")
        return cls._make(cfg, exps, coeffs, den, prec, lo, hi, open_right, tag)

    @classmethod
    def zero(cls, cfg: RingConfig, prec: int | None = None, tag: Tag | None = None):
        return cls.from_terms(cfg, {}, prec=prec, tag=tag)

    @classmethod
    def constant(cls, cfg: RingConfig, c, prec: int | None = None, tag: Tag | None = None):
        return cls.from_terms(cfg, {0: c}, prec=prec, tag=tag)

    @classmethod
    def monomial(cls, cfg: RingConfig, i: int, c=1, prec: int | None = None, tag: Tag | None = None):
        return cls.from_terms(cfg, {i: c}, prec=prec, tag=tag)

    def _replace(self, **kw) -> "LaurentSeries":
        args = dict(cfg=self.cfg, exps=self.exps, coeffs=self.coeffs, den=self.den, prec=self.prec,
                    lo=self.lo, hi=self.hi, open_right=self.open_right, tag=self.tag)
        args.update(kw)
        return LaurentSeries._make(**args)

    # ------------------------------------------------------------ queries
    @property
    def numer_prec(self) -> int:
        return self.prec + self.den

    def __len__(self) -> int:
        return int(self.exps.size)

    def terms(self) -> dict:
        """``{exponent: OElem numerator}``; the value is numerator / pi**den."""
        P = max(self.numer_prec, 0)
        return {int(i): OElem(self.cfg, tuple(int(x) for x in row), P)
                for i, row in zip(self.exps, self.coeffs)}

    def term_valuations(self) -> np.ndarray:
        """pi-adic valuation of every stored coefficient of the value."""
        if not self.exps.size:
            return np.zeros(0, dtype=np.int64)
        return row_valuations(self.coeffs, self.cfg, self.numer_prec) - self.den

    def vpi_min(self) -> int | None:
        """Minimum pi-adic valuation over all coefficients, None when zero."""
        if not self.exps.size:
            return None
        return int(self.term_valuations().min())

    def valuation(self):
        """``min_i v_p(x_i)`` as a Fraction, or :class:`AtLeast` when zero."""
        v = self.vpi_min()
        if v is None:
            return AtLeast(Fraction(self.prec, self.cfg.e))
        return Fraction(v, self.cfg.e)

    def is_zero(self) -> bool:
        return self.exps.size == 0

    def coeff(self, i: int):
        """Coefficient of ``u**i`` as ``(OElem numerator, den)``."""
        if self.open_right and i > self.hi:
            raise UncertifiedWindow(f"exponent {i} lies beyond the certified window")
        idx = np.searchsorted(self.exps, i)
        P = max(self.numer_prec, 0)
        if idx < self.exps.size and self.exps[idx] == i:
            row = self.coeffs[idx]
            return OElem(self.cfg, tuple(int(x) for x in row), P), self.den
        return OElem.zero(self.cfg, P), self.den

    # ------------------------------------------------------------ arithmetic
    def _check(self, other: "LaurentSeries") -> None:
        if not isinstance(other, LaurentSeries) or other.cfg != self.cfg:
            raise IncompatibleOperands("series over different coefficient rings")

    def _coerce(self, other) -> "LaurentSeries":
        if isinstance(other, LaurentSeries):
            self._check(other)
            return other
        if isinstance(other, (int, Fraction, OElem, tuple)):
            prec = other.prec if isinstance(other, OElem) else self.prec
            return LaurentSeries.constant(self.cfg, other, prec=prec, tag=self.tag)
        raise TypeError(f"cannot combine LaurentSeries with {type(other).__name__}")

    def __add__(self, other):
        other = self._coerce(other)
        cfg = self.cfg
        den = max(self.den, other.den)
        prec = min(self.prec, other.prec)
        a = pi_mul_rows(self.coeffs, cfg, den - self.den) if self.exps.size else np.zeros((0, cfg.e), object)
        b = pi_mul_rows(other.coeffs, cfg, den - other.den) if other.exps.size else np.zeros((0, cfg.e), object)
        exps = np.concatenate([self.exps, other.exps])
        rows = np.concatenate([a, b]).reshape(-1, cfg.e)
        uniq, inv = np.unique(exps, return_inverse=True)
        acc = np.zeros((uniq.size, cfg.e), dtype=object)
        for c in range(cfg.e):
            col = acc[:, c].copy()
            np.add.at(col, inv, rows[:, c])
            acc[:, c] = col
        lo = min(self.lo, other.lo)
        opens = [s.hi for s in (self, other) if s.open_right]
        if opens:
            hi, open_right = min(opens), True
        else:
            hi, open_right = max(self.hi, other.hi), False
        return LaurentSeries._make(cfg, uniq, acc, den, prec, lo, hi, open_right,
                                   self.tag.combine(other.tag))

    __radd__ = __add__

    def __neg__(self):
        return self._replace(coeffs=-np.asarray(self.coeffs, dtype=object))

    def __sub__(self, other):
        return self + (-self._coerce(other))

    def __rsub__(self, other):
        return self._coerce(other) - self

    def __mul__(self, other):
        other = self._coerce(other)
        return _series_mul(self, other)

    __rmul__ = __mul__

    def __pow__(self, k: int):
        if k < 0:
            return self.inverse() ** (-k)
        out = LaurentSeries.constant(self.cfg, 1, prec=self.prec, tag=self.tag)
        base = self
        while k:
            if k & 1:
                out = out * base
            k >>= 1
            if k:
                base = base * base
        return out

    def mul_pi_power(self, k: int) -> "LaurentSeries":
        """Multiply by ``pi**k`` (k may be negative); precision shifts by k."""
        if k >= 0:
            return self._replace(coeffs=pi_mul_rows(self.coeffs, self.cfg, k) if self.exps.size
                                 else self.coeffs, prec=self.prec + k)
        return self._replace(den=self.den - k, prec=self.prec + k)

    def shift(self, a: int) -> "LaurentSeries":
        """Multiply by ``u**a``."""
        return self._replace(exps=self.exps + a, lo=self.lo + a, hi=self.hi + a)

    def with_prec(self, prec: int) -> "LaurentSeries":
        return self._replace(prec=min(prec, self.prec))

    def lift(self, prec: int) -> "LaurentSeries":
        """Treat the stored representative as exact and set precision ``prec``."""
        return self._replace(prec=prec)

    def truncate(self, hi: int) -> "LaurentSeries":
        """Forget coefficients beyond ``hi`` (the result is open on the right)."""
        if self.open_right:
            hi = min(hi, self.hi)
        return self._replace(hi=hi, open_right=True)

    def with_tag(self, tag: Tag) -> "LaurentSeries":
        return LaurentSeries(self.cfg, self.exps, self.coeffs, self.den, self.prec, self.lo,
                             self.hi, self.open_right, tag)

    def equals(self, other, prec: int | None = None) -> bool:
        """Congruence modulo ``pi**prec`` on the common certified window."""
        d = self - self._coerce(other)
        limit = d.prec if prec is None else min(prec, d.prec)
        v = d.vpi_min()
        return v is None or v >= limit

    # ------------------------------------------------------------ valuations
    def vn_naive(self, n) -> int | float:
        """Smallest exponent whose coefficient has ``v_p <= n`` (``inf`` if none)."""
        n = Fraction(n)
        if n * self.cfg.e >= self.prec:
            raise UncertifiedWindow(
                f"n = {n} is not below the precision {Fraction(self.prec, self.cfg.e)}; "
                "coefficients left of the window could qualify")
        if self.exps.size:
            v = self.term_valuations()
            hits = np.nonzero(v <= n * self.cfg.e)[0]
            if hits.size:
                return int(self.exps[hits[0]])
        if self.open_right:
            raise UncertifiedWindow("no qualifying exponent inside the open window")
        return INF

    def wr(self, r) -> Fraction | float:
        """Gauss valuation ``w_r(x) = min_n (r v_n(x) + n)``, exact."""
        r = Fraction(r)
        if r <= 0:
            raise ValueError("r must be positive")
        if self.open_right and self.tag.r is not None and r > self.tag.r:
            raise UncertifiedWindow(f"r = {r} exceeds the certified parameter {self.tag.r}")
        e = self.cfg.e
        best = INF
        if self.exps.size:
            v = self.term_valuations()
            # minimise over the distinct valuation levels n = v/e
            for level in np.unique(v):
                j = int(self.exps[np.nonzero(v <= level)[0][0]])
                cand = r * j + Fraction(int(level), e)
                if best == INF or cand < best:
                    best = cand
        if self.open_right:
            floor = r * (self.hi + 1) + Fraction(-self.den, e)
            if best == INF or floor < best:
                raise UncertifiedWindow("unknown coefficients beyond the window could lower w_r")
        return best

    # ------------------------------------------------------------ sigma, d/du
    def sigma(self, action: "SigmaAction | None" = None, times: int = 1) -> "LaurentSeries":
        out = self
        act = action if action is not None else SigmaAction.standard(self.cfg)
        for _ in range(times):
            out = act.apply(out)
        return out

    def derive(self) -> "LaurentSeries":
        """The du-component of ``d(sum x_j u^j) = sum j x_j u^(j-1) du``."""
        rows = np.asarray(self.coeffs, dtype=object) * self.exps.astype(object)[:, None]
        return self._replace(exps=self.exps - 1, coeffs=rows, lo=self.lo - 1, hi=self.hi - 1)

    # ------------------------------------------------------------ inverse
    def inverse(self, window: int | None = None) -> "LaurentSeries":
        """Inverse in Gamma[1/p] for elements whose reduction is a unit.

        After removing the largest pi-power, the lowest exponent with a unit
        coefficient must exist.  When the inverse is not a Laurent polynomial
        the result is open on the right at ``window`` (relative to the
        normalised element; default 64).
        """
        v0 = self.vpi_min()
        if v0 is None:
            raise NotInvertibleAtPrecision("series is zero at this precision")
        xn = self.mul_pi_power(-v0)  # now min valuation 0, den == 0
        P = xn.prec
        if P <= 0:
            raise PrecisionExhausted("no relative precision left to invert")
        vals = xn.term_valuations()
        units = np.nonzero(vals == 0)[0]
        a = int(xn.exps[units[0]])
        if xn.open_right and a > xn.hi:
            raise NotInvertibleAtPrecision("no unit coefficient in the certified window")
        c = OElem(self.cfg, tuple(int(x) for x in xn.coeffs[units[0]]), P)
        cinv = c.inv()
        y = (xn * LaurentSeries.constant(self.cfg, cinv, prec=P, tag=self.tag)).shift(-a) - 1
        s = _geometric_inverse(y, P, window)
        out = s * LaurentSeries.constant(self.cfg, cinv, prec=P, tag=self.tag)
        return out.shift(-a).mul_pi_power(-v0).with_tag(self.tag)

    def is_unit(self) -> bool:
        try:
            self.inverse()
        except (NotInvertibleAtPrecision, PrecisionExhausted):
            return False
        return True

    # ------------------------------------------------------------ misc
    def __repr__(self) -> str:
        side = "..." if self.open_right else ""
        parts = []
        for i, row in zip(self.exps[:8], self.coeffs[:8]):
            coef = int(row[0]) if self.cfg.e == 1 else tuple(int(x) for x in row)
            parts.append(f"{coef}*u^{int(i)}")
        more = " + ..." if self.exps.size > 8 else ""
        den = f"pi^-{self.den}*" if self.den else ""
        return (f"LaurentSeries({den}({' + '.join(parts) or '0'}{more}) mod pi^{self.prec}, "
                f"window=[{self.lo},{self.hi}{side}], {self.tag.kind})")


def _parse_coeff(cfg: RingConfig, c, prec: int):
    """Return (coordinate row, den) for a user supplied coefficient."""
    if isinstance(c, OElem):
        if c.cfg != cfg:
            raise IncompatibleOperands("coefficient from a different ring")
        return list(c.comps), 0
    if isinstance(c, tuple):
        if len(c) != cfg.e:
            raise ValueError("coordinate tuple has the wrong length")
        return [int(x) for x in c], 0
    if isinstance(c, (int, np.integer)):
        return [int(c)] + [0] * (cfg.e - 1), 0
    x = Fraction(c)
    k = vp_int(x.denominator, cfg.p) or 0
    rest = x.denominator // cfg.p ** k
    den = cfg.e * k
    modulus = cfg.modulus(prec + den)
    num = x.numerator * pow(rest, -1, modulus) if modulus > 1 else 0
    return [num] + [0] * (cfg.e - 1), den


def _series_mul(x: LaurentSeries, y: LaurentSeries) -> LaurentSeries:
    cfg = x.cfg
    tag = x.tag.combine(y.tag)
    vx = x.vpi_min()
    vy = y.vpi_min()
    vx = x.prec if vx is None else vx
    vy = y.prec if vy is None else vy
    prec = min(x.prec + vy, y.prec + vx)
    den = x.den + y.den
    lo = x.lo + y.lo
    if x.open_right and y.open_right:
        hi, open_right = min(x.hi + y.lo, y.hi + x.lo), True
    elif x.open_right:
        hi, open_right = x.hi + y.lo, True
    elif y.open_right:
        hi, open_right = y.hi + x.lo, True
    else:
        hi, open_right = x.hi + y.hi, False
    if open_right and hi < lo:
        raise WindowEmpty("product has an empty certified window")
    modulus = cfg.modulus(prec + den)
    if x.exps.size == 0 or y.exps.size == 0 or modulus == 1:
        return LaurentSeries._make(cfg, [], np.zeros((0, cfg.e), object), 0, prec, lo, hi,
                                   open_right, tag)
    a = K.as_residues(x.coeffs, modulus)
    b = K.as_residues(y.coeffs, modulus)
    if open_right:
        # drop factors that cannot land inside the certified window
        a_keep = x.exps + y.exps[0] <= hi
        b_keep = y.exps + x.exps[0] <= hi
        xe, a = x.exps[a_keep], a[a_keep]
        ye, b = y.exps[b_keep], b[b_keep]
    else:
        xe, ye = x.exps, y.exps
    if xe.size == 0 or ye.size == 0:
        return LaurentSeries._make(cfg, [], np.zeros((0, cfg.e), object), 0, prec, lo, hi,
                                   open_right, tag)
    keys, rows = K.sparse_mul(xe, a, ye, b, cfg.p, modulus)
    return LaurentSeries._make(cfg, keys, rows, den, prec, lo, hi, open_right, tag)


def _geometric_inverse(y: LaurentSeries, P: int, window: int | None) -> LaurentSeries:
    """``(1 + y)**-1`` where every coefficient of y at exponents <= 0 is divisible by pi."""
    cfg = y.cfg
    H = DEFAULT_INVERSE_WINDOW if window is None else int(window)
    L = max(0, -y.lo)
    if y.open_right:
        H = min(H, y.hi - (P - 1) * L)
        if H < 0:
            raise WindowEmpty("not enough of the series is known to invert it")
    yv = y.term_valuations() if y.exps.size else np.zeros(0, np.int64)
    if y.exps.size and np.any((y.exps <= 0) & (yv <= 0)):
        raise NotInvertibleAtPrecision("reduction modulo pi is not a unit")
    kmax = H + (P - 1) * (1 + L) + 1
    ycl = y.lift(P).with_prec(P)
    if ycl.open_right:
        ycl = LaurentSeries._make(cfg, ycl.exps, ycl.coeffs, ycl.den, P, ycl.lo, ycl.hi, False, ycl.tag)
    total = LaurentSeries.constant(cfg, 1, prec=P, tag=y.tag)
    term = total
    pruned = False
    for _ in range(kmax):
        term = -(term * ycl)
        term = term.with_prec(P)
        if term.exps.size:
            nu = term.term_valuations()
            limit = H + L * np.maximum(0, P - 1 - nu)
            drop = term.exps > limit
            if np.any(drop):
                pruned = True
                keep = ~drop
                term = LaurentSeries._make(cfg, term.exps[keep], term.coeffs[keep], term.den, P,
                                           term.lo, max(term.hi, H), False, term.tag)
        if term.is_zero():
            break
        total = total + term
    else:
        pruned = True
    if pruned or y.open_right:
        return total.truncate(H)
    return total


@dataclass(frozen=True, eq=False)
class SigmaAction:
    """Frobenius lift on series: ``u -> image`` (``None`` means ``u**q``)."""

    cfg: RingConfig
    image: LaurentSeries | None = None

    @classmethod
    def standard(cls, cfg: RingConfig) -> "SigmaAction":
        return cls(cfg, None)

    @property
    def is_standard(self) -> bool:
        return self.image is None

    def __post_init__(self):
        if self.image is None:
            return
        img = self.image
        if img.open_right:
            raise UncertifiedWindow("the image of u must be a Laurent polynomial")
        if img.den:
            raise ValueError("the image of u must be integral")
        q = self.cfg.q
        if not img.equals(LaurentSeries.monomial(self.cfg, q, prec=img.prec), prec=1):
            raise ValueError("image of u must reduce to u^q modulo pi")
        r = img.tag.r if img.tag.r is not None else Fraction(1)
        if img.wr(r) == INF:
            raise ValueError("image of u must have finite w_r")
        inv = img.inverse()
        object.__setattr__(self, "_inverse", inv)

    def derivative(self, prec: int | None = None) -> LaurentSeries:
        """``d(u^sigma)/du``."""
        if self.image is None:
            prec = self.cfg.N_default if prec is None else prec
            return LaurentSeries.monomial(self.cfg, self.cfg.q - 1, self.cfg.q, prec=prec)
        return self.image.derive()

    def apply(self, x: LaurentSeries) -> LaurentSeries:
        q = self.cfg.q
        tag = x.tag.scaled(Fraction(1, q))
        if self.image is None:
            hi = q * (x.hi + 1) - 1 if x.open_right else q * x.hi
            if max(abs(q * x.lo), abs(hi)) > EXP_CAP or (x.exps.size and np.abs(x.exps).max() > EXP_CAP // q):
                raise WindowOverflow("sigma pushes exponents beyond the cap")
            return LaurentSeries._make(x.cfg, x.exps * q, x.coeffs, x.den, x.prec, q * x.lo, hi,
                                       x.open_right, tag)
        return self._apply_general(x, tag)

    def _apply_general(self, x: LaurentSeries, tag: Tag) -> LaurentSeries:
        cfg = self.cfg
        P = x.prec
        phi = self.image.with_prec(max(P + x.den, 1)) if self.image.prec > P + x.den else self.image
        phinv = self._inverse
        total = LaurentSeries.zero(cfg, prec=P, tag=tag)
        terms = x.terms()
        pos = sorted(i for i in terms if i >= 0)
        neg = sorted((i for i in terms if i < 0), reverse=True)
        power = LaurentSeries.constant(cfg, 1, prec=P + x.den, tag=tag)
        k = 0
        for i in pos:
            while k < i:
                power = power * phi
                k += 1
            total = total + power * LaurentSeries.constant(cfg, terms[i], prec=P + x.den, tag=tag)
        power = LaurentSeries.constant(cfg, 1, prec=P + x.den, tag=tag)
        k = 0
        for i in neg:
            while k < -i:
                power = power * phinv
                k += 1
            total = total + power * LaurentSeries.constant(cfg, terms[i], prec=P + x.den, tag=tag)
        total = total.mul_pi_power(-x.den).with_prec(P)
        if x.open_right:
            psi_lo = (self.image.shift(-cfg.q) - 1).lo
            hi = cfg.q * (x.hi + 1) + (max(P + x.den, 1) - 1) * min(0, psi_lo) - 1
            total = total.truncate(hi)
        return total.with_tag(tag)


def series_from_monomials(cfg: RingConfig, pairs, prec: int | None = None, tag: Tag | None = None):
    """Convenience constructor from ``[(exponent, coefficient), ...]``."""
    acc: dict[int, object] = {}
    for i, c in pairs:
        if i in acc:
            acc[i] = Fraction(acc[i]) + Fraction(c)
        else:
            acc[i] = c
    return LaurentSeries.from_terms(cfg, acc, prec=prec, tag=tag)
