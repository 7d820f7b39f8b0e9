"""Solvers for the twisted Frobenius equations.

``solve_twisted`` handles the scalar equation ``lam * sigma(y) - y = x`` for a
non-unit constant ``lam``; ``split_extension`` solves the matrix equation
``-X + A sigma(X) D^-1 = B`` that splits an extension of sigma-modules.  Both
return only results whose residual has been checked.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction

from . import matrices as mx
from .errors import (LambdaIsUnit, NoContraction, NotInvertibleAtPrecision,
                     PrecisionExhausted, UncertifiedWindow, WindowOverflow)
from .laurent import LaurentSeries, SigmaAction
from .padic import AtLeast, OElem, guard_digits


def _as_constant(cfg, lam, prec: int) -> LaurentSeries:
    if isinstance(lam, LaurentSeries):
        if not mx.is_constant(lam):
            raise ValueError("lambda must be a constant")
        return lam.lift(max(prec, lam.prec))
    return LaurentSeries.constant(cfg, lam, prec=prec)


@dataclass(frozen=True)
class TwistedSolution:
    """Output of :func:`solve_twisted` with its verification data."""

    y: LaurentSeries
    terms: int
    residual_val: object
    r_in: Fraction | None = None
    r_out: Fraction | None = None
    w_in: object = None
    w_out: object = None

    def to_json(self) -> dict:
        from .serialize import series_to_json, valuation_to_json
        out = {"y": series_to_json(self.y), "terms": self.terms,
               "residual_val": valuation_to_json(self.residual_val)}
        if self.r_out is not None:
            out["overconvergence"] = {
                "r": [self.r_in.numerator, self.r_in.denominator],
                "r_prime": [self.r_out.numerator, self.r_out.denominator],
                "w_r_x": valuation_to_json(self.w_in),
                "w_r_prime_y": valuation_to_json(self.w_out),
            }
        return out


def twisted_residual(lam, x: LaurentSeries, y: LaurentSeries, action: SigmaAction | None = None):
    """``lam * sigma(y) - y - x``."""
    lam_s = _as_constant(x.cfg, lam, max(x.prec, y.prec))
    return lam_s * y.sigma(action) - y - x


def _lambda_vpi(cfg, lam) -> int:
    if isinstance(lam, LaurentSeries):
        v = lam.vpi_min()
    elif isinstance(lam, OElem):
        v = lam.vpi()
    else:
        v = LaurentSeries.constant(cfg, lam, prec=cfg.N_default + 64).vpi_min()
    if v is None:
        raise ValueError("lambda is zero at precision")
    if v <= 0:
        raise LambdaIsUnit("lambda must have positive valuation")
    return v


def _term_count(x: LaurentSeries, vlam: int, Nw: int) -> int:
    vx = x.vpi_min()
    if vx is None:
        return 0
    return max(1, math.ceil((Nw - vx) / vlam))


def solve_twisted(lam, x: LaurentSeries, N: int | None = None, action: SigmaAction | None = None,
                  order: str = "forward", r=None) -> TwistedSolution:
    """Solve ``lam * sigma(y) - y = x`` modulo ``pi**N``.

    ``y = -sum_k lam^k sigma^k(x)`` summed until the terms vanish at the
    working precision ``N + g``.  ``order='backward'`` evaluates the same
    partial sum by Horner's rule, ``x + lam*sigma(x + lam*sigma(...))``.
    The given ``x`` is taken as an exact representative.

    When ``r`` is supplied (or ``x`` carries a parameter tag) the output is
    checked for overconvergence: ``w_{r'}(y)`` with ``r' = r / q^(K-1)`` must
    be finite and at least ``min(w_r(x), v_min(x))``.
    """
    cfg = x.cfg
    N = cfg.N_default if N is None else N
    vlam = _lambda_vpi(cfg, lam)
    g = guard_digits()
    Nw = N + g
    x = x.lift(max(x.prec, Nw))
    lam_s = _as_constant(cfg, lam, Nw + vlam)
    K = _term_count(x, vlam, Nw)
    if K == 0:
        y = LaurentSeries.zero(cfg, prec=Nw, tag=x.tag)
    elif order == "forward":
        total = x
        term = x
        for _ in range(1, K):
            term = lam_s * term.sigma(action)
            total = total + term
        y = -total
    elif order == "backward":
        z = x
        for _ in range(1, K):
            z = x + lam_s * z.sigma(action)
        y = -z
    else:
        raise ValueError(f"unknown summation order {order!r}")
    y = y.with_prec(Nw)
    res = twisted_residual(lam_s, x, y, action)
    rv = res.vpi_min()
    if rv is not None and rv < N:
        raise PrecisionExhausted(f"residual valuation {rv} is below the target {N}")
    residual_val = res.valuation()
    r_in = r_out = w_in = w_out = None
    if r is None and x.tag.r is not None and x.vpi_min() is not None:
        r = x.tag.r
    if r is not None and x.vpi_min() is not None:
        r_in = Fraction(r)
        r_out = r_in / Fraction(cfg.q) ** max(K - 1, 0)
        w_in = x.wr(r_in)
        w_out = y.wr(r_out)
        bound = min(w_in, Fraction(x.vpi_min(), cfg.e))
        if w_out == math.inf or w_out < bound:
            raise UncertifiedWindow(f"w_r' of the solution ({w_out}) fell below {bound}")
    return TwistedSolution(y, K, residual_val, r_in, r_out, w_in, w_out)


# ---------------------------------------------------------------- splitting

@dataclass(frozen=True)
class SplitCertificate:
    """Solution X of ``-X + A sigma(X) D^-1 = B`` with its checks.

    ``block`` is the upper triangular matrix ``[[A, -B D], [0, D]]`` whose
    conjugate by ``[[I, -X], [0, I]]`` and ``[[I, sigma(X)], [0, I]]`` is
    block diagonal.
    """

    X: list
    residual_val: object
    iterations: int
    conjugation_ok: bool
    equation_ok: bool
    contraction_block: int
    contraction_delta: int
    denominator: int
    check_prec: int
    block: list | None = None

    def to_json(self) -> dict:
        from .serialize import matrix_to_json, valuation_to_json
        return {
            "X": matrix_to_json(self.X),
            "residual_val": valuation_to_json(self.residual_val),
            "iterations": self.iterations,
            "conjugation_ok": self.conjugation_ok,
            "equation_ok": self.equation_ok,
            "contraction": {"k": self.contraction_block, "delta": self.contraction_delta},
            "denominator_exponent": self.denominator,
            "check_precision": self.check_prec,
        }


class _HomOperator:
    def __init__(self, A, D, action):
        self.A = A
        self.Dinv = mx.inverse(D)
        self.action = action

    def __call__(self, X):
        return mx.mul(mx.mul(self.A, mx.sigma(X, self.action)), self.Dinv)


def _matrix_vpi(X) -> int | None:
    return mx.vpi(X)


def contraction_probe(T, cfg, n1: int, n2: int, prec: int, kmax: int):
    """Smallest k with ``v(T^k E_ij) >= 1`` for every matrix unit ``E_ij``.

    Returns ``(k, deltas)`` where ``deltas[b]`` is the minimum valuation of
    ``T^b E_ij`` for ``b = 0..k``.
    """
    images = []
    for i in range(n1):
        for j in range(n2):
            E = mx.zeros(cfg, n1, n2, prec)
            E[i][j] = LaurentSeries.constant(cfg, 1, prec=prec)
            images.append(E)
    deltas = [0]
    for k in range(1, kmax + 1):
        try:
            images = [T(E) for E in images]
        except WindowOverflow as exc:
            raise NoContraction(f"exponents overflowed after {k} iterations without contraction "
                                f"(valuations {deltas[1:]})") from exc
        vals = [_matrix_vpi(E) for E in images]
        finite = [v for v in vals if v is not None]
        delta = min(finite) if finite else prec
        deltas.append(delta)
        if delta >= 1:
            return k, deltas
    raise NoContraction(f"no contraction within k_max = {kmax} iterations "
                        f"(valuations {deltas[1:]})")


def split_extension(A: list, B: list, D: list, N: int | None = None,
                    action: SigmaAction | None = None, kmax: int | None = None) -> SplitCertificate:
    """Solve ``-X + A sigma(X) D^-1 = B`` by ``X = -sum_k T^k(B)``.

    ``T(X) = A sigma(X) D^-1`` must contract: some ``T^k`` raises the
    valuation of every matrix unit by at least one (``k <= kmax``, default
    ``8 n1 n2``).  Inputs are treated as exact representatives.
    """
    n1, m1 = mx.shape(A)
    n2, m2 = mx.shape(D)
    if n1 != m1 or n2 != m2 or mx.shape(B) != (n1, n2):
        raise ValueError("block shapes do not match")
    cfg = A[0][0].cfg
    N = cfg.N_default if N is None else N
    g = guard_digits()
    kmax = 8 * n1 * n2 if kmax is None else kmax
    ddet = mx.det(D).vpi_min()
    if ddet is None:
        raise NotInvertibleAtPrecision("D is singular at precision")
    base = N + g + 2 * ddet
    T = _HomOperator(mx.lift(A, base), mx.lift(D, base), action)
    k, deltas = contraction_probe(T, cfg, n1, n2, base, kmax)
    slack = max(0, -min(deltas))
    Nw = N + g + slack
    P = Nw + 2 * ddet + slack
    T = _HomOperator(mx.lift(A, P), mx.lift(D, P), action)
    term = mx.lift(B, P)
    vB = _matrix_vpi(term)
    total = mx.neg(term)
    iterations = 1
    limit = (math.ceil(max(Nw - (vB or 0), 0) / deltas[k]) + 2) * k + k
    quiet = 0
    if vB is None or vB >= Nw:
        quiet = k
    while quiet < k:
        if iterations > limit:
            raise PrecisionExhausted("series did not converge within the contraction bound")
        term = mx.with_prec(T(term), Nw + slack)
        iterations += 1
        v = _matrix_vpi(term)
        if v is None or v >= Nw:
            quiet += 1
        else:
            quiet = 0
        total = mx.sub(total, term)
    X = mx.with_prec(total, Nw)
    check = N - g
    Ax = mx.lift(A, P)
    Dx = mx.lift(D, P)
    Bx = mx.lift(B, P)
    lhs = mx.add(mx.neg(X), T(X))
    resid = mx.sub(lhs, Bx)
    equation_ok = mx.is_zero(resid, check)
    block, conj_ok = block_conjugation_check(Ax, Bx, Dx, X, check, action)
    if not (equation_ok and conj_ok):
        raise PrecisionExhausted("certificate identities failed at the target precision")
    rv = _matrix_vpi(resid)
    residual_val = AtLeast(Fraction(min(mx.min_prec(resid), P), cfg.e)) if rv is None \
        else Fraction(rv, cfg.e)
    den = max((x.den for row in X for x in row), default=0)
    return SplitCertificate(X, residual_val, iterations, conj_ok, equation_ok, k, deltas[k],
                            den, check, block)


def _block(cfg, tl, tr, bl, br):
    return [ra + rb for ra, rb in zip(tl, tr)] + [ra + rb for ra, rb in zip(bl, br)]


def block_conjugation_check(A, B, D, X, prec: int, action: SigmaAction | None = None):
    """Check ``[[I,-X],[0,I]] [[A,-BD],[0,D]] [[I,sigma X],[0,I]] = diag(A, D)``.

    Returns the middle block matrix and the result of the comparison modulo
    ``pi**prec``.
    """
    cfg = A[0][0].cfg
    n1, n2 = len(A), len(D)
    P = max(mx.min_prec(A), prec)
    I1, I2 = mx.identity(cfg, n1, P), mx.identity(cfg, n2, P)
    Z21 = mx.zeros(cfg, n2, n1, P)
    Z12 = mx.zeros(cfg, n1, n2, P)
    left = _block(cfg, I1, mx.neg(X), Z21, I2)
    right = _block(cfg, I1, mx.sigma(X, action), Z21, I2)
    middle = _block(cfg, A, mx.neg(mx.mul(B, D)), Z21, D)
    target = _block(cfg, A, Z12, Z21, D)
    got = mx.mul(mx.mul(left, middle), right)
    return middle, mx.equal(got, target, prec)
