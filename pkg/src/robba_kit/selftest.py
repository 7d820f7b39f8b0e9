"""Seeded randomized suites exercising every module end to end.

Each suite draws its cases from a :class:`random.Random` seeded by the
caller, checks the results with independent multiplications or closed-form
oracles, and returns a :class:`SuiteResult`.  The command line ``selftest``
subcommand and the acceptance tests both run these suites.
"""
from __future__ import annotations

import logging
import math
import random
import time
from dataclasses import dataclass, field
from fractions import Fraction

from . import matrices as mx
from .errors import NoContraction, RobbaError
from .frobenius import block_conjugation_check, solve_twisted, split_extension, twisted_residual
from .laurent import LaurentSeries, Tag
from .padic import RingConfig
from .quillen_suslin import (check_kernel_basis, kernel_free_basis, matmul, matvec,
                             unimodular_reduce)
from .sigma_module import SigmaModule, newton_slopes
from .tate import PolyRadius, TateSeries, unit_conditions_hold, weierstrass_prepare

log = logging.getLogger(__name__)

P, N = 5, 12
# a leading term dominating its neighbours by only 1/2 in valuation needs a unit
# of degree about 2 (N + g) (deg f - j) before the tail drops below precision
PREP_CAP = 512


@dataclass
class SuiteResult:
    name: str
    cases: int = 0
    failures: list = field(default_factory=list)
    seconds: float = 0.0
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return self.cases > 0 and not self.failures

    def fail(self, case, why: str) -> None:
        self.failures.append(f"case {case}: {why}")

    def to_json(self) -> dict:
        # wall-clock time is logged, not printed, so the summary is reproducible
        return {"name": self.name, "cases": self.cases, "failures": len(self.failures),
                "first_failures": self.failures[:3], "passed": self.passed, **self.details}


def _config() -> RingConfig:
    return RingConfig(P, 1, 1, N)


def _unit(rng: random.Random, digits: int = 3) -> int:
    while True:
        c = rng.randrange(1, P ** digits) * rng.choice((1, -1))
        if c % P:
            return c


# ---------------------------------------------------------------- generators

def random_laurent(rng: random.Random, cfg: RingConfig, window=(-20, 20), r=Fraction(1),
                   terms: int = 6, max_val: int = 4) -> LaurentSeries:
    """A few terms ``p^v * unit * u^i`` inside ``window``, tagged ``GammaCon(r)``."""
    lo, hi = window
    out = {}
    for _ in range(rng.randint(1, terms)):
        out[rng.randint(lo, hi)] = P ** rng.randint(0, max_val) * _unit(rng)
    return LaurentSeries.from_terms(cfg, out, prec=N, window=window, tag=Tag("GammaCon", r))


def random_prepared(rng: random.Random, cfg: RingConfig, log_radius: Fraction, max_degree: int = 12):
    """Univariate f whose leading term (largest index attaining the Gauss norm) is at ``j``."""
    top = rng.randint(1, max_degree)
    j = rng.randint(0, top)
    terms = {(j,): _unit(rng)}
    for i in range(top + 1):
        if i == j or rng.random() < 0.3:
            continue
        bound = (j - i) * log_radius          # v(c_i) + i e >= j e, strictly for i > j
        v = math.floor(bound) + 1 if i > j else math.ceil(bound)
        v += rng.choice((0, 0, 1, 2))
        terms[(i,)] = Fraction(P) ** v * _unit(rng)
    return TateSeries.from_terms(cfg, PolyRadius((log_radius,)), terms, N, PREP_CAP), j


def random_tate(rng: random.Random, cfg: RingConfig, radius: PolyRadius, terms: int = 5,
                degree: int = 4) -> TateSeries:
    out = {}
    for _ in range(rng.randint(1, terms)):
        I = tuple(rng.randint(0, degree) for _ in range(radius.n))
        out[I] = Fraction(P) ** rng.randint(-1, 2) * _unit(rng, 2)
    return TateSeries.from_terms(cfg, radius, out, N, 64)


def _small_poly(rng: random.Random, cfg: RingConfig, radius: PolyRadius, cap: int) -> TateSeries:
    n = radius.n
    terms: dict = {}
    for _ in range(rng.randint(1, 3)):
        e = [0] * n
        for _ in range(rng.randint(0, 4)):
            e[rng.randrange(n)] += 1
        terms[tuple(e)] = terms.get(tuple(e), 0) + rng.choice([1, 2, 3, 4, -1, -2, 5, 7])
    return TateSeries.from_terms(cfg, radius, terms, N, cap)


def random_unimodular(rng: random.Random, cfg: RingConfig, n: int, cap: int = 256):
    """``f = E e_1`` for a product E of one to six elementary matrices, with its witness.

    ``f_i += c f_j`` is mirrored by ``g_j -= c g_i`` so that ``g . f = 1``
    holds exactly throughout.
    """
    radius = PolyRadius.unit(n)
    m = rng.randint(2, 4)
    one = TateSeries.constant(cfg, radius, 1, N, cap)
    zero = TateSeries.zero(cfg, radius, N, cap)
    f = [one] + [zero] * (m - 1)
    g = [one] + [zero] * (m - 1)
    for _ in range(rng.randint(1, 6)):
        i, j = rng.sample(range(m), 2)
        c = _small_poly(rng, cfg, radius, cap)
        f[i] = f[i] + c * f[j]
        g[j] = g[j] - c * g[i]
    return f, g


def random_triangular(rng: random.Random, cfg: RingConfig, vals: list) -> list:
    """Upper triangular matrix with diagonal ``p^v * unit`` and Laurent entries above it."""
    n = len(vals)
    A = mx.zeros(cfg, n, n, N)
    for i in range(n):
        A[i][i] = LaurentSeries.constant(cfg, P ** vals[i] * _unit(rng), prec=N)
        for k in range(i + 1, n):
            A[i][k] = random_laurent(rng, cfg, (-3, 3), terms=2, max_val=1)
    return A


# ---------------------------------------------------------------- suites

def _timed(fn):
    def run(*args, **kw) -> SuiteResult:
        t0 = time.perf_counter()
        res = fn(*args, **kw)
        res.seconds = time.perf_counter() - t0
        log.info("%s: %d cases, %d failures, %.2fs", res.name, res.cases, len(res.failures),
                 res.seconds)
        return res
    run.__name__ = fn.__name__
    run.__doc__ = fn.__doc__
    return run


@_timed
def suite_valuation(seed: int, count: int = 1000) -> SuiteResult:
    """``w_r(xy) = w_r(x) + w_r(y)`` and ``w_r(x + y) >= min`` on random pairs."""
    rng = random.Random(seed)
    cfg = _config()
    res = SuiteResult("valuation_laws")
    for case in range(count):
        r = rng.choice((Fraction(1, 4), Fraction(1, 2), Fraction(1)))
        x, y = random_laurent(rng, cfg, r=r), random_laurent(rng, cfg, r=r)
        wx, wy = x.wr(r), y.wr(r)
        res.cases += 1
        if (x * y).wr(r) != wx + wy:
            res.fail(case, f"w_r(xy) = {(x * y).wr(r)} but w_r(x) + w_r(y) = {wx + wy}")
        s = x + y
        if not s.is_zero() and s.wr(r) < min(wx, wy):
            res.fail(case, "ultrametric inequality violated")
    return res


def twisted_corpus(seed: int, count: int):
    rng = random.Random(seed)
    cfg = _config()
    for _ in range(count):
        lam = P ** rng.choice((1, 2)) * _unit(rng)
        r = rng.choice((Fraction(1, 2), Fraction(1)))
        yield lam, random_laurent(rng, cfg, (-5, 5), r=r, terms=4, max_val=3)


@_timed
def suite_twisted(seed: int, count: int = 200) -> SuiteResult:
    """Residual of ``lam y^sigma - y = x`` and agreement of the two summation orders."""
    res = SuiteResult("twisted_solver")
    for case, (lam, x) in enumerate(twisted_corpus(seed, count)):
        res.cases += 1
        try:
            fwd = solve_twisted(lam, x, N)
            bwd = solve_twisted(lam, x, N, order="backward")
        except RobbaError as exc:
            res.fail(case, f"{type(exc).__name__}: {exc}")
            continue
        rv = twisted_residual(lam, x, fwd.y).vpi_min()
        if rv is not None and rv < N:
            res.fail(case, f"residual valuation {rv} < {N}")
        if not fwd.y.equals(bwd.y, N):
            res.fail(case, "forward and backward sums differ")
    return res


@_timed
def suite_overconvergence(seed: int, count: int = 200) -> SuiteResult:
    """Each solve with finite ``w_r(x)`` yields a finite ``w_{r'}(y)`` at the reported ``r'``."""
    res = SuiteResult("overconvergence")
    for case, (lam, x) in enumerate(twisted_corpus(seed, count)):
        try:
            sol = solve_twisted(lam, x, N)
        except RobbaError:
            continue
        if sol.r_in is None or sol.w_in == math.inf:
            continue
        res.cases += 1
        w = sol.y.wr(sol.r_out)           # recomputed independently of the solver
        if w == math.inf and not sol.y.is_zero():
            res.fail(case, "w_r' of the solution is not finite")
        elif w != sol.w_out:
            res.fail(case, f"reported w_r' = {sol.w_out}, recomputed {w}")
    return res


def _split_oracle(A, B, D, X, prec: int) -> bool:
    """``-X + A sigma(X) D^-1 - B`` vanishes modulo ``pi**prec``."""
    P_ = max(mx.min_prec(X), prec)
    Dinv = mx.inverse(mx.lift(D, P_ + 4))
    lhs = mx.add(mx.neg(X), mx.mul(mx.mul(mx.lift(A, P_), mx.sigma(X)), Dinv))
    return mx.is_zero(mx.sub(lhs, mx.lift(B, P_)), prec)


@_timed
def suite_split(seed: int, count: int = 100) -> SuiteResult:
    """Triangular blocks with a slope gap of at least one, plus the designed rejection."""
    rng = random.Random(seed)
    cfg = _config()
    res = SuiteResult("split_extension")
    check = N - 2
    for case in range(count):
        n1, n2 = rng.randint(1, 2), rng.randint(1, 2)
        dv = [rng.randint(0, 1) for _ in range(n2)]
        av = [max(dv) + rng.randint(1, 2) for _ in range(n1)]
        A, D = random_triangular(rng, cfg, av), random_triangular(rng, cfg, dv)
        B = [[random_laurent(rng, cfg, (-3, 3), terms=3, max_val=2) for _ in range(n2)]
             for _ in range(n1)]
        res.cases += 1
        try:
            cert = split_extension(A, B, D, N)
        except RobbaError as exc:
            res.fail(case, f"{type(exc).__name__}: {exc}")
            continue
        if not _split_oracle(A, B, D, cert.X, check):
            res.fail(case, "equation residual is not zero")
        _, ok = block_conjugation_check(A, B, D, cert.X, check)
        if not ok:
            res.fail(case, "block conjugation failed")
    one = [[LaurentSeries.constant(cfg, 1, prec=N)]]
    res.cases += 1
    try:
        split_extension(one, one, [[LaurentSeries.constant(cfg, P, prec=N)]], N)
        res.fail("rejection", "v(A) - v(D) = -1 was accepted")
    except NoContraction:
        res.details["rejection"] = "NoContraction"
    return res


@_timed
def suite_slopes(seed: int = 0, depth: int = 8) -> SuiteResult:
    """Newton slopes of three fixed matrices against hand-computed values."""
    cfg = _config()
    res = SuiteResult("newton_slopes")
    off = LaurentSeries.from_terms(cfg, {-1: 1, 2: 3}, prec=N)
    tri = mx.constant_matrix(cfg, [[25, 0], [0, 5]], N)
    tri[0][1] = off
    cases = [
        ("diag(1,p)", mx.constant_matrix(cfg, [[1, 0], [0, P]], N), [0, 1], True),
        ("[[0,p],[1,0]]", mx.constant_matrix(cfg, [[0, P], [1, 0]], N),
         [Fraction(1, 2), Fraction(1, 2)], False),
        ("diag(p^2,p) triangular", tri, [1, 2], True),
    ]
    for name, A, want, exact in cases:
        res.cases += 1
        est = newton_slopes(SigmaModule(A), depth)
        if sorted(est.slopes) != [Fraction(w) for w in want]:
            res.fail(name, f"slopes {est.slopes} != {want}")
        if est.exact != exact:
            res.fail(name, f"tier exact={est.exact}, expected {exact}")
        total = sum(Fraction(w) for w in want)
        if est.log[-1][-1] != total or est.det_valuations[-1] != total * depth:
            res.fail(name, "determinant partial sum at full depth is not exact")
    return res


@_timed
def suite_weierstrass(seed: int, count: int = 300) -> SuiteResult:
    """Preparation ``f = u P`` with residual, degree and unit-condition checks."""
    rng = random.Random(seed)
    cfg = _config()
    res = SuiteResult("weierstrass")
    for case in range(count):
        e = rng.choice((Fraction(0), Fraction(1, 2), Fraction(-1, 2)))
        f, j = random_prepared(rng, cfg, e)
        res.cases += 1
        try:
            prep = weierstrass_prepare(f)
        except RobbaError as exc:
            res.fail(case, f"{type(exc).__name__}: {exc}")
            continue
        target = N - 2
        r = f - prep.u * prep.P
        if not (r.is_zero() or r.gauss_valuation() >= target):
            res.fail(case, f"residual valuation {r.gauss_valuation()} < {target}")
        if prep.degree != j or prep.P.max_degree_in(0) != j:
            res.fail(case, f"deg P = {prep.P.max_degree_in(0)}, expected {j}")
        if not unit_conditions_hold(prep):
            res.fail(case, "unit conditions on the coefficients of P fail")
        one = prep.u * prep.u_inv - 1
        if not (one.is_zero() or one.gauss_valuation() >= target):
            res.fail(case, "u * u^-1 is not 1")
    return res


@_timed
def suite_degree(seed: int, count: int = 300) -> SuiteResult:
    """``deg(fg) = deg f + deg g`` and ``|L(fg) - L(f)L(g)| < |L(fg)|``."""
    rng = random.Random(seed)
    cfg = _config()
    res = SuiteResult("degree_additivity")
    for case in range(count):
        n = rng.randint(1, 2)
        radius = PolyRadius(tuple(rng.choice((Fraction(0), Fraction(1, 2), Fraction(-1, 2)))
                                  for _ in range(n)))
        f, g = random_tate(rng, cfg, radius), random_tate(rng, cfg, radius)
        v = n - 1
        res.cases += 1
        (jf, cf), (jg, cg) = f.leading_term(v), g.leading_term(v)
        h = f * g
        jh, ch = h.leading_term(v)
        if jh != jf + jg:
            res.fail(case, f"deg(fg) = {jh}, deg f + deg g = {jf + jg}")
            continue
        Lh = ch.shift(v, jh)
        diff = Lh - cf.shift(v, jf) * cg.shift(v, jg)
        if not diff.is_zero() and diff.gauss_valuation() <= Lh.gauss_valuation():
            res.fail(case, "leading-term inequality is not strict")
    return res


@_timed
def suite_qs(seed: int, count: int = 200, variables=(1, 2, 3)) -> SuiteResult:
    """Round trip ``E e_1 -> e_1`` with certificate, kernel basis and completion checks."""
    rng = random.Random(seed)
    cfg = _config()
    res = SuiteResult("quillen_suslin")
    target = N - 2
    for n in variables:
        for case in range(count):
            f, g = random_unimodular(rng, cfg, n)
            res.cases += 1
            label = f"n={n} #{case}"
            try:
                # with one variable the witness is rebuilt by the reduction itself
                cert = unimodular_reduce(f, g if n >= 2 else None, N=N, seed=case)
            except RobbaError as exc:
                res.fail(label, f"{type(exc).__name__}: {exc}")
                continue
            m = len(f)
            Mf = matvec(cert.M, f)
            MM = matmul(cert.M, cert.M_inv)
            small = lambda x: x.is_zero() or (x.prec >= target and x.gauss_valuation() >= target)
            if not all(small(Mf[i] - (1 if i == 0 else 0)) for i in range(m)):
                res.fail(label, "M f != e_1")
            if not all(small(MM[i][k] - (1 if i == k else 0)) for i in range(m) for k in range(m)):
                res.fail(label, "M M^-1 != I")
            kb = kernel_free_basis(f, certificate=cert)
            if not check_kernel_basis(f, kb, N):
                res.fail(label, "kernel basis or completion check failed")
    return res


SUITES = {
    "valuation": (suite_valuation, 1000),
    "twisted": (suite_twisted, 200),
    "split": (suite_split, 100),
    "slopes": (suite_slopes, None),
    "weierstrass": (suite_weierstrass, 300),
    "degree": (suite_degree, 300),
    "qs": (suite_qs, 200),
    "overconvergence": (suite_overconvergence, 200),
}


def run_selftest(seed: int = 7, scale: float = 1.0, only=None) -> dict:
    """Run the suites (case counts multiplied by ``scale``) and summarize as JSON data."""
    out = []
    for name, (fn, count) in SUITES.items():
        if only and name not in only:
            continue
        if count is None:
            res = fn(seed)
        else:
            res = fn(seed, max(1, int(round(count * scale))))
        out.append(res.to_json())
    return {"seed": seed, "scale": scale, "suites": out, "all_passed": all(s["passed"] for s in out)}
