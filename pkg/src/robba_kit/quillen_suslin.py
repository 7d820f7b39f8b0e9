"""Constructive Quillen-Suslin reduction over Tate algebras ``K<t_1..t_n>_rho``.

A unimodular tuple ``f`` (with a Bezout witness ``g``, ``sum g_i f_i = 1``) is
reduced to ``e_1 = (1, 0, ..., 0)`` by an invertible matrix ``M`` built from
elementary row operations, unit rescalings, 2x2 Bezout blocks and the
coordinate changes ``T_j``.  The reduction eliminates one variable at a time:

* make some entry unit-leading in ``t_v`` (``T_j`` if needed) and turn it into
  a monic polynomial ``P`` (Weierstrass preparation or a unit rescale);
* divide the other entries by ``P``; when a remainder is again unit-leading of
  smaller degree it becomes the next pivot;
* once the other entries no longer involve ``t_v`` they form a unimodular
  tuple over ``K<t_1..t_{v-1}>`` and the same procedure recurses.

Before the descent, a size-reducing search runs on the exact polynomial
representatives: it cancels terms of one entry against another (and trims the
witness by Koszul syzygies, which leave ``f`` alone) until one of the easy
endings below applies.  Its moves are then replayed on the series with full
bookkeeping; when it finds nothing the descent takes over.

The reduction stops as soon as an entry is a unit, an entry vanishes (the
witness then rebuilds a 1 in its place) or only two entries are left (Bezout
block).  Every move updates ``M`` and ``M^-1`` in the original coordinates and
transports the witness, which is re-checked at each stage.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from fractions import Fraction

from .errors import (DegreeStuck, NoContraction, NotAUnit, PrecisionExhausted, RobbaError,
                     WindowOverflow, ZeroAtPrecision)
from .padic import guard_digits
from .tate import TateSeries, tj_map, weierstrass_divide, weierstrass_prepare

QS_CAP = 256
MAX_TERMS = 1500
ATTEMPTS = 4
SEARCH_STEPS = 200
SEARCH_BUDGET = 50_000


# ---------------------------------------------------------------- helpers

def _one(x: TateSeries, prec=None) -> TateSeries:
    return TateSeries.constant(x.cfg, x.radius, 1, x.prec if prec is None else prec, x.cap)


def _zero(x: TateSeries, prec=None) -> TateSeries:
    return TateSeries.zero(x.cfg, x.radius, x.prec if prec is None else prec, x.cap)


def _is_small(x: TateSeries, target) -> bool:
    """True when ``x`` is known to vanish modulo Gauss valuation ``target``."""
    if x.prec < target:
        return False
    return x.is_zero() or x.gauss_valuation() >= target


def _dot(a: list, b: list) -> TateSeries:
    out = a[0] * b[0]
    for x, y in zip(a[1:], b[1:]):
        out = out + x * y
    return out


def matmul(A: list, B: list) -> list:
    return [[_dot(row, [B[t][j] for t in range(len(B))]) for j in range(len(B[0]))] for row in A]


def matvec(A: list, v: list) -> list:
    return [_dot(row, v) for row in A]


def identity(proto: TateSeries, m: int, prec=None) -> list:
    one, zero = _one(proto, prec), _zero(proto, prec)
    return [[one if i == j else zero for j in range(m)] for i in range(m)]


def verify_unimodular(f: list, g: list, prec=None) -> bool:
    """True iff ``sum g_i f_i = 1`` modulo Gauss valuation ``N - g``."""
    if len(f) != len(g) or not f:
        raise ValueError("tuple and witness must have the same positive length")
    for x in list(f) + list(g):
        if x.cfg != f[0].cfg or x.radius != f[0].radius:
            raise ValueError("tuple entries over different rings")
    N = min(x.prec for x in f) if prec is None else prec
    target = N - guard_digits()
    return _is_small(_dot(list(g), list(f)) - 1, target)


# ---------------------------------------------------------------- coordinate maps

@dataclass(frozen=True)
class _Perm:
    perm: tuple

    def apply(self, f: TateSeries) -> TateSeries:
        return f.permute(self.perm)

    def inverse(self, f: TateSeries) -> TateSeries:
        inv = [0] * len(self.perm)
        for q, k in enumerate(self.perm):
            inv[k] = q
        return f.permute(inv)

    def to_json(self) -> dict:
        return {"perm": list(self.perm)}


# ---------------------------------------------------------------- certificate

@dataclass
class ReductionCertificate:
    """``M f = e_1`` with ``M M_inv = I``; ``moves`` records how M was built."""

    f: list
    witness: list
    M: list
    M_inv: list
    moves: list = field(default_factory=list)
    verified: bool = False
    check_prec: Fraction | None = None

    @property
    def m(self) -> int:
        return len(self.f)

    def to_json(self) -> dict:
        from .serialize import tate_to_json
        return {
            "f": [tate_to_json(x) for x in self.f],
            "witness": [tate_to_json(x) for x in self.witness],
            "M": [[tate_to_json(x) for x in row] for row in self.M],
            "M_inv": [[tate_to_json(x) for x in row] for row in self.M_inv],
            "moves": self.moves,
            "verified": self.verified,
        }


def verify_certificate(f: list, M: list, M_inv: list, prec=None) -> bool:
    """Independent check of ``M f = e_1`` and ``M M_inv = I`` modulo ``N - g``.

    Only multiplications and comparisons are performed; a product whose
    precision has dropped below the target counts as a failure.
    """
    m = len(f)
    N = min(x.prec for x in f) if prec is None else prec
    target = Fraction(N) - guard_digits()
    Mf = matvec(M, f)
    for i, x in enumerate(Mf):
        if not _is_small(x - (1 if i == 0 else 0), target):
            return False
    P = matmul(M, M_inv)
    for i in range(m):
        for j in range(m):
            if not _is_small(P[i][j] - (1 if i == j else 0), target):
                return False
    return True


# ---------------------------------------------------------------- engine

class _Engine:
    """Mutable reduction state.

    ``f`` and the witnesses live in the current coordinates (after all maps
    in ``maps``); ``M`` and ``M_inv`` live in the original coordinates.
    """

    def __init__(self, f: list, g: list | None, Nw, target, rng: random.Random, jmax: int):
        self.f = list(f)
        self.m = len(f)
        self.proto = f[0]
        self.M = identity(f[0], self.m, Nw)
        self.Minv = identity(f[0], self.m, Nw)
        self.maps: list = []
        self.moves: list = []
        self.witnesses: list = [] if g is None else [dict(enumerate(g))]
        self.target = target
        self.rng = rng
        self.jmax = jmax
        self.final_prec = target + 2 * guard_digits() + 2
        self.max_terms = MAX_TERMS

    # ---------------------------------------------------- coordinates
    def to_orig(self, c: TateSeries) -> TateSeries:
        for T in reversed(self.maps):
            c = T.inverse(c)
        return c

    def apply_map(self, T, kind: str) -> None:
        self.f = [T.apply(x) for x in self.f]
        for w in self.witnesses:
            for i in w:
                w[i] = T.apply(w[i])
        self.maps.append(T)
        self.moves.append({"kind": kind, **T.to_json()})

    # ---------------------------------------------------- moves
    def row_add(self, i: int, j: int, c: TateSeries) -> None:
        """``f_i += c f_j``."""
        if c.is_zero():
            return
        self.f[i] = self.f[i] + c * self.f[j]
        if len(self.f[i]) > self.max_terms:
            raise DegreeStuck("entries grew beyond the term budget", None)
        for w in self.witnesses:
            if i in w and j in w:
                w[j] = w[j] - c * w[i]
        co = self.to_orig(c)
        self.M[i] = [a + co * b for a, b in zip(self.M[i], self.M[j])]
        for row in self.Minv:
            row[j] = row[j] - row[i] * co
        self.moves.append({"kind": "elem", "row": i, "col": j, "terms": len(c)})

    def row_scale(self, i: int, u: TateSeries, u_inv: TateSeries, kind: str = "weier") -> None:
        """``f_i *= u`` for a unit ``u`` with inverse ``u_inv``."""
        self.f[i] = self.f[i] * u
        for w in self.witnesses:
            if i in w:
                w[i] = w[i] * u_inv
        uo, uio = self.to_orig(u), self.to_orig(u_inv)
        self.M[i] = [a * uo for a in self.M[i]]
        for row in self.Minv:
            row[i] = row[i] * uio
        self.moves.append({"kind": kind, "row": i, "terms": len(u)})

    def swap(self, i: int, j: int) -> None:
        if i == j:
            return
        self.f[i], self.f[j] = self.f[j], self.f[i]
        for w in self.witnesses:
            if i in w and j in w:
                w[i], w[j] = w[j], w[i]
        self.M[i], self.M[j] = self.M[j], self.M[i]
        for row in self.Minv:
            row[i], row[j] = row[j], row[i]
        self.moves.append({"kind": "swap", "rows": [i, j]})

    def bezout(self, a: int, b: int, ga: TateSeries, gb: TateSeries) -> None:
        """Apply ``[[ga, gb], [-fb, fa]]`` to rows a, b (requires ``ga fa + gb fb = 1``)."""
        fa, fb = self.f[a], self.f[b]
        self.f[a] = ga * fa + gb * fb
        self.f[b] = fa * fb - fb * fa
        for w in self.witnesses:
            if a in w and b in w:
                wa, wb = w[a], w[b]
                w[a] = wa * fa + wb * fb
                w[b] = wb * ga - wa * gb
        oga, ogb, ofa, ofb = (self.to_orig(x) for x in (ga, gb, fa, fb))
        Ra, Rb = self.M[a], self.M[b]
        self.M[a] = [oga * x + ogb * y for x, y in zip(Ra, Rb)]
        self.M[b] = [ofa * y - ofb * x for x, y in zip(Ra, Rb)]
        for row in self.Minv:
            ca, cb = row[a], row[b]
            row[a] = ca * ofa + cb * ofb
            row[b] = cb * oga - ca * ogb
        self.moves.append({"kind": "bezout", "rows": [a, b]})

    def koszul(self, i: int, j: int, q: TateSeries) -> None:
        """Witness-only move ``w_i -= q f_j, w_j += q f_i``; ``f`` and ``M`` are unchanged."""
        w = self.witnesses[-1]
        w[i], w[j] = w[i] - q * self.f[j], w[j] + q * self.f[i]
        self.moves.append({"kind": "koszul", "rows": [i, j], "terms": len(q)})

    # ---------------------------------------------------- checks
    def check_witness(self) -> None:
        if not self.witnesses:
            return
        w = self.witnesses[-1]
        s = _dot([w[i] for i in w], [self.f[i] for i in w]) - 1
        if not _is_small(s, self.target):
            raise DegreeStuck("witness transport failed; precision was lost", None)

    def nonzero(self, rows) -> list:
        return [i for i in rows if not self.f[i].is_zero()]

    # ---------------------------------------------------- finishing moves
    def finish_unit(self, r: int) -> None:
        """Entry r is a unit: make it 1, clear the others, move it to the top."""
        u = self.f[r]
        self.row_scale(r, u.with_prec(self.final_prec).inverse(), u, "unit")
        for i in range(self.m):
            if i != r and not self.f[i].is_zero():
                self.row_add(i, r, -self.f[i])
        self.swap(0, r)

    def try_shortcut(self, rows) -> int | None:
        """Return a row holding a unit, creating one if an easy move allows.

        Constant units are preferred; then a row whose witness entry is a
        constant unit, or a zero entry, is rebuilt into
        ``sum w_i f_i = 1`` from the witness, then a 2x2 Bezout block is used
        on the last two entries; a non-constant unit comes last because its
        inverse is a long series.
        """
        nz = self.nonzero(rows)
        units = [i for i in nz if self.f[i].is_unit()]
        for i in units:
            if self.f[i].is_constant():
                return i
        if self.witnesses and nz:
            w = self.witnesses[-1]
            r = self.witness_unit(rows, w)
            if r is not None:
                return r
            zeros = [i for i in rows if i not in nz]
            if zeros:
                z = zeros[0]
                for i in nz:
                    self.row_add(z, i, w[i])
                if self.f[z].is_unit():
                    return z
                raise DegreeStuck("witness rebuilt a non-unit; precision was lost", None)
            if len(nz) == 2:
                a, b = nz
                self.bezout(a, b, w[a], w[b])
                if self.f[a].is_unit():
                    return a
                raise DegreeStuck("Bezout block did not produce a unit; precision was lost", None)
        if units:
            return min(units, key=lambda i: len(self.f[i]))
        return None

    def witness_unit(self, rows, w) -> int | None:
        """Rebuild a row into ``sum w_i f_i = 1`` when its witness entry is a constant unit.

        Scaling row r by ``w_r`` and adding ``w_i f_i`` for the other rows is
        invertible exactly because ``w_r`` is a unit.
        """
        for r in rows:
            c = w.get(r)
            if c is None or c.is_zero() or not c.is_constant() or not c.is_unit():
                continue
            coeffs = {i: w[i] for i in rows if i != r}
            self.row_scale(r, c, c.inverse(), "unit")
            for i, wi in coeffs.items():
                self.row_add(r, i, wi)
            if self.f[r].is_unit():
                return r
            raise DegreeStuck("witness rebuilt a non-unit; precision was lost", None)
        return None

    # ---------------------------------------------------- pivots
    def pivot_degree(self, x: TateSeries, v: int):
        """``(degree, kind)`` if x can be turned into a monic polynomial in ``t_v``.

        ``weier``: the Weierstrass leading coefficient is a unit; ``monic``:
        the top coefficient of the polynomial representative is a unit whose
        size is within the precision budget.
        """
        if x.is_zero():
            return None
        opts = []
        j, c = x.leading_term(v)
        top = x.max_degree_in(v)
        if c.is_unit():
            opts.append((j, 0 if j == top else 1))
        if j < top:
            ct = x.coeff_in(v, top)
            if ct.is_unit() and ct.gauss_valuation() - x.gauss_valuation() <= self.target / 2:
                opts.append((top, 0))
        if not opts:
            return None
        d, w = min(opts)
        return d, ("monic" if w == 0 else "weier")

    def choose_pivot(self, rows, v: int):
        cands = []
        for i in self.nonzero(rows):
            d = self.pivot_degree(self.f[i], v)
            if d is not None:
                x = self.f[i]
                lead = x.coeff_in(v, x.max_degree_in(v)) if d[1] == "monic" else None
                simple = lead is not None and lead.is_constant()
                cands.append((d[0], not simple, d[1] != "monic", len(x), i, d[1]))
        if not cands:
            return None
        cands.sort()
        d, _, _, _, i, kind = cands[0]
        return i, d, kind

    def make_monic(self, k: int, v: int, kind: str) -> int:
        if kind == "weier":
            prep = weierstrass_prepare(self.f[k], v)
            self.row_scale(k, prep.u_inv, prep.u, "weier")
        x = self.f[k]
        d = x.max_degree_in(v)
        c = x.coeff_in(v, d)
        if not c.is_unit():
            raise DegreeStuck("pivot is not monic after preparation; precision was lost", None)
        if not _is_small(c - 1, x.prec):
            self.row_scale(k, c.inverse(), c, "unit")
        return d

    def divide_others(self, k: int, rows, v: int) -> None:
        P = self.f[k]
        one = _one(P)
        for i in self.nonzero(rows):
            if i == k:
                continue
            q, _ = weierstrass_divide(self.f[i], P, v, one)
            if not q.is_zero():
                self.row_add(i, k, -q)

    def sub_witness(self, k: int, rows, v: int) -> dict | None:
        """Witness over ``K<t_1..t_{v-1}>`` for the rows other than the monic pivot."""
        if not self.witnesses:
            return None
        w = self.witnesses[-1]
        P = self.f[k]
        one = _one(P)
        out = {}
        for i in rows:
            if i == k:
                continue
            _, r = weierstrass_divide(w[i], P, v, one)
            out[i] = r.coeff_in(v, 0)
        s = _dot([out[i] for i in out], [self.f[i] for i in out]) - 1
        if not _is_small(s, self.target):
            raise DegreeStuck("could not restrict the witness to the coefficient ring", None)
        return out

    # ---------------------------------------------------- unsticking
    def unstick(self, k: int, d: int, rows, v: int) -> bool:
        """Find ``f_l + lam t^a f_i (mod P)`` that is a unit, zero or a smaller pivot."""
        P = self.f[k]
        one = _one(P)
        p = P.cfg.p
        others = [i for i in self.nonzero(rows) if i != k]
        zero_rows = [i for i in rows if i != k and self.f[i].is_zero()]
        lams = [Fraction(1), Fraction(-1), Fraction(2), Fraction(1, p), Fraction(-1, p),
                Fraction(1, p * p), Fraction(p)]
        red = {}
        for i in others:
            for a in range(d):
                h = self.f[i].shift(v, a) if a else self.f[i]
                q, r = weierstrass_divide(h, P, v, one)
                red[(i, a)] = (q, r)
        targets = others + zero_rows[:1]
        for l in targets:
            for (i, a), (q, r) in red.items():
                if i == l or r.is_zero():
                    continue
                for lam in lams:
                    c = self.f[l] + r.scale(lam)
                    if c.is_zero():
                        ok = True
                    elif c.is_unit():
                        ok = True
                    else:
                        pd = self.pivot_degree(c, v)
                        ok = pd is not None and pd[0] < d
                    if ok:
                        ta = TateSeries.variable(P.cfg, P.radius, v, P.prec, P.cap)
                        ta = ta ** a if a else _one(P)
                        self.row_add(l, i, ta.scale(lam))
                        if not q.is_zero():
                            self.row_add(l, k, -(q.scale(lam)))
                        return True
        return False

    def comaximal(self, k: int, rows, v: int) -> bool:
        """Bezout block on ``(h, P)`` when ``Res(P, h)`` is a unit of the coefficient ring.

        ``h`` runs over the other entries and ``f_l + lam f_i``.  The inverse of
        h modulo the monic P comes from Cayley-Hamilton on the matrix of
        multiplication by h, so only ``Res(P, h)`` itself is inverted.
        """
        P = self.f[k]
        d = P.max_degree_in(v)
        one = _one(P)
        others = [i for i in self.nonzero(rows) if i != k]
        cands = [(i, None, 0) for i in others]
        for l in others + [i for i in rows if i != k and self.f[i].is_zero()][:1]:
            for i in others:
                if i != l:
                    cands.extend((l, i, lam) for lam in (1, -1, 2))
        for l, i, lam in cands:
            h = self.f[l] if i is None else self.f[l] + self.f[i].scale(lam)
            h = weierstrass_divide(h, P, v, one)[1]
            if h.is_zero():
                continue
            cols = [h]
            for _ in range(d - 1):
                cols.append(weierstrass_divide(cols[-1].shift(v, 1), P, v, one)[1])
            mat = [[cols[c].coeff_in(v, r) for c in range(d)] for r in range(d)]
            cp = _charpoly(mat, _one(mat[0][0]))
            c0 = cp[-1]
            if not c0.is_unit():
                continue
            s = one
            for c in cp[1:-1]:
                s = weierstrass_divide(s * h, P, v, one)[1] + c
            b = -(s * c0.inverse())
            a, rest = weierstrass_divide(one - b * h, P, v, one)
            if not _is_small(rest, self.target):
                continue
            if i is not None:
                self.row_add(l, i, one.scale(lam))
            q = weierstrass_divide(self.f[l], P, v, one)[0]
            if not q.is_zero():
                self.row_add(l, k, -q)
            self.bezout(l, k, b, a)
            return True
        return False

    def renormalize(self, rows, v: int, used: set) -> bool:
        """Apply the smallest unused ``T_j`` (special variable ``t_v``) giving a pivot."""
        radius = self.f[rows[0]].radius
        for j in range(1, self.jmax + 1):
            if j in used:
                continue
            try:
                T = tj_map(radius, j, v, "field")
                trial = [T.apply(self.f[i]) for i in self.nonzero(rows)]
            except (WindowOverflow, RobbaError):
                continue
            if any(self.pivot_degree(x, v) is not None for x in trial):
                used.add(j)
                self.apply_map(T, "tj")
                return True
        return False

    def permute(self, v: int, used: set) -> bool:
        """Swap ``t_v`` with an earlier variable not tried yet."""
        for w in range(v - 1, -1, -1):
            if w in used:
                continue
            used.add(w)
            perm = list(range(self.proto.n))
            perm[v], perm[w] = perm[w], perm[v]
            self.apply_map(_Perm(tuple(perm)), "perm")
            return True
        return False

    def precondition(self, rows) -> bool:
        nz = self.nonzero(rows)
        if len(nz) < 2:
            return False
        l, i = self.rng.sample(nz, 2)
        lam = self.rng.choice([1, -1, 2, -2, 3])
        self.row_add(l, i, _one(self.f[l]).scale(lam))
        return True

    # ---------------------------------------------------- stage
    def stage(self, rows: list, v: int) -> int:
        """Produce a unit among ``rows`` (entries free of ``t_{v+1}, ...``)."""
        used_j: set = set()
        used_w: set = set()
        renorms = 0
        preconds = 0
        self.check_witness()
        for _ in range(200):
            r = self.try_shortcut(rows)
            if r is not None:
                return r
            nz = self.nonzero(rows)
            if not nz:
                raise DegreeStuck("all entries vanished at precision", None)
            if v < 0:
                raise DegreeStuck("no unit among the constant entries", None)
            piv = self.choose_pivot(rows, v)
            if piv is None:
                if renorms < 3 and self.renormalize(rows, v, used_j):
                    renorms += 1
                    continue
                if v == 0:
                    raise DegreeStuck("no unit-leading entry in one variable", None)
                if preconds < 4 and self.precondition(rows):
                    preconds += 1
                    continue
                raise DegreeStuck(f"no unit-leading entry in t_{v + 1}", None)
            k, d, kind = piv
            d = self.make_monic(k, v, kind)
            if d == 0:
                continue
            self.divide_others(k, rows, v)
            others = [i for i in self.nonzero(rows) if i != k]
            if others and all(self.f[i].free_of(v) for i in others):
                sub_rows = [i for i in rows if i != k]
                sw = self.sub_witness(k, rows, v)
                if sw is not None:
                    self.witnesses.append(sw)
                try:
                    return self.stage(sub_rows, v - 1)
                finally:
                    if sw is not None:
                        self.witnesses.pop()
            if not others:
                continue
            if any(self.pivot_degree(self.f[i], v) is not None and
                   self.pivot_degree(self.f[i], v)[0] < d for i in others):
                continue
            if self.unstick(k, d, rows, v):
                continue
            if self.comaximal(k, rows, v):
                continue
            if self.permute(v, used_w):
                continue
            if renorms < 2 and self.renormalize(rows, v, used_j):
                renorms += 1
                continue
            if preconds < 4 and self.precondition(rows):
                preconds += 1
                continue
            raise DegreeStuck(f"degree descent in t_{v + 1} is stuck at degree {d}", None)
        raise DegreeStuck("iteration limit reached", None)


# ---------------------------------------------------------------- exact search

def _padd(a: dict, b: dict, c=1) -> dict:
    out = dict(a)
    for k, v in b.items():
        x = out.get(k, 0) + c * v
        if x:
            out[k] = x
        else:
            out.pop(k, None)
    return out


def _pmul(a: dict, b: dict) -> dict:
    out: dict = {}
    for k1, v1 in a.items():
        for k2, v2 in b.items():
            k = tuple(x + y for x, y in zip(k1, k2))
            out[k] = out.get(k, 0) + v1 * v2
    return {k: v for k, v in out.items() if v}


def _pconst(a: dict) -> bool:
    return len(a) == 1 and not any(next(iter(a)))


def _psize(a: dict) -> int:
    return 100 * max((sum(e) for e in a), default=-1) + len(a)


def _easy_end(f: list, g: list) -> bool:
    return (len(f) == 2 or any(_pconst(x) for x in f) or any(_pconst(x) for x in g)
            or any(not x for x in f))


def _search_moves(f: list, g: list):
    m = len(f)
    for i in range(m):
        for j in range(m):
            if i == j:
                continue
            for S, cs in f[j].items():
                for T, ct in f[i].items():
                    if all(x <= y for x, y in zip(S, T)):
                        yield "f", i, j, {tuple(y - x for x, y in zip(S, T)): ct / cs}
                for T, ct in g[i].items():
                    if any(T) and all(x <= y for x, y in zip(S, T)):
                        yield "g", i, j, {tuple(y - x for x, y in zip(S, T)): ct / cs}


def _search_apply(f: list, g: list, move) -> tuple[list, list]:
    kind, i, j, q = move
    f, g = list(f), list(g)
    if kind == "f":
        f[i] = _padd(f[i], _pmul(q, f[j]), -1)
        g[j] = _padd(g[j], _pmul(q, g[i]))
    else:
        g[i] = _padd(g[i], _pmul(q, f[j]), -1)
        g[j] = _padd(g[j], _pmul(q, f[i]))
    return f, g


def exact_search(f: list, g: list, steps: int = SEARCH_STEPS, budget: int = SEARCH_BUDGET):
    """Greedy size reduction of exact polynomials ``{exponent: Fraction}``.

    Each step cancels one term, either ``f_i -= q f_j`` (witness updated by
    ``g_j += q g_i``) or ``g_i -= q f_j, g_j += q f_i``, keeping the one that
    shrinks the total size most.  Returns the list of moves reaching a tuple
    with a constant entry, a constant witness entry, a zero entry or length
    two, or ``None``.
    """
    moves: list = []
    for _ in range(steps):
        if _easy_end(f, g):
            return moves
        current = sum(map(_psize, f)) + sum(map(_psize, g))
        best = None
        for move in _search_moves(f, g):
            budget -= 1
            if budget < 0:
                return None
            nf, ng = _search_apply(f, g, move)
            if _easy_end(nf, ng):
                return moves + [move]
            size = sum(map(_psize, nf)) + sum(map(_psize, ng))
            if size < current and (best is None or size < best[0]):
                best = (size, move, nf, ng)
        if best is None:
            return None
        _, move, f, g = best
        moves.append(move)
    return None


def _charpoly(A: list, one) -> list:
    """Coefficients of ``det(x I - A)``, highest degree first (division free).

    Berkowitz: with ``A = [[a, R], [C, A1]]`` the vector for A is a lower
    triangular Toeplitz matrix built from ``1, -a, -R C, -R A1 C, ...``
    applied to the vector for ``A1``.
    """
    n = len(A)
    vec = [one]
    for s in range(n - 1, -1, -1):
        a = A[s][s]
        R = A[s][s + 1:]
        C = [A[r][s] for r in range(s + 1, n)]
        A1 = [row[s + 1:] for row in A[s + 1:]]
        col = [one, -a]
        x = C
        for _ in range(n - s - 1):
            col.append(-_dot(R, x))
            x = [_dot(row, x) for row in A1]
        vec = [_dot([col[r - c] for c in range(len(vec)) if r - c >= 0],
                    [vec[c] for c in range(len(vec)) if r - c >= 0])
               for r in range(len(vec) + 1)]
    return vec


def _lift_all(xs: list, prec, cap: int) -> list:
    return [x.with_cap(max(cap, x.cap)).lift(prec) for x in xs]


def unimodular_reduce(f: list, witness: list | None = None, N: int | None = None, seed: int = 0,
                      jmax: int = 16, cap: int = QS_CAP, extra: int | None = None) -> ReductionCertificate:
    """Reduce a unimodular tuple to ``e_1``; returns a verified certificate.

    With a witness, the exact search is tried first.  Otherwise, or when its
    replay fails, inputs are treated as exact representatives and the descent
    runs at a raised working precision.  Every certificate is checked at
    ``N - g`` by an independent multiplication pass.  On failure the
    working precision is raised and later attempts reorder the variables at
    random before :class:`DegreeStuck` is raised with a ``retry_precision``
    hint.
    """
    if not f:
        raise ValueError("empty tuple")
    n = f[0].n
    N = int(min(x.prec for x in f)) if N is None else N
    if witness is None and n >= 2:
        raise ValueError("a Bezout witness is required for two or more variables")
    if witness is not None and not verify_unimodular(f, witness, N):
        raise NotAUnit("witness does not certify unimodularity")
    g = guard_digits()
    extra = N if extra is None else extra
    last: Exception | None = None
    script = None if witness is None else _exact_script(f, witness)
    if script is not None:
        try:
            return _reduce_at(f, witness, N, N + g + extra, seed, jmax, cap, script=script)
        except (DegreeStuck, NoContraction, PrecisionExhausted, WindowOverflow, NotAUnit,
                ZeroAtPrecision) as exc:
            last = exc
    for attempt in range(ATTEMPTS):
        Nw = N + g + extra * (1 + attempt % 2)
        try:
            cert = _reduce_at(f, witness, N, Nw, seed + 7919 * attempt, jmax, cap,
                              shuffle=attempt >= 2)
        except (DegreeStuck, NoContraction, PrecisionExhausted, WindowOverflow, NotAUnit,
                ZeroAtPrecision) as exc:
            last = exc
            continue
        return cert
    raise DegreeStuck(f"reduction failed ({type(last).__name__}: {last})", retry_precision=2 * N)


def _exact_script(f: list, witness: list):
    """Exact representatives of ``f`` and the witness plus a search script, if one is found."""
    if max(len(x) for x in list(f) + list(witness)) > 64:
        return None
    ef = [x.balanced_terms() for x in f]
    eg = [x.balanced_terms() for x in witness]
    moves = exact_search(ef, eg)
    return None if moves is None else (ef, eg, moves)


def _reduce_at(f, witness, N, Nw, seed, jmax, cap, shuffle=False, script=None) -> ReductionCertificate:
    target = Fraction(N) - guard_digits()
    if script is not None:
        proto = f[0]
        ef, eg, moves = script
        fl = [TateSeries.from_terms(proto.cfg, proto.radius, x, Nw, cap) for x in ef]
        gl = [TateSeries.from_terms(proto.cfg, proto.radius, x, Nw, cap) for x in eg]
    else:
        fl = _lift_all(f, Nw, cap)
        gl = None if witness is None else _lift_all(witness, Nw, cap)
    eng = _Engine(fl, gl, Nw, target, random.Random(seed), jmax)
    m = len(f)
    n = f[0].n
    if script is not None:
        for kind, i, j, q in script[2]:
            qs = TateSeries.from_terms(fl[0].cfg, fl[0].radius, q, Nw, cap)
            if kind == "f":
                eng.row_add(i, j, -qs)
            else:
                eng.koszul(i, j, qs)
        eng.check_witness()
    elif shuffle and n >= 2:
        perm = list(range(n))
        eng.rng.shuffle(perm)
        eng.apply_map(_Perm(tuple(perm)), "perm")
    if m == 1:
        if not fl[0].is_unit():
            raise NotAUnit("a unimodular 1-tuple must be a unit")
        eng.finish_unit(0)
    else:
        eng.finish_unit(eng.stage(list(range(m)), f[0].n - 1))
    M = [[x.with_cap(cap) for x in row] for row in eng.M]
    Minv = [[x.with_cap(cap) for x in row] for row in eng.Minv]
    ok = verify_certificate(fl, M, Minv, N)
    if not ok:
        raise PrecisionExhausted("certificate failed the independent verification")
    wit = list(witness) if witness is not None else [M[0][j] for j in range(m)]
    return ReductionCertificate(list(f), wit, M, Minv, eng.moves, True, target)


def poly_reduce(f: list, witness: list | None = None, var: int | None = None, N: int | None = None,
                seed: int = 0) -> ReductionCertificate:
    """Degree descent in one variable for a tuple with a unit-leading entry.

    Raises :class:`NoUnitLeadingEntry` when no entry is unit-leading in
    ``t_var`` (no ``T_j`` is applied here).
    """
    from .errors import NoUnitLeadingEntry
    var = f[0].n - 1 if var is None else var
    probe = _Engine(f, None, f[0].prec, Fraction(f[0].prec) - guard_digits(), random.Random(seed), 0)
    if probe.choose_pivot(list(range(len(f))), var) is None:
        raise NoUnitLeadingEntry(f"no entry is unit-leading in t_{var + 1}")
    return unimodular_reduce(f, witness, N, seed, jmax=0)


def complete_to_square(cert_or_f, witness: list | None = None, **kw) -> list:
    """Invertible matrix whose first column is ``f`` (the ``M_inv`` of a reduction)."""
    cert = cert_or_f if isinstance(cert_or_f, ReductionCertificate) else \
        unimodular_reduce(cert_or_f, witness, **kw)
    return cert.M_inv


@dataclass
class KernelBasis:
    """Free basis of ``{v : u . v = 0}`` plus the completion certifying it."""

    basis: list
    completion: list
    completion_inv: list
    certificate: ReductionCertificate

    def to_json(self) -> dict:
        from .serialize import tate_to_json
        return {
            "basis": [[tate_to_json(x) for x in vec] for vec in self.basis],
            "completion": [[tate_to_json(x) for x in row] for row in self.completion],
            "verified": self.certificate.verified,
        }


def kernel_free_basis(u: list, witness: list | None = None, certificate: ReductionCertificate | None = None,
                      **kw) -> KernelBasis:
    """Basis of the kernel of the unimodular row ``u``.

    With ``M u^T = e_1`` the matrix ``M' = M^T`` satisfies ``u M' = e_1^T``;
    its columns 2..m annihilate u and ``M'`` is invertible with inverse
    ``M_inv^T``.  An existing reduction of ``u`` may be passed as
    ``certificate``.
    """
    cert = certificate if certificate is not None else unimodular_reduce(u, witness, **kw)
    m = len(u)
    Mt = [[cert.M[j][i] for j in range(m)] for i in range(m)]
    Mit = [[cert.M_inv[j][i] for j in range(m)] for i in range(m)]
    basis = [[Mt[i][c] for i in range(m)] for c in range(1, m)]
    return KernelBasis(basis, Mt, Mit, cert)


def check_kernel_basis(u: list, kb: KernelBasis, prec=None) -> bool:
    """``u . v = 0`` for each basis vector and the completion is invertible."""
    N = min(x.prec for x in u) if prec is None else prec
    target = Fraction(N) - guard_digits()
    ul = [x.lift(max(x.prec, kb.completion[0][0].prec)) for x in u]
    for vec in kb.basis:
        if not _is_small(_dot(ul, vec), target):
            return False
    P = matmul(kb.completion, kb.completion_inv)
    m = len(u)
    return all(_is_small(P[i][j] - (1 if i == j else 0), target) for i in range(m) for j in range(m))


def determinant(M: list) -> TateSeries:
    """Cofactor expansion (m is small)."""
    m = len(M)
    if m == 1:
        return M[0][0]
    out = None
    for j in range(m):
        minor = [row[:j] + row[j + 1:] for row in M[1:]]
        term = M[0][j] * determinant(minor)
        if j % 2:
            term = -term
        out = term if out is None else out + term
    return out
