"""sigma-modules and (sigma, nabla)-modules over truncated Gamma / Gamma_con.

A module of rank n is given by its Frobenius matrix A on a fixed basis: the
sigma-semilinear map acts on coordinate vectors as ``v -> A sigma(v)``.  An
optional connection matrix G describes ``nabla e_j = sum_i G_ij e_i (x) du``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction

from . import matrices as mx
from .errors import NotInvertibleAtPrecision, PrecisionExhausted
from .laurent import LaurentSeries, SigmaAction, Tag
from .padic import OElem, RingConfig, guard_digits


@dataclass(frozen=True, eq=False)
class SigmaModule:
    frobenius: list
    connection: list | None = None
    action: SigmaAction | None = None
    base: str = "GammaCon"

    def __post_init__(self):
        n, m = mx.shape(self.frobenius)
        if n != m or n == 0:
            raise ValueError("Frobenius matrix must be square and nonempty")
        if self.connection is not None and mx.shape(self.connection) != (n, n):
            raise ValueError("connection matrix has the wrong shape")
        if self.action is None:
            object.__setattr__(self, "action", SigmaAction.standard(self.cfg))

    @property
    def cfg(self) -> RingConfig:
        return self.frobenius[0][0].cfg

    @property
    def rank(self) -> int:
        return len(self.frobenius)

    @property
    def prec(self) -> int:
        return mx.min_prec(self.frobenius)

    def determinant(self) -> LaurentSeries:
        return mx.det(self.frobenius)

    def check_invertible(self) -> Fraction:
        """Valuation of det A; raises when det is zero at precision."""
        d = self.determinant()
        v = d.vpi_min()
        if v is None:
            raise NotInvertibleAtPrecision("det of the Frobenius matrix is zero at precision")
        return Fraction(v, self.cfg.e)

    def apply(self, v: list) -> list:
        """``F(v) = A sigma(v)`` on a coordinate vector."""
        col = [[x] for x in v]
        out = mx.mul(self.frobenius, mx.sigma(col, self.action))
        return [row[0] for row in out]


@dataclass(frozen=True)
class NewtonEstimate:
    """Partial sums of generic slopes.

    ``partial_sums[k-1]`` is the (estimated or exact) sum of the k smallest
    slopes, in ``v_p`` units.  ``log[n-1]`` holds the compound-matrix
    estimates ``s_k(n)`` at depth n; ``det_valuations[n-1]`` is
    ``v_p(det A^[n])``.
    """

    partial_sums: list
    exact: bool
    depth: int
    log: list = field(default_factory=list)
    det_valuations: list = field(default_factory=list)
    monotone: list = field(default_factory=list)

    @property
    def slopes(self) -> list:
        out = []
        prev = Fraction(0)
        for s in self.partial_sums:
            out.append(s - prev)
            prev = s
        return out

    def to_json(self) -> dict:
        return {
            "partial_sums": [[k + 1, s.numerator, s.denominator] for k, s in enumerate(self.partial_sums)],
            "exact": self.exact,
            "depth": self.depth,
            "log": [[[s.numerator, s.denominator] for s in row] for row in self.log],
            "monotone": self.monotone,
        }


def _scalar(cfg: RingConfig, c, prec: int, tag: Tag | None = None) -> LaurentSeries:
    return LaurentSeries.constant(cfg, c, prec=prec, tag=tag)


def tate_twist(M: SigmaModule, ell: int) -> SigmaModule:
    """Multiply the Frobenius by ``q**ell``; slopes shift by ``ell * f``."""
    if ell == 0:
        return M
    c = _scalar(M.cfg, Fraction(M.cfg.q) ** ell, M.prec + max(0, ell) * M.cfg.f * M.cfg.e)
    A = mx.scale(M.frobenius, c)
    return SigmaModule(A, M.connection, M.action, M.base)


def hom_module(M1: SigmaModule, M2: SigmaModule, twist: int = 0) -> SigmaModule:
    """Frobenius of ``Hom(M1, M2)(twist)`` acting on matrices X by ``q^l A2 X^sigma A1^-1``.

    The basis is the column-major matrix-unit basis, so the matrix is
    ``q^l kron(A1^{-T}, A2)``.
    """
    if M1.cfg != M2.cfg:
        raise ValueError("modules over different rings")
    A1inv = mx.inverse(M1.frobenius)
    H = mx.kron(mx.transpose(A1inv), M2.frobenius)
    if twist:
        prec = mx.min_prec(H)
        H = mx.scale(H, _scalar(M1.cfg, Fraction(M1.cfg.q) ** twist, prec))
    return SigmaModule(H, None, M1.action, M1.base)


def hom_apply(M1: SigmaModule, M2: SigmaModule, X: list, twist: int = 0) -> list:
    """Direct evaluation ``q^l A2 X^sigma A1^-1`` (independent of :func:`hom_module`)."""
    A1inv = mx.inverse(M1.frobenius)
    out = mx.mul(mx.mul(M2.frobenius, mx.sigma(X, M1.action)), A1inv)
    if twist:
        out = mx.scale(out, _scalar(M1.cfg, Fraction(M1.cfg.q) ** twist, mx.min_prec(out)))
    return out


def eigenvector_check(M: SigmaModule, v: list, lam, prec: int | None = None) -> bool:
    """True iff ``A sigma(v) = lam v`` modulo ``pi**(N - g)``."""
    cfg = M.cfg
    if all(x.is_zero() for x in v):
        raise ValueError("eigenvector must be nonzero at precision")
    N = min([M.prec] + [x.prec for x in v]) if prec is None else prec
    target = N - guard_digits()
    lam_s = lam if isinstance(lam, LaurentSeries) else _scalar(cfg, lam, N)
    Fv = M.apply(v)
    return all((a - lam_s * b).equals(LaurentSeries.zero(cfg, prec=target), prec=target)
               for a, b in zip(Fv, v))


def frobenius_power(M: SigmaModule, n: int) -> list:
    """``A^[n] = A sigma(A) ... sigma^(n-1)(A)``."""
    prod = M.frobenius
    twisted = M.frobenius
    for _ in range(1, n):
        twisted = mx.sigma(twisted, M.action)
        prod = mx.mul(prod, twisted)
    return prod


def _exact_tier(M: SigmaModule):
    """Slopes of a triangular matrix whose diagonal entries are constants."""
    if mx.is_triangular(M.frobenius) is None:
        return None
    vals = []
    for i in range(M.rank):
        d = M.frobenius[i][i]
        if not mx.is_constant(d) or d.vpi_min() is None:
            return None
        vals.append(Fraction(d.vpi_min(), M.cfg.e))
    return sorted(vals)


def newton_slopes(M: SigmaModule, n_iter: int) -> NewtonEstimate:
    """Generic-slope partial sums from compound matrices of ``A^[n]``.

    For triangular A with constant diagonal the answer is exact (the
    diagonal valuations); the compound-matrix estimates are still computed
    as far as precision permits and recorded in ``log``.
    """
    if n_iter < 1:
        raise ValueError("n_iter must be at least 1")
    exact = _exact_tier(M)
    n = M.rank
    log, dets, mono = [], [], []
    prod = None
    twisted = None
    for depth in range(1, n_iter + 1):
        if prod is None:
            prod = M.frobenius
            twisted = M.frobenius
        else:
            twisted = mx.sigma(twisted, M.action)
            prod = mx.mul(prod, twisted)
        row = []
        try:
            for k in range(1, n + 1):
                v, certified = mx.compound_valuation(prod, k)
                if v is None or not certified:
                    raise PrecisionExhausted(
                        f"compound valuation of order {k} exceeds the precision at depth {depth}")
                row.append(v / depth)
        except PrecisionExhausted:
            if exact is not None:
                break
            raise
        log.append(row)
        dets.append(row[-1] * depth)
        if len(log) > 1:
            mono.append([b >= a for a, b in zip(log[-2], row)])
    if exact is not None:
        sums = []
        acc = Fraction(0)
        for s in exact:
            acc += s
            sums.append(acc)
        return NewtonEstimate(sums, True, len(log), log, dets, mono)
    return NewtonEstimate(log[-1], False, n_iter, log, dets, mono)


def check_nabla_compat(M: SigmaModule, prec: int | None = None) -> bool:
    """Check ``A' + G A = (du^sigma/du) A sigma(G)`` modulo ``pi**(N - g)``."""
    if M.connection is None:
        raise ValueError("module has no connection")
    A, G = M.frobenius, M.connection
    N = min(mx.min_prec(A), mx.min_prec(G)) if prec is None else prec
    dphi = M.action.derivative(prec=N)
    lhs = mx.add(mx.derive(A), mx.mul(G, A))
    rhs = mx.scale(mx.mul(A, mx.sigma(G, M.action)), dphi)
    return mx.equal(lhs, rhs, N - guard_digits())


# ---------------------------------------------------------------- constants

def _constant_entry(a: LaurentSeries) -> OElem:
    if not mx.is_constant(a) or a.den:
        raise ValueError("fixed_vectors_constant needs entries in O")
    return a.coeff(0)[0]


def smith_form(B: list):
    """Smith normal form ``U B V = diag(d)`` over O modulo ``pi**N``.

    ``B`` is a square matrix of :class:`OElem`.  Returns ``(d, U, V)``.
    """
    n = len(B)
    cfg = B[0][0].cfg
    N = min(x.prec for row in B for x in row)
    one, zero = OElem.one(cfg, N), OElem.zero(cfg, N)
    S = [[x.with_prec(N) for x in row] for row in B]
    U = [[one if i == j else zero for j in range(n)] for i in range(n)]
    V = [[one if i == j else zero for j in range(n)] for i in range(n)]
    for t in range(n):
        best = None
        for i in range(t, n):
            for j in range(t, n):
                v = S[i][j].vpi()
                if v is not None and (best is None or v < best[0]):
                    best = (v, i, j)
        if best is None:
            break
        v, i, j = best
        S[t], S[i] = S[i], S[t]
        U[t], U[i] = U[i], U[t]
        for row in S:
            row[t], row[j] = row[j], row[t]
        for row in V:
            row[t], row[j] = row[j], row[t]
        # pivot = pi^v * unit; normalise the unit away
        piv = S[t][t]
        unit = piv.div_pi(v).lift(N) if v else piv
        uinv = unit.inv()
        S[t] = [x * uinv for x in S[t]]
        U[t] = [x * uinv for x in U[t]]
        for i2 in range(n):
            if i2 == t or S[i2][t].is_zero():
                continue
            c = S[i2][t].div_pi(v).lift(N) if v else S[i2][t]
            S[i2] = [a - c * b for a, b in zip(S[i2], S[t])]
            U[i2] = [a - c * b for a, b in zip(U[i2], U[t])]
        for j2 in range(n):
            if j2 == t or S[t][j2].is_zero():
                continue
            c = S[t][j2].div_pi(v).lift(N) if v else S[t][j2]
            for row in S:
                row[j2] = row[j2] - c * row[t]
            for row in V:
                row[j2] = row[j2] - c * row[t]
        S = [[x.lift(N).with_prec(N) for x in row] for row in S]
    d = [S[i][i] for i in range(n)]
    return d, U, V


def fixed_vectors_constant(M: SigmaModule) -> list:
    """Basis of ``{v : A v = v}`` modulo ``pi**N`` for constant A in O.

    Columns of V whose Smith invariant factor of ``A - I`` is zero at
    precision; invariant factors ``pi**k`` with ``0 < k < N`` only admit
    solutions divisible by ``pi**(N-k)`` and are excluded.
    """
    cfg = M.cfg
    A = [[_constant_entry(a) for a in row] for row in M.frobenius]
    n = len(A)
    B = [[A[i][j] - (1 if i == j else 0) for j in range(n)] for i in range(n)]
    d, _, V = smith_form(B)
    N = min(x.prec for row in B for x in row)
    basis = []
    for t in range(n):
        if d[t].is_zero():
            basis.append([LaurentSeries.constant(cfg, V[i][t], prec=N) for i in range(n)])
    return basis
