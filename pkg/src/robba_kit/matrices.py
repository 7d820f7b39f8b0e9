"""Small dense matrices of :class:`LaurentSeries` (ranks up to about six)."""
from __future__ import annotations

from fractions import Fraction
from itertools import combinations

from .errors import NotInvertibleAtPrecision, PrecisionExhausted
from .laurent import LaurentSeries, SigmaAction, Tag

Matrix = list  # list of rows, each a list of LaurentSeries


def shape(A: Matrix) -> tuple[int, int]:
    return len(A), (len(A[0]) if A else 0)


def identity(cfg, n: int, prec: int, tag: Tag | None = None) -> Matrix:
    one = LaurentSeries.constant(cfg, 1, prec=prec, tag=tag)
    zero = LaurentSeries.zero(cfg, prec=prec, tag=tag)
    return [[one if i == j else zero for j in range(n)] for i in range(n)]


def zeros(cfg, n: int, m: int, prec: int, tag: Tag | None = None) -> Matrix:
    zero = LaurentSeries.zero(cfg, prec=prec, tag=tag)
    return [[zero] * m for _ in range(n)]


def constant_matrix(cfg, rows, prec: int, tag: Tag | None = None) -> Matrix:
    return [[LaurentSeries.constant(cfg, c, prec=prec, tag=tag) for c in row] for row in rows]


def add(A: Matrix, B: Matrix) -> Matrix:
    return [[a + b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def sub(A: Matrix, B: Matrix) -> Matrix:
    return [[a - b for a, b in zip(ra, rb)] for ra, rb in zip(A, B)]


def neg(A: Matrix) -> Matrix:
    return [[-a for a in row] for row in A]


def scale(A: Matrix, c) -> Matrix:
    return [[a * c for a in row] for row in A]


def mul(A: Matrix, B: Matrix) -> Matrix:
    n, k = shape(A)
    k2, m = shape(B)
    if k != k2:
        raise ValueError("shape mismatch")
    out = []
    for i in range(n):
        row = []
        for j in range(m):
            acc = None
            for t in range(k):
                term = A[i][t] * B[t][j]
                acc = term if acc is None else acc + term
            row.append(acc)
        out.append(row)
    return out


def transpose(A: Matrix) -> Matrix:
    n, m = shape(A)
    return [[A[i][j] for i in range(n)] for j in range(m)]


def sigma(A: Matrix, action: SigmaAction | None = None, times: int = 1) -> Matrix:
    return [[a.sigma(action, times) for a in row] for row in A]


def derive(A: Matrix) -> Matrix:
    return [[a.derive() for a in row] for row in A]


def with_prec(A: Matrix, prec: int) -> Matrix:
    return [[a.with_prec(prec) for a in row] for row in A]


def lift(A: Matrix, prec: int) -> Matrix:
    return [[a.lift(prec) for a in row] for row in A]


def min_prec(A: Matrix) -> int:
    return min(a.prec for row in A for a in row)


def vpi(A: Matrix) -> int | None:
    """Minimum pi-adic valuation over all entries (None if all zero)."""
    vals = [a.vpi_min() for row in A for a in row]
    vals = [v for v in vals if v is not None]
    return min(vals) if vals else None


def is_zero(A: Matrix, prec: int | None = None) -> bool:
    for row in A:
        for a in row:
            v = a.vpi_min()
            limit = a.prec if prec is None else min(prec, a.prec)
            if v is not None and v < limit:
                return False
    return True


def equal(A: Matrix, B: Matrix, prec: int | None = None) -> bool:
    return is_zero(sub(A, B), prec)


def kron(A: Matrix, B: Matrix) -> Matrix:
    n1, m1 = shape(A)
    n2, m2 = shape(B)
    return [[A[i // n2][j // m2] * B[i % n2][j % m2] for j in range(m1 * m2)]
            for i in range(n1 * n2)]


def vec(X: Matrix) -> list:
    """Column-major vectorisation."""
    n, m = shape(X)
    return [X[i][j] for j in range(m) for i in range(n)]


def unvec(v: list, n: int, m: int) -> Matrix:
    return [[v[j * n + i] for j in range(m)] for i in range(n)]


def minors(A: Matrix, k: int) -> dict:
    """All ``k x k`` minors, keyed by ``(row_subset, col_subset)``."""
    n, m = shape(A)
    memo: dict = {}

    def det_sub(rows: tuple, cols: tuple) -> LaurentSeries:
        key = (rows, cols)
        if key in memo:
            return memo[key]
        if len(rows) == 1:
            val = A[rows[0]][cols[0]]
        else:
            val = None
            r0 = rows[0]
            for idx, c in enumerate(cols):
                entry = A[r0][c]
                if entry.is_zero() and not entry.open_right:
                    continue
                sub_det = det_sub(rows[1:], cols[:idx] + cols[idx + 1:])
                term = entry * sub_det
                if idx % 2:
                    term = -term
                val = term if val is None else val + term
            if val is None:
                val = A[r0][cols[0]] * det_sub(rows[1:], cols[1:])
        memo[key] = val
        return val

    return {(rs, cs): det_sub(rs, cs) for rs in combinations(range(n), k)
            for cs in combinations(range(m), k)}


def det(A: Matrix) -> LaurentSeries:
    n, m = shape(A)
    if n != m:
        raise ValueError("determinant of a non-square matrix")
    return minors(A, n)[(tuple(range(n)), tuple(range(n)))]


def adjugate(A: Matrix) -> Matrix:
    n, _ = shape(A)
    if n == 1:
        return [[LaurentSeries.constant(A[0][0].cfg, 1, prec=A[0][0].prec, tag=A[0][0].tag)]]
    sub_minors = minors(A, n - 1)
    full = tuple(range(n))
    adj = [[None] * n for _ in range(n)]
    for i in range(n):
        for j in range(n):
            rows = tuple(r for r in full if r != j)
            cols = tuple(c for c in full if c != i)
            val = sub_minors[(rows, cols)]
            adj[i][j] = -val if (i + j) % 2 else val
    return adj


def inverse(A: Matrix) -> Matrix:
    """Inverse via adjugate over determinant; the determinant must be invertible."""
    d = det(A)
    try:
        dinv = d.inverse()
    except PrecisionExhausted as exc:
        raise NotInvertibleAtPrecision(str(exc)) from exc
    return scale(adjugate(A), dinv)


def compound_valuation(A: Matrix, k: int):
    """``min`` of ``v_p`` over all k-minors, with a certification flag.

    Returns ``(value, certified)`` where value is a Fraction (or None if every
    minor is zero at precision) and certified tells whether minors that are
    zero at precision could still hide a smaller valuation.
    """
    e = A[0][0].cfg.e
    best = None
    floor = None
    for m in minors(A, k).values():
        v = m.vpi_min()
        if v is None:
            floor = m.prec if floor is None else min(floor, m.prec)
            continue
        best = v if best is None else min(best, v)
    if best is None:
        return None, False
    certified = floor is None or best <= floor
    return Fraction(best, e), certified


def is_triangular(A: Matrix) -> str | None:
    n, _ = shape(A)
    upper = all(A[i][j].is_zero() and not A[i][j].open_right for i in range(n) for j in range(i))
    if upper:
        return "upper"
    lower = all(A[i][j].is_zero() and not A[i][j].open_right for i in range(n) for j in range(i + 1, n))
    return "lower" if lower else None


def is_constant(a: LaurentSeries) -> bool:
    return not a.open_right and all(int(i) == 0 for i in a.exps)
