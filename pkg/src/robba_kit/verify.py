"""Re-checking emitted certificates with multiplications and comparisons only.

Every function takes the decoded objects of a certificate and returns a
dict of named boolean checks.  Nothing here calls a solver or a reducer.
"""
from __future__ import annotations

from fractions import Fraction

from . import matrices as mx
from .frobenius import block_conjugation_check, twisted_residual
from .padic import guard_digits
from .quillen_suslin import matmul, matvec, verify_certificate
from .tate import TateSeries, TjMap, unit_conditions_hold


def _small(x: TateSeries, target) -> bool:
    return x.is_zero() or (x.prec >= target and x.gauss_valuation() >= target)


def _is_identity(P: list, target) -> bool:
    m = len(P)
    return all(_small(P[i][j] - (1 if i == j else 0), target) for i in range(m) for j in range(m))


def check_reduction(f: list, M: list, M_inv: list, N: int) -> dict:
    return {"M_f_is_e1_and_M_Minv_is_I": verify_certificate(f, M, M_inv, N)}


def check_completion(f: list, C: list, C_inv: list, N: int) -> dict:
    target = Fraction(N) - guard_digits()
    col = all(_small(C[i][0] - f[i], target) for i in range(len(f)))
    return {"first_column_is_f": col, "invertible": _is_identity(matmul(C, C_inv), target)}


def check_kernel(u: list, basis: list, C: list, C_inv: list, N: int) -> dict:
    target = Fraction(N) - guard_digits()
    ul = [x.lift(max(x.prec, C[0][0].prec)) for x in u]
    ann = all(_small(matvec([vec], ul)[0], target) for vec in basis)
    return {"annihilates_u": ann, "completion_invertible": _is_identity(matmul(C, C_inv), target)}


def check_preparation(f: TateSeries, u: TateSeries, u_inv: TateSeries, P: TateSeries,
                      degree: int, var: int, N: int) -> dict:
    target = Fraction(N) - guard_digits()
    from .tate import Preparation
    prep = Preparation(u, u_inv, P, degree, var, 0, None)
    return {
        "f_is_uP": _small(f - u * P, target),
        "u_inverse": _small(u * u_inv - 1, target),
        "degree": P.max_degree_in(var) == degree,
        "unit_conditions": unit_conditions_hold(prep),
    }


def check_tj(f: TateSeries, T: TjMap, g: TateSeries, N: int) -> dict:
    target = Fraction(N) - guard_digits()
    image = T.apply(f)
    if T.mode == "ring":
        image = TateSeries._make(image.cfg, g.radius, image.exps, image.nums, image.den, image.prec,
                                 image.cap)
    return {"image_matches": _small(image - g, target),
            "round_trip": _small(T.inverse(T.apply(f)) - f, target)}


def check_twisted(lam, x, y, N: int) -> dict:
    rv = twisted_residual(lam, x, y).vpi_min()
    return {"residual": rv is None or rv >= N}


def check_split(A: list, B: list, D: list, X: list, N: int) -> dict:
    check = N - guard_digits()
    P = max(mx.min_prec(X), check) + 4
    Dinv = mx.inverse(mx.lift(D, P))
    lhs = mx.add(mx.neg(X), mx.mul(mx.mul(mx.lift(A, P), mx.sigma(X)), Dinv))
    eq = mx.is_zero(mx.sub(lhs, mx.lift(B, P)), check)
    _, conj = block_conjugation_check(mx.lift(A, P), mx.lift(B, P), mx.lift(D, P), X, check)
    return {"equation": eq, "block_conjugation": conj}
