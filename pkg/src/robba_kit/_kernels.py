"""Integer kernels behind the series arithmetic.

Coefficient arrays hold residues modulo ``m = p**k``.  When ``m`` fits below
``INT64_LIMIT`` the arrays are ``int64`` and the products go through a
16-bit-limb modular multiply, so nothing overflows; larger moduli fall back to
``object`` arrays of Python ints.

The int64 kernels come in two flavours: numba ``@njit`` versions and plain
numpy versions.  Set ``ROBBA_KIT_NUMBA=0`` to force the numpy path (numba is
also skipped silently when it cannot be imported).  Both paths return
identical results; ``benchmarks/bench_kernels.py`` compares their speed.
"""
from __future__ import annotations

import os

import numpy as np

INT64_LIMIT = 1 << 47
_LIMB = 16
_LIMB_MASK = (1 << _LIMB) - 1
_CHUNK = 1 << 14

try:  # pragma: no cover - exercised implicitly
    import numba
    from numba import njit
except ImportError:  # pragma: no cover
    numba = None

_NUMBA_WANTED = os.environ.get("ROBBA_KIT_NUMBA", "1").strip().lower() not in ("0", "false", "no", "off")


def numba_enabled() -> bool:
    return numba is not None and _NUMBA_WANTED


def set_numba(flag: bool) -> None:
    """Toggle the numba path at runtime (used by the benchmark and tests)."""
    global _NUMBA_WANTED
    _NUMBA_WANTED = bool(flag)


def coeff_dtype(m: int):
    return np.int64 if m < INT64_LIMIT else object


def as_residues(values, m: int) -> np.ndarray:
    """Reduce ``values`` modulo ``m`` into the dtype suited to ``m``."""
    arr = np.asarray(values, dtype=object) % m
    if m < INT64_LIMIT:
        return arr.astype(np.int64)
    return arr


# ---------------------------------------------------------------- numpy path

def _mulmod_np(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    if a.dtype == object or b.dtype == object:
        return (a * b) % m
    a = a.astype(np.int64, copy=False)
    b = b.astype(np.int64, copy=False)
    r = np.zeros(np.broadcast_shapes(a.shape, b.shape), dtype=np.int64)
    for shift in (32, 16, 0):
        limb = (a >> shift) & _LIMB_MASK
        r = ((r << _LIMB) % m + (limb * b) % m) % m
    return r


def _sparse_mul_np(ka, a, kb, b, p, m):
    e = a.shape[1]
    keys = (ka[:, None] + kb[None, :]).ravel()
    out_keys, slot = np.unique(keys, return_inverse=True)
    slot = slot.reshape(len(ka), len(kb))
    obj = a.dtype == object or b.dtype == object
    out = np.zeros((len(out_keys), e), dtype=object if obj else np.int64)
    pm = p % m
    for start in range(0, len(ka), _CHUNK):
        sl = slice(start, start + _CHUNK)
        s = slot[sl].ravel()
        for i in range(e):
            ai = a[sl, i]
            for j in range(e):
                prod = _mulmod_np(ai[:, None], b[None, :, j], m).ravel()
                c = i + j
                if c >= e:
                    prod = _mulmod_np(prod, np.asarray(pm, dtype=prod.dtype), m)
                    c -= e
                col = out[:, c].copy()
                np.add.at(col, s, prod)
                out[:, c] = col % m
    return out_keys.astype(np.int64), out


def _valuation_np(x: np.ndarray, p: int, cap: int) -> np.ndarray:
    x = np.array(x, dtype=object if x.dtype == object else np.int64)
    v = np.zeros(x.shape, dtype=np.int64)
    zero = x == 0
    v[zero] = cap
    live = ~zero
    while live.any():
        div = np.zeros(x.shape, dtype=bool)
        div[live] = (x[live] % p) == 0
        if not div.any():
            break
        x[div] = x[div] // p
        v[div] += 1
        live = div & (v < cap)
    return np.minimum(v, cap)


# ---------------------------------------------------------------- numba path

if numba is not None:

    @njit(cache=True, inline="always")
    def _mm(a, b, m, minv):
        # quotient from doubles: for m < 2**47 its error is below 2, and a*b - q*m
        # is exact in wrapping int64 arithmetic because the true value is small
        q = np.int64(float(a) * float(b) * minv)
        r = a * b - q * m
        while r < 0:
            r += m
        while r >= m:
            r -= m
        return r

    @njit(cache=True)
    def _mulmod_nb(a, b, m):
        out = np.empty(a.shape[0], np.int64)
        minv = 1.0 / m
        for i in range(a.shape[0]):
            out[i] = _mm(a[i], b[i], m, minv)
        return out

    @njit(cache=True, inline="always")
    def _accumulate(out, s, ai_row, bj_row, e, pm, m, minv):
        for i in range(e):
            ai = ai_row[i]
            if ai == 0:
                continue
            for j in range(e):
                bj = bj_row[j]
                if bj == 0:
                    continue
                t = _mm(ai, bj, m, minv)
                c = i + j
                if c >= e:
                    t = _mm(t, pm, m, minv)
                    c -= e
                v = out[s, c] + t
                out[s, c] = v - m if v >= m else v

    @njit(cache=True)
    def _sparse_mul_nb(ka, a, kb, b, p, m):
        la = ka.shape[0]
        lb = kb.shape[0]
        e = a.shape[1]
        n = la * lb
        pm = p % m
        minv = 1.0 / m
        kmin = ka.min() + kb.min()
        span = ka.max() + kb.max() - kmin + 1
        if span <= 8 * n + 1024:
            # dense accumulator indexed by key, no sorting needed
            acc = np.zeros((span, e), np.int64)
            hit = np.zeros(span, np.bool_)
            for x in range(la):
                for y in range(lb):
                    s = ka[x] + kb[y] - kmin
                    hit[s] = True
                    _accumulate(acc, s, a[x], b[y], e, pm, m, minv)
            u = 0
            for t in range(span):
                if hit[t]:
                    u += 1
            out_keys = np.empty(u, np.int64)
            out = np.empty((u, e), np.int64)
            u = 0
            for t in range(span):
                if hit[t]:
                    out_keys[u] = t + kmin
                    out[u] = acc[t]
                    u += 1
            return out_keys, out
        keys = np.empty(n, np.int64)
        for x in range(la):
            for y in range(lb):
                keys[x * lb + y] = ka[x] + kb[y]
        order = np.argsort(keys)
        slot = np.empty(n, np.int64)
        u = 0
        last = np.int64(0)
        for t in range(n):
            k = keys[order[t]]
            if t == 0 or k != last:
                u += 1
                last = k
            slot[order[t]] = u - 1
        out_keys = np.empty(u, np.int64)
        for t in range(n):
            out_keys[slot[t]] = keys[t]
        out = np.zeros((u, e), np.int64)
        for x in range(la):
            for y in range(lb):
                _accumulate(out, slot[x * lb + y], a[x], b[y], e, pm, m, minv)
        return out_keys, out

    @njit(cache=True)
    def _valuation_nb(x, p, cap):
        out = np.empty(x.shape[0], np.int64)
        for i in range(x.shape[0]):
            v = x[i]
            if v == 0:
                out[i] = cap
                continue
            k = 0
            while v % p == 0 and k < cap:
                v //= p
                k += 1
            out[i] = k
        return out


# ---------------------------------------------------------------- dispatch

def mulmod(a: np.ndarray, b: np.ndarray, m: int) -> np.ndarray:
    """Elementwise ``a*b mod m`` for residue arrays of equal shape."""
    a = np.asarray(a)
    b = np.asarray(b)
    if numba_enabled() and m < INT64_LIMIT and a.dtype != object and b.dtype != object and a.ndim == 1 and a.shape == b.shape:
        return _mulmod_nb(a.astype(np.int64), b.astype(np.int64), np.int64(m))
    return _mulmod_np(a, b, m)


def sparse_mul(ka: np.ndarray, a: np.ndarray, kb: np.ndarray, b: np.ndarray, p: int, m: int):
    """Multiply two sparse coefficient lists.

    ``ka``/``kb`` are int64 keys that add under multiplication (exponents or
    mixed-radix encodings of exponent tuples); ``a``/``b`` have shape
    ``(L, e)`` and hold the coordinates of each coefficient in the basis
    ``1, pi, ..., pi^(e-1)`` with ``pi^e = p``.  Returns sorted unique keys
    and the summed coefficients modulo ``m``; zero coefficients are kept.
    """
    if len(ka) == 0 or len(kb) == 0:
        return np.zeros(0, np.int64), np.zeros((0, a.shape[1]), dtype=coeff_dtype(m))
    if numba_enabled() and m < INT64_LIMIT:
        return _sparse_mul_nb(
            np.ascontiguousarray(ka, dtype=np.int64),
            np.ascontiguousarray(a, dtype=np.int64),
            np.ascontiguousarray(kb, dtype=np.int64),
            np.ascontiguousarray(b, dtype=np.int64),
            np.int64(p),
            np.int64(m),
        )
    if m >= INT64_LIMIT:
        a = a.astype(object)
        b = b.astype(object)
    return _sparse_mul_np(np.asarray(ka, np.int64), a, np.asarray(kb, np.int64), b, p, m)


def valuation(x: np.ndarray, p: int, cap: int) -> np.ndarray:
    """p-adic valuation of each entry of a 1-D integer array, ``cap`` for zero."""
    x = np.asarray(x)
    if x.size == 0:
        return np.zeros(x.shape, np.int64)
    if numba_enabled() and x.dtype != object and x.ndim == 1:
        return _valuation_nb(x.astype(np.int64), np.int64(p), np.int64(cap))
    return _valuation_np(x, p, cap)
