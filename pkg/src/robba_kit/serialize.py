"""JSON encodings for elements, series, matrices and valuations.

All encoders produce plain ``dict``/``list``/``str``/``int`` data with a fixed
key order, so ``json.dumps`` output is byte-for-byte reproducible.  Decoders
raise :class:`ParseError` on malformed input.
"""
from __future__ import annotations

import math
from fractions import Fraction

from .errors import ParseError
from .laurent import LaurentSeries, Tag
from .padic import AtLeast, OElem, RingConfig
from .tate import DEFAULT_CAP, PolyRadius, TateSeries


def fraction_to_json(x) -> list:
    x = Fraction(x)
    return [x.numerator, x.denominator]


def fraction_from_json(obj) -> Fraction:
    try:
        if isinstance(obj, (list, tuple)) and len(obj) == 2:
            return Fraction(int(obj[0]), int(obj[1]))
        if isinstance(obj, (int, str)):
            return Fraction(obj)
    except (ValueError, ZeroDivisionError) as exc:
        raise ParseError(f"bad rational {obj!r}") from exc
    raise ParseError(f"bad rational {obj!r}")


def valuation_to_json(v):
    if isinstance(v, AtLeast):
        return {"at_least": fraction_to_json(v.bound)}
    if v is None or v == math.inf:
        return "inf"
    return fraction_to_json(v)


# ---------------------------------------------------------------- O elements

def oelem_to_json(x: OElem) -> dict:
    return {"value": str(x.to_int()), "p": x.cfg.p, "e": x.cfg.e, "N": x.prec}


def oelem_from_json(cfg: RingConfig, obj) -> OElem:
    if isinstance(obj, dict):
        value, prec = obj.get("value"), obj.get("N", cfg.N_default)
    else:
        value, prec = obj, cfg.N_default
    try:
        return OElem.from_encoded(cfg, int(value), int(prec))
    except (TypeError, ValueError) as exc:
        raise ParseError(f"bad O element {obj!r}") from exc


# ---------------------------------------------------------------- Laurent series

def series_to_json(x: LaurentSeries) -> dict:
    out = x.tag.to_json()
    P = max(x.numer_prec, 0)
    out.update({
        "N": x.prec,
        "den": x.den,
        "window": [x.lo, x.hi],
        "open_right": x.open_right,
        "terms": [[int(i), str(c.to_int())] for i, c in sorted(x.terms().items())]
        if P else [],
    })
    return out


def series_from_json(cfg: RingConfig, obj, prec: int | None = None) -> LaurentSeries:
    """Parse the series schema; coefficients are encoded O elements or rationals.

    A coefficient given as an integer string is an encoded O element; a JSON
    number or a ``"a/b"`` string is read as a rational.
    """
    if not isinstance(obj, dict) or "terms" not in obj:
        raise ParseError("series JSON needs a 'terms' list")
    try:
        kind = obj.get("tag", "GammaCon")
        r = obj.get("r")
        tag = Tag(kind, fraction_from_json(r) if r is not None else Fraction(1))
        N = int(obj.get("N", cfg.N_default if prec is None else prec))
        den = int(obj.get("den", 0))
        window = obj.get("window")
        open_right = bool(obj.get("open_right", False))
        terms = {}
        for item in obj["terms"]:
            i, c = item
            terms[int(i)] = _coeff_from_json(cfg, c, N + den)
    except ParseError:
        raise
    except (TypeError, ValueError, KeyError) as exc:
        raise ParseError(f"malformed series: {exc}") from exc
    x = LaurentSeries.from_terms(cfg, terms, prec=N + den, window=window, open_right=open_right,
                                 tag=tag)
    if den:
        x = x.mul_pi_power(-den)
    return x


def _coeff_from_json(cfg: RingConfig, c, numer_prec: int):
    if isinstance(c, str) and "/" not in c:
        return OElem.from_encoded(cfg, int(c), max(numer_prec, 0))
    if isinstance(c, (int, float)) and not isinstance(c, bool):
        return Fraction(c)
    if isinstance(c, str):
        return Fraction(c)
    raise ParseError(f"bad coefficient {c!r}")


def matrix_to_json(A: list) -> list:
    return [[series_to_json(x) for x in row] for row in A]


def matrix_from_json(cfg: RingConfig, obj, prec: int | None = None) -> list:
    if not isinstance(obj, list) or not obj or not all(isinstance(r, list) for r in obj):
        raise ParseError("matrix JSON must be a nonempty list of rows")
    width = len(obj[0])
    if any(len(r) != width for r in obj):
        raise ParseError("matrix rows have different lengths")
    return [[series_from_json(cfg, x, prec) for x in row] for row in obj]


# ---------------------------------------------------------------- Tate series

def tate_to_json(x: TateSeries) -> dict:
    """``{"n","radius","N","cap","terms":[[[i..], "num", den], ...]}``; value ``num / p**den``.

    Numerators are printed as balanced residues modulo the digits they carry.
    """
    terms = [[[int(a) for a in I], str(c), x.den]
             for I, c in zip(x.exps, x.balanced_numerators())]
    prec = x.prec if x.prec.denominator != 1 else int(x.prec)
    return {
        "n": x.n,
        "radius": x.radius.to_json(),
        "N": fraction_to_json(prec) if isinstance(prec, Fraction) else prec,
        "cap": x.cap,
        "terms": terms,
    }


def tate_from_json(cfg: RingConfig, obj, radius: PolyRadius | None = None, prec=None,
                   cap: int | None = None) -> TateSeries:
    if not isinstance(obj, dict) or "terms" not in obj:
        raise ParseError("Tate series JSON needs a 'terms' list")
    try:
        if "radius" in obj:
            radius = PolyRadius(tuple(fraction_from_json(r) for r in obj["radius"]))
        elif radius is None:
            radius = PolyRadius.unit(int(obj["n"]))
        if "n" in obj and int(obj["n"]) != radius.n:
            raise ParseError("'n' disagrees with the radius")
        N = fraction_from_json(obj["N"]) if "N" in obj else Fraction(cfg.N_default if prec is None else prec)
        cap = int(obj.get("cap", DEFAULT_CAP if cap is None else cap))
        terms = {}
        for item in obj["terms"]:
            if len(item) == 2:
                I, c = item
                value = Fraction(c) if not isinstance(c, float) else Fraction(str(c))
            else:
                I, c, d = item
                value = Fraction(int(c), cfg.p ** int(d))
            key = tuple(int(a) for a in I)
            terms[key] = terms.get(key, 0) + value
    except ParseError:
        raise
    except (TypeError, ValueError, KeyError, ZeroDivisionError) as exc:
        raise ParseError(f"malformed Tate series: {exc}") from exc
    return TateSeries.from_terms(cfg, radius, terms, N, cap)
