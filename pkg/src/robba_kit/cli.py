"""Command line front end: ``robba-kit <command> [options] [input.json]``.

Input is read from a JSON file (or standard input with ``-``), results are
printed to standard output as a single JSON document, and logs go to
standard error.  Errors produce ``{"error": <class name>, "message": ...}``
with exit status 2 (parse), 3 (precondition) or 4 (no contraction).  A
certificate that fails ``verify`` or a failing selftest exits with status 1.
"""
from __future__ import annotations

import argparse
import json
import logging
import re
import sys
from fractions import Fraction

from . import matrices as mx
from .errors import ParseError, RobbaError
from .frobenius import solve_twisted, split_extension
from .laurent import LaurentSeries
from .padic import RingConfig, is_prime
from .quillen_suslin import complete_to_square, kernel_free_basis, unimodular_reduce
from .serialize import (fraction_from_json, fraction_to_json, matrix_from_json, matrix_to_json,
                        series_from_json, series_to_json, tate_from_json, tate_to_json,
                        valuation_to_json)
from .sigma_module import SigmaModule, newton_slopes
from .tate import PolyRadius, TjMap, tj_find, tj_transform, unit_conditions_hold, weierstrass_prepare

log = logging.getLogger("robba_kit")


# ---------------------------------------------------------------- parsing helpers

def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _config(args) -> RingConfig:
    if not is_prime(args.prime):
        raise ParseError(f"--prime {args.prime} is not prime")
    if args.precision < 1 or args.ram < 1 or args.power < 1:
        raise ParseError("--precision, --ram and --power must be at least 1")
    return RingConfig(args.prime, args.power, args.ram, args.precision)


def _radius(args, n: int | None = None) -> PolyRadius | None:
    if not args.radius:
        return None if n is None else PolyRadius.unit(n)
    r = PolyRadius(tuple(args.radius))
    if n is not None and r.n != n:
        raise ParseError(f"{r.n} radii given for {n} variables")
    return r


def _read(args):
    try:
        if args.input == "-":
            return json.load(sys.stdin)
        with open(args.input, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(f"malformed JSON: {exc}") from exc
    except OSError as exc:
        raise ParseError(f"cannot read {args.input}: {exc}") from exc


def _field(obj, key):
    if not isinstance(obj, dict) or key not in obj:
        raise ParseError(f"input needs a {key!r} field")
    return obj[key]


def _tate(cfg, obj, args):
    n = obj.get("n") if isinstance(obj, dict) else None
    radius = None if "radius" in (obj if isinstance(obj, dict) else {}) else \
        _radius(args, int(n) if n is not None else None)
    return tate_from_json(cfg, obj, radius, args.precision, args.cap)


def _tate_list(cfg, items, args) -> list:
    if not isinstance(items, list) or not items:
        raise ParseError("expected a nonempty list of Tate series")
    return [_tate(cfg, x, args) for x in items]


def _tate_matrix(cfg, rows, args) -> list:
    if not isinstance(rows, list) or not all(isinstance(r, list) for r in rows):
        raise ParseError("expected a matrix of Tate series")
    return [[_tate(cfg, x, args) for x in row] for row in rows]


def _scalar(obj) -> Fraction:
    return fraction_from_json(obj)


# ---------------------------------------------------------------- eval

def cmd_eval(args) -> dict:
    cfg = _config(args)
    obj = _read(args)
    op = args.op
    if op in ("gauss", "leading"):
        f = _tate(cfg, obj, args)
        if op == "gauss":
            return {"v": fraction_to_json(f.gauss_valuation())}
        var = f.n - 1 if args.var is None else args.var
        j, c = f.leading_term(var)
        return {"var": var, "j": j, "coeff": tate_to_json(c)}
    x = series_from_json(cfg, obj, args.precision)
    if op == "wr":
        if args.r is None:
            raise ParseError("wr needs --r")
        return {"w_r": valuation_to_json(x.wr(args.r))}
    if op == "vn":
        if args.n is None:
            raise ParseError("vn needs --n")
        v = x.vn_naive(args.n)
        return {"v_n": v if isinstance(v, int) else "inf"}
    if op == "derive":
        return {"series": series_to_json(x.derive())}
    return {"series": series_to_json(x.sigma())}


# ---------------------------------------------------------------- slopes and solvers

def cmd_slopes(args) -> dict:
    cfg = _config(args)
    obj = _read(args)
    A = matrix_from_json(cfg, obj["A"] if isinstance(obj, dict) else obj, args.precision)
    est = newton_slopes(SigmaModule(A), args.depth)
    out = est.to_json()
    out["slopes"] = [fraction_to_json(s) for s in est.slopes]
    return out


def cmd_solve(args) -> dict:
    cfg = _config(args)
    obj = _read(args)
    N = int(obj.get("N", args.precision)) if isinstance(obj, dict) else args.precision
    if args.kind == "twisted":
        lam = _scalar(_field(obj, "lambda"))
        x = series_from_json(cfg, _field(obj, "x"), N)
        sol = solve_twisted(lam, x, N)
        return {"kind": "twisted", "lambda": fraction_to_json(lam), "x": series_to_json(x), "N": N,
                **sol.to_json()}
    if obj.get("sigma", "standard") != "standard":
        raise ParseError("only the standard Frobenius lift (sigma = 'standard') is supported")
    A = matrix_from_json(cfg, _field(obj, "A"), N)
    B = matrix_from_json(cfg, _field(obj, "B"), N)
    D = matrix_from_json(cfg, _field(obj, "D"), N)
    cert = split_extension(A, B, D, N, kmax=args.kmax)
    return {"kind": "split", "A": matrix_to_json(A), "B": matrix_to_json(B), "D": matrix_to_json(D),
            "N": N, **cert.to_json()}


# ---------------------------------------------------------------- Quillen-Suslin

def cmd_qs(args) -> dict:
    if args.selftest:
        from .selftest import run_selftest
        return run_selftest(args.seed, args.scale, only=["weierstrass", "degree", "qs"])
    if args.op is None:
        raise ParseError("qs needs one of prepare, tj, reduce, complete, kernel (or --selftest)")
    cfg = _config(args)
    obj = _read(args)
    N = args.precision
    if args.op == "prepare":
        f = _tate(cfg, obj, args)
        prep = weierstrass_prepare(f, args.var)
        return {"kind": "preparation", "f": tate_to_json(f), "N": N, "var": prep.var,
                "degree": prep.degree, "u": tate_to_json(prep.u), "u_inv": tate_to_json(prep.u_inv),
                "P": tate_to_json(prep.P), "iterations": prep.iterations,
                "residual_val": valuation_to_json(prep.residual_val),
                "unit_conditions": unit_conditions_hold(prep)}
    if args.op == "tj":
        f = _tate(cfg, obj, args)
        if args.j is None:
            T, g = tj_find(f, args.jmax, args.mode, args.var)
        else:
            T, g = tj_transform(f, args.j, args.mode, args.var)
        return {"kind": "tj", "f": tate_to_json(f), "N": N, "map": T.to_json(), "g": tate_to_json(g)}
    f = _tate_list(cfg, _field(obj, "f"), args)
    wit = obj.get("witness")
    g = None if wit is None else _tate_list(cfg, wit, args)
    kw = {"N": N, "seed": args.seed, "jmax": args.jmax}
    if args.op == "reduce":
        cert = unimodular_reduce(f, g, **kw)
        return {"kind": "reduction", "N": N, "seed": args.seed, **cert.to_json()}
    if args.op == "complete":
        cert = unimodular_reduce(f, g, **kw)
        C = complete_to_square(cert)
        return {"kind": "completion", "N": N, "seed": args.seed, "f": [tate_to_json(x) for x in f],
                "matrix": [[tate_to_json(x) for x in row] for row in C],
                "inverse": [[tate_to_json(x) for x in row] for row in cert.M]}
    kb = kernel_free_basis(f, g, **kw)
    return {"kind": "kernel", "N": N, "seed": args.seed, "u": [tate_to_json(x) for x in f],
            "basis": [[tate_to_json(x) for x in vec] for vec in kb.basis],
            "completion": [[tate_to_json(x) for x in row] for row in kb.completion],
            "completion_inv": [[tate_to_json(x) for x in row] for row in kb.completion_inv]}


# ---------------------------------------------------------------- verify and selftest

def cmd_verify(args) -> dict:
    from . import verify as V
    cfg = _config(args)
    obj = _read(args)
    kind = _field(obj, "kind")
    N = int(obj.get("N", args.precision))
    T = lambda o: _tate(cfg, o, args)                       # noqa: E731
    TL = lambda o: [T(x) for x in o]                        # noqa: E731
    TM = lambda o: [[T(x) for x in row] for row in o]       # noqa: E731
    if kind == "reduction":
        checks = V.check_reduction(TL(obj["f"]), TM(obj["M"]), TM(obj["M_inv"]), N)
    elif kind == "completion":
        checks = V.check_completion(TL(obj["f"]), TM(obj["matrix"]), TM(obj["inverse"]), N)
    elif kind == "kernel":
        checks = V.check_kernel(TL(obj["u"]), TM(obj["basis"]), TM(obj["completion"]),
                                TM(obj["completion_inv"]), N)
    elif kind == "preparation":
        checks = V.check_preparation(T(obj["f"]), T(obj["u"]), T(obj["u_inv"]), T(obj["P"]),
                                     int(obj["degree"]), int(obj["var"]), N)
    elif kind == "tj":
        m = obj["map"]
        Tm = TjMap(int(m["j"]), int(m["special"]), int(m["m"]), int(m["u"][1]), m["mode"],
                   fraction_from_json(m["lambda"]))
        checks = V.check_tj(T(obj["f"]), Tm, T(obj["g"]), N)
    elif kind == "twisted":
        x = series_from_json(cfg, obj["x"], N)
        y = series_from_json(cfg, obj["y"], N)
        checks = V.check_twisted(fraction_from_json(obj["lambda"]), x, y, N)
    elif kind == "split":
        M = lambda key: matrix_from_json(cfg, obj[key], N)  # noqa: E731
        checks = V.check_split(M("A"), M("B"), M("D"), M("X"), N)
    else:
        raise ParseError(f"unknown certificate kind {kind!r}")
    return {"kind": kind, "checks": checks, "verified": all(checks.values())}


def cmd_selftest(args) -> dict:
    from .selftest import run_selftest
    return run_selftest(args.seed, args.scale, only=args.suite or None)


# ---------------------------------------------------------------- argument parser

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--prime", type=int, default=5, help="residue characteristic p")
    common.add_argument("--ram", type=int, default=1, help="ramification index e")
    common.add_argument("--power", type=int, default=1, help="f with q = p^f")
    common.add_argument("--precision", type=int, default=12, help="target precision N")
    common.add_argument("--radius", type=_rational, action="append",
                        help="log-radius e_k (rho_k = p^-e_k) as a/b; repeat once per variable")
    common.add_argument("--cap", type=int, default=64, help="degree cap per variable")
    common.add_argument("--seed", type=int, default=7, help="seed for every random choice")
    common.add_argument("--jmax", type=int, default=16, help="largest T_j tried")
    common.add_argument("--kmax", type=int, default=None, help="contraction probe length")
    common.add_argument("-v", "--verbose", action="store_true", help="log to standard error")

    parser = argparse.ArgumentParser(prog="robba-kit", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    def with_input(p):
        p.add_argument("input", nargs="?", default="-", help="JSON input file ('-' for stdin)")
        return p

    p = sub.add_parser("eval", parents=[common], help="evaluate one operation")
    p.add_argument("op", choices=["wr", "vn", "derive", "sigma", "gauss", "leading"])
    with_input(p)
    p.add_argument("--r", type=_rational, help="overconvergence parameter for wr")
    p.add_argument("--n", type=_rational, help="level for vn")
    p.add_argument("--var", type=int, default=None, help="variable index for leading")
    p.set_defaults(func=cmd_eval)

    p = with_input(sub.add_parser("slopes", parents=[common], help="Newton slopes of a Frobenius matrix"))
    p.add_argument("--depth", type=int, default=8, help="number of Frobenius iterates")
    p.set_defaults(func=cmd_slopes)

    p = sub.add_parser("solve", parents=[common], help="twisted or splitting equation")
    p.add_argument("kind", choices=["twisted", "split"])
    with_input(p)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("qs", parents=[common], help="Tate algebra and Quillen-Suslin tools")
    p.add_argument("op", nargs="?", choices=["prepare", "tj", "reduce", "complete", "kernel"])
    p.add_argument("input", nargs="?", default="-", help="JSON input file ('-' for stdin)")
    p.add_argument("--var", type=int, default=None, help="distinguished variable (default last)")
    p.add_argument("--j", type=int, default=None, help="apply this T_j instead of searching")
    p.add_argument("--mode", choices=["field", "ring"], default="field")
    p.add_argument("--selftest", action="store_true", help="run the randomized round-trip suites")
    p.add_argument("--scale", type=float, default=1.0, help="fraction of the selftest cases to run")
    p.set_defaults(func=cmd_qs)

    p = with_input(sub.add_parser("verify", parents=[common], help="re-check an emitted certificate"))
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("selftest", parents=[common], help="run the randomized suites")
    p.add_argument("--scale", type=float, default=1.0, help="fraction of the cases to run")
    p.add_argument("--suite", action="append", help="restrict to this suite (repeatable)")
    p.set_defaults(func=cmd_selftest)
    return parser


def _glue_negative(argv: list) -> list:
    """Turn ``--radius -1/2`` into ``--radius=-1/2`` (argparse reads ``-1/2`` as a flag)."""
    out, k = [], 0
    while k < len(argv):
        a = argv[k]
        if a in ("--radius", "--r", "--n") and k + 1 < len(argv) and re.match(r"-\d", argv[k + 1]):
            out.append(f"{a}={argv[k + 1]}")
            k += 2
            continue
        out.append(a)
        k += 1
    return out


def main(argv=None) -> int:
    parser = build_parser()
    argv = _glue_negative(sys.argv[1:] if argv is None else list(argv))
    commands = next(a for a in parser._actions if isinstance(a, argparse._SubParsersAction)).choices
    if argv and argv[0] in commands:
        # intermixed parsing lets options sit between the operation and the input file
        args = commands[argv[0]].parse_intermixed_args(argv[1:])
    else:
        args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING, stream=sys.stderr,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        out = args.func(args)
        # a certificate that fails to re-verify, or a failing suite, is reported with status 1
        code = 1 if out.get("verified") is False or out.get("all_passed") is False else 0
    except RobbaError as exc:
        out, code = {"error": type(exc).__name__, "message": str(exc)}, exc.exit_code
    except (KeyError, TypeError) as exc:
        out, code = {"error": "ParseError", "message": f"malformed input: {exc!r}"}, 2
    except ValueError as exc:
        out, code = {"error": "ValueError", "message": str(exc)}, 3
    json.dump(out, sys.stdout)
    sys.stdout.write("\n")
    return code


if __name__ == "__main__":
    sys.exit(main())
