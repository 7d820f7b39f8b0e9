"""Compare the numba and numpy kernel paths.

    python benchmarks/bench_kernels.py [--repeat 5] [--sizes 64 256 1024]

Each kernel runs once per path for warm-up (numba compiles on first call),
then ``--repeat`` timed runs; the best time is reported.  Results of the two
paths are checked for equality before timing.
"""
from __future__ import annotations

import argparse
import time

import numpy as np

from robba_kit import _kernels as K
from robba_kit.laurent import LaurentSeries
from robba_kit.padic import RingConfig


def best_time(fn, repeat: int) -> float:
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t0)
    return best


def cases(size: int, rng):
    m = 5 ** 12
    ka = np.unique(rng.integers(-4 * size, 4 * size, size))
    kb = np.unique(rng.integers(-4 * size, 4 * size, size))
    a = rng.integers(0, m, (ka.size, 1))
    b = rng.integers(0, m, (kb.size, 1))
    x = rng.integers(0, m, 64 * size)
    cfg = RingConfig(5)
    s = LaurentSeries.from_terms(cfg, {int(i): int(c) for i, c in zip(ka, a[:, 0])})
    t = LaurentSeries.from_terms(cfg, {int(i): int(c) for i, c in zip(kb, b[:, 0])})
    return {
        "sparse_mul": lambda: K.sparse_mul(ka, a, kb, b, 5, m),
        "mulmod": lambda: K.mulmod(x, x[::-1].copy(), m),
        "valuation": lambda: K.valuation(x * 5 ** 3, 5, 20),
        "series_mul": lambda: s * t,
    }


def same(u, v) -> bool:
    if isinstance(u, tuple):
        return all(same(a, b) for a, b in zip(u, v))
    if isinstance(u, LaurentSeries):
        return u.equals(v)
    return np.array_equal(np.asarray(u, dtype=object), np.asarray(v, dtype=object))


def main(argv=None) -> None:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=5)
    parser.add_argument("--sizes", type=int, nargs="+", default=[64, 256, 1024])
    parser.add_argument("--seed", type=int, default=0)
    args = parser.parse_args(argv)
    if K.numba is None:
        print("numba is not importable; only the numpy path is available")
        return
    before = K.numba_enabled()
    print(f"numba {K.numba.__version__}, numpy {np.__version__}")
    print(f"{'kernel':<12}{'size':>6}{'numpy [ms]':>13}{'numba [ms]':>13}{'speedup':>10}")
    try:
        for size in args.sizes:
            for name, fn in cases(size, np.random.default_rng(args.seed)).items():
                K.set_numba(False)
                ref = fn()
                slow = best_time(fn, args.repeat)
                K.set_numba(True)
                if not same(ref, fn()):
                    raise SystemExit(f"{name}: numba and numpy results differ at size {size}")
                fast = best_time(fn, args.repeat)
                print(f"{name:<12}{size:>6}{slow * 1e3:>13.3f}{fast * 1e3:>13.3f}{slow / fast:>9.1f}x")
    finally:
        K.set_numba(before)


if __name__ == "__main__":
    main()
