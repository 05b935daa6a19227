"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py --cutoffs 16 64 128 256

Prints one row per (kernel, cutoff) with the best time per call for each
backend and the speedup.  ``--json`` emits NDJSON instead.
"""
import argparse
import sys
import timeit

import numpy as np

from burgerslab import _fallback, backend, io
from burgerslab.lab import make_rng, noise_field


def cases(L: int):
    c = noise_field(L, 0.1, make_rng(L)).with_mean(0.2).coeffs.copy()
    x = np.linspace(0.0, 2 * np.pi, 256)

    def rk4(krn):
        d = c.copy()
        return lambda: krn.rk4_advance(d, 1e-4, 10, 1e12)

    return {
        "square_half": lambda krn: (lambda: krn.square_half(c)),
        "rhs_half": lambda krn: (lambda: krn.rhs_half(c)),
        "rk4_advance_x10": rk4,
        "triad_sum": lambda krn: (lambda: krn.triad_sum(c)),
        "evaluate_many_256": lambda krn: (lambda: krn.evaluate_many(c, x)),
    }


def best_time(fn, repeat: int) -> float:
    timer = timeit.Timer(fn)
    n, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=n)) / n


def main(argv=None) -> int:
    p = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    p.add_argument("--cutoffs", type=int, nargs="+", default=[16, 64, 128, 256])
    p.add_argument("--repeat", type=int, default=5)
    p.add_argument("--json", action="store_true", help="emit NDJSON rows")
    args = p.parse_args(argv)
    if backend.compiled is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    if not args.json:
        print(f"{'kernel':<20}{'L':>6}{'compiled [us]':>16}{'python [us]':>14}{'speedup':>10}")
    for L in args.cutoffs:
        for name, make in cases(L).items():
            if name == "triad_sum" and L > 128:
                continue  # the pure-python triad loop is quadratic and slow
            tc = best_time(make(backend.compiled), args.repeat)
            tp = best_time(make(_fallback), args.repeat)
            if args.json:
                print(io.dumps({"kernel": name, "lambda": L, "compiled_s": tc, "python_s": tp, "speedup": tp / tc}))
            else:
                print(f"{name:<20}{L:>6}{tc * 1e6:>16.2f}{tp * 1e6:>14.2f}{tp / tc:>10.2f}")
    return 0


if __name__ == "__main__":
    sys.exit(main())
