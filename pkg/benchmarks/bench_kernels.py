"""Time the compiled kernels against the pure Python ones.

    python benchmarks/bench_kernels.py [--repeat N]

Each row reports the best of N runs per backend and the speedup.  Results
are checked to agree before anything is timed.
"""
import argparse
import random
import sys
import timeit
from itertools import product

from hlinv import _kernels_py as py

try:
    from hlinv import _kernels as cy
except ImportError:
    cy = None


def cases():
    rng = random.Random(0)

    dims = [3, 3, 3, 3]
    n = 3000
    levels = [rng.randint(-1, 3) for _ in range(n)]
    circles = [rng.randrange(3) for _ in range(n)]
    signs = [rng.choice([1, -1]) for _ in range(n)]
    yield "selection_coefficients 3^4, 3000 letters", "selection_coefficients", (levels, circles, signs, dims)

    for shape, bound in (((2, 2, 2), 3), ((3, 3, 3), 1)):
        size = 1
        for m in shape:
            size *= m
        residual = [rng.randint(-3, 3) for _ in range(size)]
        vecs = [[list(v) for v in product(range(-bound, bound + 1), repeat=m) if any(v)] for m in shape]
        total = 1
        for v in vecs:
            total *= len(v)
        stop = min(total, 200_000)
        label = "x".join(map(str, shape))
        yield f"low_rank_scan {label}, {stop} terms, q=1", "low_rank_scan", (residual, list(shape), vecs, 0, stop, 1)
        yield f"low_rank_scan {label}, {stop} terms, q=2", "low_rank_scan", (residual, list(shape), vecs, 0, stop, 2)

    for m, d in ((5, 2), (2, 8), (3, 6)):
        entries = [rng.randint(-3, 3) for _ in range(m**d)]
        yield f"hyperdet_fixed m={m} d={d}", "hyperdet_fixed", (entries, m, d)


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args(argv)
    if cy is None:
        print("compiled kernels are not built; run `pip install -e . --no-build-isolation`", file=sys.stderr)
        return 1
    print(f"{'case':<44} {'python s':>10} {'cython s':>10} {'speedup':>8}")
    for label, name, call_args in cases():
        f_py, f_cy = getattr(py, name), getattr(cy, name)
        if f_py(*call_args) != f_cy(*call_args):
            print(f"{label}: backends disagree", file=sys.stderr)
            return 1
        t_py = min(timeit.repeat(lambda: f_py(*call_args), number=1, repeat=args.repeat))
        t_cy = min(timeit.repeat(lambda: f_cy(*call_args), number=1, repeat=args.repeat))
        print(f"{label:<44} {t_py:>10.4f} {t_cy:>10.4f} {t_py / t_cy:>7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
