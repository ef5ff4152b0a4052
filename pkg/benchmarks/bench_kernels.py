"""Time the compiled and NumPy partner-pairing kernels on the same inputs.

Usage: ``python benchmarks/bench_kernels.py [--repeat N]``. Before timing, the
two backends are checked to give bitwise-identical results.
"""

import argparse
import sys
import timeit

import numpy as np

from hbacqec import _ppa_py

try:
    from hbacqec import _ppa_ext
except ImportError:
    _ppa_ext = None


def cases():
    for n, iters, c in ((3, 10, 0.0), (4, 50, 0.0), (5, 50, 0.01), (8, 20, 0.01)):
        start = np.full(2**n, 2.0**-n)
        yield f"ppa n={n} iters={iters} c={c}", (start, n, iters, 0.31, n - 1, c, False)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    if _ppa_ext is None:
        print("compiled extension not built; nothing to compare", file=sys.stderr)
        return 1
    print(f"{'case':32s} {'python [ms]':>12s} {'cython [ms]':>12s} {'speedup':>8s}")
    for label, call in cases():
        a, b = _ppa_py.ppa_diag(*call), _ppa_ext.ppa_diag(*call)
        if not (np.array_equal(a[0], b[0]) and np.array_equal(a[1], b[1])):
            print(f"{label}: backends disagree", file=sys.stderr)
            return 2
        times = []
        for impl in (_ppa_py, _ppa_ext):
            timer = timeit.Timer(lambda: impl.ppa_diag(*call))
            number, _ = timer.autorange()
            times.append(min(timer.repeat(args.repeat, number)) / number * 1e3)
        print(f"{label:32s} {times[0]:12.4f} {times[1]:12.4f} {times[0] / times[1]:7.1f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
