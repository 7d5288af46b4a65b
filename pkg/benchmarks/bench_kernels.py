"""Compare the compiled kernels with the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]
"""

import argparse
import timeit

import numpy as np

from lpmri import _pykernels
from lpmri.transforms import _analysis_filters

try:
    from lpmri import _ckernels
except ImportError:
    _ckernels = None


def cases(n):
    rng = np.random.default_rng(0)
    mag = rng.uniform(0, 2, n * n)
    rows = rng.standard_normal((n, n))
    lo, hi = _analysis_filters("db4")
    return {
        "prox_lp_modulus": lambda k: k.prox_lp_modulus(mag, 0.05, 0.8),
        "dwt_rows": lambda k: k.dwt_rows(rows, lo, hi),
        "idwt_rows": lambda k: k.idwt_rows(rows[:, : n // 2], rows[:, n // 2:], lo, hi),
    }


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--sizes", type=int, nargs="+", default=[64, 128, 256])
    args = ap.parse_args()
    if _ckernels is None:
        print("compiled extension not built; only the numpy fallback is available")
    print(f"{'kernel':<16}{'n':>6}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for n in args.sizes:
        for name, fn in cases(n).items():
            t_py = min(timeit.repeat(lambda: fn(_pykernels), number=3, repeat=args.repeat)) / 3
            if _ckernels is None:
                print(f"{name:<16}{n:>6}{t_py * 1e3:>14.3f}{'-':>14}{'-':>10}")
                continue
            t_c = min(timeit.repeat(lambda: fn(_ckernels), number=3, repeat=args.repeat)) / 3
            print(f"{name:<16}{n:>6}{t_py * 1e3:>14.3f}{t_c * 1e3:>14.3f}{t_py / t_c:>10.1f}")


if __name__ == "__main__":
    main()
