"""Time the compiled kernels against the numpy fallback.

    python benchmarks/bench_kernels.py [--n 1000000] [--repeat 5]
"""
import argparse
import math
import timeit

import numpy as np

from podium_dp import PrivacyParams, _kernels_py
from podium_dp.baselines import laplace_scale, staircase_shape
from podium_dp.podium import compute_shape

try:
    from podium_dp import _kernels
except ImportError:
    _kernels = None


def cases(n):
    rng = np.random.default_rng(0)
    xs = rng.uniform(-0.5, 0.5, n)
    u2 = rng.random((n, 2))
    u4 = rng.random((n, 4))
    params = PrivacyParams(1.0, 1.0)
    sh = compute_shape(params)
    st = staircase_shape(params)
    logf = np.log(np.vstack([np.where(rng.random(2001) < 0.5, sh.d, sh.high_density) for _ in range(101)]))
    return {
        "podium_sample": lambda m: m.podium_sample(xs, u2, sh.lo, sh.hi, sh.w, sh.d, math.exp(1.0)),
        "laplace_sample": lambda m: m.laplace_sample(xs, u2, laplace_scale(params)),
        "staircase_sample": lambda m: m.staircase_sample(xs, u4, 1.0, 1.0, st.gamma),
        "pair_log_ratio_scan": lambda m: m.pair_log_ratio_scan(logf, 1.0, 1e-9),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=1_000_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    backends = [("python", _kernels_py)] + ([("cython", _kernels)] if _kernels else [])
    print(f"{'kernel':<22}" + "".join(f"{name:>12}" for name, _ in backends) + "     speedup")
    for label, fn in cases(args.n).items():
        times = [min(timeit.repeat(lambda: fn(mod), number=1, repeat=args.repeat)) for _, mod in backends]
        line = f"{label:<22}" + "".join(f"{t * 1e3:>10.1f}ms" for t in times)
        if len(times) == 2:
            line += f"{times[0] / times[1]:>11.1f}x"
        print(line)


if __name__ == "__main__":
    main()
