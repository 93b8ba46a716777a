"""Time the compiled off-grid kernels against the NumPy fallback.

    python3 benchmarks/bench_kernels.py [--points 4096] [--repeat 5]
"""
import argparse
import timeit

import numpy as np

from boussinesq2d import _kernels_py as pure
from boussinesq2d.spectral import grid
from boussinesq2d.synthesis import synthesize_field

try:
    from boussinesq2d import _kernels as compiled
except ImportError:
    compiled = None


def best(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=4096)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    pts = rng.uniform(0, 2 * np.pi, (args.points, 2))
    print(f"{'kernel':<24}{'size':>8}{'python [ms]':>14}{'cython [ms]':>14}{'speedup':>10}")
    for m in (64, 256, 512):
        vals = rng.standard_normal((m, m))
        cases = [("interp_periodic", m, lambda mod: mod.interp_periodic(vals, pts))]
        if m <= 64:
            g = grid(m)
            c = synthesize_field(g, 2.0, 1).coeffs
            k = g.wavenumbers.astype(float)
            cases.append(("fourier_eval", m, lambda mod: mod.fourier_eval(c, k, pts)))
        for name, size, fn in cases:
            tp = best(lambda: fn(pure), args.repeat) * 1e3
            if compiled is None:
                print(f"{name:<24}{size:>8}{tp:>14.2f}{'n/a':>14}{'':>10}")
                continue
            tc = best(lambda: fn(compiled), args.repeat) * 1e3
            print(f"{name:<24}{size:>8}{tp:>14.2f}{tc:>14.2f}{tp / tc:>9.1f}x")


if __name__ == "__main__":
    main()
