"""Time the numba kernels against their numpy twins.

    python benchmarks/bench_kernels.py [--repeat 5]

The first numba call is excluded (JIT compile), so the numbers are warm timings.
"""
import argparse
import timeit

import numpy as np

from sphgain import _kernels as k
from sphgain._accel import HAVE_NUMBA
from sphgain.models import random_bandlimited


def cases():
    rng = np.random.default_rng(0)
    theta = np.arccos(rng.uniform(-1, 1, 4000))
    x, s = np.cos(theta), np.sin(theta)
    c = random_bandlimited(64, 0)
    pts_t = np.arccos(rng.uniform(-1, 1, 2000))
    pts_p = rng.uniform(0, 2 * np.pi, 2000)
    yield "legendre_order L=128 m=7 (4000 pts)", k._legendre_order_nb, k._legendre_order_np, (128, 7, x, s)
    yield "synth_points L=64 (2000 pts)", k._synth_points_nb, k._synth_points_np, (c.data, 64, pts_t, pts_p)
    yield "gauss_legendre n=512", k._gauss_legendre_nb, k._gauss_legendre_np, (512,)


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args()
    if not HAVE_NUMBA:
        print("numba not installed; the _nb kernels run as plain python")
    print(f"{'kernel':40s} {'numba ms':>10s} {'numpy ms':>10s} {'speedup':>8s}")
    for name, nb, npf, argv in cases():
        nb(*argv)  # compile
        a, b = nb(*argv), npf(*argv)
        for u, v in zip(a if isinstance(a, tuple) else (a,), b if isinstance(b, tuple) else (b,)):
            np.testing.assert_allclose(u, v, rtol=1e-9, atol=1e-12)
        t_nb = min(timeit.repeat(lambda: nb(*argv), number=1, repeat=args.repeat)) * 1e3
        t_np = min(timeit.repeat(lambda: npf(*argv), number=1, repeat=args.repeat)) * 1e3
        print(f"{name:40s} {t_nb:10.3f} {t_np:10.3f} {t_np / t_nb:8.1f}x")


if __name__ == "__main__":
    main()
