"""Time the numba kernels against their numpy fallbacks.

Run ``python3 benchmarks/bench_kernels.py``. Each kernel is called once to
warm up (JIT compilation), then timed over a few repeats; results of both
paths are compared before timing is reported.
"""

import argparse
import time

import numpy as np

from boxlike import _kernels as K
from boxlike.presets import example1
from boxlike.projection import project_ifs
from boxlike.empirical import _edge_arrays


def best_of(fn, repeats):
    best = float("inf")
    for _ in range(repeats):
        t = time.perf_counter()
        fn()
        best = min(best, time.perf_counter() - t)
    return best


def cases(scale):
    rng = np.random.default_rng(0)
    n = 200_000 * scale
    expo = rng.normal(-5, 3, n)
    mult = rng.integers(1, 100, n).astype(float)
    x, y = rng.normal(size=n), rng.normal(size=n)
    ifs = example1()
    lin, off = ifs.affine_arrays()
    probs = ifs.arrays()[2]
    delta = 2.0 ** -(9 + scale)
    src, dst, a, b, w = _edge_arrays(project_ifs(ifs)[0])
    keys = rng.integers(0, 4096, n)
    mass = rng.random(n)
    rects = np.sort(rng.random((n // 4, 2, 2)), axis=1).transpose(0, 2, 1).reshape(-1, 4) * 0.05
    rects[:, 2:] = rects[:, :2] + 0.002
    return {
        "chunk_sums": (lambda f: f(expo, mult, x, y, K.CHUNK, True),
                       lambda r1, r2: np.allclose(r1, r2, rtol=1e-12)),
        "cover_2d": (lambda f: f(lin, off, probs, delta, 10**7, 40),
                     lambda r1, r2: r1[1] == r2[1] and np.isclose(r1[0][: r1[1], 4].sum(), r2[0][: r2[1], 4].sum())),
        "cover_1d": (lambda f: f(src, dst, a, b, w, 0, 2.0 ** -(12 + scale), 10**7, 40),
                     lambda r1, r2: r1[1] == r2[1]),
        "group_powers": (lambda f: f(keys, mass, 2.0), lambda r1, r2: np.isclose(r1, r2, rtol=1e-12)),
        "raster": (lambda f: f(rects, mass[: len(rects)], 512), lambda r1, r2: np.allclose(r1, r2)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__)
    ap.add_argument("--scale", type=int, default=1)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args()
    if not K.HAVE_NUMBA:
        raise SystemExit("numba is not installed")
    print(f"{'kernel':<14}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}  agree")
    for name, (call, same) in cases(args.scale).items():
        nb, npf = getattr(K, f"nb_{name}"), getattr(K, f"np_{name}")
        r_nb, r_np = call(nb), call(npf)
        t_nb = best_of(lambda: call(nb), args.repeats)
        t_np = best_of(lambda: call(npf), args.repeats)
        print(f"{name:<14}{t_nb:>12.4f}{t_np:>12.4f}{t_np / t_nb:>10.1f}  {bool(same(r_nb, r_np))}")


if __name__ == "__main__":
    main()
