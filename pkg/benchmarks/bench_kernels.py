"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 3] [--scale 1.0]

Both backends are imported directly, so no environment switch is needed.
"""
import argparse
import timeit

import numpy as np

from gmixcurve import _kernels_py

try:
    from gmixcurve import _kernels as compiled
except ImportError:
    compiled = None


def cases(scale, rng):
    n_terms, n_pts = int(400 * scale), int(20000 * scale)
    L = rng.normal(size=(n_terms, 2, 2)) + 2 * np.eye(2)
    minv = np.ascontiguousarray(np.linalg.inv(L).transpose(0, 2, 1))
    amp, c = rng.normal(size=n_terms), rng.normal(size=(n_terms, 2))
    xi = rng.normal(scale=5, size=(n_pts, 2))
    P = np.ascontiguousarray(L.transpose(0, 2, 1) @ L)
    r = 2.0 ** rng.uniform(-4, 12, n_pts // 10)
    th = rng.uniform(-np.pi, np.pi, len(r))
    star_pts = np.ascontiguousarray(np.stack([r * np.cos(th), r * np.sin(th)], 1))
    eta = np.ascontiguousarray(rng.normal(scale=30, size=(n_pts, 2)))
    k1 = rng.integers(-40, 41, n_terms // 4).astype(np.int64)
    k2 = rng.integers(-9, 10, n_terms // 4).astype(np.int64)
    w = rng.normal(size=len(k1)) + 0j
    return {
        f"mixture_ft {n_terms}x{n_pts}": ("mixture_ft", (amp, minv, c, xi)),
        f"gauss_gram {n_terms}x{n_terms}": ("gauss_gram", (amp, P, c, amp, P, c)),
        f"star_sum {len(r)} pts, j<=20": ("star_sum", (star_pts, 0, 20, 2.0, 3.0)),
        f"lattice_phase_sum {len(k1)}x{n_pts}": ("lattice_phase_sum", (eta, 0.1, 0.4, k1, k2, w)),
    }


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--scale", type=float, default=1.0)
    args = ap.parse_args()
    rng = np.random.default_rng(0)
    print(f"{'kernel':<36}{'numpy [s]':>12}{'compiled [s]':>14}{'speedup':>10}")
    for label, (name, inputs) in cases(args.scale, rng).items():
        py = min(timeit.repeat(lambda: getattr(_kernels_py, name)(*inputs), number=1, repeat=args.repeat))
        if compiled is None:
            print(f"{label:<36}{py:>12.4f}{'n/a':>14}{'':>10}")
            continue
        cy = min(timeit.repeat(lambda: getattr(compiled, name)(*inputs, 0), number=1, repeat=args.repeat))
        print(f"{label:<36}{py:>12.4f}{cy:>14.4f}{py / cy:>9.1f}x")


if __name__ == "__main__":
    main()
