"""Kernel selection: compiled core when importable, numpy otherwise.

Set ``GMIX_PURE=1`` to force the numpy path; ``GMIX_THREADS`` caps the
worker count of the compiled loops (0 = all cores).
"""
import os

import numpy as np

from . import _kernels_py

try:
    if os.environ.get("GMIX_PURE", "") not in ("", "0"):
        raise ImportError("pure mode requested")
    from . import _kernels as _impl
    BACKEND = "compiled"
except ImportError:
    _impl = _kernels_py
    BACKEND = "python"


def threads():
    try:
        return max(0, int(os.environ.get("GMIX_THREADS", "0")))
    except ValueError:
        return 0


def mixture_ft(amp, minv, centers, xi):
    if len(amp) > 1:
        # group equal maps so the compiled loop can reuse their exponential
        order = np.lexsort(np.asarray(minv).reshape(-1, 4).T[::-1])
        amp, centers = np.ascontiguousarray(amp[order]), np.ascontiguousarray(centers[order])
        minv = np.ascontiguousarray(minv[order])
    return _impl.mixture_ft(amp, minv, centers, xi, threads())


def gauss_gram(w1, p1, c1, w2, p2, c2):
    return _impl.gauss_gram(w1, p1, c1, w2, p2, c2, threads())


def star_sum(xi, j_lo, j_hi, J, K):
    return _impl.star_sum(xi, j_lo, j_hi, float(J), float(K), threads())


def lattice_phase_sum(eta, b1, b2, k1, k2, w):
    eta = np.ascontiguousarray(eta, dtype=float).reshape(-1, 2)
    k1 = np.ascontiguousarray(k1, dtype=np.int64)
    k2 = np.ascontiguousarray(k2, dtype=np.int64)
    w = np.ascontiguousarray(w, dtype=complex)
    out = np.empty(len(eta), dtype=complex)
    step = 1 << 15
    for lo in range(0, len(eta), step):
        out[lo:lo + step] = _impl.lattice_phase_sum(eta[lo:lo + step], float(b1), float(b2),
                                                    k1, k2, w, threads())
    return out
