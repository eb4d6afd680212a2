"""Numpy implementations of the hot loops (fallback for the compiled core)."""
import numpy as np

_CHUNK = 1 << 22
# terms below exp(-CUTOFF) of their own amplitude are dropped, as in the compiled loop
CUTOFF = 40.0


def mixture_ft(amp, minv, centers, xi, threads=0):
    """Sum ``amp_n exp(-|M_n xi|^2 / 4 - i c_n . xi)`` over terms for each point.

    ``minv`` holds the transposed inverse maps ``L^-T`` as ``(n, 2, 2)``.
    """
    xi = np.ascontiguousarray(xi, dtype=float).reshape(-1, 2)
    n = len(amp)
    out = np.zeros(len(xi), dtype=complex)
    if n == 0:
        return out
    step = max(1, _CHUNK // n)
    for lo in range(0, len(xi), step):
        p = xi[lo:lo + step]
        u = p[:, None, 0] * minv[None, :, 0, 0] + p[:, None, 1] * minv[None, :, 0, 1]
        v = p[:, None, 0] * minv[None, :, 1, 0] + p[:, None, 1] * minv[None, :, 1, 1]
        ph = p[:, None, 0] * centers[None, :, 0] + p[:, None, 1] * centers[None, :, 1]
        e = 0.25 * (u * u + v * v)
        mag = np.where(e > CUTOFF, 0.0, amp[None, :] * np.exp(-e))
        out[lo:lo + step] = (mag * np.cos(ph)).sum(1) - 1j * (mag * np.sin(ph)).sum(1)
    return out


def gauss_gram(w1, p1, c1, w2, p2, c2, threads=0):
    """``sum_ab w1_a w2_b int exp(-(x-a)'P_a(x-a) - (x-b)'Q_b(x-b)) dx``.

    ``p1``/``p2`` are the quadratic forms ``L^T L`` as ``(n, 2, 2)``.
    """
    total = 0.0
    if len(w1) == 0 or len(w2) == 0:
        return total
    step = max(1, _CHUNK // len(w2))
    for lo in range(0, len(w1), step):
        P = p1[lo:lo + step, None]
        Q = p2[None]
        S = P + Q
        det = S[..., 0, 0] * S[..., 1, 1] - S[..., 0, 1] * S[..., 1, 0]
        Sinv = np.stack([np.stack([S[..., 1, 1], -S[..., 0, 1]], -1),
                         np.stack([-S[..., 1, 0], S[..., 0, 0]], -1)], -2) / det[..., None, None]
        H = P @ Sinv @ Q
        d = c1[lo:lo + step, None] - c2[None]
        quad = np.einsum("...i,...ij,...j->...", d, H, d)
        vals = np.pi / np.sqrt(det) * np.exp(-quad)
        total += float(w1[lo:lo + step] @ vals @ w2)
    return total


def star_sum(xi, j_lo, j_hi, J, K, threads=0):
    """Sum of ``eta(D_j^-1 R_(j,l)^* xi)`` over ``j_lo <= j <= j_hi`` and all rotations."""
    xi = np.asarray(xi, dtype=float).reshape(-1, 2)
    out = np.zeros(len(xi))
    for j in range(j_lo, j_hi + 1):
        a = j // 2
        n = 1 if j < 2 else 2**a
        ang = np.pi * np.arange(n) / n
        c, s = np.cos(ang), np.sin(ang)
        step = max(1, _CHUNK // n)
        for lo in range(0, len(xi), step):
            x, y = xi[lo:lo + step, :1], xi[lo:lo + step, 1:]
            u = (c * x + s * y) / 2.0**j
            v = (-s * x + c * y) / 2.0**a
            head = np.minimum(np.abs(u) ** J, 1.0)
            out[lo:lo + step] += (head * (1 + np.hypot(u, v)) ** (-K)).sum(1)
    return out


def lattice_phase_sum(eta, b1, b2, k1, k2, w, threads=0):
    """``sum_n w_n exp(-i (b1 k1_n eta1 + b2 k2_n eta2))`` for each point, via power tables."""
    eta = np.asarray(eta, dtype=float).reshape(-1, 2)
    lo1, lo2 = k1.min(), k2.min()
    r1 = np.arange(lo1, k1.max() + 1)
    r2 = np.arange(lo2, k2.max() + 1)
    out = np.empty(len(eta), dtype=complex)
    step = max(1, _CHUNK // max(len(w), len(r1), len(r2)))
    for lo in range(0, len(eta), step):
        e = eta[lo:lo + step]
        t1 = np.exp(-1j * b1 * np.outer(e[:, 0], r1))
        t2 = np.exp(-1j * b2 * np.outer(e[:, 1], r2))
        out[lo:lo + step] = (t1[:, k1 - lo1] * t2[:, k2 - lo2]) @ w
    return out
