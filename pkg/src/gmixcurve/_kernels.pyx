# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled loops: mixture transform, Gaussian Gram sum, star-norm scale sum and lattice phase sum."""
import numpy as np
cimport numpy as cnp
from cython.parallel cimport prange
from libc.math cimport exp, cos, sin, sqrt, pow, fabs, ldexp, M_PI

cnp.import_array()

# terms below exp(-CUTOFF) of their own amplitude are skipped
cdef double CUTOFF = 40.0


def mixture_ft(double[::1] amp, double[:, :, ::1] minv, double[:, ::1] centers,
               xi, int threads=0):
    cdef double[:, ::1] p = np.ascontiguousarray(xi, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t m = p.shape[0], n = amp.shape[0], i, t
    re_arr = np.zeros(m)
    im_arr = np.zeros(m)
    cdef double[::1] re = re_arr, im = im_arr
    # runs of equal maps share one exponential per point
    flat = np.asarray(minv).reshape(n, 4)
    fresh_arr = np.ones(n, dtype=np.uint8)
    if n > 1:
        fresh_arr[1:] = np.any(flat[1:] != flat[:-1], axis=1)
    cdef unsigned char[::1] fresh = fresh_arr
    cdef double x, y, u, v, e, g, mag, ph, sr, si
    cdef int nt = threads if threads > 0 else 0
    if nt == 0:
        import os
        nt = os.cpu_count() or 1
    for i in prange(m, nogil=True, num_threads=nt, schedule="static"):
        x = p[i, 0]
        y = p[i, 1]
        sr = 0.0
        si = 0.0
        g = 0.0
        for t in range(n):
            if fresh[t]:
                u = minv[t, 0, 0] * x + minv[t, 0, 1] * y
                v = minv[t, 1, 0] * x + minv[t, 1, 1] * y
                e = 0.25 * (u * u + v * v)
                g = exp(-e) if e <= CUTOFF else 0.0
            if g == 0.0:
                continue
            mag = amp[t] * g
            ph = centers[t, 0] * x + centers[t, 1] * y
            sr = sr + mag * cos(ph)
            si = si - mag * sin(ph)
        re[i] = sr
        im[i] = si
    return re_arr + 1j * im_arr


def gauss_gram(double[::1] w1, double[:, :, ::1] p1, double[:, ::1] c1,
               double[::1] w2, double[:, :, ::1] p2, double[:, ::1] c2,
               int threads=0):
    cdef Py_ssize_t na = w1.shape[0], nb = w2.shape[0], a, b
    rows_arr = np.zeros(na)
    cdef double[::1] rows = rows_arr
    cdef double s00, s01, s10, s11, det, i00, i01, i10, i11
    cdef double h00, h01, h10, h11, t00, t01, t10, t11, d0, d1, acc
    cdef int nt = threads if threads > 0 else 0
    if nt == 0:
        import os
        nt = os.cpu_count() or 1
    for a in prange(na, nogil=True, num_threads=nt, schedule="static"):
        acc = 0.0
        for b in range(nb):
            s00 = p1[a, 0, 0] + p2[b, 0, 0]
            s01 = p1[a, 0, 1] + p2[b, 0, 1]
            s10 = p1[a, 1, 0] + p2[b, 1, 0]
            s11 = p1[a, 1, 1] + p2[b, 1, 1]
            det = s00 * s11 - s01 * s10
            i00 = s11 / det
            i01 = -s01 / det
            i10 = -s10 / det
            i11 = s00 / det
            # H = P S^-1 Q
            t00 = p1[a, 0, 0] * i00 + p1[a, 0, 1] * i10
            t01 = p1[a, 0, 0] * i01 + p1[a, 0, 1] * i11
            t10 = p1[a, 1, 0] * i00 + p1[a, 1, 1] * i10
            t11 = p1[a, 1, 0] * i01 + p1[a, 1, 1] * i11
            h00 = t00 * p2[b, 0, 0] + t01 * p2[b, 1, 0]
            h01 = t00 * p2[b, 0, 1] + t01 * p2[b, 1, 1]
            h10 = t10 * p2[b, 0, 0] + t11 * p2[b, 1, 0]
            h11 = t10 * p2[b, 0, 1] + t11 * p2[b, 1, 1]
            d0 = c1[a, 0] - c2[b, 0]
            d1 = c1[a, 1] - c2[b, 1]
            acc = acc + w2[b] * M_PI / sqrt(det) * exp(
                -(d0 * (h00 * d0 + h01 * d1) + d1 * (h10 * d0 + h11 * d1)))
        rows[a] = w1[a] * acc
    return float(np.sum(rows_arr))


cdef inline double _powi(double x, double e, int ie) nogil:
    # ie >= 0 marks a small integer exponent, done by multiplication
    cdef double r = 1.0
    cdef int k
    if ie < 0:
        return pow(x, e)
    for k in range(ie):
        r = r * x
    return r


cdef inline double _eta(double x1, double x2, double J, double K, int iJ, int iK) nogil:
    cdef double a = fabs(x1)
    cdef double head = 1.0 if a >= 1.0 else _powi(a, J, iJ)
    return head / _powi(1.0 + sqrt(x1 * x1 + x2 * x2), K, iK)


cdef int _small_int(double e):
    return <int>e if e == <int>e and 0 <= e <= 16 else -1


def star_sum(xi, int j_lo, int j_hi, double J, double K, int threads=0):
    """Sum of ``eta(D_j^-1 R_(j,l)^* xi)`` over ``j_lo <= j <= j_hi`` and all rotations."""
    cdef double[:, ::1] p = np.ascontiguousarray(xi, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t m = p.shape[0], i
    out_arr = np.zeros(m)
    cdef double[::1] out = out_arr
    cdef int j, a
    cdef int iJ = _small_int(J), iK = _small_int(K)
    cdef long n, ell
    cdef double x, y, c, s, dc, ds, tc, s1, s2, acc, step
    cdef int nt = threads if threads > 0 else 0
    if nt == 0:
        import os
        nt = os.cpu_count() or 1
    for i in prange(m, nogil=True, num_threads=nt, schedule="dynamic"):
        x = p[i, 0]
        y = p[i, 1]
        acc = 0.0
        for j in range(j_lo, j_hi + 1):
            a = j // 2
            n = 1 if j < 2 else (<long>1) << a
            step = M_PI / n
            s1 = ldexp(1.0, -j)
            s2 = ldexp(1.0, -a)
            dc = cos(step)
            ds = sin(step)
            c = 1.0
            s = 0.0
            for ell in range(n):
                if ell % 512 == 0:
                    c = cos(ell * step)
                    s = sin(ell * step)
                # R^* applied to (x, y)
                acc = acc + _eta((c * x + s * y) * s1, (-s * x + c * y) * s2, J, K, iJ, iK)
                tc = c * dc - s * ds
                s = s * dc + c * ds
                c = tc
        out[i] = acc
    return out_arr


def lattice_phase_sum(eta, double b1, double b2, long[::1] k1, long[::1] k2,
                      double complex[::1] w, int threads=0):
    """``sum_n w_n exp(-i (b1 k1_n eta1 + b2 k2_n eta2))`` for each point, via power tables."""
    cdef double[:, ::1] p = np.ascontiguousarray(eta, dtype=np.float64).reshape(-1, 2)
    cdef Py_ssize_t m = p.shape[0], n = w.shape[0], i, t
    cdef long lo1 = min(k1), hi1 = max(k1), lo2 = min(k2), hi2 = max(k2)
    cdef long n1 = hi1 - lo1 + 1, n2 = hi2 - lo2 + 1, q
    out_arr = np.zeros(m, dtype=np.complex128)
    cdef double complex[::1] out = out_arr
    tab1_arr = np.empty((m, n1), dtype=np.complex128)
    tab2_arr = np.empty((m, n2), dtype=np.complex128)
    cdef double complex[:, ::1] tab1 = tab1_arr, tab2 = tab2_arr
    cdef double complex z, acc, cur
    cdef int nt = threads if threads > 0 else 0
    if nt == 0:
        import os
        nt = os.cpu_count() or 1
    for i in prange(m, nogil=True, num_threads=nt, schedule="static"):
        # anchor each table at its low end, then step by the unit phase
        z = cos(b1 * p[i, 0]) - 1j * sin(b1 * p[i, 0])
        cur = cos(b1 * lo1 * p[i, 0]) - 1j * sin(b1 * lo1 * p[i, 0])
        for q in range(n1):
            if q % 64 == 0:
                cur = cos(b1 * (lo1 + q) * p[i, 0]) - 1j * sin(b1 * (lo1 + q) * p[i, 0])
            tab1[i, q] = cur
            cur = cur * z
        z = cos(b2 * p[i, 1]) - 1j * sin(b2 * p[i, 1])
        for q in range(n2):
            if q % 64 == 0:
                cur = cos(b2 * (lo2 + q) * p[i, 1]) - 1j * sin(b2 * (lo2 + q) * p[i, 1])
            tab2[i, q] = cur
            cur = cur * z
        acc = 0.0
        for t in range(n):
            acc = acc + w[t] * tab1[i, k1[t] - lo1] * tab2[i, k2[t] - lo2]
        out[i] = acc
    return out_arr
