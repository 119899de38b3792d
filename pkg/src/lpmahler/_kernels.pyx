# cython: boundscheck=False, wraparound=False, cdivision=True, language_level=3
"""Compiled exponential-average kernel (same contract as _kernels_py)."""
import numpy as np

from libc.math cimport exp, expm1, log, INFINITY

cdef double SERIES_SPREAD = 0.05
cdef int SERIES_TERMS = 9
cdef double LOG2 = 0.6931471805599453
cdef double[9] INV_FACT = [
    1.0 / 2, 1.0 / 6, 1.0 / 24, 1.0 / 120, 1.0 / 720, 1.0 / 5040,
    1.0 / 40320, 1.0 / 362880, 1.0 / 3628800,
]


cdef inline double _exprel_neg(double x) noexcept nogil:
    if x > 0.0:
        return -expm1(-x) / x
    return 1.0


cdef inline double _log_dd3(double a, double b, double c) noexcept nogil:
    cdef double t, x, z, m, d0, d1, d2, e2, e3, total, h0, h1, h2, hk
    cdef int k
    if a < b:
        t = a; a = b; b = t
    if b < c:
        t = b; b = c; c = t
    if a < b:
        t = a; a = b; b = t
    x = a - b
    z = a - c
    if z < SERIES_SPREAD:
        m = (a + b + c) / 3.0
        d0 = a - m
        d1 = b - m
        d2 = c - m
        e2 = d0 * d1 + d0 * d2 + d1 * d2
        e3 = d0 * d1 * d2
        # rolling window h_{k-3}, h_{k-2}, h_{k-1}
        h0 = 1.0
        h1 = 0.0
        h2 = -e2
        total = INV_FACT[0] + INV_FACT[2] * h2
        for k in range(3, SERIES_TERMS):
            hk = -e2 * h1 + e3 * h0
            total += INV_FACT[k] * hk
            h0 = h1
            h1 = h2
            h2 = hk
        return m + log(total)
    return a + log((_exprel_neg(x) - exp(-x) * _exprel_neg(z - x)) / z)


def log_divdiff3(double[:, ::1] a):
    cdef Py_ssize_t n, N = a.shape[0]
    out = np.empty(N)
    cdef double[::1] o = out
    with nogil:
        for n in range(N):
            o[n] = _log_dd3(a[n, 0], a[n, 1], a[n, 2])
    return out


def log_avg_exp(double[:, ::1] points, double[:, ::1] tri, double[::1] logw, double p):
    cdef Py_ssize_t n, i, N = points.shape[0], T = tri.shape[0]
    cdef double y0, y1, v, mx, s
    out = np.empty(N)
    cdef double[::1] o = out
    with nogil:
        for n in range(N):
            y0 = p * points[n, 0]
            y1 = p * points[n, 1]
            mx = -INFINITY
            s = 0.0
            for i in range(T):
                v = logw[i] + _log_dd3(tri[i, 0] * y0 + tri[i, 1] * y1,
                                       tri[i, 2] * y0 + tri[i, 3] * y1,
                                       tri[i, 4] * y0 + tri[i, 5] * y1)
                if v > mx:
                    s = s * exp(mx - v) + 1.0
                    mx = v
                else:
                    s += exp(v - mx)
            o[n] = mx + log(s) + LOG2
    return out
