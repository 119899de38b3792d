"""Numpy implementation of the exponential-average kernel.

This is the reference fallback for the compiled ``_kernels`` module and
must agree with it to rounding.
"""
import math

import numpy as np

# Below this spread of the three exponents the closed form loses digits
# and the centred Taylor series is used instead.
SERIES_SPREAD = 0.05
SERIES_TERMS = 9
LOG2 = math.log(2.0)
_INV_FACT = np.array([1.0 / math.factorial(k + 2) for k in range(SERIES_TERMS)])
_CHUNK = 16384


def _exprel_neg(x):
    """(1 - exp(-x)) / x for x >= 0, equal to 1 at x = 0."""
    safe = np.where(x > 0.0, x, 1.0)
    return np.where(x > 0.0, -np.expm1(-safe) / safe, 1.0)


def log_divdiff3(a):
    """log of the second divided difference of exp at the last-axis triples."""
    s = -np.sort(-np.asarray(a, dtype=float), axis=-1)
    a0, a1, a2 = s[..., 0], s[..., 1], s[..., 2]
    x = a0 - a1
    z = a0 - a2
    small = z < SERIES_SPREAD

    zs = np.where(small, 1.0, z)
    f01 = _exprel_neg(x)
    f12 = np.exp(-x) * _exprel_neg(z - x)
    closed = a0 + np.log((f01 - f12) / zs)

    m = (a0 + a1 + a2) / 3.0
    d0, d1, d2 = a0 - m, a1 - m, a2 - m
    e2 = d0 * d1 + d0 * d2 + d1 * d2
    e3 = d0 * d1 * d2
    # complete homogeneous polynomials of centred nodes: h_k = -e2 h_{k-2} + e3 h_{k-3}
    h = [np.ones_like(m), np.zeros_like(m), -e2]
    total = _INV_FACT[0] + _INV_FACT[2] * h[2]
    for k in range(3, SERIES_TERMS):
        hk = -e2 * h[k - 2] + e3 * h[k - 3]
        h.append(hk)
        total = total + _INV_FACT[k] * hk
    series = m + np.log(total)
    return np.where(small, series, closed)


def log_avg_exp(points, tri, logw, p):
    """log sum_i w_i * mean_{Delta_i} exp(p <x, y>) for every row y of points.

    ``tri`` is (T, 6) with rows x1, y1, x2, y2, x3, y3 and ``logw`` holds
    log(|Delta_i| / |K|).
    """
    pts = np.asarray(points, dtype=float)
    tri = np.asarray(tri, dtype=float)
    logw = np.asarray(logw, dtype=float)
    out = np.empty(len(pts))
    vx = tri[:, 0::2]
    vy = tri[:, 1::2]
    for lo in range(0, len(pts), _CHUNK):
        y = p * pts[lo:lo + _CHUNK]
        a = y[:, 0, None, None] * vx[None] + y[:, 1, None, None] * vy[None]
        terms = logw[None, :] + log_divdiff3(a)
        mx = terms.max(axis=1)
        out[lo:lo + _CHUNK] = mx + np.log(np.exp(terms - mx[:, None]).sum(axis=1)) + LOG2
    return out
