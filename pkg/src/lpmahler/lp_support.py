"""The L^p support function of a polygon.

    h_{p,K}(y) = (1/p) log( (1/|K|) * integral_K exp(p <x, y>) dx )

K is cut into a fan of triangles.  Over a triangle with vertices v_i the
exponential integral has the closed form 2|T| f[a_1, a_2, a_3] with
a_i = <v_i, w> and f[...] the second divided difference of exp, so h_p is
a log-sum-exp over the cells.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import kernels
from ._kernels_py import SERIES_SPREAD, _exprel_neg
from .errors import InfiniteP, InvalidP
from .geometry import (
    Point2,
    Polytope2,
    Triangle,
    area,
    as_polytope,
    barycenter,
    support_classical,
    triangulate_fan,
)


@dataclass(frozen=True)
class TriangleCell:
    triangle: Triangle
    weight: float


class LpSupportEval:
    """Precomputed fan decomposition of K for fast h_p evaluation."""

    __slots__ = ("p", "cells", "body", "total_area", "_tri", "_logw")

    def __init__(self, p, cells, body, total_area):
        self.p = p
        self.cells = tuple(cells)
        self.body = body
        self.total_area = total_area
        if cells:
            self._tri = np.ascontiguousarray([c.triangle.array.ravel() for c in cells], dtype=float)
            self._logw = np.log([c.weight for c in cells])
        else:
            self._tri = np.zeros((0, 6))
            self._logw = np.zeros(0)

    @property
    def finite(self) -> bool:
        return math.isfinite(self.p)

    def shifted(self, v) -> "LpSupportEval":
        """Evaluator of body + v (same fan, translated)."""
        v = np.asarray(v, dtype=float)
        cells = [
            TriangleCell(Triangle.of(*(c.triangle.array + v)), c.weight) for c in self.cells
        ]
        return LpSupportEval(self.p, cells, self.body.translate(v), self.total_area)

    def log_mean_exp(self, y) -> np.ndarray:
        """p * h_p at each row of y (finite p only)."""
        return kernels.log_avg_exp(y, self._tri, self._logw, self.p)


def _check_p(p) -> float:
    p = float(p)
    if math.isnan(p) or p <= 0.0:
        raise InvalidP(f"p must be positive, got {p}")
    return p


def build_support(K, p, anchor=None) -> LpSupportEval:
    """Fan-triangulate K from its barycenter (or ``anchor``)."""
    p = _check_p(p)
    P = as_polytope(K)
    total = area(P)
    if math.isinf(p):
        return LpSupportEval(p, [], P, total)
    if anchor is None:
        anchor = barycenter(P)
    tris = triangulate_fan(P, anchor)
    cells = [TriangleCell(t, t.signed_area / total) for t in tris]
    return LpSupportEval(p, cells, P, total)


def exp_integral_triangle(t: Triangle, w) -> float:
    """Integral of exp(<x, w>) over the triangle."""
    v = t.array
    a = v @ np.asarray(w, dtype=float)
    return 2.0 * t.signed_area * float(np.exp(kernels.log_divdiff3(a)))


def h_p(ev: LpSupportEval, y):
    """L^p support function; scalar for one point, array for an (N, 2) array."""
    ya = np.asarray(y, dtype=float)
    single = ya.ndim == 1
    if not ev.finite:
        return support_classical(ev.body, ya)
    out = ev.log_mean_exp(ya.reshape(-1, 2)) / ev.p
    return float(out[0]) if single else out


# ------------------------------------------------------------ gradient

def _dd_shifted(z):
    """Divided difference of exp at nodes z (last axis, sorted descending, max 0)."""
    n = z.shape[-1]
    if n == 1:
        return np.exp(z[..., 0])
    if n == 2:
        return np.exp(z[..., 0]) * _exprel_neg(z[..., 0] - z[..., 1])
    spread = z[..., 0] - z[..., -1]
    small = spread < SERIES_SPREAD
    m = z.mean(axis=-1)
    d = z - m[..., None]
    # complete homogeneous polynomials h_k(d), built one variable at a time
    terms = 10
    H = np.zeros(z.shape[:-1] + (terms,))
    H[..., 0] = 1.0
    for j in range(n):
        for k in range(1, terms):
            H[..., k] = H[..., k] + d[..., j] * H[..., k - 1]
    fact = np.array([1.0 / math.factorial(k + n - 1) for k in range(terms)])
    series = np.exp(m) * (H * fact).sum(axis=-1)
    safe = np.where(small, 1.0, spread)
    recur = (_dd_shifted(z[..., :-1]) - _dd_shifted(z[..., 1:])) / safe
    return np.where(small, series, recur)


def log_divdiff(z):
    """log of the divided difference of exp at the nodes on the last axis."""
    z = -np.sort(-np.asarray(z, dtype=float), axis=-1)
    top = z[..., :1]
    return top[..., 0] + np.log(_dd_shifted(z - top))


def grad_h_p(ev: LpSupportEval, y) -> Point2:
    """Gradient of h_p: the exp(p<x,y>)-weighted mean of x over K."""
    if not ev.finite:
        raise InfiniteP("gradient requires finite p")
    y = np.asarray(y, dtype=float)
    V = ev._tri.reshape(-1, 3, 2)
    a = ev.p * (V @ y)  # (T, 3)
    l3 = ev._logw + log_divdiff(a)
    shift = l3.max()
    den = np.exp(l3 - shift).sum()
    rep = np.concatenate([np.repeat(a[:, None, :], 3, axis=1), a[:, :, None]], axis=2)
    l4 = ev._logw[:, None] + log_divdiff(rep)  # (T, 3)
    num = (np.exp(l4 - shift)[..., None] * V).sum(axis=(0, 1))
    g = num / den
    return Point2(float(g[0]), float(g[1]))
