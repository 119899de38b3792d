"""Covariance matrices and the affine invariant C(K) = |K|^2 / det Cov(K).

Moments are exact: each fan triangle is integrated with the edge-midpoint
rule, which is exact for polynomials of degree two.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import NotQuadratic
from .geometry import AffineMap2, Point2, Triangle, as_polytope


@dataclass(frozen=True)
class CovMatrix2:
    """Symmetric 2x2 matrix [[c11, c12], [c12, c22]]."""

    c11: float
    c12: float
    c22: float

    @classmethod
    def from_matrix(cls, M) -> "CovMatrix2":
        M = np.asarray(M, dtype=float)
        return cls(float(M[0, 0]), float(0.5 * (M[0, 1] + M[1, 0])), float(M[1, 1]))

    @property
    def matrix(self) -> np.ndarray:
        return np.array([[self.c11, self.c12], [self.c12, self.c22]])

    @property
    def det(self) -> float:
        return self.c11 * self.c22 - self.c12 * self.c12

    @property
    def trace(self) -> float:
        return self.c11 + self.c22

    def is_positive_definite(self) -> bool:
        return self.c11 > 0 and self.det > 0


@dataclass(frozen=True)
class IsoQuadratic:
    """a x^2 + b x + c."""

    a: float
    b: float
    c: float

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return (self.a * x + self.b) * x + self.c


def _triangle_raw(v: np.ndarray):
    """Area, first and raw second moments of the triangle with rows v."""
    a, b, c = v
    A = 0.5 * ((b[0] - a[0]) * (c[1] - a[1]) - (b[1] - a[1]) * (c[0] - a[0]))
    mids = 0.5 * (v + np.roll(v, -1, axis=0))
    first = A * v.mean(axis=0)
    second = (A / 3.0) * (mids.T @ mids)
    return A, first, second


def moments_triangle(t: Triangle):
    """(area, integral of x, integral of x x^T) over a triangle."""
    A, first, second = _triangle_raw(t.array)
    return A, Point2(float(first[0]), float(first[1])), CovMatrix2.from_matrix(second)


def polygon_moments(P, origin=None):
    """(area, first, second) moments of a polygon, raw (uncentred).

    With ``origin`` given, moments are of the shifted body P - origin.
    """
    v = as_polytope(P).array
    if origin is not None:
        v = v - np.asarray(origin, dtype=float)
    A = 0.0
    first = np.zeros(2)
    second = np.zeros((2, 2))
    for i in range(1, len(v) - 1):
        a, f, s = _triangle_raw(np.array([v[0], v[i], v[i + 1]]))
        A += a
        first += f
        second += s
    return A, first, second


def _centered(P):
    v = as_polytope(P).array
    ref = v.mean(axis=0)
    A, first, second = polygon_moments(P, origin=ref)
    m = first / A
    C = second / A - np.outer(m, m)
    return A, m + ref, C


def covariance(K) -> CovMatrix2:
    """Centred second moments of the uniform measure on K."""
    return CovMatrix2.from_matrix(_centered(K)[2])


def cee(K) -> float:
    A, _, C = _centered(K)
    return A * A / float(C[0, 0] * C[1, 1] - C[0, 1] * C[1, 0])


def spd_sqrt(M) -> np.ndarray:
    """Square root of a symmetric positive-definite 2x2 matrix."""
    M = np.asarray(M, dtype=float)
    s = math.sqrt(M[0, 0] * M[1, 1] - M[0, 1] * M[1, 0])
    t = math.sqrt(M[0, 0] + M[1, 1] + 2.0 * s)
    return (M + s * np.eye(2)) / t


def isotropic_transform(K) -> AffineMap2:
    """Affine T with |TK| = 1, barycentre 0 and Cov(TK) proportional to I.

    The linear part is the symmetric positive-definite choice.
    """
    A, b, C = _centered(K)
    root = spd_sqrt(C)
    det = float(root[0, 0] * root[1, 1] - root[0, 1] * root[1, 0])
    inv_root = np.array([[root[1, 1], -root[0, 1]], [-root[1, 0], root[0, 0]]]) / det
    lam = math.sqrt(det / A)  # det(root) = sqrt(det C)
    L = lam * inv_root
    return AffineMap2(L, -(L @ b))


# ------------------------------------------------- decomposition identities

def union_covariance(parts) -> CovMatrix2:
    """Covariance of a disjoint union from (area, barycentre, CovMatrix2) pieces.

    Pieces are merged pairwise, adding the between-piece term
    |L||C|/|K|^2 (b_L - b_C)(b_L - b_C)^T at each merge.
    """
    it = iter(parts)
    aL, bL, cL = next(it)
    bL = np.asarray(bL, dtype=float)
    CL = cL.matrix
    for aC, bC, cC in it:
        bC = np.asarray(bC, dtype=float)
        aK = aL + aC
        d = bL - bC
        CL = (aL / aK) * CL + (aC / aK) * cC.matrix + (aL * aC / aK ** 2) * np.outer(d, d)
        bL = (aL * bL + aC * bC) / aK
        aL = aK
    return CovMatrix2.from_matrix(CL)


def cee_union_isotropic(cee_L: float, area_C: float, bary_C, cov_C: CovMatrix2,
                        area_K: float) -> float:
    """|K|^4 / C(K) for K = L u C with L isotropic (unit area, centred).

    Expanded form of the 2x2 determinant; the rotated barycentre
    b^N = (b_2, -b_1) carries the cross term.
    """
    b = np.asarray(bary_C, dtype=float)
    bN = np.array([b[1], -b[0]])
    s = cee_L ** -0.5
    return (
        1.0 / cee_L
        + s * (area_C * cov_C.trace + (area_C / area_K) * float(b @ b))
        + area_C ** 2 * cov_C.det
        + (area_C ** 2 / area_K) * float(bN @ cov_C.matrix @ bN)
    )


# ------------------------------------------------------ sliding quadratic

def iso_sliding_quadratic(fam, check_nodes: int = 8, rtol: float = 1e-9) -> IsoQuadratic:
    """Fit |P|^4 / C(P(x2)) along a sliding family and verify exactness."""
    from .geometry import area
    from .sliding import body_at

    lo, hi = fam.xi_left, fam.xi_right
    xs = np.array([lo, 0.5 * (lo + hi), hi])

    def value(x2):
        K = body_at(fam, x2)
        a = area(K)
        return a ** 4 / cee(K)

    ys = np.array([value(x) for x in xs])
    coef = np.polyfit(xs - xs[1], ys, 2)
    # expand around the centre back to powers of x2
    c0 = xs[1]
    a = coef[0]
    b = coef[1] - 2 * a * c0
    c = coef[2] - coef[1] * c0 + a * c0 * c0
    q = IsoQuadratic(float(a), float(b), float(c))
    probe = lo + (hi - lo) * (np.arange(1, check_nodes + 1) - 0.37) / check_nodes
    for x in probe:
        v = value(x)
        pred = coef[0] * (x - c0) ** 2 + coef[1] * (x - c0) + coef[2]
        if abs(pred - v) > rtol * abs(v):
            raise NotQuadratic(f"residual {abs(pred - v) / abs(v):.3g} at x2={x:.6g}")
    w = 0.5 * (hi - lo)
    if a * w * w < -1e-12 * float(np.max(np.abs(ys))):
        raise NotQuadratic(f"negative leading coefficient {a:.3g}")
    return q
