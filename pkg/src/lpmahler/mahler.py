"""L^p-Mahler volumes, Santalo points and Bergman kernel diagonals."""
from __future__ import annotations

import math
import threading
from dataclasses import dataclass

import numpy as np

from .errors import NoConvergence, PointNotInterior
from .geometry import (
    AffineMap2,
    Point2,
    Polytope2,
    area,
    as_polytope,
    barycenter,
    classical_polar,
    contains,
    diameter,
    interior_margin,
    is_symmetric,
    simplex,
)
from .isotropic import covariance, spd_sqrt
from .lp_polar import DEFAULT_QUAD, _polar_volume, polar_moments
from .lp_support import _check_p, build_support
from .quadrature import QuadConfig

# tolerance used inside the Santalo solver and for the cached reference
SOLVER_REL_TOL = 1e-10
GRADIENT_TOL = 1e-8
BLOCKI_SYM = math.pi ** 2 / 16


@dataclass(frozen=True)
class MahlerResult:
    p: float
    volume_k: float
    volume_polar: float
    m_p: float
    error_estimate: float


@dataclass(frozen=True)
class SantaloSolution:
    point: Point2
    gradient_norm: float
    iterations: int
    polar_volume: float = math.nan

    @property
    def m_p_factor(self) -> float:
        """2 |K^{*,p}|; multiply by |K| for the translated Mahler volume."""
        return 2.0 * self.polar_volume


def _unimodular(P) -> np.ndarray:
    """det-1 linear map taking P to a body with covariance proportional to I.

    |(L K)^{o,p}| = |K^{o,p}| / |det L|, so with det L = 1 polar volumes are
    unchanged while thin bodies become round enough for cheap quadrature.
    For extremely elongated input one covariance pass is inexact, so the
    map is refined on the image until it is round.
    """
    v = as_polytope(P).array
    L = np.eye(2)
    for _ in range(6):
        C = covariance(Polytope2(v @ L.T, check=False)).matrix
        ev = np.linalg.eigvalsh(C)
        if ev[1] <= 1.01 * ev[0]:
            break
        root = spd_sqrt(C)
        d = float(root[0, 0] * root[1, 1] - root[0, 1] * root[1, 0])
        inv = np.array([[root[1, 1], -root[0, 1]], [-root[1, 0], root[0, 0]]]) / d
        L = (inv * math.sqrt(d)) @ L
    return L


def mahler_p(K, p, q: QuadConfig = DEFAULT_QUAD) -> MahlerResult:
    """M_p(K) = 2 |K| |K^{o,p}| with the origin as the polar centre."""
    p = _check_p(p)
    P = as_polytope(K)
    vk = area(P)
    if math.isinf(p):
        vp = area(classical_polar(P))
        err = 0.0
    else:
        Pn = AffineMap2(_unimodular(P), (0.0, 0.0)).apply(P)
        vp, err = _polar_volume(build_support(Pn, p), q)
    return MahlerResult(p, vk, vp, 2.0 * vk * vp, 2.0 * vk * err)


def _moments(P, p, x, q):
    Px = P.translate(-np.asarray(x))
    ev = build_support(Px, p)
    V, g, H, _ = polar_moments(ev, q)
    return V, g, H


def santalo_point(K, p, q: QuadConfig = DEFAULT_QUAD, start=None, max_iter: int = 60,
                  tol: float = GRADIENT_TOL) -> SantaloSolution:
    """Minimise x -> |(K - x)^{o,p}| by damped Newton on its logarithm.

    The objective is log-convex; gradient and Hessian are the first and
    second moments of exp(-h_p) over the plane.  ``gradient_norm`` is
    |grad log V| times the diameter, both taken in the det-1 frame where K
    has isotropic covariance, so it is affine invariant.
    """
    p = _check_p(p)
    P0 = as_polytope(K)
    qs = q.tightened(SOLVER_REL_TOL)
    # work in a det-1 normalised frame y = L x; Newton steps are affine
    # invariant, only the reported gradient needs mapping back
    L = _unimodular(P0)
    Linv = np.linalg.inv(L)
    P = AffineMap2(L, (0.0, 0.0)).apply(P0)
    diam = diameter(P)
    x = np.asarray(barycenter(P0) if start is None else start, dtype=float)
    if not contains(P0, x):
        x = np.asarray(barycenter(P0), dtype=float)
    x = L @ x
    V, g, H = _moments(P, p, x, qs)
    best = (V, x.copy())
    gn = math.inf

    def _pt(y):
        z = Linv @ y
        return Point2(float(z[0]), float(z[1]))

    for it in range(1, max_iter + 1):
        grad = g / V
        hess = H / V - np.outer(grad, grad)
        gn = float(np.linalg.norm(grad)) * diam
        if gn < tol:
            return SantaloSolution(_pt(x), gn, it - 1, V)
        try:
            step = -np.linalg.solve(hess, grad)
        except np.linalg.LinAlgError:
            step = -grad * diam * diam
        dec = float(-grad @ step)
        if dec <= 0:
            step = -grad * diam * diam
            dec = float(grad @ grad) * diam * diam
        t = 1.0
        accepted = False
        for _ in range(50):
            xn = x + t * step
            if interior_margin(P, xn) > 1e-9 * diam:
                Vn, gn_, Hn = _moments(P, p, xn, qs)
                # Armijo on log V, with slack for quadrature noise
                if math.log(Vn) <= math.log(V) - 1e-4 * t * dec + 1e-12:
                    accepted = True
                    break
            t *= 0.5
        if not accepted:
            break
        x, V, g, H = xn, Vn, gn_, Hn
        if V < best[0]:
            best = (V, x.copy())
    raise NoConvergence(
        f"Santalo solver stopped with gradient norm {gn:.3g}",
        best=SantaloSolution(_pt(best[1]), gn, max_iter, best[0]),
    )


def santalo_mahler(K, p, q: QuadConfig = DEFAULT_QUAD, start=None):
    """(inf_x M_p(K - x), SantaloSolution)."""
    sol = santalo_point(K, p, q, start=start)
    return 2.0 * area(K) * sol.polar_volume, sol


# ------------------------------------------------------ simplex reference

_REF_LOCK = threading.Lock()
_REF_CACHE: dict[float, float] = {}


def simplex_reference(p) -> float:
    """inf_x M_p(simplex - x), computed once per p at tight tolerance."""
    p = _check_p(p)
    with _REF_LOCK:
        if p not in _REF_CACHE:
            q = QuadConfig(rel_tol=SOLVER_REL_TOL, abs_tol=1e-16)
            _REF_CACHE[p] = santalo_mahler(simplex(), p, q)[0]
        return _REF_CACHE[p]


# --------------------------------------------------------------- Bergman

def bergman_diagonal(K, im_z, q: QuadConfig = DEFAULT_QUAD) -> float:
    """B_{T_K}(z, z) for any z with imaginary part im_z."""
    P = as_polytope(K)
    x = np.asarray(im_z, dtype=float)
    if not contains(P, x):
        raise PointNotInterior("Im z must lie strictly inside K")
    a = area(P)
    m1 = mahler_p(P.translate(-x), 1.0, q).m_p
    return m1 / ((4 * math.pi) ** 2 * a * a)


def _looks_symmetric(K) -> bool:
    if is_symmetric(K):
        return True
    v = as_polytope(K).array
    if len(v) % 2:
        return False
    m = len(v) // 2
    scale = float(np.abs(v).max())
    return bool(np.allclose(v[:m], -v[m:], rtol=0, atol=1e-12 * scale))


def blocki_gap(K, q: QuadConfig = DEFAULT_QUAD) -> float:
    """Distance of |K|^2 B_{T_K} above its conjectured minimum.

    Symmetric K: |K|^2 B(0,0) - pi^2/16.  Otherwise the infimum over
    translates minus the same quantity for the simplex.
    """
    c = (4 * math.pi) ** 2
    if _looks_symmetric(K):
        return mahler_p(K, 1.0, q).m_p / c - BLOCKI_SYM
    m, _ = santalo_mahler(K, 1.0, q)
    return (m - simplex_reference(1.0)) / c
