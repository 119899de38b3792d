"""Near norm, volume and half-plane volumes of the L^p-polar body.

For a direction y the near norm is (int_0^inf r exp(-h_p(r y)) dr)^(-1/2)
and the polar volume is half the integral of its inverse square over the
circle.  The radial integrals are computed for many directions at once.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import Divergent, OriginNotInterior
from .geometry import (
    COLLINEAR_RTOL,
    Point2,
    _scale,
    as_polytope,
    classical_polar,
    area,
    support_classical,
)
from .lp_support import LpSupportEval
from .quadrature import (
    QuadConfig,
    RadialTransform,
    exp_sinh_nodes,
    gauss_legendre_panels,
    gk_batch,
    periodic_trapezoid,
)

DEFAULT_QUAD = QuadConfig()


@dataclass(frozen=True)
class HalfVolumes:
    """Areas of the polar body in {x > 0} and {x < 0}; math.inf when divergent."""

    i_plus: float
    i_minus: float

    @property
    def ratio(self) -> float:
        if math.isinf(self.i_plus) and math.isinf(self.i_minus):
            return math.nan
        if math.isinf(self.i_plus):
            return math.inf
        if math.isinf(self.i_minus):
            return 0.0
        return self.i_plus / self.i_minus

    @property
    def log_ratio(self) -> float:
        if math.isinf(self.i_plus) and math.isinf(self.i_minus):
            return math.nan
        if math.isinf(self.i_plus):
            return math.inf
        if math.isinf(self.i_minus):
            return -math.inf
        return math.log(self.i_plus) - math.log(self.i_minus)


def _directions(theta):
    return np.column_stack([np.cos(theta), np.sin(theta)])


def _decay(ev: LpSupportEval, U) -> np.ndarray:
    c = support_classical(ev.body, U)
    L = _scale(ev.body.array)
    bad = c <= COLLINEAR_RTOL * L * np.hypot(U[:, 0], U[:, 1])
    if np.any(bad):
        raise Divergent("radial integral diverges: the origin is not inside the body")
    return c


def radial_moments(ev: LpSupportEval, U, orders=(1,), q: QuadConfig = DEFAULT_QUAD,
                   rel_tol=None) -> np.ndarray:
    """int_0^inf r^k exp(-h_p(r u)) dr for every row u of U and k in orders.

    Returns shape (N, len(orders)).
    """
    U = np.asarray(U, dtype=float).reshape(-1, 2)
    orders = np.asarray(orders, dtype=float)
    if not ev.finite:
        c = _decay(ev, U)
        g = np.array([math.gamma(k + 1) for k in orders])
        return g[None, :] / c[:, None] ** (orders[None, :] + 1)
    c = _decay(ev, U)
    rt = q.rel_tol if rel_tol is None else rel_tol
    p = ev.p
    kappa = 2.0 + 2.0 / p
    if q.radial_transform is RadialTransform.EXP:
        return _radial_exp_sinh(ev, U, c, orders, rt, q.abs_tol)
    scale = kappa / c

    def f(ids, t):
        r = scale[ids, None] * np.tan(t)
        pts = r[..., None] * U[ids][:, None, :]
        h = ev.log_mean_exp(pts.reshape(-1, 2)).reshape(r.shape) / p
        base = -h + np.log(scale[ids, None]) - 2.0 * np.log(np.cos(t))
        logr = np.log(r)
        return np.exp(base[..., None] + logr[..., None] * orders[None, None, :])

    n = len(U)
    vals, _ = gk_batch(f, np.zeros(n), np.full(n, 0.5 * np.pi), rt, q.abs_tol,
                       q.max_depth, init_panels=2)
    return vals


def _radial_exp_sinh(ev, U, c, orders, rel_tol, abs_tol, max_level=8):
    p = ev.p
    n = len(U)

    def level_sum(step, offset):
        s, w = exp_sinh_nodes(step, offset=offset)
        r = s[None, :] / c[:, None]
        pts = r[..., None] * U[:, None, :]
        h = ev.log_mean_exp(pts.reshape(-1, 2)).reshape(r.shape) / p
        logr = np.log(r)
        vals = np.exp(-h[..., None] + logr[..., None] * orders[None, None, :])
        return np.einsum("njk,j->nk", vals, w) / c[:, None]

    step = 0.5
    total = level_sum(step, 0.0)
    for _ in range(max_level):
        # halving the step adds the midpoints of the previous grid
        new = level_sum(step, 0.5 * step)
        nxt = 0.5 * total + 0.5 * new
        step *= 0.5
        done = np.abs(nxt - total) <= np.maximum(abs_tol, rel_tol * np.abs(nxt))
        total = nxt
        if np.all(done):
            break
    return total


def near_norm(ev: LpSupportEval, y, q: QuadConfig = DEFAULT_QUAD) -> float:
    y = np.asarray(y, dtype=float).reshape(1, 2)
    if not np.any(y):
        raise ValueError("near norm needs a nonzero direction")
    if not ev.finite:
        c = _decay(ev, y)
        return float(c[0])
    J = radial_moments(ev, y, (1,), q, rel_tol=0.1 * q.rel_tol)
    return float(J[0, 0] ** -0.5)


def near_norms(ev: LpSupportEval, Y, q: QuadConfig = DEFAULT_QUAD) -> np.ndarray:
    Y = np.asarray(Y, dtype=float).reshape(-1, 2)
    if not ev.finite:
        return _decay(ev, Y)
    return radial_moments(ev, Y, (1,), q, rel_tol=0.1 * q.rel_tol)[:, 0] ** -0.5


def _require_interior(ev: LpSupportEval):
    v = ev.body.array
    det = v[:, 0] * np.roll(v, -1, axis=0)[:, 1] - v[:, 1] * np.roll(v, -1, axis=0)[:, 0]
    L = _scale(v)
    if np.any(det <= COLLINEAR_RTOL * L * L):
        raise OriginNotInterior("origin is not strictly inside the body")


# --------------------------------------------------------- p = infinity

def _polar_sector_area(P, t0, t1) -> float:
    """Area of the classical polar inside the angular sector [t0, t1].

    Exact: over the normal cone of vertex v = R(cos phi, sin phi) the polar
    boundary is the line <v, y> = 1 and the sector area is
    (tan(b - phi) - tan(a - phi)) / (2 R^2).
    """
    v = as_polytope(P).array
    e = np.roll(v, -1, axis=0) - v
    # outer normal angle of edge i; vertex i owns (normal_{i-1}, normal_i)
    nang = np.arctan2(-e[:, 0], e[:, 1])
    total = 0.0
    for i in range(len(v)):
        lo = nang[i - 1]
        hi = nang[i]
        hi = lo + np.mod(hi - lo, 2 * np.pi)
        R = math.hypot(*v[i])
        phi = math.atan2(v[i, 1], v[i, 0])
        for shift in (-2 * np.pi, 0.0, 2 * np.pi):
            a = max(lo + shift, t0)
            b = min(hi + shift, t1)
            if b > a:
                total += (math.tan(b - phi) - math.tan(a - phi)) / (2 * R * R)
    return total


def _half_inf(P, sign) -> float:
    t0 = -0.5 * np.pi if sign > 0 else 0.5 * np.pi
    return _polar_sector_area(P, t0, t0 + np.pi)


# --------------------------------------------------------------- volumes

def _polar_volume(ev: LpSupportEval, q: QuadConfig):
    if not ev.finite:
        return area(classical_polar(ev.body)), 0.0
    _require_interior(ev)

    def f(theta):
        return radial_moments(ev, _directions(theta), (1,), q, rel_tol=0.1 * q.rel_tol)[:, 0]

    T, err, _ = periodic_trapezoid(f, q.angular_nodes, q.rel_tol, q.abs_tol)
    return 0.5 * float(T), 0.5 * float(err)


def polar_volume(ev: LpSupportEval, q: QuadConfig = DEFAULT_QUAD) -> float:
    """|K^{o,p}| = (1/2) int_0^{2pi} dtheta / ||u_theta||^2."""
    return _polar_volume(ev, q)[0]


def _half_finite(P, sign) -> bool:
    """True when h_K > 0 on the closed half circle {sign * u_1 >= 0}."""
    v = as_polytope(P).array
    L = _scale(v)
    cand = [np.array([0.0, 1.0]), np.array([0.0, -1.0])]
    for w in v:
        nw = math.hypot(*w)
        if nw > 0:
            cand.append(np.array([-w[1], w[0]]) / nw)
            cand.append(np.array([w[1], -w[0]]) / nw)
    cand.append(np.array([float(sign), 0.0]))
    for u in cand:
        if sign * u[0] < 0:
            continue
        if np.max(v @ u) <= COLLINEAR_RTOL * L:
            return False
    return True


def half_plane_volumes(ev: LpSupportEval, q: QuadConfig = DEFAULT_QUAD) -> HalfVolumes:
    P = ev.body
    fin = {s: _half_finite(P, s) for s in (1, -1)}
    if not ev.finite:
        ip = _half_inf(P, 1) if fin[1] else math.inf
        im = _half_inf(P, -1) if fin[-1] else math.inf
        return HalfVolumes(ip, im)
    signs = [s for s in (1, -1) if fin[s]]
    out = {1: math.inf, -1: math.inf}
    if signs:
        lo = np.array([-0.5 * np.pi if s > 0 else 0.5 * np.pi for s in signs])

        def f(ids, theta):
            U = _directions(theta.ravel())
            J = radial_moments(ev, U, (1,), q, rel_tol=0.1 * q.rel_tol)[:, 0]
            return 0.5 * J.reshape(theta.shape)

        vals, _ = gk_batch(f, lo, lo + np.pi, q.rel_tol, q.abs_tol, q.max_depth,
                           init_panels=max(2, q.angular_nodes // 4))
        for s, v in zip(signs, vals):
            out[s] = float(v)
    return HalfVolumes(out[1], out[-1])


def polar_boundary_sample(ev: LpSupportEval, q: QuadConfig = DEFAULT_QUAD, n: int = 64):
    if n < 3:
        raise ValueError("need at least 3 samples")
    _require_interior(ev)
    theta = 2 * np.pi * np.arange(n) / n
    U = _directions(theta)
    nrm = near_norms(ev, U, q)
    pts = U / nrm[:, None]
    return [Point2(float(x), float(y)) for x, y in pts]


def direct_volume_check(ev: LpSupportEval, q: QuadConfig = DEFAULT_QUAD) -> float:
    """(1/2) integral of exp(-h_p) over the plane.

    Independent of :func:`polar_volume`: Gauss-Legendre panels in the
    angle (panel count doubled until stable) and a double-exponential rule
    in the radius, summed as one two-dimensional rule.
    """
    _require_interior(ev)
    if not ev.finite:
        return _polar_sector_area(ev.body, 0.0, 2 * np.pi)
    panels = 8
    prev = None
    while True:
        theta, w = gauss_legendre_panels(0.0, 2 * np.pi, panels)
        U = _directions(theta)
        c = _decay(ev, U)
        J = _radial_exp_sinh(ev, U, c, np.array([1.0]), 0.1 * q.rel_tol, q.abs_tol)[:, 0]
        val = 0.5 * float(np.dot(w, J))
        if prev is not None and abs(val - prev) <= max(q.abs_tol, q.rel_tol * abs(val)):
            return val
        if panels >= 4096:
            return val
        prev = val
        panels *= 2


def polar_moments(ev: LpSupportEval, q: QuadConfig = DEFAULT_QUAD):
    """(1/2) int exp(-h_p(y)) (1, y, y y^T) dy over the plane.

    These are the value, gradient and Hessian of x -> |(K - x)^{o,p}| at
    x = 0.  Returns ``(V, g, H, err)`` with err the volume error estimate.
    """
    _require_interior(ev)
    if not ev.finite:
        from .isotropic import polygon_moments

        Q = classical_polar(ev.body)
        a, first, second = polygon_moments(Q)
        return float(a), 3.0 * first, 12.0 * second, 0.0

    def f(theta):
        U = _directions(theta)
        J = radial_moments(ev, U, (1, 2, 3), q, rel_tol=0.1 * q.rel_tol)
        cx, cy = U[:, 0], U[:, 1]
        return np.column_stack([
            J[:, 0], J[:, 1] * cx, J[:, 1] * cy,
            J[:, 2] * cx * cx, J[:, 2] * cx * cy, J[:, 2] * cy * cy,
        ])

    T, err, _ = periodic_trapezoid(f, q.angular_nodes, q.rel_tol, q.abs_tol)
    T = 0.5 * T
    V = float(T[0])
    g = T[1:3].copy()
    H = np.array([[T[3], T[4]], [T[4], T[5]]])
    return V, g, H, 0.5 * float(err[0])
