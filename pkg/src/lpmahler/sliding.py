"""Mahler sliding: moving one vertex parallel to the chord of its neighbours.

A family is stored in the frame produced by
:func:`geometry.normalize_for_sliding`: the moving vertex is at position 1,
its neighbours at positions 0 and 2 share the height ``y1`` and the vertex
travels along the line ``y = y2``.  The triangle it spans with the chord
keeps its base and height, so the area of the body never changes.  In the
symmetric case the antipodal vertex moves with it.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .errors import (
    AlreadyMinimal,
    InvalidPolytope,
    NoBracket,
    OutOfRange,
    UnboundedSlide,
)
from .geometry import (
    COLLINEAR_RTOL,
    AffineMap2,
    Polytope2,
    SymmetricPolytope2,
    _cross,
    _scale,
    area,
    as_polytope,
    barycenter,
    is_symmetric,
    normalize_for_sliding,
)
from .lp_polar import DEFAULT_QUAD, half_plane_volumes
from .lp_support import _check_p, build_support
from .mahler import mahler_p, santalo_point
from .quadrature import QuadConfig

PROBES = 64
# clip for infinite log-ratios so the root finder sees finite values
_LOG_RATIO_CAP = 1e6


@dataclass(frozen=True)
class SlidingFamily:
    fixed_part: Polytope2
    base_chord: tuple  # (y1, x1, x3)
    apex_height: float
    symmetric: bool
    xi_left: float
    xi_right: float
    original_x2: float
    vertices: np.ndarray = field(repr=False)
    rotation: AffineMap2 = field(repr=False)
    vertex_index: int = 0

    @property
    def m(self) -> int:
        """Number of vertices of a generic member."""
        return len(self.vertices)


def _line_at_height(a, b, y) -> float:
    dy = b[1] - a[1]
    if abs(dy) <= COLLINEAR_RTOL * max(1.0, abs(a[1]), abs(b[1])):
        raise UnboundedSlide("edge adjacent to the slid vertex is parallel to the chord")
    return float(a[0] + (b[0] - a[0]) * (y - a[1]) / dy)


def make_family(K, k: int) -> SlidingFamily:
    """Sliding family of vertex k (0-based index into the full vertex list)."""
    sym = is_symmetric(K)
    R, N = normalize_for_sliding(K, k)
    w = np.array(as_polytope(N).array)
    n = len(w)
    y1, x1, x3 = float(w[0, 1]), float(w[0, 0]), float(w[2, 0])
    x2, y2 = float(w[1, 0]), float(w[1, 1])
    if not y2 > y1:
        raise InvalidPolytope("slid vertex is not above the chord")
    xi_l = _line_at_height(w[2], w[3], y2)
    xi_r = _line_at_height(w[0], w[n - 1], y2)
    if sym:
        half = n // 2
        keep = [i for i in range(n) if i not in (1, 1 + half)]
    else:
        keep = [i for i in range(n) if i != 1]
    fixed = Polytope2(w[keep], check=False)
    w.setflags(write=False)
    return SlidingFamily(
        fixed_part=fixed,
        base_chord=(y1, x1, x3),
        apex_height=y2,
        symmetric=sym,
        xi_left=xi_l,
        xi_right=xi_r,
        original_x2=x2,
        vertices=w,
        rotation=R,
        vertex_index=int(k) % n,
    )


def translate_family(fam: SlidingFamily, v) -> SlidingFamily:
    """The same family moved by v; the slide stays horizontal."""
    v = np.asarray(v, dtype=float)
    w = fam.vertices + v
    w.setflags(write=False)
    y1, x1, x3 = fam.base_chord
    return SlidingFamily(
        fixed_part=fam.fixed_part.translate(v),
        base_chord=(y1 + v[1], x1 + v[0], x3 + v[0]),
        apex_height=fam.apex_height + v[1],
        symmetric=False,
        xi_left=fam.xi_left + v[0],
        xi_right=fam.xi_right + v[0],
        original_x2=fam.original_x2 + v[0],
        vertices=w,
        rotation=fam.rotation,
        vertex_index=fam.vertex_index,
    )


def center_family(fam: SlidingFamily) -> SlidingFamily:
    """Translate so the fixed part has its barycentre at the origin."""
    if fam.symmetric:
        return fam
    return translate_family(fam, -np.asarray(barycenter(fam.fixed_part)))


def _drop(w: np.ndarray, idx: int, sym: bool) -> np.ndarray:
    """Remove vertex idx (and its antipode when symmetric); idx is 0 or 2."""
    if not sym:
        return np.delete(w, idx, axis=0)
    half = len(w) // 2
    if idx == 0:
        return w[1:half]
    return np.delete(w[:half], idx, axis=0)


def body_at(fam: SlidingFamily, x2: float):
    """Member of the family with the moving vertex at (x2, y2).

    At an endpoint the vertex that became collinear is removed.
    """
    w = np.array(fam.vertices)
    L = _scale(w)
    span = fam.xi_right - fam.xi_left
    slack = 1e-12 * max(L, span)
    if not (fam.xi_left - slack <= x2 <= fam.xi_right + slack):
        raise OutOfRange(f"x2={x2} outside [{fam.xi_left}, {fam.xi_right}]")
    x2 = min(max(x2, fam.xi_left), fam.xi_right)
    n = len(w)
    w[1, 0] = x2
    if fam.symmetric:
        half = n // 2
        w[1 + half] = -w[1]
    tol = COLLINEAR_RTOL * L * L
    drop = None
    t2 = _cross(w[2] - w[1], w[3] - w[2])
    t0 = _cross(w[0] - w[n - 1], w[1] - w[0])
    if t2 <= tol and t2 <= t0:
        drop = 2
    elif t0 <= tol:
        drop = 0
    if fam.symmetric:
        h = w[: n // 2] if drop is None else _drop(w, drop, True)
        return SymmetricPolytope2(h, check=False)
    if drop is not None:
        w = _drop(w, drop, False)
    return Polytope2(w, check=False)


def endpoint_bodies(fam: SlidingFamily):
    return body_at(fam, fam.xi_left), body_at(fam, fam.xi_right)


# ------------------------------------------------------------- balancing

def _axis_chord(P) -> tuple[float, float]:
    """The segment K n {y = 0} as (alpha, beta)."""
    v = as_polytope(P).array
    nxt = np.roll(v, -1, axis=0)
    xs = []
    for a, b in zip(v, nxt):
        if (a[1] <= 0 <= b[1]) or (b[1] <= 0 <= a[1]):
            if a[1] == b[1]:
                xs.extend([a[0], b[0]])
            else:
                xs.append(a[0] + (b[0] - a[0]) * (0 - a[1]) / (b[1] - a[1]))
    if not xs:
        raise NoBracket("the body does not meet the x-axis")
    return float(min(xs)), float(max(xs))


def _log_ratio(P, p, q) -> float:
    hv = half_plane_volumes(build_support(P, p), q)
    r = hv.log_ratio
    if math.isnan(r):
        raise NoBracket("both half-plane volumes are infinite")
    return max(-_LOG_RATIO_CAP, min(_LOG_RATIO_CAP, r))


@dataclass
class BalanceResult:
    x0: float
    residual: float
    interval: tuple
    probes: list
    alternatives: list


def balance(fam: SlidingFamily, x2: float, x2p: float, p, q: QuadConfig = DEFAULT_QUAD,
            xtol: float = 1e-13) -> BalanceResult:
    """Horizontal shift equalising the half-plane ratio of two family members.

    F(x0) = log ratio(P(x2) - (x0, 0)) - log ratio(P(x2') + (x0, 0)) runs
    from -inf to +inf across the admissible interval, so a sign change
    exists.  Probing starts at 0 and moves outward on Chebyshev points;
    the first bracket found is refined with Brent's method.
    """
    p = _check_p(p)
    if math.isinf(p):
        raise ValueError("balancing needs finite p")
    A = as_polytope(body_at(fam, x2))
    B = as_polytope(body_at(fam, x2p))
    a1, b1 = _axis_chord(A)
    a2, b2 = _axis_chord(B)
    lo, hi = max(a1, -b2), min(b1, -a2)
    if not lo < 0.0 < hi:
        raise NoBracket("origin is not inside both bodies", {"interval": (lo, hi)})

    def F(x0):
        return _log_ratio(A.translate((-x0, 0.0)), p, q) - _log_ratio(B.translate((x0, 0.0)), p, q)

    f0 = F(0.0)
    probes = [(0.0, f0)]
    if f0 == 0.0:
        return BalanceResult(0.0, 0.0, (lo, hi), probes, [])
    end = hi if f0 < 0 else lo
    j = np.arange(1, PROBES + 1)
    ts = end * 0.5 * (1 - np.cos(np.pi * j / (PROBES + 1)))
    prev_x, prev_f = 0.0, f0
    for x in ts:
        fx = F(float(x))
        probes.append((float(x), fx))
        if fx == 0.0:
            return BalanceResult(float(x), 0.0, (lo, hi), probes, [])
        if (fx > 0) != (prev_f > 0):
            a, b = sorted((prev_x, float(x)))
            root = brentq(F, a, b, xtol=xtol * max(1.0, hi - lo), rtol=4 * np.finfo(float).eps)
            return BalanceResult(float(root), float(F(root)), (lo, hi), probes, [])
        prev_x, prev_f = float(x), fx
    raise NoBracket("no sign change at the probe points",
                    {"interval": (lo, hi), "probes": probes})


def balancing_translation(fam: SlidingFamily, x2: float, x2p: float, p,
                          q: QuadConfig = DEFAULT_QUAD) -> float:
    return balance(fam, x2, x2p, p, q).x0


def half_ratio(P, p, q: QuadConfig = DEFAULT_QUAD) -> float:
    return half_plane_volumes(build_support(P, p), q).ratio


# ----------------------------------------------------------- convexity

def _reciprocal_volume(K, p, q, sym, start=None):
    if sym:
        return 1.0 / mahler_p(K, p, q).volume_polar, None
    sol = santalo_point(K, p, q, start=start)
    return 1.0 / sol.polar_volume, sol.point


def convexity_curve(fam: SlidingFamily, p, grid: int = 21, q: QuadConfig = DEFAULT_QUAD):
    """[(x2, 1/|P(x2)^{o,p}|)] on an equispaced grid over the sliding range.

    Non-symmetric families use the Santalo-translated polar volume.
    """
    if grid < 5:
        raise ValueError("grid must be at least 5")
    p = _check_p(p)
    xs = np.linspace(fam.xi_left, fam.xi_right, grid)
    out = []
    start = None
    for x in xs:
        K = body_at(fam, float(x))
        val, start = _reciprocal_volume(K, p, q, fam.symmetric, start)
        out.append((float(x), float(val)))
    return out


def second_differences(curve) -> np.ndarray:
    v = np.array([c[1] for c in curve])
    return v[:-2] - 2 * v[1:-1] + v[2:]


# ------------------------------------------------------------ reduction

def _translated_mp(K, p, q) -> float:
    """inf over translations of M_p (at the origin when K is symmetric)."""
    if is_symmetric(K):
        return mahler_p(K, p, q).m_p
    sol = santalo_point(K, p, q)
    return 2.0 * area(K) * sol.polar_volume


def _is_terminal(K) -> bool:
    return len(as_polytope(K)) == (4 if is_symmetric(K) else 3)


def reduce_once(K, p, q: QuadConfig = DEFAULT_QUAD):
    """Slide the vertex whose endpoint body has the smallest M_p.

    Returns ``(body, report)``; the report is JSON-serialisable.
    """
    p = _check_p(p)
    if _is_terminal(K):
        raise AlreadyMinimal("body is already a triangle or a symmetric quadrilateral")
    n = len(as_polytope(K))
    ks = range(n // 2) if is_symmetric(K) else range(n)
    best = None
    candidates = []
    for k in ks:
        fam = make_family(K, k)
        ends = endpoint_bodies(fam)
        vals = [_translated_mp(E, p, q) for E in ends]
        j = int(np.argmin(vals))
        candidates.append({"vertex_index": k, "endpoint_mp": vals})
        if best is None or vals[j] < best[0]:
            best = (vals[j], k, fam, ends[j], vals, j)
    mp, k, fam, body, vals, j = best
    report = {
        "vertex_index": k,
        "xi_left": fam.xi_left,
        "xi_right": fam.xi_right,
        "endpoint_mp": vals,
        "chosen": "left" if j == 0 else "right",
        "x0_balance": None,
        "m_p": mp,
        "candidates": candidates,
    }
    return body, report


def reduce_chain(K, p, q: QuadConfig = DEFAULT_QUAD, reports: list | None = None):
    """Reduce to a triangle or symmetric quadrilateral; [(body, M_p), ...]."""
    p = _check_p(p)
    chain = [(K, _translated_mp(K, p, q))]
    cur = K
    while not _is_terminal(cur):
        cur, rep = reduce_once(cur, p, q)
        chain.append((cur, rep["m_p"]))
        if reports is not None:
            reports.append(rep)
    return chain
