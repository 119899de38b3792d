"""Planar convex polygons.

Bodies are stored as counter-clockwise vertex arrays.  A centrally
symmetric body keeps only half of its vertices and expands on demand.
Vertex indices are 0-based throughout the library.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass
from typing import NamedTuple, Sequence, Union

import numpy as np

from .errors import (
    AnchorOutside,
    DegenerateInput,
    DegenerateNeighbors,
    InvalidPolytope,
    OriginNotInterior,
)

# Collinearity threshold for cross products, relative to (diameter)^2.
COLLINEAR_RTOL = 1e-12


class Point2(NamedTuple):
    x: float
    y: float


def _as_xy(points) -> np.ndarray:
    a = np.asarray(points, dtype=float)
    if a.ndim == 1:
        a = a.reshape(1, 2)
    if a.ndim != 2 or a.shape[1] != 2:
        raise ValueError("expected an array of 2D points")
    return a


def _cross(a, b):
    return a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0]


def _scale(v: np.ndarray) -> float:
    ext = v.max(axis=0) - v.min(axis=0)
    return float(math.hypot(ext[0], ext[1]))


def _turns(v: np.ndarray) -> np.ndarray:
    """Cross product of consecutive edges at every vertex."""
    prev = v - np.roll(v, 1, axis=0)
    nxt = np.roll(v, -1, axis=0) - v
    return _cross(prev, nxt)


class Polytope2:
    """Convex polygon with strictly convex, counter-clockwise vertices."""

    __slots__ = ("_v",)

    def __init__(self, vertices, check: bool = True):
        v = np.array(_as_xy(vertices), dtype=float)
        v.setflags(write=False)
        self._v = v
        if check:
            _validate(v)

    @property
    def array(self) -> np.ndarray:
        return self._v

    @property
    def vertices(self) -> list[Point2]:
        return [Point2(float(x), float(y)) for x, y in self._v]

    def __len__(self):
        return len(self._v)

    def __repr__(self):
        pts = ", ".join(f"({x:.6g}, {y:.6g})" for x, y in self._v)
        return f"Polytope2([{pts}])"

    def translate(self, shift) -> "Polytope2":
        return Polytope2(self._v + np.asarray(shift, dtype=float), check=False)

    def full(self) -> "Polytope2":
        return self


class SymmetricPolytope2:
    """Centrally symmetric polygon given by m consecutive vertices.

    The full body has vertices ``h_0..h_{m-1}, -h_0..-h_{m-1}`` in
    counter-clockwise order.
    """

    __slots__ = ("_h", "_full")

    def __init__(self, half_vertices, check: bool = True):
        h = np.array(_as_xy(half_vertices), dtype=float)
        h.setflags(write=False)
        self._h = h
        self._full = Polytope2(np.vstack([h, -h]), check=check)

    @property
    def half_array(self) -> np.ndarray:
        return self._h

    @property
    def half_vertices(self) -> list[Point2]:
        return [Point2(float(x), float(y)) for x, y in self._h]

    @property
    def array(self) -> np.ndarray:
        return self._full.array

    @property
    def vertices(self) -> list[Point2]:
        return self._full.vertices

    def full(self) -> Polytope2:
        return self._full

    def __len__(self):
        return 2 * len(self._h)

    def __repr__(self):
        pts = ", ".join(f"({x:.6g}, {y:.6g})" for x, y in self._h)
        return f"SymmetricPolytope2(half=[{pts}])"


Body = Union[Polytope2, SymmetricPolytope2]


def as_polytope(body) -> Polytope2:
    if isinstance(body, (Polytope2, SymmetricPolytope2)):
        return body.full()
    return Polytope2(body)


def is_symmetric(body) -> bool:
    return isinstance(body, SymmetricPolytope2)


def _validate(v: np.ndarray) -> None:
    m = len(v)
    if m < 3:
        raise InvalidPolytope(f"need at least 3 vertices, got {m}")
    if not np.all(np.isfinite(v)):
        raise InvalidPolytope("non-finite coordinate")
    L = _scale(v)
    if L == 0.0:
        raise InvalidPolytope("all vertices coincide")
    turns = _turns(v)
    if np.any(turns <= COLLINEAR_RTOL * L * L):
        raise InvalidPolytope("vertices are not strictly convex and counter-clockwise")
    # all left turns but winding twice is still not a simple polygon
    edges = np.roll(v, -1, axis=0) - v
    ang = np.arctan2(edges[:, 1], edges[:, 0])
    total = np.mod(np.diff(np.append(ang, ang[0])), 2 * np.pi).sum()
    if abs(total - 2 * np.pi) > 1e-6:
        raise InvalidPolytope("vertex sequence winds more than once")


@dataclass(frozen=True)
class AffineMap2:
    """x -> linear @ x + shift."""

    linear: np.ndarray
    shift: Point2 = Point2(0.0, 0.0)

    def __post_init__(self):
        A = np.array(self.linear, dtype=float).reshape(2, 2)
        A.setflags(write=False)
        object.__setattr__(self, "linear", A)
        object.__setattr__(self, "shift", Point2(*map(float, self.shift)))
        if not np.all(np.isfinite(A)) or abs(np.linalg.det(A)) == 0.0:
            raise ValueError("linear part must be invertible")

    @classmethod
    def identity(cls) -> "AffineMap2":
        return cls(np.eye(2))

    @classmethod
    def rotation(cls, angle: float) -> "AffineMap2":
        c, s = math.cos(angle), math.sin(angle)
        return cls(np.array([[c, -s], [s, c]]))

    @property
    def det(self) -> float:
        return float(np.linalg.det(self.linear))

    def __call__(self, points) -> np.ndarray:
        return _as_xy(points) @ self.linear.T + np.asarray(self.shift)

    def compose(self, inner: "AffineMap2") -> "AffineMap2":
        """self after inner."""
        return AffineMap2(self.linear @ inner.linear, self(np.asarray(inner.shift))[0])

    def inverse(self) -> "AffineMap2":
        Ai = np.linalg.inv(self.linear)
        return AffineMap2(Ai, -(Ai @ np.asarray(self.shift)))

    def apply(self, body):
        """Image of a body; symmetric bodies stay symmetric under linear maps."""
        A = self.linear
        flip = np.linalg.det(A) < 0
        shift = np.asarray(self.shift)
        if isinstance(body, SymmetricPolytope2) and not np.any(shift):
            h = body.half_array @ A.T
            if flip:
                # reversing h_0..h_{m-1}, -h_0.. keeps consecutive runs
                h = -h[::-1]
            return SymmetricPolytope2(h, check=False)
        v = as_polytope(body).array @ A.T + shift
        if flip:
            v = v[::-1]
        return Polytope2(v, check=False)


class Triangle(NamedTuple):
    v1: Point2
    v2: Point2
    v3: Point2

    @classmethod
    def of(cls, a, b, c) -> "Triangle":
        return cls(Point2(*map(float, a)), Point2(*map(float, b)), Point2(*map(float, c)))

    @property
    def array(self) -> np.ndarray:
        return np.array(self, dtype=float)

    @property
    def signed_area(self) -> float:
        a, b, c = self.array
        return 0.5 * float(_cross(b - a, c - a))


def convex_hull(points) -> Polytope2:
    """Extreme points in counter-clockwise order (monotone chain)."""
    pts = _as_xy(points)
    if not np.all(np.isfinite(pts)):
        raise DegenerateInput("non-finite coordinate")
    pts = np.unique(pts, axis=0)  # sorted lexicographically
    if len(pts) < 3:
        raise DegenerateInput("fewer than three distinct points")
    L = _scale(pts)
    tol = COLLINEAR_RTOL * L * L

    def chain(seq):
        out: list[np.ndarray] = []
        for p in seq:
            while len(out) >= 2 and _cross(out[-1] - out[-2], p - out[-2]) <= tol:
                out.pop()
            out.append(p)
        return out

    lower = chain(pts)
    upper = chain(pts[::-1])
    hull = np.array(lower[:-1] + upper[:-1])
    if len(hull) < 3:
        raise DegenerateInput("points are collinear")
    return Polytope2(hull)


def prune_collinear(vertices) -> Polytope2:
    """Drop vertices that are collinear with their neighbours."""
    v = _as_xy(vertices).copy()
    L = _scale(v)
    tol = COLLINEAR_RTOL * L * L
    changed = True
    while changed and len(v) > 3:
        changed = False
        t = _turns(v)
        i = int(np.argmin(t))
        if t[i] <= tol:
            v = np.delete(v, i, axis=0)
            changed = True
    return Polytope2(v)


def area(P) -> float:
    v = as_polytope(P).array
    w = v - v[0]
    return 0.5 * float(np.sum(_cross(w, np.roll(w, -1, axis=0))))


def barycenter(P) -> Point2:
    v = as_polytope(P).array
    o = v[0]
    w = v - o
    a, b = w[1:-1], w[2:]
    ar = 0.5 * _cross(a, b)
    c = (a + b) / 3.0
    g = (ar[:, None] * c).sum(axis=0) / ar.sum() + o
    return Point2(float(g[0]), float(g[1]))


def support_classical(P, y):
    """max <v, y> over vertices; vectorised over an (N, 2) array of y."""
    v = as_polytope(P).array
    ya = np.asarray(y, dtype=float)
    if ya.ndim == 1:
        return float(np.max(v @ ya))
    return np.max(ya @ v.T, axis=1)


def diameter(P) -> float:
    v = as_polytope(P).array
    d = v[:, None, :] - v[None, :, :]
    return float(np.sqrt((d ** 2).sum(axis=-1)).max())


def edge_distances(P, x) -> np.ndarray:
    """Signed distances from x to the edge lines (positive inside)."""
    v = as_polytope(P).array
    e = np.roll(v, -1, axis=0) - v
    x = np.asarray(x, dtype=float)
    return _cross(e, x - v) / np.hypot(e[:, 0], e[:, 1])


def interior_margin(P, x) -> float:
    return float(edge_distances(P, x).min())


def contains(P, x, strict: bool = True) -> bool:
    P = as_polytope(P)
    tol = COLLINEAR_RTOL * _scale(P.array)
    m = interior_margin(P, x)
    return m > tol if strict else m >= -tol


def classical_polar(P) -> Polytope2:
    """Polar polygon; vertex i is dual to edge (v_i, v_{i+1})."""
    v = as_polytope(P).array
    nxt = np.roll(v, -1, axis=0)
    det = _cross(v, nxt)
    L = _scale(v)
    if np.any(det <= COLLINEAR_RTOL * L * L):
        raise OriginNotInterior("origin is not strictly inside the body")
    w = np.column_stack([nxt[:, 1] - v[:, 1], v[:, 0] - nxt[:, 0]]) / det[:, None]
    return Polytope2(w, check=False)


def _point_polygon_distance(v: np.ndarray, pts: np.ndarray) -> np.ndarray:
    a = v[None, :, :]
    e = (np.roll(v, -1, axis=0) - v)[None, :, :]
    d = pts[:, None, :] - a
    inside = np.all(_cross(e, d) >= 0.0, axis=1)
    t = np.clip((d * e).sum(-1) / (e * e).sum(-1), 0.0, 1.0)
    seg = d - t[..., None] * e
    dist = np.sqrt((seg ** 2).sum(-1)).min(axis=1)
    return np.where(inside, 0.0, dist)


def hausdorff_distance(P, Q) -> float:
    p = as_polytope(P).array
    q = as_polytope(Q).array
    return float(max(_point_polygon_distance(q, p).max(), _point_polygon_distance(p, q).max()))


def triangulate_fan(P, anchor) -> list[Triangle]:
    v = as_polytope(P).array
    a = np.asarray(anchor, dtype=float)
    L = _scale(v)
    e = np.roll(v, -1, axis=0) - v
    if np.any(_cross(e, a - v) < -COLLINEAR_RTOL * L * L):
        raise AnchorOutside("anchor is outside the body")
    out = []
    for i in range(len(v)):
        b, c = v[i], v[(i + 1) % len(v)]
        if 0.5 * _cross(b - a, c - a) > COLLINEAR_RTOL * L * L:
            out.append(Triangle.of(a, b, c))
    return out


def normalize_for_sliding(body, k: int):
    """Rotate so that vertex k sits above the chord of its neighbours.

    Returns ``(rotation, normalized)``.  In the normalized body the slid
    vertex is at position 1 and its neighbours at positions 0 and 2 share
    the same height ``y1 < y2``.  For a symmetric body, ``k`` indexes the
    full vertex list and the result is again symmetric.
    """
    sym = isinstance(body, SymmetricPolytope2)
    v = as_polytope(body).array
    n = len(v)
    if n < (6 if sym else 4):
        raise InvalidPolytope("too few vertices to slide")
    k = int(k) % n
    prev, nxt = v[(k - 1) % n], v[(k + 1) % n]
    d = nxt - prev
    nd = math.hypot(d[0], d[1])
    if nd <= COLLINEAR_RTOL * _scale(v):
        raise DegenerateNeighbors("neighbours of the slid vertex coincide")
    c, s = -d[0] / nd, d[1] / nd
    R = AffineMap2(np.array([[c, -s], [s, c]]))
    order = [(k - 1 + j) % n for j in range(n)]
    w = R(v[order])
    y1 = 0.5 * (w[0, 1] + w[2, 1])
    w[0, 1] = y1
    w[2, 1] = y1
    if sym:
        half = n // 2
        w[half:] = -w[:half]
        return R, SymmetricPolytope2(w[:half], check=False)
    return R, Polytope2(w, check=False)


# ---------------------------------------------------------------- JSON I/O

def body_to_json(body) -> dict:
    if isinstance(body, SymmetricPolytope2):
        return {"half_vertices": body.half_array.tolist(), "symmetric": True}
    return {"vertices": as_polytope(body).array.tolist(), "symmetric": False}


def body_from_json(obj: dict):
    if not isinstance(obj, dict):
        raise InvalidPolytope("body JSON must be an object")
    if obj.get("symmetric", False):
        if "half_vertices" not in obj:
            raise InvalidPolytope("symmetric body needs 'half_vertices'")
        return SymmetricPolytope2(obj["half_vertices"])
    if "vertices" not in obj:
        raise InvalidPolytope("body needs 'vertices'")
    return Polytope2(obj["vertices"])


def load_body(path):
    with open(path) as fh:
        return body_from_json(json.load(fh))


def dump_body(body, path) -> None:
    with open(path, "w") as fh:
        json.dump(body_to_json(body), fh, indent=1)
        fh.write("\n")


def regular_polygon(k: int, radius: float = 1.0, phase: float = 0.0) -> Polytope2:
    t = phase + 2 * np.pi * np.arange(k) / k
    return Polytope2(radius * np.column_stack([np.cos(t), np.sin(t)]))


def square() -> SymmetricPolytope2:
    return SymmetricPolytope2([[1.0, -1.0], [1.0, 1.0]])


def simplex() -> Polytope2:
    """co{e1, e2, -e1-e2}; barycenter at the origin, area 3/2."""
    return Polytope2([[1.0, 0.0], [0.0, 1.0], [-1.0, -1.0]])
