"""Quadrature rules shared by the polar-body computations.

* ``gk_batch``: adaptive Gauss-Kronrod (G7/K15) over many independent
  integrals at once, so the integrand sees large vectorised batches.
* ``periodic_trapezoid``: nested trapezoid doubling on [0, 2pi), which
  converges geometrically for smooth periodic integrands.
* ``exp_sinh_nodes``: double-exponential nodes for [0, inf).
"""
from __future__ import annotations

import enum
import math
import warnings
from dataclasses import dataclass

import numpy as np

# QUADPACK qk15 abscissae (non-negative half) and weights
_XGK = np.array([
    0.991455371120812639206854697526329,
    0.949107912342758524526189684047851,
    0.864864423359769072789712788640926,
    0.741531185599394439863864773280788,
    0.586087235467691130294144845693013,
    0.405845151377397166906606412076961,
    0.207784955007898467600689403773245,
    0.000000000000000000000000000000000,
])
_WGK = np.array([
    0.022935322010529224963732008058970,
    0.063092092629978553290700663189204,
    0.104790010322250183839876322541518,
    0.140653259715525918745189590510238,
    0.169004726639267902826583426598550,
    0.190350578064785409913256402421014,
    0.204432940075298892414161999234649,
    0.209482141084727828012999174891714,
])
_WG = np.array([
    0.129484966168869693270611432679082,
    0.279705391489276667901467771423780,
    0.381830050505118944950369775488975,
    0.417959183673469387755102040816327,
])

GK_NODES = np.concatenate([-_XGK[:-1], _XGK[::-1]])
GK_WEIGHTS = np.concatenate([_WGK[:-1], _WGK[::-1]])
G_WEIGHTS = np.zeros(15)
G_WEIGHTS[1:7:2] = _WG[:3]
G_WEIGHTS[7] = _WG[3]
G_WEIGHTS[9:15:2] = _WG[:3][::-1]


class RadialTransform(str, enum.Enum):
    TAN = "tan"
    EXP = "exp"


@dataclass(frozen=True)
class QuadConfig:
    rel_tol: float = 1e-8
    abs_tol: float = 1e-12
    max_depth: int = 40
    radial_transform: RadialTransform = RadialTransform.TAN
    angular_nodes: int = 64

    def __post_init__(self):
        object.__setattr__(self, "radial_transform", RadialTransform(self.radial_transform))
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("tolerances must be positive")
        if self.max_depth < 1:
            raise ValueError("max_depth must be positive")
        if self.angular_nodes < 16 or self.angular_nodes % 2:
            raise ValueError("angular_nodes must be even and at least 16")

    def tightened(self, rel_tol: float) -> "QuadConfig":
        return QuadConfig(
            min(self.rel_tol, rel_tol),
            min(self.abs_tol, rel_tol * 1e-4),
            self.max_depth,
            self.radial_transform,
            self.angular_nodes,
        )


def gk_batch(func, lo, hi, rel_tol, abs_tol, max_depth=40, init_panels=1):
    """Integrate n integrals over [lo[i], hi[i]] adaptively.

    ``func(ids, x)`` receives integral indices of shape (M,) and nodes of
    shape (M, 15) and returns values of shape (M, 15) or (M, 15, C).
    A panel is accepted when the QUADPACK error estimate is below its width-proportional
    share of max(abs_tol, rel_tol * |estimate|), for every component.

    Returns ``(values, errors)`` with shape (n,) or (n, C).
    """
    lo = np.asarray(lo, dtype=float)
    hi = np.asarray(hi, dtype=float)
    n = len(lo)
    width = hi - lo
    ids = np.repeat(np.arange(n), init_panels)
    frac = np.tile(np.arange(init_panels), n)
    a = lo[ids] + width[ids] * frac / init_panels
    b = lo[ids] + width[ids] * (frac + 1) / init_panels
    depth = np.zeros(len(ids), dtype=int)
    acc = None
    acc_err = None
    squeeze = False
    while len(ids):
        c = 0.5 * (a + b)
        h = 0.5 * (b - a)
        x = c[:, None] + h[:, None] * GK_NODES[None, :]
        f = np.asarray(func(ids, x), dtype=float)
        if f.ndim == 2:
            f = f[..., None]
            squeeze = True
        if acc is None:
            acc = np.zeros((n, f.shape[2]))
            acc_err = np.zeros((n, f.shape[2]))
        K = h[:, None] * np.einsum("mjc,j->mc", f, GK_WEIGHTS)
        G = h[:, None] * np.einsum("mjc,j->mc", f, G_WEIGHTS)
        err = _qk_error(f, K, G, h)
        est = acc.copy()
        np.add.at(est, ids, K)
        tol = np.maximum(abs_tol, rel_tol * np.abs(est[ids])) * ((b - a) / width[ids])[:, None]
        ok = np.all(err <= tol, axis=1) | (depth >= max_depth)
        if np.any(ok & (depth >= max_depth) & ~np.all(err <= tol, axis=1)):
            warnings.warn("adaptive quadrature hit max_depth", RuntimeWarning, stacklevel=2)
        np.add.at(acc, ids[ok], K[ok])
        np.add.at(acc_err, ids[ok], err[ok])
        keep = ~ok
        ids, a, b, c, depth = ids[keep], a[keep], b[keep], c[keep], depth[keep] + 1
        ids = np.repeat(ids, 2)
        a, b = np.column_stack([a, c]).ravel(), np.column_stack([c, b]).ravel()
        depth = np.repeat(depth, 2)
    if acc is None:
        acc = np.zeros((n, 1))
        acc_err = np.zeros((n, 1))
        squeeze = True
    if squeeze:
        return acc[:, 0], acc_err[:, 0]
    return acc, acc_err


def _qk_error(f, K, G, h):
    # QUADPACK qk15 scaling: err = resasc * min(1, (200 |K - G| / resasc)^1.5)
    mean = K / (2.0 * h[:, None])
    resasc = h[:, None] * np.einsum("mjc,j->mc", np.abs(f - mean[:, None, :]), GK_WEIGHTS)
    raw = np.abs(K - G)
    with np.errstate(divide="ignore", invalid="ignore"):
        scaled = resasc * np.minimum(1.0, (200.0 * raw / resasc) ** 1.5)
    return np.where(resasc > 0, scaled, raw)


def periodic_trapezoid(func, n0, rel_tol, abs_tol, max_nodes=1 << 16):
    """Trapezoid rule on [0, 2pi) with nested doubling.

    ``func(theta)`` returns (N,) or (N, C) values.  Stops when successive
    estimates agree to rel_tol relative to the integral of |f| in every
    component.  Returns ``(value, error_estimate, nodes_used)``.
    """
    theta = 2 * np.pi * np.arange(n0) / n0
    f = np.asarray(func(theta), dtype=float)
    s = f.sum(axis=0)
    sa = np.abs(f).sum(axis=0)
    n = n0
    T = 2 * np.pi * s / n
    while True:
        th = (2 * np.arange(n) + 1) * np.pi / n
        f = np.asarray(func(th), dtype=float)
        s = s + f.sum(axis=0)
        sa = sa + np.abs(f).sum(axis=0)
        n *= 2
        T_new = 2 * np.pi * s / n
        err = np.abs(T_new - T)
        scale = 2 * np.pi * sa / n
        if np.all(err <= np.maximum(abs_tol, rel_tol * scale)):
            return T_new, err, n
        if n >= max_nodes:
            warnings.warn("angular quadrature did not converge", RuntimeWarning, stacklevel=2)
            return T_new, err, n
        T = T_new


def gauss_legendre_panels(lo, hi, panels, order=16):
    x, w = np.polynomial.legendre.leggauss(order)
    edges = np.linspace(lo, hi, panels + 1)
    c = 0.5 * (edges[1:] + edges[:-1])
    h = 0.5 * (edges[1:] - edges[:-1])
    nodes = (c[:, None] + h[:, None] * x[None, :]).ravel()
    weights = (h[:, None] * w[None, :]).ravel()
    return nodes, weights


def exp_sinh_nodes(step, tau_lo=-4.5, tau_hi=3.0, offset=0.0):
    """Nodes/weights of s = exp(pi/2 sinh tau) with tau = offset + j*step."""
    j0 = math.ceil((tau_lo - offset) / step)
    j1 = math.floor((tau_hi - offset) / step)
    tau = offset + step * np.arange(j0, j1 + 1)
    s = np.exp(0.5 * np.pi * np.sinh(tau))
    w = step * 0.5 * np.pi * np.cosh(tau) * s
    return s, w
