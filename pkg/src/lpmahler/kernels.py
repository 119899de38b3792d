"""Backend selection for the hot kernel.

The compiled Cython module is used when importable; otherwise the numpy
fallback.  Setting ``LPMAHLER_BACKEND=python`` forces the fallback.
"""
import contextlib
import os

import numpy as np

from . import _kernels_py

try:
    from . import _kernels as _compiled
except ImportError:  # extension not built
    _compiled = None

_BACKENDS = {"python": _kernels_py}
if _compiled is not None:
    _BACKENDS["compiled"] = _compiled

_active = "compiled" if _compiled is not None else "python"
if os.environ.get("LPMAHLER_BACKEND", "").lower() == "python":
    _active = "python"


def available_backends():
    return sorted(_BACKENDS)


def backend() -> str:
    return _active


def set_backend(name: str) -> None:
    global _active
    if name not in _BACKENDS:
        raise ValueError(f"backend {name!r} not available; have {available_backends()}")
    _active = name


@contextlib.contextmanager
def use_backend(name: str):
    prev = _active
    set_backend(name)
    try:
        yield
    finally:
        set_backend(prev)


def log_avg_exp(points, tri, logw, p: float) -> np.ndarray:
    pts = np.ascontiguousarray(points, dtype=float).reshape(-1, 2)
    return _BACKENDS[_active].log_avg_exp(
        pts, np.ascontiguousarray(tri, dtype=float), np.ascontiguousarray(logw, dtype=float), float(p)
    )


def log_divdiff3(a) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    shape = a.shape[:-1]
    flat = np.ascontiguousarray(a.reshape(-1, 3))
    return np.asarray(_BACKENDS[_active].log_divdiff3(flat)).reshape(shape)
