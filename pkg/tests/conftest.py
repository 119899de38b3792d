import math

import numpy as np
import pytest
from hypothesis import HealthCheck, settings
from hypothesis import strategies as st

from lpmahler.geometry import Polytope2, SymmetricPolytope2, convex_hull

settings.register_profile(
    "default",
    max_examples=25,
    deadline=None,
    derandomize=True,
    suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def circle_body(n, seed, symmetric=False, jitter=0.25):
    """Polygon with n (half-)vertices at jittered angles on a circle."""
    rng = np.random.default_rng(seed)
    m = n
    span = np.pi if symmetric else 2 * np.pi
    t = np.sort(rng.uniform(0, span, m))
    # keep angular gaps away from zero so every point is extreme
    t = np.linspace(0, span, m, endpoint=False) + jitter * (t - t.mean()) / m
    total = 2 * m if symmetric else m
    # radial jitter stays below the sagitta so every point is extreme
    r = 1.0 + 0.4 * (1 - math.cos(math.pi / total)) * rng.uniform(-1, 1, m)
    pts = np.column_stack([r * np.cos(t), r * np.sin(t)])
    A = np.array([[1.0, rng.uniform(-0.4, 0.4)], [0.0, rng.uniform(0.6, 1.4)]])
    pts = pts @ A.T
    if symmetric:
        hull = convex_hull(np.vstack([pts, -pts])).array
        return SymmetricPolytope2(hull[: len(hull) // 2])
    return convex_hull(pts + rng.uniform(-0.2, 0.2, 2))


@st.composite
def polygons(draw, min_n=3, max_n=9, symmetric=False):
    n = draw(st.integers(min_n, max_n))
    seed = draw(st.integers(0, 2**32 - 1))
    return circle_body(n, seed, symmetric)


@st.composite
def gl_matrices(draw, cond_max=4.0):
    a = draw(st.floats(0, 2 * math.pi))
    b = draw(st.floats(0, 2 * math.pi))
    s = draw(st.floats(1.0, cond_max))
    flip = draw(st.booleans())
    R = lambda t: np.array([[math.cos(t), -math.sin(t)], [math.sin(t), math.cos(t)]])
    D = np.diag([math.sqrt(s), (-1 if flip else 1) / math.sqrt(s)])
    scale = draw(st.floats(0.5, 2.0))
    return scale * R(a) @ D @ R(b)


@pytest.fixture
def tri_unit():
    return Polytope2([(0, 0), (1, 0), (0, 1)])


# criterion number -> (passed, one-line detail); filled by test_acceptance
ACCEPTANCE: dict = {}


def pytest_terminal_summary(terminalreporter):
    if not ACCEPTANCE:
        return
    terminalreporter.section("acceptance criteria")
    for n in sorted(ACCEPTANCE):
        ok, detail = ACCEPTANCE[n]
        terminalreporter.write_line(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
