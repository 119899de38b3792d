"""Acceptance criteria 1-15 at their stated tolerances.

Each test records a PASS/FAIL line that is printed in the terminal summary,
then asserts.  Run directly with ``python tests/test_acceptance.py``.
"""
import math
import time

import numpy as np
import pytest

from conftest import ACCEPTANCE
from lpmahler import harness as H
from lpmahler.geometry import Polytope2, area, convex_hull, square
from lpmahler.isotropic import cee, covariance
from lpmahler.mahler import bergman_diagonal, mahler_p, simplex_reference
from lpmahler.sliding import body_at, make_family, reduce_chain

pytestmark = pytest.mark.acceptance


def record(n, ok, detail):
    ACCEPTANCE[n] = (bool(ok), detail)
    print(f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}")
    assert ok, detail


def suite(n, name, cases, limit=None):
    t = time.perf_counter()
    rep = H.run_suite(name, cases, seed=0)
    dt = time.perf_counter() - t
    ok = rep.passed and rep.cases == cases and (limit is None or dt < limit)
    record(n, ok, f"{rep.summary()} time={dt:.1f}s")
    return rep


def random_triangle(rng):
    while True:
        v = rng.normal(size=(3, 2)) * rng.uniform(0.1, 10) + rng.normal(size=2) * 5
        d = (v[1, 0] - v[0, 0]) * (v[2, 1] - v[0, 1]) - (v[1, 1] - v[0, 1]) * (v[2, 0] - v[0, 0])
        if abs(d) > 1e-3 * np.ptp(v) ** 2:
            return convex_hull(v)


def test_c01_triangle_cee():
    rng = np.random.default_rng(1)
    tris = [random_triangle(rng) for _ in range(50)]
    t = time.perf_counter()
    worst = max(abs(cee(T) - 108.0) for T in tris)
    dt = time.perf_counter() - t
    record(1, worst <= 1e-10 and dt < 1.0, f"max |C-108|={worst:.2e} time={dt:.3f}s")


def test_c02_square():
    c = cee(square())
    cov = covariance(square()).matrix
    g1 = abs(c - 144.0)
    g2 = float(np.max(np.abs(cov - np.eye(2) / 3)))
    record(2, g1 <= 1e-12 and g2 <= 1e-14, f"|C-144|={g1:.1e} max|Cov-I/3|={g2:.1e}")


def test_c03_lifted_triangle_covariance():
    rng = np.random.default_rng(3)
    worst = 0.0
    for _ in range(100):
        l, h = rng.uniform(0.1, 5, 2)
        x2 = rng.uniform(-5, 5)
        T = Polytope2([(-l / 2, 0), (l / 2, 0), (x2, h)])
        ref = np.array([[x2 ** 2 + 0.75 * l ** 2, x2 * h], [x2 * h, h ** 2]]) / 18
        worst = max(worst, float(np.max(np.abs(covariance(T).matrix - ref))))
    record(3, worst <= 1e-11, f"max entry error={worst:.1e}")


def test_c04_sliding_quadratic():
    t = time.perf_counter()
    worst_res = 0.0
    worst_lead = math.inf
    for i in range(50):
        seed = H.case_seed(4, i)
        spec = H._sym_spec(seed) if i % 2 else H._gen_spec(seed, (4, 9))
        K = H.random_body(spec)
        fam = make_family(K, i % len(K))

        def f(x):
            P = body_at(fam, x)
            return area(P) ** 4 / cee(P)

        lo, hi = fam.xi_left, fam.xi_right
        nodes = np.array([lo, 0.5 * (lo + hi), hi])
        vals = np.array([f(x) for x in nodes])
        held = lo + (hi - lo) * (np.arange(8) + 0.5) / 8
        for x in held:
            # Lagrange interpolation through the three nodes
            pred = sum(vals[j] * np.prod([(x - nodes[k]) / (nodes[j] - nodes[k])
                                          for k in range(3) if k != j]) for j in range(3))
            worst_res = max(worst_res, abs(pred - f(x)) / abs(f(x)))
        w = 0.5 * (hi - lo)
        lead = (vals[0] - 2 * vals[1] + vals[2]) / (2 * w * w)
        worst_lead = min(worst_lead, lead * w * w / np.max(np.abs(vals)))
    dt = time.perf_counter() - t
    ok = worst_res <= 1e-9 and worst_lead >= -1e-12 and dt < 10
    record(4, ok, f"max residual={worst_res:.1e} min scaled leading coef={worst_lead:.2e} time={dt:.2f}s")


def test_c05_square_m1():
    t = time.perf_counter()
    m = mahler_p(square(), 1.0).m_p
    b = area(square()) ** 2 * bergman_diagonal(square(), (0.0, 0.0))
    dt = time.perf_counter() - t
    g1 = abs(m / math.pi ** 4 - 1)
    g2 = abs(b / (math.pi / 4) ** 2 - 1)
    record(5, g1 <= 1e-4 and g2 <= 1e-4 and dt < 1.0,
           f"M1={m:.10f} rel={g1:.1e} |K|^2B rel={g2:.1e} time={dt:.3f}s")


def test_c06_blocki_sym():
    suite(6, "blocki_sym", 100, limit=180)


def test_c07_mp_sym_min():
    suite(7, "mp_sym_min", 100)


def test_c08_mp_gen_min():
    suite(8, "mp_gen_min", 50)


def test_c09_slide_convexity():
    suite(9, "slide_convexity", 30)


def test_c10_balance():
    suite(10, "balance", 50)


def _chain_ok(chain, tol=1e-6):
    ms = [m for _, m in chain]
    return all(b <= a * (1 + tol) for a, b in zip(ms, ms[1:])), ms


def test_c11_reduction_chains():
    t = time.perf_counter()
    sq = mahler_p(square(), 2.0).m_p
    bad = []
    worst_term = 0.0
    for i in range(30):
        K = H.random_body(H.RandomSpec(H.case_seed(11, i), 4, True))
        ok, ms = _chain_ok(reduce_chain(K, 2.0))
        gap = abs(ms[-1] / sq - 1)
        worst_term = max(worst_term, gap)
        if not ok or gap > 1e-5 or len(ms) != 3:
            bad.append(("octagon", i, ms))
    ref = simplex_reference(1.0)
    worst_tri = 0.0
    for i in range(30):
        K = H.random_body(H.RandomSpec(H.case_seed(12, i), 7, False))
        chain = reduce_chain(K, 1.0)
        ok, ms = _chain_ok(chain)
        # terminal triangles are all affine images of the simplex
        worst_tri = max(worst_tri, abs(ms[-1] / ref - 1))
        if not ok or len(chain[-1][0]) != 3:
            bad.append(("heptagon", i, ms))
    dt = time.perf_counter() - t
    record(11, not bad, f"failures={len(bad)} square terminal rel={worst_term:.1e} "
                        f"triangle terminal rel={worst_tri:.1e} time={dt:.1f}s")


def test_c12_consistency():
    suite(12, "consistency", 50)


def test_c13_gl_invariance():
    suite(13, "gl_invariance", 50)


def test_c14_hausdorff_cee():
    suite(14, "hausdorff_cee", 4)


def test_c15_ball_and_bbl_oracles():
    K = H.random_body(H.RandomSpec(H.case_seed(15, 0), 3, True))
    ball = H.check_ball_hypothesis(make_family(K, 0), 1.0, samples=500)
    bbl = H.check_bbl(200)
    ok = ball.worst_violation > -1e-8 and bbl.worst_violation > -1e-8
    record(15, ok, f"ball worst={ball.worst_violation:.2e} bbl worst={bbl.worst_violation:.2e}")


if __name__ == "__main__":
    raise SystemExit(pytest.main([__file__, "-v"]))
