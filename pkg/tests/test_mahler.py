import math

import numpy as np
import pytest
from hypothesis import given, settings
from scipy import optimize

from conftest import circle_body, gl_matrices, polygons
from lpmahler.errors import InvalidP, NoConvergence, PointNotInterior
from lpmahler.geometry import AffineMap2, area, classical_polar, regular_polygon, simplex, square
from lpmahler.lp_polar import direct_volume_check
from lpmahler.lp_support import build_support
from lpmahler.mahler import (
    BLOCKI_SYM,
    bergman_diagonal,
    blocki_gap,
    mahler_p,
    santalo_mahler,
    santalo_point,
    simplex_reference,
)

INF = math.inf


class TestMahlerP:
    def test_square_infinite(self):
        assert mahler_p(square(), INF).m_p == 16.0

    def test_square_p1(self):
        r = mahler_p(square(), 1.0)
        assert r.m_p == pytest.approx(math.pi ** 4, rel=1e-9)
        assert r.m_p == pytest.approx(2 * r.volume_k * r.volume_polar, rel=1e-15)
        assert 0 <= r.error_estimate < 1e-6

    def test_bad_p(self):
        with pytest.raises(InvalidP):
            mahler_p(square(), -2)

    @given(polygons(symmetric=True))
    @settings(max_examples=8)
    def test_monotone_in_p(self, S):
        vals = [mahler_p(S, p).m_p for p in (0.5, 1.0, 2.0, 8.0, INF)]
        assert all(b <= a * (1 + 1e-8) for a, b in zip(vals, vals[1:]))

    @given(polygons(symmetric=True), gl_matrices())
    @settings(max_examples=8)
    def test_gl_invariant(self, S, A):
        a = mahler_p(S, 2.0).m_p
        assert mahler_p(AffineMap2(A).apply(S), 2.0).m_p == pytest.approx(a, rel=1e-6)

    def test_thin_body_matches_raw_route(self):
        # the solver normalises internally; the raw fan on a thin body must agree
        from lpmahler.lp_polar import polar_volume

        P = AffineMap2(np.diag([6.0, 1 / 6.0])).apply(regular_polygon(5))
        raw = 2 * area(P) * polar_volume(build_support(P, 1.0))
        assert mahler_p(P, 1.0).m_p == pytest.approx(raw, rel=1e-7)


class TestSantalo:
    @pytest.mark.parametrize("p", [0.5, 1.0, 8.0])
    def test_symmetric_is_origin(self, p):
        sol = santalo_point(circle_body(4, 2, symmetric=True), p)
        assert np.hypot(*sol.point) < 1e-8
        assert sol.gradient_norm < 1e-8

    def test_simplex_origin(self):
        sol = santalo_point(simplex(), 1.0)
        assert np.hypot(*sol.point) < 1e-8

    def test_classical_simplex_value(self):
        # independent: minimise the exact 2|K||(K-x)^o| with Nelder-Mead
        K = simplex().translate((0.3, -0.2))

        def f(x):
            return 2 * area(K) * area(classical_polar(K.translate(-x)))

        res = optimize.minimize(f, np.array([0.25, -0.15]), method="Nelder-Mead",
                                options={"xatol": 1e-10, "fatol": 1e-13})
        assert res.fun == pytest.approx(13.5, abs=1e-6)
        m, sol = santalo_mahler(K, INF)
        assert m == pytest.approx(13.5, abs=1e-6)
        assert np.allclose(sol.point, res.x, atol=1e-5)

    def test_p1_reference_against_descent(self):
        ref = simplex_reference(1.0)
        K = simplex()
        res = optimize.minimize(lambda x: mahler_p(K.translate(-x), 1.0).m_p, np.array([0.05, -0.03]),
                                method="Nelder-Mead", options={"xatol": 1e-7, "fatol": 1e-11})
        assert ref == pytest.approx(res.fun, rel=1e-7)

    def test_affine_equivariance(self):
        K = circle_body(5, 4)
        A = np.array([[1.3, 0.4], [-0.2, 0.8]])
        b = np.array([0.5, -1.0])
        s0 = np.array(santalo_point(K, 2.0).point)
        s1 = np.array(santalo_point(AffineMap2(A, b).apply(K), 2.0).point)
        assert np.allclose(s1, A @ s0 + b, atol=1e-8)

    def test_needle_triangle(self):
        # endpoint body met in a reduction chain; aspect ratio about 3e14
        from lpmahler.geometry import Polytope2

        T = Polytope2([[0.8794901491240079, -0.3901379861475649],
                       [-8067.893771496977, -0.2844795138805788],
                       [0.8793247404955511, -0.3906681143481011]])
        m, sol = santalo_mahler(T, 1.0)
        assert m == pytest.approx(simplex_reference(1.0), rel=1e-9)
        assert sol.gradient_norm < 1e-8

    def test_not_converged_reports_best(self):
        K = circle_body(6, 1)
        v = K.array
        start = 0.98 * v[0] + 0.02 * v.mean(axis=0)
        with pytest.raises(NoConvergence) as ei:
            santalo_point(K, 1.0, start=start, max_iter=1)
        assert ei.value.best is not None

    def test_below_round_body(self):
        # ellipses maximise: random bodies stay below a fine polygonal disk
        disk = mahler_p(regular_polygon(96), 1.0).m_p
        for s in range(3):
            m, _ = santalo_mahler(circle_body(5 + s, s), 1.0)
            assert m <= disk * (1 + 1e-4)


class TestBergman:
    def test_square_origin(self):
        assert bergman_diagonal(square(), (0, 0)) == pytest.approx(math.pi ** 2 / 256, rel=1e-8)

    def test_outside(self):
        with pytest.raises(PointNotInterior):
            bergman_diagonal(square(), (1.0, 0))

    def test_blow_up_near_boundary(self):
        K = regular_polygon(6)
        v = K.array[0]  # boundary point along this ray
        assert bergman_diagonal(K, 0.99 * v) > 10 * bergman_diagonal(K, 0.5 * v)

    def test_direct_route(self):
        K = circle_body(5, 8).translate((0.05, 0.0))
        K = K.translate(-np.mean(K.array, axis=0))
        b = bergman_diagonal(K, (0, 0))
        d = 2 * area(K) * direct_volume_check(build_support(K, 1.0)) / ((4 * math.pi) ** 2 * area(K) ** 2)
        assert b == pytest.approx(d, rel=2e-8)


class TestBlocki:
    def test_square(self):
        assert abs(blocki_gap(square())) < 1e-6

    def test_simplex(self):
        assert abs(blocki_gap(simplex())) < 1e-6

    @pytest.mark.parametrize("seed", range(3))
    def test_hexagon(self, seed):
        assert blocki_gap(circle_body(3, seed, symmetric=True)) >= -1e-6

    def test_constant(self):
        assert BLOCKI_SYM == pytest.approx((math.pi / 4) ** 2)
