import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import circle_body, gl_matrices, polygons
from lpmahler.errors import (
    AnchorOutside,
    DegenerateInput,
    DegenerateNeighbors,
    InvalidPolytope,
)
from lpmahler.geometry import (
    AffineMap2,
    Polytope2,
    SymmetricPolytope2,
    area,
    barycenter,
    body_from_json,
    body_to_json,
    classical_polar,
    contains,
    convex_hull,
    dump_body,
    hausdorff_distance,
    load_body,
    normalize_for_sliding,
    prune_collinear,
    regular_polygon,
    simplex,
    square,
    support_classical,
    triangulate_fan,
)


def same_cycle(a, b, tol=1e-10):
    a, b = np.asarray(a), np.asarray(b)
    if a.shape != b.shape:
        return False
    return any(np.allclose(np.roll(a, k, axis=0), b, atol=tol) for k in range(len(a)))


class TestConvexHull:
    def test_interior_point_removed(self):
        P = convex_hull([(0, 0), (1, 0), (0, 1), (0.2, 0.2)])
        assert same_cycle(P.array, [(0, 0), (1, 0), (0, 1)])

    def test_square_corners(self):
        P = convex_hull([(1, 1), (-1, 1), (-1, -1), (1, -1)])
        assert len(P) == 4 and area(P) == pytest.approx(4.0)

    def test_origin_dropped_from_equilateral(self):
        s = math.sqrt(3) / 2
        P = convex_hull([(1, 0), (-0.5, s), (-0.5, -s), (0, 0)])
        assert len(P) == 3
        assert not any(np.allclose(v, 0) for v in P.array)

    def test_collinear_points_pruned(self):
        P = convex_hull([(0, 0), (1, 0), (2, 0), (2, 2), (0, 2), (1, 2)])
        assert len(P) == 4

    def test_degenerate(self):
        with pytest.raises(DegenerateInput):
            convex_hull([(0, 0), (1, 1), (2, 2)])

    @given(st.lists(st.tuples(st.floats(-5, 5), st.floats(-5, 5)), min_size=8, max_size=30))
    def test_hull_contains_inputs(self, pts):
        try:
            P = convex_hull(pts)
        except DegenerateInput:
            return
        for q in pts:
            assert contains(P, q, strict=False) or min(np.hypot(*(P.array - q).T)) < 1e-9


class TestPolytopeInvariants:
    def test_clockwise_rejected(self):
        with pytest.raises(InvalidPolytope):
            Polytope2([(0, 0), (0, 1), (1, 0)])

    def test_nonconvex_rejected(self):
        with pytest.raises(InvalidPolytope):
            Polytope2([(0, 0), (2, 0), (1, 0.2), (2, 2), (0, 2)])

    def test_symmetric_expands(self):
        S = square()
        assert len(S) == 4
        assert np.allclose(S.array[2:], -S.array[:2])

    def test_prune_collinear(self):
        P = prune_collinear([(0, 0), (1, 0), (2, 0), (2, 1), (0, 1)])
        assert len(P) == 4


class TestMeasures:
    def test_areas(self, tri_unit):
        assert area(square()) == 4.0
        assert area(simplex()) == pytest.approx(1.5, abs=1e-15)
        assert area(tri_unit) == 0.5

    def test_barycenters(self, tri_unit):
        assert np.allclose(barycenter(square()), (0, 0), atol=1e-15)
        assert np.allclose(barycenter(tri_unit), (1 / 3, 1 / 3), atol=1e-15)

    @given(st.floats(0.2, 3), st.floats(0.2, 3), st.floats(-2, 2))
    def test_barycenter_of_sliding_triangle(self, l, h, x2):
        T = Polytope2([(-l / 2, 0), (l / 2, 0), (x2, h)])
        assert np.allclose(barycenter(T), (x2 / 3, h / 3), atol=1e-13)

    def test_support(self, tri_unit):
        assert support_classical(square(), (1, 1)) == 2.0
        assert support_classical(tri_unit, (0, 0)) == 0.0
        assert support_classical(tri_unit, (2, 1)) == 2.0

    @given(polygons(), gl_matrices())
    def test_area_scales_with_det(self, P, A):
        assert area(AffineMap2(A).apply(P)) == pytest.approx(abs(np.linalg.det(A)) * area(P), rel=1e-12)


class TestPolar:
    def test_square_cross_duality(self):
        Q = classical_polar(square())
        assert area(Q) == pytest.approx(2.0)
        assert same_cycle(classical_polar(Q).array, square().array)

    def test_simplex_mahler(self):
        # barycentre of the simplex is the origin, where 2|K||K^o| = 27/2
        Q = classical_polar(simplex())
        assert 2 * area(simplex()) * area(Q) == pytest.approx(13.5, abs=1e-12)

    @given(polygons(symmetric=True))
    def test_bipolar(self, S):
        assert same_cycle(classical_polar(classical_polar(S)).array, S.array, tol=1e-10)

    @given(polygons(symmetric=True), gl_matrices())
    def test_mahler_invariant_under_linear_maps(self, S, A):
        A = A / math.sqrt(abs(np.linalg.det(A)))
        m0 = 2 * area(S) * area(classical_polar(S))
        AS = AffineMap2(A).apply(S)
        assert 2 * area(AS) * area(classical_polar(AS)) == pytest.approx(m0, rel=1e-9)


class TestHausdorff:
    def test_examples(self):
        S = square()
        assert hausdorff_distance(S, S) == 0.0
        big = SymmetricPolytope2([(2, 2), (-2, 2)])
        assert hausdorff_distance(S, big) == pytest.approx(math.sqrt(2))
        assert hausdorff_distance(S, S.full().translate((3, 0))) == pytest.approx(3.0)

    @given(polygons(), polygons(), polygons())
    def test_triangle_inequality(self, P, Q, R):
        assert hausdorff_distance(P, R) <= hausdorff_distance(P, Q) + hausdorff_distance(Q, R) + 1e-12


class TestFan:
    def test_square_fan(self):
        tris = triangulate_fan(square(), (0, 0))
        assert len(tris) == 4
        assert all(t.signed_area == pytest.approx(1.0) for t in tris)

    def test_vertex_anchor_drops_degenerate(self, tri_unit):
        assert len(triangulate_fan(tri_unit, (0, 0))) == 1

    def test_outside_anchor(self, tri_unit):
        with pytest.raises(AnchorOutside):
            triangulate_fan(tri_unit, (1, 1))


class TestNormalize:
    S = SymmetricPolytope2([(1, 1), (0, 2), (-1, 1)])

    def test_already_normalized(self):
        R, N = normalize_for_sliding(self.S, 1)
        assert np.allclose(R.linear, np.eye(2))
        assert np.allclose(N.array, self.S.array)

    def test_rotated_input(self):
        rot = AffineMap2.rotation(math.pi / 2)
        S90 = rot.apply(self.S)
        k = int(np.argmin(np.hypot(*(S90.array - rot(np.array([0.0, 2.0]))[0]).T)))
        R, N = normalize_for_sliding(S90, k)
        assert np.allclose(N.array, self.S.array, atol=1e-12)

    @given(polygons(4, 8), st.integers(0, 20))
    def test_postcondition(self, P, k):
        R, N = normalize_for_sliding(P, k)
        w = N.array
        assert abs(w[0, 1] - w[2, 1]) < 1e-12
        assert w[1, 1] > w[0, 1]
        back = R.inverse()(w)
        assert same_cycle(back, P.array, tol=1e-12)

    def test_too_few(self, tri_unit):
        with pytest.raises(InvalidPolytope):
            normalize_for_sliding(tri_unit, 0)

    def test_degenerate_neighbours_error_type(self):
        assert issubclass(DegenerateNeighbors, Exception)


class TestJson:
    @pytest.mark.parametrize("body", [square(), simplex(), regular_polygon(7)])
    def test_round_trip(self, body, tmp_path):
        f = tmp_path / "b.json"
        dump_body(body, f)
        back = load_body(f)
        assert type(back) is type(body)
        assert np.allclose(back.array, body.array)
        assert body_to_json(body_from_json(body_to_json(body))) == body_to_json(body)

    def test_bad_json(self):
        with pytest.raises(InvalidPolytope):
            body_from_json({"symmetric": True})
        with pytest.raises(InvalidPolytope):
            body_from_json([1, 2])


def test_circle_body_helper_is_extreme():
    for s in range(20):
        assert len(circle_body(5, s)) == 5
