import json
import math

import numpy as np
import pytest

from lpmahler import harness as H
from lpmahler.errors import GenerationFailed, UnknownSuite
from lpmahler.geometry import is_symmetric
from lpmahler.lp_support import build_support, h_p
from lpmahler.sliding import make_family


class TestRandomBody:
    def test_spec_validation(self):
        with pytest.raises(ValueError):
            H.RandomSpec(1, 2)
        assert H.RandomSpec(1, 3, generator="gauss_hull").generator is H.Generator.GAUSS_HULL

    @pytest.mark.parametrize("gen", list(H.Generator))
    def test_deterministic(self, gen):
        spec = H.RandomSpec(12345, 6, False, gen)
        assert np.array_equal(H.random_body(spec).array, H.random_body(spec).array)

    @pytest.mark.parametrize("gen", list(H.Generator))
    @pytest.mark.parametrize("m", [3, 5, 10])
    def test_symmetric(self, gen, m):
        K = H.random_body(H.RandomSpec(7, m, True, gen))
        assert is_symmetric(K) and len(K) == 2 * m

    @pytest.mark.parametrize("gen", list(H.Generator))
    @pytest.mark.parametrize("m", [3, 5, 16])
    def test_vertex_count_and_aspect(self, gen, m):
        for s in range(10):
            K = H.random_body(H.RandomSpec(s, m, False, gen))
            assert len(K) == m
            assert H._aspect(K) <= H.MAX_ASPECT

    def test_general_bodies_are_centred(self):
        from lpmahler.geometry import barycenter

        K = H.random_body(H.RandomSpec(3, 7))
        assert np.allclose(barycenter(K), 0, atol=1e-14)

    def test_generation_failure(self, monkeypatch):
        monkeypatch.setattr(H, "_sample_points", lambda rng, spec: np.array([[0, 0], [1, 1], [2, 2.0]]))
        with pytest.raises(GenerationFailed):
            H.random_body(H.RandomSpec(0, 4))

    def test_random_gl_conditioning(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            s = np.linalg.svd(H.random_gl(rng, 4.0), compute_uv=False)
            assert s[0] / s[1] <= 4.0 + 1e-12


class TestBbl:
    def test_closed_form_marginal(self):
        # int dz / (1 + z^2 + x^2)^2 = pi / (2 (1 + x^2)^(3/2))
        f = lambda z, x2: 1 + z * z + x2 * x2
        for x in (-1.3, 0.0, 0.4, 2.0):
            exact = 2 * (1 + x * x) ** 1.5 / math.pi
            assert H._reciprocal_marginal(f, lambda _: [], x) == pytest.approx(exact, rel=1e-12)

    def test_suite(self):
        rep = H.check_bbl(200)
        assert rep.passed and rep.worst_violation > -1e-9

    def test_constant_family_is_flat(self):
        rng = np.random.default_rng(0)
        f, k = H._bbl_function(rng, "constant")
        vals = [H._reciprocal_marginal(f, k, x) for x in (-1.0, 0.0, 1.0)]
        assert max(vals) - min(vals) == 0.0


class TestBall:
    def test_equal_curves_give_equality(self):
        fam = make_family(H.random_body(H.RandomSpec(5, 3, True)), 0)
        ev = build_support(fam.fixed_part, 1.0)
        t = 0.7
        y = 0.3
        lhs = h_p(ev, (t, t * y))
        rhs = 0.5 * h_p(ev, (t, t * y)) + 0.5 * h_p(ev, (t, t * y))
        assert abs(lhs - rhs) < 1e-10

    def test_hexagon(self):
        fam = make_family(H.random_body(H.RandomSpec(11, 3, True)), 1)
        rep = H.check_ball_hypothesis(fam, 1.0, samples=60)
        assert rep.passed and rep.worst_violation > -1e-8
        assert rep.details["worst_conclusion"] > -1e-8


class TestSuites:
    def test_unknown(self):
        with pytest.raises(UnknownSuite):
            H.run_suite("no_such_suite")

    def test_deterministic(self):
        a = H.run_suite("iso_min_gen", 6, seed=3).to_json()
        b = H.run_suite("iso_min_gen", 6, seed=3).to_json()
        assert a == b
        assert json.loads(a)["passed"] is True

    def test_parallel_matches_serial(self):
        a = H.run_suite("iso_min_sym", 8, seed=1)
        b = H.run_suite("iso_min_sym", 8, seed=1, workers=2)
        assert a.to_json() == b.to_json()

    def test_report_failures_iff_violation(self):
        rep = H._report("x", [(1, 0.5, {}), (2, -1e-3, {"k": 1}), (3, float("nan"), {})], 1e-6)
        assert rep.worst_seed == 2 and [s for s, _ in rep.failures] == [2, 3]
        ok = H._report("x", [(1, -1e-9, {})], 1e-6)
        assert ok.passed and "PASS" in ok.summary()

    @pytest.mark.parametrize("name", ["blocki_sym", "mp_sym_min", "gl_invariance", "hausdorff_cee"])
    def test_small_runs(self, name):
        rep = H.run_suite(name, 2, seed=5)
        assert rep.passed, rep.failures
