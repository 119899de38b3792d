"""Random bodies and verification suites.

Every suite turns each case into a margin that must be non-negative up
to the suite tolerance; a negative margin is a broken inequality.  The
report keeps the worst margin and the per-case seeds of the failures so
any case can be replayed with :func:`random_body`.
"""
from __future__ import annotations

import enum
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np
from scipy import integrate

from . import isotropic, mahler, sliding
from .errors import GenerationFailed, LpMahlerError, UnknownSuite
from .geometry import (
    AffineMap2,
    Polytope2,
    SymmetricPolytope2,
    _scale,
    area,
    as_polytope,
    barycenter,
    contains,
    convex_hull,
    hausdorff_distance,
    regular_polygon,
    square,
)
from .lp_polar import DEFAULT_QUAD, _polar_volume, direct_volume_check, half_plane_volumes, near_norms
from .lp_support import build_support, h_p
from .quadrature import QuadConfig

MAX_ASPECT = 50.0
MAX_ATTEMPTS = 100


class Generator(str, enum.Enum):
    CIRCLE_HULL = "circle_hull"
    GAUSS_HULL = "gauss_hull"


@dataclass(frozen=True)
class RandomSpec:
    seed: int
    vertex_count: int
    symmetric: bool = False
    generator: Generator = Generator.CIRCLE_HULL

    def __post_init__(self):
        object.__setattr__(self, "generator", Generator(self.generator))
        if self.vertex_count < 3:
            raise ValueError("vertex_count must be at least 3")


@dataclass
class VerifyReport:
    suite: str
    cases: int
    worst_violation: float
    tolerance: float
    failures: list = field(default_factory=list)
    worst_seed: int | None = None
    details: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool:
        return not self.failures

    def to_json(self) -> str:
        d = asdict(self)
        d["passed"] = self.passed
        return json.dumps(d, indent=1, default=_json_default)

    def summary(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return (f"{self.suite}: {status} cases={self.cases} "
                f"worst={self.worst_violation:.3e} tol={self.tolerance:.1e}")


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _report(suite, margins, tol, details=None) -> VerifyReport:
    """margins: list of (seed, margin, detail)."""
    worst = math.inf
    worst_seed = None
    failures = []
    for seed, m, detail in margins:
        if m < worst:
            worst, worst_seed = m, seed
        if not m >= -tol:  # NaN counts as failure
            failures.append((seed, detail))
    return VerifyReport(suite, len(margins), float(worst), tol, failures, worst_seed,
                        details or {})


# ---------------------------------------------------------------- bodies

def case_seed(seed: int, i: int) -> int:
    return int(np.random.SeedSequence([int(seed) & (2**64 - 1), i]).generate_state(1, np.uint64)[0])


def _aspect(P) -> float:
    C = isotropic.covariance(P).matrix
    ev = np.linalg.eigvalsh(C)
    return float(ev[1] / ev[0])


def _sample_points(rng, spec: RandomSpec):
    m = spec.vertex_count
    span = np.pi if spec.symmetric else 2 * np.pi
    if spec.generator is Generator.GAUSS_HULL:
        # stratified angles; radial jitter is scaled to the local angular gap
        # so that points remain extreme with high probability
        theta = (np.arange(m) + rng.uniform(0.1, 0.9, m)) * span / m
        # for symmetric bodies the antipodes continue the sequence after span
        gaps = np.diff(np.append(theta, theta[0] + span))
        local = np.minimum(gaps, np.roll(gaps, 1))
        amp = np.minimum(0.4, 0.5 * (1 - np.cos(local)))
        r = 1.0 + amp * rng.uniform(-1.0, 1.0, m)
        pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)])
        A = rng.normal(size=(2, 2))
        if np.linalg.det(A) == 0:
            A = np.eye(2)
        pts = pts @ A.T
    else:
        theta = np.sort(rng.uniform(0.0, span, m))
        pts = np.column_stack([np.cos(theta), np.sin(theta)])
    if spec.symmetric:
        pts = np.vstack([pts, -pts])
    return pts


def random_body(spec: RandomSpec):
    """Deterministic random polygon with exactly ``vertex_count`` extreme points.

    Symmetric specs count half-vertices.  General bodies are translated so
    their barycentre is the origin.
    """
    want = spec.vertex_count * (2 if spec.symmetric else 1)
    for attempt in range(MAX_ATTEMPTS):
        rng = np.random.default_rng([int(spec.seed) & (2**64 - 1), attempt])
        try:
            H = convex_hull(_sample_points(rng, spec))
        except LpMahlerError:
            continue
        if len(H) != want or _aspect(H) > MAX_ASPECT:
            continue
        v = H.array
        if spec.symmetric:
            half = v[: spec.vertex_count]
            if not np.allclose(v[spec.vertex_count:], -half, atol=1e-12 * _scale(v)):
                continue
            return SymmetricPolytope2(half)
        b = np.asarray(barycenter(H))
        return Polytope2(v - b)
    raise GenerationFailed(f"no valid body after {MAX_ATTEMPTS} attempts for {spec}")


def random_gl(rng, cond_max: float = 4.0) -> np.ndarray:
    """Random matrix with singular values in [1/sqrt(c), sqrt(c)] and random sign."""
    def rot(a):
        return np.array([[math.cos(a), -math.sin(a)], [math.sin(a), math.cos(a)]])

    s = np.exp(rng.uniform(-0.5, 0.5, 2) * math.log(cond_max))
    A = rot(rng.uniform(0, 2 * np.pi)) @ np.diag(s) @ rot(rng.uniform(0, 2 * np.pi))
    if rng.random() < 0.5:
        A = A @ np.diag([1.0, -1.0])
    return A


# --------------------------------------------------------------- oracles

def check_ball_hypothesis(fam, p, samples: int = 500, q: QuadConfig = DEFAULT_QUAD,
                          seed: int = 0) -> VerifyReport:
    """Sample the pointwise hypothesis of Ball's inequality and its conclusion.

    With F, G, H the functions exp(-h_p) along the rays t(x, y), s(x, y')
    and r(x, (y + y')/2) of S(x2), S(x2') and S((x2 + x2')/2), the margins
    are the pointwise hypothesis (in log form) and the q = 2 conclusion,
    which is midpoint convexity of the near norm.
    """
    rng = np.random.default_rng(seed)
    qn = q.tightened(1e-10)
    cache = {}

    def ev(x2):
        if x2 not in cache:
            cache[x2] = build_support(sliding.body_at(fam, x2), p)
        return cache[x2]

    margins = []
    worst_hyp = math.inf
    worst_con = math.inf
    for i in range(samples):
        a, b = rng.uniform(fam.xi_left, fam.xi_right, 2)
        if i % 10 == 0:
            b = a
        y, yp = rng.normal(scale=1.5, size=2)
        x = 1.0 if rng.random() < 0.75 else -1.0
        t, s = np.exp(rng.uniform(-2.5, 1.5, 2))
        if i % 25 == 0:
            s = t
        r = 2 * t * s / (t + s)
        mid = 0.5 * (a + b)
        lhs = h_p(ev(mid), (r * x, r * 0.5 * (y + yp)))
        rhs = (s / (t + s)) * h_p(ev(a), (t * x, t * y)) + (t / (t + s)) * h_p(ev(b), (s * x, s * yp))
        hyp = (rhs - lhs) / max(1.0, abs(rhs))
        n_mid = near_norms(ev(mid), [(x, 0.5 * (y + yp))], qn)[0]
        n_a = near_norms(ev(a), [(x, y)], qn)[0]
        n_b = near_norms(ev(b), [(x, yp)], qn)[0]
        con = (0.5 * (n_a + n_b) - n_mid) / max(1.0, n_mid)
        worst_hyp = min(worst_hyp, hyp)
        worst_con = min(worst_con, con)
        margins.append((i, min(hyp, con), {"x2": a, "x2p": b, "y": y, "yp": yp, "t": t, "s": s,
                                           "hypothesis": hyp, "conclusion": con}))
    return _report("ball_hypothesis", margins, 1e-8,
                   {"worst_hypothesis": worst_hyp, "worst_conclusion": worst_con, "p": p})


def _bbl_function(rng, kind):
    c0 = rng.uniform(0.2, 2.0)
    if kind == "quadratic":
        M = rng.normal(size=(2, 2))
        M[0, 0] = abs(M[0, 0]) + 0.3
        m = rng.normal(size=2)

        def f(z, x2):
            u = M[0, 0] * z + M[0, 1] * x2 + m[0]
            v = M[1, 0] * z + M[1, 1] * x2 + m[1]
            return c0 + u * u + v * v

        def kinks(x2):
            return []

    elif kind == "affine":
        a = rng.normal(size=(2, 3))
        a[:, 0] = np.sign(a[:, 0]) * (np.abs(a[:, 0]) + 0.3)

        def f(z, x2):
            return np.maximum(c0, np.maximum(np.abs(a[0, 0] * z + a[0, 1] * x2 + a[0, 2]),
                                             np.abs(a[1, 0] * z + a[1, 1] * x2 + a[1, 2])))

        def kinks(x2):
            out = []
            for row in a:
                base = row[1] * x2 + row[2]
                out += [(-base - c0) / row[0], (-base + c0) / row[0], -base / row[0]]
            # crossing of the two absolute values
            for sgn in (1.0, -1.0):
                den = a[0, 0] - sgn * a[1, 0]
                if abs(den) > 1e-14:
                    out.append(-((a[0, 1] - sgn * a[1, 1]) * x2 + a[0, 2] - sgn * a[1, 2]) / den)
            return out

    elif kind == "mixed":
        fq, kq = _bbl_function(rng, "quadratic")
        fa, ka = _bbl_function(rng, "affine")

        def f(z, x2):
            return fq(z, x2) + fa(z, x2)

        kinks = ka
    else:  # independent of x2
        alpha = rng.uniform(0.3, 3.0)

        def f(z, x2):
            return c0 + alpha * z * z

        def kinks(x2):
            return []

    return f, kinks


def _reciprocal_marginal(f, kinks, x2) -> float:
    pts = sorted(set(float(k) for k in kinks(x2)))
    edges = [-np.inf] + pts + [np.inf]
    total = 0.0
    for lo, hi in zip(edges[:-1], edges[1:]):
        if hi <= lo:
            continue
        val, _ = integrate.quad(lambda z: 1.0 / f(z, x2) ** 2, lo, hi,
                                epsabs=0.0, epsrel=1e-13, limit=400)
        total += val
    return 1.0 / total


def check_bbl(samples: int = 200, seed: int = 0) -> VerifyReport:
    """Midpoint convexity of x2 -> (int dz / f(z, x2)^2)^(-1) for convex f > 0."""
    rng = np.random.default_rng(seed)
    kinds = ["quadratic", "affine", "mixed", "constant"]
    margins = []
    for i in range(samples):
        kind = kinds[i % len(kinds)]
        f, kinks = _bbl_function(rng, kind)
        a, b = rng.uniform(-2.0, 2.0, 2)
        ga = _reciprocal_marginal(f, kinks, a)
        gb = _reciprocal_marginal(f, kinks, b)
        gm = _reciprocal_marginal(f, kinks, 0.5 * (a + b))
        m = (0.5 * (ga + gb) - gm) / max(ga, gb)
        margins.append((i, m, {"kind": kind, "x2": a, "x2p": b}))
    return _report("bbl", margins, 1e-8)


# ---------------------------------------------------------------- suites

def _sym_spec(s, rng_counts=(3, 6)):
    rng = np.random.default_rng(s)
    m = int(rng.integers(rng_counts[0], rng_counts[1] + 1))
    gen = Generator.CIRCLE_HULL if rng.random() < 0.5 else Generator.GAUSS_HULL
    return RandomSpec(s, m, True, gen)


def _gen_spec(s, counts=(3, 8)):
    rng = np.random.default_rng(s)
    m = int(rng.integers(counts[0], counts[1] + 1))
    gen = Generator.CIRCLE_HULL if rng.random() < 0.5 else Generator.GAUSS_HULL
    return RandomSpec(s, m, False, gen)


_REF_SQUARE: dict = {}


def square_mp(p, q: QuadConfig) -> float:
    key = (p, q.rel_tol)
    if key not in _REF_SQUARE:
        _REF_SQUARE[key] = mahler.mahler_p(square(), p, q.tightened(1e-10)).m_p
    return _REF_SQUARE[key]


SYM_PS = (0.5, 1.0, 2.0, 8.0, math.inf)
GEN_PS = (1.0, 2.0)


def _case_blocki_sym(s, q):
    K = random_body(_sym_spec(s))
    gap = mahler.blocki_gap(K, q)
    return gap, {"gap": gap, "vertices": len(K)}


def _case_blocki_gen(s, q):
    K = random_body(_gen_spec(s))
    ref = mahler.simplex_reference(1.0)
    m, _ = mahler.santalo_mahler(K, 1.0, q)
    return (m - ref) / ref, {"m1": m, "reference": ref, "vertices": len(K)}


def _case_mp_sym(s, q):
    K = random_body(_sym_spec(s))
    out = {}
    worst = math.inf
    for p in SYM_PS:
        ref = square_mp(p, q)
        m = mahler.mahler_p(K, p, q).m_p
        out[str(p)] = m
        worst = min(worst, (m - ref) / ref)
    return worst, out


def _case_mp_gen(s, q):
    K = random_body(_gen_spec(s))
    out = {}
    worst = math.inf
    for p in GEN_PS:
        ref = mahler.simplex_reference(p)
        m, _ = mahler.santalo_mahler(K, p, q)
        out[str(p)] = m
        worst = min(worst, (m - ref) / ref)
    return worst, out


def _curve_margin(fam, p, q, grid=21):
    curve = sliding.convexity_curve(fam, p, grid, q)
    sd = sliding.second_differences(curve)
    scale = max(abs(v) for _, v in curve)
    return float(sd.min() / scale)


def _case_slide(s, q):
    rng = np.random.default_rng(s)
    Ks = random_body(_sym_spec(case_seed(s, 1)))
    fs = sliding.make_family(Ks, int(rng.integers(len(Ks) // 2)))
    ps = (0.5, 1.0, 2.0, 8.0, math.inf)
    p_sym = ps[int(rng.integers(len(ps)))]
    m_sym = _curve_margin(fs, p_sym, q)
    Kg = random_body(_gen_spec(case_seed(s, 2), (4, 7)))
    fg = sliding.make_family(Kg, int(rng.integers(len(Kg))))
    p_gen = GEN_PS[int(rng.integers(len(GEN_PS)))]
    m_gen = _curve_margin(fg, p_gen, q)
    # symmetric tolerance is 1e-7, general 1e-6: rescale to the latter
    margin = min(10.0 * m_sym, m_gen)
    return margin, {"symmetric": m_sym, "general": m_gen, "p_sym": p_sym, "p_gen": p_gen}


def _case_balance(s, q):
    rng = np.random.default_rng(s)
    K = random_body(_gen_spec(case_seed(s, 1), (4, 7)))
    fam = sliding.center_family(sliding.make_family(K, int(rng.integers(len(K)))))
    w = fam.xi_right - fam.xi_left
    x2, x2p = fam.xi_left + w * rng.uniform(0.02, 0.98, 2)
    p = GEN_PS[int(rng.integers(len(GEN_PS)))]
    qb = q.tightened(1e-10)
    res = sliding.balance(fam, x2, x2p, p, qb)
    A = as_polytope(sliding.body_at(fam, x2)).translate((-res.x0, 0.0))
    B = as_polytope(sliding.body_at(fam, x2p)).translate((res.x0, 0.0))
    if not (contains(A, (0.0, 0.0)) and contains(B, (0.0, 0.0))):
        return -math.inf, {"x0": res.x0, "reason": "origin left a body"}
    ra = sliding.half_ratio(A, p, qb)
    rb = sliding.half_ratio(B, p, qb)
    return -abs(ra - rb), {"x0": res.x0, "ratio_a": ra, "ratio_b": rb, "p": p}


def _case_iso_sym(s, q):
    K = random_body(_sym_spec(s, (3, 10)))
    c = isotropic.cee(K)
    upper = 16 * math.pi ** 2 * 1.01
    return min(c - 144.0, upper - c), {"cee": c, "vertices": len(K)}


def _case_iso_gen(s, q):
    K = random_body(_gen_spec(s, (3, 16)))
    c = isotropic.cee(K)
    upper = 16 * math.pi ** 2 * 1.01
    return min(c - 108.0, upper - c), {"cee": c, "vertices": len(K)}


def _case_consistency(s, q):
    rng = np.random.default_rng(s)
    if rng.random() < 0.5:
        K = random_body(_sym_spec(case_seed(s, 1)))
    else:
        K = random_body(_gen_spec(case_seed(s, 1)))
    p = (0.5, 1.0, 2.0, 8.0)[int(rng.integers(4))]
    ev = build_support(K, p)
    v, _ = _polar_volume(ev, q)
    d = direct_volume_check(ev, q)
    hv = half_plane_volumes(ev, q)
    g1 = abs(v - d) / v
    g2 = abs(hv.i_plus + hv.i_minus - v) / v
    # direct check tolerance 2e-8, split tolerance 1e-8
    return -max(0.5 * g1, g2), {"p": p, "volume": v, "direct": d, "split": hv.i_plus + hv.i_minus}


def _case_gl(s, q):
    rng = np.random.default_rng(s)
    K = random_body(_gen_spec(case_seed(s, 1)) if rng.random() < 0.5 else _sym_spec(case_seed(s, 1)))
    A = random_gl(rng)
    p = (0.5, 1.0, 2.0, 8.0, math.inf)[int(rng.integers(5))]
    AK = AffineMap2(A).apply(K)
    m0 = mahler.mahler_p(K, p, q).m_p
    # raw route on the image: mahler_p normalises internally, which would
    # make the comparison partly circular
    if math.isinf(p):
        m1 = mahler.mahler_p(AK, p, q).m_p
    else:
        m1 = 2.0 * area(AK) * _polar_volume(build_support(AK, p), q)[0]
    shift = rng.normal(size=2)
    c0 = isotropic.cee(K)
    c1 = isotropic.cee(AffineMap2(A, shift).apply(K))
    gm = abs(m1 - m0) / m0
    gc = abs(c1 - c0) / c0
    # M_p tolerance 1e-6, C tolerance 1e-9
    return -max(gm, 1e3 * gc), {"p": p, "mp": m0, "mp_image": m1, "cee_gap": gc}


def _run_hausdorff(cases, seed, q):
    rng = np.random.default_rng(seed)
    disk = 16 * math.pi ** 2
    ks = (12, 24, 48, 96)
    margins = []
    for i in range(max(1, cases)):
        A = random_gl(rng)
        shift = rng.normal(size=2)
        phase = rng.uniform(0, 2 * np.pi)
        gaps = []
        hd = []
        for k in ks:
            P = regular_polygon(k, phase=phase)
            gaps.append(abs(isotropic.cee(AffineMap2(A, shift).apply(P)) - disk))
            hd.append(hausdorff_distance(P, regular_polygon(384, phase=phase)))
        mono = min(gaps[j] - gaps[j + 1] for j in range(len(ks) - 1)) / disk
        last = 0.01 - gaps[-1] / disk
        margins.append((i, min(mono, last), {"gaps": gaps, "hausdorff": hd}))
    return _report("hausdorff_cee", margins, 0.0)


_CASES = {
    "blocki_sym": (_case_blocki_sym, 1e-6, 100),
    "blocki_gen": (_case_blocki_gen, 1e-4, 50),
    "mp_sym_min": (_case_mp_sym, 1e-5, 100),
    "mp_gen_min": (_case_mp_gen, 1e-4, 50),
    "slide_convexity": (_case_slide, 1e-6, 30),
    "balance": (_case_balance, 1e-8, 50),
    "iso_min_sym": (_case_iso_sym, 1e-6, 200),
    "iso_min_gen": (_case_iso_gen, 1e-6, 200),
    "consistency": (_case_consistency, 1e-8, 50),
    "gl_invariance": (_case_gl, 1e-6, 50),
}
SUITES = tuple(_CASES) + ("hausdorff_cee",)
DEFAULT_CASES = {**{k: v[2] for k, v in _CASES.items()}, "hausdorff_cee": 4}


def _run_case(args):
    name, s, q = args
    fn = _CASES[name][0]
    try:
        m, detail = fn(s, q)
    except LpMahlerError as exc:
        m, detail = -math.inf, {"error": f"{type(exc).__name__}: {exc}"}
    return s, float(m), detail


def run_suite(name: str, cases: int | None = None, seed: int = 0,
              q: QuadConfig = DEFAULT_QUAD, workers: int = 1) -> VerifyReport:
    """Run a named experiment; deterministic in (name, cases, seed, q)."""
    if name == "hausdorff_cee":
        return _run_hausdorff(cases or DEFAULT_CASES[name], seed, q)
    if name not in _CASES:
        raise UnknownSuite(f"unknown suite {name!r}; choose from {', '.join(SUITES)}")
    fn, tol, default = _CASES[name]
    n = default if cases is None else int(cases)
    jobs = [(name, case_seed(seed, i), q) for i in range(n)]
    if workers > 1:
        with ProcessPoolExecutor(workers) as pool:
            results = list(pool.map(_run_case, jobs))
    else:
        results = [_run_case(j) for j in jobs]
    return _report(name, results, tol, {"seed": seed})
