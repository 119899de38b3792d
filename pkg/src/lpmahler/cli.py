"""Command-line front end.

Exit codes: 0 success, 1 usage error, 2 numerical failure (including a
verification suite that reports violations).  Results go to ``--out`` or,
failing that, to ``$LPMAHLER_OUTDIR/<command>.<ext>`` when the variable is
set, and otherwise to standard output.  Diagnostics go to standard error.
"""
from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from dataclasses import dataclass, field

import numpy as np

from . import __version__, harness, isotropic, mahler, sliding
from .errors import LpMahlerError, UsageError
from .geometry import area, as_polytope, barycenter, body_to_json, load_body
from .lp_polar import DEFAULT_QUAD, _polar_volume, polar_boundary_sample
from .lp_support import build_support
from .quadrature import QuadConfig

EXIT_OK = 0
EXIT_USAGE = 1
EXIT_NUMERIC = 2

COMMANDS = ("mp", "polar-volume", "polar-boundary", "santalo", "bergman", "slide",
            "reduce", "isotropic", "cee", "verify", "sweep")
EXTRA_CHECKS = ("bbl", "ball")

# one-line description and the result each command illustrates
_HELP = {
    "mp": ("L^p-Mahler volume 2|K||K^{o,p}| about the origin.",
           "Related result: M_p([-1,1]^2) <= M_p(K) for symmetric K; M_inf(square) = 16."),
    "polar-volume": ("Area of the L^p-polar body K^{o,p}.",
                     "Related identity: |K^{o,p}| = (1/2) * integral of exp(-h_{p,K}) over the plane."),
    "polar-boundary": ("Boundary points of K^{o,p} as CSV (theta,x,y).",
                       "K^{o,p} is the unit ball of the near norm built from exp(-h_{p,K})."),
    "santalo": ("L^p-Santalo point: the translate minimising M_p(K - x).",
                "Related result: inf_x M_p(simplex - x) <= inf_x M_p(K - x)."),
    "bergman": ("Bergman kernel diagonal of the tube domain R^2 + iK.",
                "Related result: |K|^2 B(0,0) >= pi^2/16 for symmetric K, equality for the square."),
    "slide": ("1/|P(x2)^{o,p}| along a Mahler sliding family, CSV (x2,value).",
              "Related result: this curve is convex (Santalo-translated for non-symmetric P)."),
    "reduce": ("Repeated Mahler sliding down to a triangle or parallelogram.",
               "Related result: M_p does not increase along the chain."),
    "isotropic": ("Affine map putting K in isotropic position.",
                  "Related result: C(TK) = C(K) for every affine bijection T."),
    "cee": ("Affine invariant C(K) = |K|^2 / det Cov(K).",
            "Related result: 108 <= C(K) <= 16 pi^2, and C(K) >= 144 for symmetric K."),
    "verify": ("Run one verification suite and report its worst violation.",
               "Suites: " + ", ".join(harness.SUITES + EXTRA_CHECKS) + "."),
    "sweep": ("Run several suites (default: all) with cases spread over worker processes.",
              "Suites: " + ", ".join(harness.SUITES) + "."),
}


@dataclass
class CliCommand:
    name: str
    args: dict = field(default_factory=dict)


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(f"{self.prog}: {message}")


def parse_p(text: str) -> float:
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        p = float(t)
    except ValueError:
        raise UsageError(f"p must be a positive number or 'inf', got {text!r}") from None
    if not (p > 0) or math.isinf(p):
        raise UsageError(f"p must be > 0 or 'inf', got {text!r}")
    return p


def _parse_point(text: str):
    try:
        x, y = (float(s) for s in text.split(","))
    except ValueError:
        raise UsageError(f"--point expects X,Y, got {text!r}") from None
    return (x, y)


def _positive_int(text: str) -> int:
    try:
        n = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}") from None
    if n < 1:
        raise argparse.ArgumentTypeError("must be at least 1")
    return n


def _p_type(text: str) -> float:
    try:
        return parse_p(text)
    except UsageError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None


def _build_parser() -> _Parser:
    parser = _Parser(prog="lpmahler", description="L^p-Mahler volumes and isotropic constants "
                     "of planar polygons.", allow_abbrev=False,
                     epilog="Exit codes: 0 success, 1 usage error, 2 numerical failure.")
    parser.add_argument("--version", action="version", version=f"lpmahler {__version__}")
    sub = parser.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True

    def add(name, body=True, p=False, tol=False):
        desc, ref = _HELP[name]
        sp = sub.add_parser(name, help=desc, description=f"{desc} {ref}", allow_abbrev=False)
        if body:
            sp.add_argument("--body", required=True, metavar="PATH", help="body JSON file")
        if p:
            sp.add_argument("--p", required=True, type=_p_type, metavar="VALUE",
                            help="exponent p > 0 or 'inf'")
        if tol:
            sp.add_argument("--rel-tol", type=float, default=DEFAULT_QUAD.rel_tol, metavar="X")
            sp.add_argument("--abs-tol", type=float, default=DEFAULT_QUAD.abs_tol, metavar="X")
        sp.add_argument("--out", metavar="PATH", help="output file (default: stdout)")
        return sp

    add("mp", p=True, tol=True)
    add("polar-volume", p=True, tol=True)
    sp = add("polar-boundary", p=True, tol=True)
    sp.add_argument("--grid", type=_positive_int, default=64, metavar="N", help="number of samples")
    add("santalo", p=True, tol=True)
    sp = add("bergman", tol=True)
    sp.add_argument("--point", type=_parse_point, default=None, metavar="X,Y",
                    help="imaginary part of z (default: the origin)")
    sp = add("slide", p=True, tol=True)
    sp.add_argument("--vertex", type=int, default=0, metavar="K", help="index of the sliding vertex")
    sp.add_argument("--grid", type=_positive_int, default=21, metavar="N", help="grid points")
    add("reduce", p=True, tol=True)
    add("isotropic")
    add("cee")
    for name in ("verify", "sweep"):
        sp = add(name, body=False, tol=True)
        sp.add_argument("--suite", required=(name == "verify"), metavar="NAME",
                        help="suite name" + (" (comma separated list)" if name == "sweep" else ""))
        sp.add_argument("--cases", type=_positive_int, default=None, metavar="N")
        sp.add_argument("--seed", type=int, default=0, metavar="N")
    sweep = sub.choices["sweep"]
    sweep.add_argument("--workers", type=_positive_int, default=os.cpu_count() or 1, metavar="N")
    return parser


def parse_args(argv) -> CliCommand:
    """Strict parsing; raises UsageError on anything malformed."""
    ns = _build_parser().parse_args(list(argv))
    args = vars(ns)
    name = args.pop("command")
    if "rel_tol" in args:
        try:
            QuadConfig(rel_tol=args["rel_tol"], abs_tol=args["abs_tol"])
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    if name == "verify" and args["suite"] not in harness.SUITES + EXTRA_CHECKS:
        raise UsageError(f"unknown suite {args['suite']!r}")
    if name == "sweep" and args["suite"]:
        bad = [s for s in args["suite"].split(",") if s not in harness.SUITES]
        if bad:
            raise UsageError(f"unknown suite(s): {', '.join(bad)}")
    return CliCommand(name, args)


# ------------------------------------------------------------------ output

def _destination(cmd: CliCommand, ext: str):
    out = cmd.args.get("out")
    if out:
        return out
    d = os.environ.get("LPMAHLER_OUTDIR")
    if d:
        os.makedirs(d, exist_ok=True)
        return os.path.join(d, f"{cmd.name}.{ext}")
    return None


def _emit(cmd: CliCommand, text: str, ext: str) -> None:
    path = _destination(cmd, ext)
    if path is None:
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _json_text(obj) -> str:
    return json.dumps(obj, indent=2, default=_json_default) + "\n"


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.ndarray):
        return o.tolist()
    raise TypeError(f"not serialisable: {type(o).__name__}")


def _csv_text(header, rows) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(header)
    for r in rows:
        w.writerow([repr(float(v)) for v in r])
    return buf.getvalue()


def _p_json(p: float):
    return "inf" if math.isinf(p) else p


# ---------------------------------------------------------------- commands

def _quad(a) -> QuadConfig:
    return QuadConfig(rel_tol=a["rel_tol"], abs_tol=a["abs_tol"])


def _body(a):
    try:
        return load_body(a["body"])
    except OSError as exc:
        raise UsageError(f"cannot read body file: {exc}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"body file is not valid JSON: {exc}") from None


def _cmd_mp(cmd, a):
    r = mahler.mahler_p(_body(a), a["p"], _quad(a))
    _emit(cmd, _json_text({"p": _p_json(r.p), "m_p": r.m_p, "volume_k": r.volume_k,
                           "volume_polar": r.volume_polar, "error_estimate": r.error_estimate}), "json")


def _cmd_polar_volume(cmd, a):
    K = _body(a)
    p = a["p"]
    if math.isinf(p):
        r = mahler.mahler_p(K, p)
        v, err = r.volume_polar, 0.0
    else:
        v, err = _polar_volume(build_support(K, p), _quad(a))
    _emit(cmd, _json_text({"p": _p_json(p), "polar_volume": v, "error_estimate": err}), "json")


def _cmd_polar_boundary(cmd, a):
    K = _body(a)
    n = a["grid"]
    if n < 3:
        raise UsageError("--grid must be at least 3")
    if math.isinf(a["p"]):
        from .geometry import classical_polar
        pts = _polygon_boundary(classical_polar(K), n)
    else:
        pts = polar_boundary_sample(build_support(K, a["p"]), _quad(a), n)
    theta = 2 * np.pi * np.arange(n) / n
    _emit(cmd, _csv_text(["theta", "x", "y"], [(t, x, y) for t, (x, y) in zip(theta, pts)]), "csv")


def _polygon_boundary(P, n):
    # radial function of a polygon containing the origin
    v = as_polytope(P).array
    nxt = np.roll(v, -1, axis=0)
    normals = np.column_stack([nxt[:, 1] - v[:, 1], v[:, 0] - nxt[:, 0]])
    offsets = np.einsum("ij,ij->i", normals, v)
    theta = 2 * np.pi * np.arange(n) / n
    U = np.column_stack([np.cos(theta), np.sin(theta)])
    r = 1.0 / np.max((U @ normals.T) / offsets, axis=1)
    return U * r[:, None]


def _cmd_santalo(cmd, a):
    K = _body(a)
    p = a["p"]
    sol = mahler.santalo_point(K, p, _quad(a))
    _emit(cmd, _json_text({"p": p, "point": list(sol.point), "gradient_norm": sol.gradient_norm,
                           "iterations": sol.iterations, "polar_volume": sol.polar_volume,
                           "m_p": 2.0 * area(K) * sol.polar_volume}), "json")


def _cmd_bergman(cmd, a):
    K = _body(a)
    z = a["point"] if a["point"] is not None else (0.0, 0.0)
    b = mahler.bergman_diagonal(K, z, _quad(a))
    A = area(K)
    _emit(cmd, _json_text({"im_z": list(z), "bergman": b, "scaled": A * A * b,
                           "symmetric_bound": mahler.BLOCKI_SYM}), "json")


def _cmd_slide(cmd, a):
    K = _body(a)
    n = len(as_polytope(K))
    if not 0 <= a["vertex"] < n:
        raise UsageError(f"--vertex must lie in [0, {n - 1}]")
    if a["grid"] < 5:
        raise UsageError("--grid must be at least 5")
    fam = sliding.make_family(K, a["vertex"])
    curve = sliding.convexity_curve(fam, a["p"], a["grid"], _quad(a))
    _emit(cmd, _csv_text(["x2", "value"], curve), "csv")


def _cmd_reduce(cmd, a):
    K = _body(a)
    reports: list = []
    chain = sliding.reduce_chain(K, a["p"], _quad(a), reports)
    out = {
        "p": _p_json(a["p"]),
        "chain": [{"body": body_to_json(b), "m_p": m} for b, m in chain],
        "steps": reports,
    }
    _emit(cmd, _json_text(out), "json")


def _cmd_isotropic(cmd, a):
    K = _body(a)
    T = isotropic.isotropic_transform(K)
    image = T.apply(K)
    _emit(cmd, _json_text({"linear": T.linear.tolist(), "shift": list(T.shift),
                           "image": body_to_json(image), "area": area(image),
                           "barycenter": list(barycenter(image)),
                           "covariance": isotropic.covariance(image).matrix.tolist()}), "json")


def _cmd_cee(cmd, a):
    K = _body(a)
    _emit(cmd, _json_text({"cee": isotropic.cee(K), "area": area(K),
                           "covariance": isotropic.covariance(K).matrix.tolist()}), "json")


def _run_named(name, cases, seed, q, workers=1):
    if name == "bbl":
        return harness.check_bbl(cases or 200, seed)
    if name == "ball":
        spec = harness.RandomSpec(seed, 3, True)
        fam = sliding.make_family(harness.random_body(spec), 0)
        return harness.check_ball_hypothesis(fam, 1.0, cases or 500, q, seed)
    return harness.run_suite(name, cases, seed, q, workers)


def _report_out(cmd, reports) -> bool:
    ok = all(r.passed for r in reports)
    payload = [json.loads(r.to_json()) for r in reports]
    text = _json_text(payload[0] if cmd.name == "verify" else payload)
    path = _destination(cmd, "json")
    if path is None:
        sys.stdout.write(text)
        for r in reports:
            sys.stderr.write(r.summary() + "\n")
    else:
        with open(path, "w") as fh:
            fh.write(text)
        for r in reports:
            sys.stdout.write(r.summary() + "\n")
    return ok


def _cmd_verify(cmd, a):
    rep = _run_named(a["suite"], a["cases"], a["seed"], _quad(a))
    return _report_out(cmd, [rep])


def _cmd_sweep(cmd, a):
    names = a["suite"].split(",") if a["suite"] else list(harness.SUITES)
    reps = [harness.run_suite(n, a["cases"], a["seed"], _quad(a), a["workers"]) for n in names]
    return _report_out(cmd, reps)


_DISPATCH = {
    "mp": _cmd_mp, "polar-volume": _cmd_polar_volume, "polar-boundary": _cmd_polar_boundary,
    "santalo": _cmd_santalo, "bergman": _cmd_bergman, "slide": _cmd_slide,
    "reduce": _cmd_reduce, "isotropic": _cmd_isotropic, "cee": _cmd_cee,
    "verify": _cmd_verify, "sweep": _cmd_sweep,
}


def run(cmd: CliCommand) -> int:
    try:
        ok = _DISPATCH[cmd.name](cmd, cmd.args)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    except LpMahlerError as exc:
        sys.stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    except (ValueError, FloatingPointError, ArithmeticError) as exc:
        sys.stderr.write(f"numerical failure: {type(exc).__name__}: {exc}\n")
        return EXIT_NUMERIC
    if ok is False:
        return EXIT_NUMERIC
    return EXIT_OK


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    try:
        cmd = parse_args(argv)
    except UsageError as exc:
        sys.stderr.write(f"usage error: {exc}\n")
        return EXIT_USAGE
    return run(cmd)


if __name__ == "__main__":
    sys.exit(main())
