"""Compare the compiled and numpy kernels on identical inputs.

Run with ``python3 benchmarks/bench_kernels.py``.  Reports throughput in
triangle evaluations per second, the maximum disagreement between the two
backends, and the end-to-end time of a polar-volume computation.
"""
import argparse
import time

import numpy as np

from lpmahler import kernels
from lpmahler.geometry import regular_polygon
from lpmahler.lp_polar import polar_volume
from lpmahler.lp_support import build_support


def _time(fn, repeat):
    best = float("inf")
    for _ in range(repeat):
        t = time.perf_counter()
        out = fn()
        best = min(best, time.perf_counter() - t)
    return best, out


def bench_kernel(n_points, n_vertices, p, repeat):
    ev = build_support(regular_polygon(n_vertices), p)
    rng = np.random.default_rng(0)
    pts = rng.normal(scale=5.0, size=(n_points, 2))
    rows = {}
    for name in kernels.available_backends():
        with kernels.use_backend(name):
            dt, val = _time(lambda: kernels.log_avg_exp(pts, ev._tri, ev._logw, p), repeat)
        rows[name] = (dt, val)
    n_eval = n_points * len(ev._tri)
    for name, (dt, _) in rows.items():
        print(f"  {name:9s} {dt * 1e3:9.2f} ms  {n_eval / dt / 1e6:8.2f} M triangle-evals/s")
    if len(rows) == 2:
        diff = np.max(np.abs(rows["compiled"][1] - rows["python"][1]))
        print(f"  speed-up {rows['python'][0] / rows['compiled'][0]:.1f}x, max |diff| {diff:.2e}")


def bench_volume(n_vertices, p, repeat):
    for name in kernels.available_backends():
        with kernels.use_backend(name):
            ev = build_support(regular_polygon(n_vertices), p)
            dt, v = _time(lambda: polar_volume(ev), repeat)
        print(f"  {name:9s} polar_volume = {v:.12f}  {dt * 1e3:8.1f} ms")


def main():
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--points", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=3)
    args = ap.parse_args()
    print(f"backends: {kernels.available_backends()} (default {kernels.backend()})")
    for m, p in ((4, 1.0), (12, 2.0), (32, 8.0)):
        print(f"log_avg_exp: {args.points} points, {m}-gon, p={p}")
        bench_kernel(args.points, m, p, args.repeat)
    for m, p in ((6, 1.0), (16, 2.0)):
        print(f"polar volume: {m}-gon, p={p}")
        bench_volume(m, p, args.repeat)


if __name__ == "__main__":
    main()
