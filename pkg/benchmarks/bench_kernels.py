"""Time the compiled kernels against the numpy fallback.

    python3 benchmarks/bench_kernels.py [--repeat 5]

Prints one line per kernel with the best-of-``repeat`` wall time for each
backend and the speed-up, then the end-to-end cost of one empowerment
estimate with each backend (the latter runs in a subprocess so the backend
switch takes effect at import).
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from cstep import _pykernels as py

try:
    from cstep import _ckernels as cc
except ImportError:
    cc = None

BOXES = np.array([[1.4, 0.0, 2.6, 1.0], [1.4, 1.5, 2.6, 2.0]])
BOUNDS = np.array([0.0, 0.0, 4.5, 3.2])

E2E = """
import time, numpy as np
from cstep import kernels, estimate_empowerment, SystemSpec, SystemState, EmpowermentParams, point_maze
spec, w, p = SystemSpec(), point_maze(), EmpowermentParams()
x = SystemState.from_vector([1.0, 1.25, 1.0, 0.0])
estimate_empowerment(spec, w, x, p, np.random.default_rng(0))
t = time.perf_counter()
for i in range({n}):
    estimate_empowerment(spec, w, x, p, np.random.default_rng(i))
print(kernels.BACKEND, (time.perf_counter() - t) / {n})
"""


def cases(rng):
    ctrl = rng.uniform(-2, 2, (150, 1, 2))
    roll = (np.array([1.0, 1.25, 1.0, 0.0]), ctrl, 1.0, 0.01, 100, 1, 1.0, 0.3, 2.0, BOXES, BOUNDS, 0.1)
    ang = 2 * np.pi * np.arange(180) / 180
    pts = rng.normal(size=(150, 2))
    pts = pts[np.lexsort((pts[:, 1], pts[:, 0]))]
    clip = np.array([[-3.0, -3.0], [3.0, -3.0], [3.0, 3.0], [-3.0, 3.0]])
    hulls = np.array([[-1.0, -1.0], [0.5, -1.0], [0.5, 0.5], [-1.0, 0.5], [0.0, 0.0], [2.0, 0.0], [2.0, 2.0]])
    offs = np.array([0, 4, 7], dtype=np.intp)
    return {
        "rollout_batch (150 x 100 steps)": ("rollout_batch", roll),
        "integrate_states (5 substeps)": ("integrate_states",
                                          (roll[0], ctrl[0], 0.05, 0.01, 5, 1, 1.0, 0.3, 2.0)),
        "lidar_scan (180 beams)": ("lidar_scan", (1.0, 1.25, np.cos(ang), np.sin(ang), BOXES, BOUNDS, 5.0)),
        "hull_sorted (150 pts)": ("hull_sorted", (pts,)),
        "dbscan (150 pts)": ("dbscan", (pts, 0.3, 3)),
        "mc_union_count (20000 samples)": ("mc_union_count",
                                           (1, 20000, np.full(2, -3.0), np.full(2, 3.0), clip, hulls, offs)),
    }


def best(fn, args, repeat):
    n, _ = timeit.Timer(lambda: fn(*args)).autorange()
    return min(timeit.repeat(lambda: fn(*args), number=n, repeat=repeat)) / n


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--repeat", type=int, default=5)
    ap.add_argument("--e2e-calls", type=int, default=20)
    args = ap.parse_args(argv)
    if cc is None:
        print("compiled extension not built; only the fallback is timed")
    print(f"{'kernel':34s} {'python':>12s} {'compiled':>12s} {'speed-up':>9s}")
    for name, (fn, a) in cases(np.random.default_rng(0)).items():
        tp = best(getattr(py, fn), a, args.repeat)
        if cc is None:
            print(f"{name:34s} {tp * 1e6:10.1f}us")
            continue
        tc = best(getattr(cc, fn), a, args.repeat)
        print(f"{name:34s} {tp * 1e6:10.1f}us {tc * 1e6:10.1f}us {tp / tc:8.1f}x")
    print("\nend-to-end estimate (150 trajectories, 100 steps):")
    for pure in ("1", "0"):
        env = dict(os.environ, CSTEP_PURE_PYTHON=pure)
        out = subprocess.run([sys.executable, "-c", E2E.format(n=args.e2e_calls)], env=env,
                             capture_output=True, text=True, check=True).stdout.split()
        print(f"  {out[0]:9s} {float(out[1]) * 1e3:8.2f} ms/call")


if __name__ == "__main__":
    main()
