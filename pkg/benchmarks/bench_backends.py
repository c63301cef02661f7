"""Time the numba kernels against the pure-numpy fallback.

Each backend runs in its own interpreter because the choice is fixed at
import time. Usage::

    python benchmarks/bench_backends.py [--repeat 5]
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import time

CASES = ("modp_insert", "pivot", "lp_full_con4", "lp_base_circ6", "dimension_n4")


def _best_of(fn, repeat: int) -> float:
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def run_cases(repeat: int) -> dict[str, float]:
    import numpy as np

    from ttpoly import kernels, polyhedra, tables
    from ttpoly.instances import generate
    from ttpoly.lp import solve_simplex
    from ttpoly.model import build, relax

    rng = np.random.default_rng(0)
    cands = rng.integers(0, 2, size=(3000, 120), dtype=np.int64)

    def modp():
        basis = np.zeros((120, 120), dtype=np.int64)
        pivots = np.zeros(120, dtype=np.int64)
        kernels.modp_insert(basis, pivots, 0, cands, 120)

    T0 = rng.standard_normal((400, 900))
    d0 = rng.standard_normal(900)

    def pivots():
        T, d = T0.copy(), d0.copy()
        for s in range(200):
            kernels.pivot(T, d, s, s + 400)

    con4 = relax(build(generate("con", 4), tables.column_options(5)))
    circ6 = relax(build(generate("circ", 6), tables.BASE))

    def dimension():
        polyhedra.equation_bound.cache_clear()
        polyhedra.dimension_of_polytope.cache_clear()
        polyhedra.dimension_of_polytope(4)

    fns = {
        "modp_insert": modp,
        "pivot": pivots,
        "lp_full_con4": lambda: solve_simplex(con4, "float"),
        "lp_base_circ6": lambda: solve_simplex(circ6, "float"),
        "dimension_n4": dimension,
    }
    out = {}
    for name in CASES:
        fns[name]()  # warm-up: jit compile and caches
        out[name] = _best_of(fns[name], 1 if name == "lp_base_circ6" else repeat)
    out["backend"] = kernels.BACKEND
    return out


def main() -> int:
    ap = argparse.ArgumentParser(description=__doc__, formatter_class=argparse.RawDescriptionHelpFormatter)
    ap.add_argument("--repeat", type=int, default=3)
    ap.add_argument("--worker", choices=("numba", "numpy"), help=argparse.SUPPRESS)
    args = ap.parse_args()
    if args.worker:
        print(json.dumps(run_cases(args.repeat)))
        return 0

    results = {}
    for backend in ("numba", "numpy"):
        env = dict(os.environ, TTPOLY_BACKEND=backend)
        proc = subprocess.run([sys.executable, __file__, "--worker", backend, "--repeat", str(args.repeat)],
                              env=env, capture_output=True, text=True, check=True)
        results[backend] = json.loads(proc.stdout.strip().splitlines()[-1])
        if results[backend]["backend"] != backend:
            print(f"warning: asked for {backend}, got {results[backend]['backend']}", file=sys.stderr)

    print(f"{'case':16s} {'numba [s]':>10s} {'numpy [s]':>10s} {'speedup':>8s}")
    for name in CASES:
        a, b = results["numba"][name], results["numpy"][name]
        print(f"{name:16s} {a:10.4f} {b:10.4f} {b / a:8.2f}x")
    return 0


if __name__ == "__main__":
    sys.exit(main())
