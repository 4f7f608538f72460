#!/usr/bin/env python3
"""Timing harness for the numerical kernels and the full stepper.

Two measurements, printed as plain tables:

1. Each low-level kernel (tridiagonal solve, upwind face fluxes, explicit
   update) is timed against every backend importable on this machine, at a
   range of grid sizes.  Both backends are loaded side by side, so this
   comparison runs in a single process.

2. One representative bistable run is timed end to end, once per backend,
   each in a fresh subprocess with DRIFTCLUSTER_KERNELS set.  The backend
   is chosen at import time, so this is the only honest way to measure the
   production code path.

Usage:
    python3 benchmarks/bench_kernels.py
    python3 benchmarks/bench_kernels.py --sizes 200 800 3200 --skip-e2e
"""

from __future__ import annotations

import argparse
import json
import os
import subprocess
import sys
import timeit

import numpy as np

from driftcluster import kernels

E2E_CHILD = """\
import json, time
from driftcluster import Grid, InitialCondition, Params, StepControl, kernels, run

grid = Grid(%(n)d)
ic = InitialCondition("bump", center=0.0, width=0.5, amplitude=0.8, baseline=0.1)
params = Params(delta=0.01, epsilon=0.5, r=1.0, law="bistable", a=0.25)
control = StepControl(t_end=%(t_end)r, dt_max=%(dt_max)r)
start = time.perf_counter()
traj = run(ic, params, control, grid, snapshot_stride=10**9)
elapsed = time.perf_counter() - start
print(json.dumps({"backend": kernels.BACKEND, "seconds": elapsed,
                  "steps": traj.n_steps}))
"""


def _best_seconds(fn, repeat: int = 5) -> float:
    """Best per-call time, with the call count picked by timeit.autorange."""
    timer = timeit.Timer(fn)
    number, _ = timer.autorange()
    return min(timer.repeat(repeat=repeat, number=number)) / number


def _kernel_cases(n: int, rng: np.random.Generator):
    """Build one representative input set per kernel at resolution n."""
    h = 2.0 / n
    k = 0.5 / h**2
    sub = np.full(n - 1, -k)
    sup = np.full(n - 1, -k)
    diag = np.full(n, 1.0 + 2.0 * k)
    diag[0] = diag[-1] = 1.0 + 3.0 * k
    rhs = rng.standard_normal(n)

    u = rng.random(n) + 0.1
    phi_face = 0.5 * rng.standard_normal(n + 1)
    phi_face[0] = phi_face[-1] = 0.0
    flux = kernels.upwind_fluxes(u, phi_face)

    return {
        "thomas": ("thomas", (sub, diag, sup, rhs)),
        "upwind_fluxes": ("upwind_fluxes", (u, phi_face)),
        "explicit_update": ("explicit_update",
                            (u, flux, 1e-4, h, 1.0, True, 0.25)),
    }


def bench_kernels(sizes, seed: int) -> None:
    backends = kernels.available_backends()
    names = sorted(backends)
    rng = np.random.default_rng(seed)

    header = f"{'kernel':<16} {'n':>6}"
    for name in names:
        header += f" {name + ' (us)':>14}"
    if len(names) == 2:
        header += f" {'speedup':>9}"
    print(header)
    print("-" * len(header))

    for n in sizes:
        cases = _kernel_cases(n, rng)
        for label, (attr, args) in cases.items():
            per_call = {}
            for name in names:
                fn = getattr(backends[name], attr)
                per_call[name] = _best_seconds(lambda: fn(*args))
            row = f"{label:<16} {n:>6}"
            for name in names:
                row += f" {per_call[name] * 1e6:>14.2f}"
            if len(names) == 2:
                slow = max(per_call.values())
                fast = min(per_call.values())
                row += f" {slow / fast:>8.1f}x"
            print(row)
        print()


def bench_end_to_end(n: int, t_end: float, dt_max: float) -> None:
    script = E2E_CHILD % {"n": n, "t_end": t_end, "dt_max": dt_max}
    print(f"end-to-end bistable run: n={n}, t_end={t_end}, dt_max={dt_max}")
    results = {}
    for name in sorted(kernels.available_backends()):
        env = dict(os.environ, DRIFTCLUSTER_KERNELS=name)
        proc = subprocess.run([sys.executable, "-c", script], env=env,
                              capture_output=True, text=True)
        if proc.returncode != 0:
            print(f"  {name:<9}: FAILED\n{proc.stderr}", file=sys.stderr)
            continue
        results[name] = json.loads(proc.stdout)

    baseline = max(r["seconds"] for r in results.values()) if results else 0.0
    for name, r in sorted(results.items()):
        note = ""
        if len(results) > 1 and r["seconds"] < baseline:
            note = f"   ({baseline / r['seconds']:.1f}x vs slowest)"
        assert r["backend"] == name, "subprocess picked the wrong backend"
        print(f"  {name:<9}: {r['seconds']:7.2f} s   "
              f"{r['steps']} steps{note}")


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--sizes", type=int, nargs="+",
                        default=[200, 800, 3200],
                        help="grid sizes for the kernel microbenchmarks")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--e2e-n", type=int, default=800)
    parser.add_argument("--e2e-t-end", type=float, default=0.25)
    parser.add_argument("--e2e-dt-max", type=float, default=2.5e-4)
    parser.add_argument("--skip-e2e", action="store_true",
                        help="only run the in-process kernel timings")
    args = parser.parse_args(argv)

    print(f"active backend: {kernels.BACKEND}  "
          f"(available: {', '.join(sorted(kernels.available_backends()))})\n")
    bench_kernels(args.sizes, args.seed)
    if not args.skip_e2e:
        bench_end_to_end(args.e2e_n, args.e2e_t_end, args.e2e_dt_max)
    return 0


if __name__ == "__main__":
    raise SystemExit(main())
