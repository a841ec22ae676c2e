"""Compare the compiled and pure-NumPy stepping kernels.

Run with ``python3 benchmarks/bench_kernels.py [--n 256] [--steps 50]``.
"""

import argparse
import time

import numpy as np

from diracwalk import kernels
from diracwalk.lattice import LatticeSpec, SpinorField
from diracwalk.walks import FAMILY_OF, WalkKind, build_walk, step


def time_backend(kind, n, steps, backend, repeats=3):
    lattice = LatticeSpec(FAMILY_OF[kind], n, n)
    rng = np.random.default_rng(0)
    psi = SpinorField(lattice, rng.normal(size=(2, n, n)) + 1j * rng.normal(size=(2, n, n)))
    walk = build_walk(kind, mass=0.3)
    step(walk, psi, backend=backend)  # warm caches
    best = np.inf
    for _ in range(repeats):
        f = psi
        t0 = time.perf_counter()
        for _ in range(steps):
            f = step(walk, f, backend=backend)
        best = min(best, time.perf_counter() - t0)
    return best, f


def main():
    p = argparse.ArgumentParser(description=__doc__)
    p.add_argument("--n", type=int, default=256)
    p.add_argument("--steps", type=int, default=50)
    args = p.parse_args()
    backends = ["python"] + (["cython"] if kernels.HAVE_CYTHON else [])
    if len(backends) == 1:
        print("compiled kernels not built; timing the NumPy fallback only")
    print(f"{'walk':26s} " + " ".join(f"{b:>12s}" for b in backends) + "   speedup  max|diff|")
    for kind in WalkKind:
        times, fields = [], []
        for b in backends:
            t, f = time_backend(kind, args.n, args.steps, b)
            times.append(t)
            fields.append(f)
        row = f"{kind.value:26s} " + " ".join(f"{t * 1e3 / args.steps:10.2f}ms" for t in times)
        if len(times) == 2:
            diff = np.max(np.abs(fields[0].psi - fields[1].psi))
            row += f"   {times[0] / times[1]:6.2f}x  {diff:.1e}"
        print(row)


if __name__ == "__main__":
    main()
