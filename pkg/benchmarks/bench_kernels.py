"""Timing comparison of the compiled and pure NumPy force kernels.

Run:  python3 benchmarks/bench_kernels.py [--repeat N]

Builds box meshes of increasing size and times one full force +
element-stiffness evaluation per backend at a randomly perturbed state.
"""

from __future__ import annotations

import argparse
import time

import numpy as np

from tactwin.fem import kernels
from tactwin.scene import kuhn_box


def make_mesh(divisions):
    coords, tets, _ = kuhn_box(divisions, lambda *c: True)
    verts = coords.astype(float) * 5.0
    return verts, tets


def time_backend(fn, q, tets, bm, ke, rest, repeat):
    fn(q, tets, bm, ke, rest, True)  # warm up
    t0 = time.perf_counter()
    for _ in range(repeat):
        fn(q, tets, bm, ke, rest, True)
    return (time.perf_counter() - t0) / repeat


def main():
    parser = argparse.ArgumentParser()
    parser.add_argument("--repeat", type=int, default=10)
    args = parser.parse_args()

    impls = [("numpy", kernels.reference_forces_and_blocks)]
    if kernels.backend_name == "cython":
        impls.insert(0, ("cython", kernels.forces_and_blocks))
    else:
        print("compiled kernel unavailable, timing NumPy only")

    rng = np.random.default_rng(11)
    print(f"{'elements':>9} " + " ".join(f"{n:>12}" for n, _ in impls)
          + ("      speedup" if len(impls) == 2 else ""))
    for div in ((4, 4, 4), (8, 8, 8), (12, 12, 12), (16, 16, 16)):
        rest, tets = make_mesh(div)
        bm, ke, _ = kernels.precompute(rest, tets, 0.12, 0.45)
        q = rest + 0.5 * rng.standard_normal(rest.shape)
        row = [time_backend(fn, q, tets, bm, ke, rest, args.repeat)
               for _, fn in impls]
        cells = " ".join(f"{1e3 * dt:9.2f} ms" for dt in row)
        tail = f"   {row[1] / row[0]:8.1f}x" if len(row) == 2 else ""
        print(f"{len(tets):>9} {cells}{tail}")


if __name__ == "__main__":
    main()
