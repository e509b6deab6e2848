"""Compare the numba and numpy kernel backends.

Usage::

    python benchmarks/bench_backends.py [--n 20] [--repeat 5]

Times sparse mat-vec, mat-mat, the Galerkin product and a full hierarchy
setup on the random-cube problem, once per backend. The first numba call
is made before timing so compilation is excluded.
"""
import argparse
import time

import numpy as np

from saamg import backend_context
from saamg.hierarchy import SetupConfig, setup
from saamg.problems import assemble, mesh_random_cube
from saamg.prolongator import SmootherConfig
from saamg.sparse import galerkin, spmm, spmv, transpose


def best_of(fn, repeat):
    fn()  # warm-up (and JIT compilation)
    times = []
    for _ in range(repeat):
        t = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--n", type=int, default=20, help="elements per direction")
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)

    A, _, X = assemble(mesh_random_cube(args.n, 0))
    x = np.ones(A.ncols)
    cfg = SetupConfig(theta=0.025, strength_source="distance_laplacian",
                      prolongator=SmootherConfig.from_variants(("OneNorm",)))
    h = setup(A, X, cfg)
    P = h.levels[0].P
    R = transpose(P)

    cases = {
        "spmv": lambda: spmv(A, x),
        "spmm (A P)": lambda: spmm(A, P),
        "spmm (R A)": lambda: spmm(R, A),
        "galerkin": lambda: galerkin(P, A),
        "setup": lambda: setup(A, X, cfg),
    }
    print(f"random cube n={args.n}: {A.nrows} unknowns, {A.nnz} nonzeros")
    print(f"{'kernel':<12}{'numba [s]':>12}{'numpy [s]':>12}{'speedup':>10}")
    for name, fn in cases.items():
        t = {}
        for be in ("numba", "numpy"):
            with backend_context(be):
                t[be] = best_of(fn, args.repeat)
        print(f"{name:<12}{t['numba']:>12.4f}{t['numpy']:>12.4f}{t['numpy'] / t['numba']:>10.1f}")


if __name__ == "__main__":
    main()
