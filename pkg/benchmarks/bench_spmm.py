#!/usr/bin/env python3
"""Benchmark the compiled CSR block-product kernel against the numpy fallback.

The counted sparse block product is the hot operation of every solver in the
package, so this compares the two selectable kernels on the benchmark
operators across the block widths the solvers actually use.

Run:  python3 benchmarks/bench_spmm.py
"""

import time

import numpy as np

from mateq import convdiff_3d, laplacian_2d
from mateq import _spmm_py

try:
    from mateq import _spmm as _spmm_cy
except ImportError:
    _spmm_cy = None


def time_kernel(kernel, A, V, reps):
    out = np.empty((A.n, V.shape[1]))
    kernel(A.indptr, A.indices, A.data, V, out)  # warm up
    t0 = time.perf_counter()
    for _ in range(reps):
        kernel(A.indptr, A.indices, A.data, V, out)
    return (time.perf_counter() - t0) / reps, out


def main():
    rng = np.random.Generator(np.random.PCG64(0))
    problems = [
        ("laplacian2d n=100 (n=10000, nnz=49600)", laplacian_2d(100)),
        ("convdiff3d n=25 (n=15625, nnz=105625)", convdiff_3d(25, 0.01, "wA")),
    ]
    widths = (1, 3, 12, 48)
    reps = 50
    print(f"{'problem':44s} {'s':>3s} {'numpy':>12s} {'cython':>12s} {'speedup':>8s}")
    for label, A in problems:
        for s in widths:
            V = np.ascontiguousarray(rng.standard_normal((A.n, s)))
            t_py, out_py = time_kernel(_spmm_py.csr_spmm, A, V, reps)
            if _spmm_cy is None:
                print(f"{label:44s} {s:3d} {t_py * 1e3:10.3f}ms {'(not built)':>12s}")
                continue
            t_cy, out_cy = time_kernel(_spmm_cy.csr_spmm, A, V, reps)
            assert np.allclose(out_py, out_cy, atol=1e-12)
            print(f"{label:44s} {s:3d} {t_py * 1e3:10.3f}ms {t_cy * 1e3:10.3f}ms "
                  f"{t_py / t_cy:7.1f}x")


if __name__ == "__main__":
    main()
