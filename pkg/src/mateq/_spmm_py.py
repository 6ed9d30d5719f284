"""Pure-numpy fallback for the CSR block-product kernel.

Uses ``np.add.reduceat`` over the expanded entry/column products, which keeps
the whole product vectorized (no per-row Python loop).  Selected automatically
when the compiled extension is unavailable; also used directly by the kernel
benchmark.
"""

import numpy as np


def csr_spmm(indptr, indices, data, V, out):
    """out[i, :] = sum over row i's entries of data[p] * V[indices[p], :]."""
    nnz = data.shape[0]
    out[:] = 0.0
    if nnz == 0:
        return
    prod = data[:, None] * V.take(indices, axis=0)
    # reduceat over starts of nonempty rows only: consecutive boundaries then
    # delimit exactly one row's entries, and all indices stay < nnz
    nonempty = np.flatnonzero(indptr[:-1] < indptr[1:])
    segs = np.add.reduceat(prod, indptr[:-1][nonempty], axis=0)
    out[nonempty] = segs
