# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled CSR block-product kernel.

Row-major loop over the CSR structure; accumulation order is fixed so that
results are bitwise reproducible and identical to the numpy fallback up to
floating-point reassociation.
"""


def csr_spmm(const long long[::1] indptr,
             const long long[::1] indices,
             const double[::1] data,
             const double[:, ::1] V,
             double[:, ::1] out):
    """out[i, :] = sum_p data[p] * V[indices[p], :] over row i's entries."""
    cdef Py_ssize_t n = indptr.shape[0] - 1
    cdef Py_ssize_t s = V.shape[1]
    cdef Py_ssize_t i, p, c, j
    cdef double a
    for i in range(n):
        for c in range(s):
            out[i, c] = 0.0
        for p in range(indptr[i], indptr[i + 1]):
            a = data[p]
            j = indices[p]
            for c in range(s):
                out[i, c] += a * V[j, c]
