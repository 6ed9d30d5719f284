"""Sparse coefficient operators with counted block application.

``SparseOperator`` is an immutable square CSR matrix.  All solver-facing
products go through :func:`spmm`, which charges an :class:`OpCounter` session
object: one *A-call* per block application and one *matvec* per applied
column.  Counters live outside the operator so a shared operator can serve
concurrent solve sessions.

The inner product kernel is compiled (Cython) when available and falls back
to a vectorized numpy implementation; set ``MATEQ_PURE_PYTHON=1`` to force
the fallback.
"""

import os
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatchError

if os.environ.get("MATEQ_PURE_PYTHON"):
    from ._spmm_py import csr_spmm as _csr_spmm

    KERNEL_BACKEND = "numpy"
else:
    try:
        from ._spmm import csr_spmm as _csr_spmm

        KERNEL_BACKEND = "cython"
    except ImportError:  # pragma: no cover - exercised via MATEQ_PURE_PYTHON
        from ._spmm_py import csr_spmm as _csr_spmm

        KERNEL_BACKEND = "numpy"

__all__ = ["SparseOperator", "OpCounter", "spmm", "estimate_norm2", "KERNEL_BACKEND"]


@dataclass
class OpCounter:
    """Per-operator application counts for one solve session."""

    a_calls: int = 0
    matvecs: int = 0

    def record(self, width):
        self.a_calls += 1
        self.matvecs += int(width)

    def as_dict(self):
        return {"a_calls": self.a_calls, "matvecs": self.matvecs}


class SparseOperator:
    """Immutable square sparse matrix in canonical CSR layout.

    Attributes
    ----------
    n : int
        Dimension.
    indptr, indices, data : ndarray
        CSR arrays; column indices strictly increasing within each row.
    symmetric : bool
        Structural symmetry flag, verified exactly at construction.
    """

    __slots__ = ("n", "indptr", "indices", "data", "symmetric")

    def __init__(self, n, indptr, indices, data, symmetric=False):
        n = int(n)
        indptr = np.ascontiguousarray(indptr, dtype=np.int64)
        indices = np.ascontiguousarray(indices, dtype=np.int64)
        data = np.ascontiguousarray(data, dtype=np.float64)
        if indptr.shape != (n + 1,) or indptr[0] != 0 or indptr[-1] != data.shape[0]:
            raise ValueError("malformed CSR row pointers")
        if np.any(np.diff(indptr) < 0):
            raise ValueError("CSR row pointers must be nondecreasing")
        if indices.shape != data.shape:
            raise ValueError("CSR indices/data length mismatch")
        if data.size and not np.isfinite(data).all():
            raise ValueError("operator entries must be finite")
        for i in range(n):
            row = indices[indptr[i]:indptr[i + 1]]
            if row.size and (row[0] < 0 or row[-1] >= n or np.any(np.diff(row) <= 0)):
                raise ValueError(f"row {i}: column indices must be strictly increasing in [0, n)")
        object.__setattr__(self, "n", n)
        object.__setattr__(self, "indptr", indptr)
        object.__setattr__(self, "indices", indices)
        object.__setattr__(self, "data", data)
        if symmetric:
            t = self._transpose_arrays()
            same = (
                np.array_equal(t[0], indptr)
                and np.array_equal(t[1], indices)
                and np.array_equal(t[2], data)
            )
            if not same:
                raise ValueError("symmetric flag set but operator is not exactly symmetric")
        object.__setattr__(self, "symmetric", bool(symmetric))

    def __setattr__(self, name, value):
        raise AttributeError("SparseOperator is immutable")

    @property
    def nnz(self):
        return int(self.data.shape[0])

    @classmethod
    def from_coo(cls, n, rows, cols, values, symmetric=False):
        """Build from triplets; duplicates are summed, zeros kept as stored."""
        rows = np.asarray(rows, dtype=np.int64)
        cols = np.asarray(cols, dtype=np.int64)
        values = np.asarray(values, dtype=np.float64)
        if rows.shape != cols.shape or rows.shape != values.shape:
            raise ValueError("COO triplet arrays must have equal length")
        if rows.size and (rows.min() < 0 or rows.max() >= n or cols.min() < 0 or cols.max() >= n):
            raise ValueError("COO indices out of range")
        order = np.lexsort((cols, rows))
        rows, cols, values = rows[order], cols[order], values[order]
        if rows.size:
            keep = np.ones(rows.size, dtype=bool)
            dup = (rows[1:] == rows[:-1]) & (cols[1:] == cols[:-1])
            if dup.any():
                # sum duplicate entries into the first occurrence of each run
                vals = values.copy()
                for i in np.nonzero(dup)[0]:
                    vals[i + 1] += vals[i]
                    keep[i] = False
                values = vals
            rows, cols, values = rows[keep], cols[keep], values[keep]
        indptr = np.zeros(n + 1, dtype=np.int64)
        np.add.at(indptr, rows + 1, 1)
        np.cumsum(indptr, out=indptr)
        return cls(n, indptr, cols, values, symmetric=symmetric)

    @classmethod
    def from_dense(cls, M, symmetric=False, tol=0.0):
        M = np.asarray(M, dtype=np.float64)
        if M.ndim != 2 or M.shape[0] != M.shape[1]:
            raise DimensionMismatchError(f"operator must be square, got {M.shape}")
        rows, cols = np.nonzero(np.abs(M) > tol)
        return cls.from_coo(M.shape[0], rows, cols, M[rows, cols], symmetric=symmetric)

    @classmethod
    def identity(cls, n, scale=1.0):
        idx = np.arange(n, dtype=np.int64)
        indptr = np.arange(n + 1, dtype=np.int64)
        return cls(n, indptr, idx, np.full(n, float(scale)), symmetric=True)

    def _transpose_arrays(self):
        order = np.argsort(self.indices, kind="stable")
        row_of = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.indptr))
        t_indices = row_of[order]
        t_data = self.data[order]
        t_indptr = np.zeros(self.n + 1, dtype=np.int64)
        np.add.at(t_indptr, self.indices + 1, 1)
        np.cumsum(t_indptr, out=t_indptr)
        return t_indptr, t_indices, t_data

    def transpose(self):
        if self.symmetric:
            return self
        t_indptr, t_indices, t_data = self._transpose_arrays()
        return SparseOperator(self.n, t_indptr, t_indices, t_data, symmetric=False)

    def apply(self, V):
        """Uncounted block application A @ V (diagnostics and norm estimation)."""
        V = np.asarray(V, dtype=np.float64)
        single = V.ndim == 1
        if single:
            V = V[:, None]
        if V.shape[0] != self.n:
            raise DimensionMismatchError(f"operator is {self.n}x{self.n}, block has {V.shape[0]} rows")
        out = np.empty((self.n, V.shape[1]), dtype=np.float64)
        _csr_spmm(self.indptr, self.indices, self.data, np.ascontiguousarray(V), out)
        return out[:, 0] if single else out

    def to_dense(self):
        M = np.zeros((self.n, self.n))
        for i in range(self.n):
            sl = slice(self.indptr[i], self.indptr[i + 1])
            M[i, self.indices[sl]] = self.data[sl]
        return M

    def __repr__(self):
        return f"SparseOperator(n={self.n}, nnz={self.nnz}, symmetric={self.symmetric})"


def spmm(A, V, counter):
    """Counted sparse block product A @ V.

    Charges one A-call and ``V.shape[1]`` matvecs to ``counter``.
    """
    V = np.asarray(V, dtype=np.float64)
    if V.ndim != 2 or V.shape[1] < 1:
        raise DimensionMismatchError(f"block must be n x s with s >= 1, got shape {V.shape}")
    if V.shape[0] != A.n:
        raise DimensionMismatchError(f"operator is {A.n}x{A.n}, block has {V.shape[0]} rows")
    out = np.empty((A.n, V.shape[1]), dtype=np.float64)
    _csr_spmm(A.indptr, A.indices, A.data, np.ascontiguousarray(V), out)
    counter.record(V.shape[1])
    return out


def estimate_norm2(A, iters=20, seed=42):
    """Power-iteration estimate of the spectral norm of ``A``.

    Runs ``iters`` power steps on ``A.T @ A`` from a seeded random start and
    returns the Rayleigh-quotient value ``||A v||``, which is a lower estimate
    of the true ``||A||_2``.  Deterministic given the seed; applications are
    not charged to any counter.
    """
    if iters < 1:
        raise ValueError("iters must be >= 1")
    rng = np.random.Generator(np.random.PCG64(seed))
    At = A.transpose()
    v = rng.standard_normal(A.n)
    nv = np.linalg.norm(v)
    if nv == 0:  # pragma: no cover - standard_normal never returns all zeros
        return 0.0
    v /= nv
    est = 0.0
    for _ in range(iters):
        w = A.apply(v)
        est = np.linalg.norm(w)
        if est == 0.0:
            return 0.0
        u = At.apply(w)
        nu = np.linalg.norm(u)
        if nu == 0.0:
            break
        v = u / nu
    return float(est)
