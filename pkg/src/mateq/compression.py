"""Rank truncation of low-rank factorizations.

Two entry points: :func:`compress` for two-sided products ``C @ D.T`` (QR of
both factors, SVD of the small core, square-root-balanced output) and
:func:`compress_sym` for symmetric products ``C @ S @ C.T`` (QR of the
factor, eigendecomposition of the small core, orthonormal output with a
diagonal, possibly indefinite middle).  :func:`psd_project` keeps only the
nonnegative eigenvalue part, which is the nearest symmetric positive
semidefinite matrix in both the Frobenius and spectral norms.

Truncation rules: under the ``spectral`` rule every discarded singular value
(eigenvalue magnitude) is below the tolerance; under the ``frobenius`` rule
the Euclidean norm of the discarded values stays below it.
"""

from dataclasses import dataclass

import numpy as np

from .linalg import _qr_reduced_signed, eig_sym, svd

__all__ = ["TruncationRule", "LowRankFactorPair", "SymLowRankFactor",
           "compress", "compress_sym", "psd_project"]

_NORMS = ("spectral", "frobenius")


@dataclass(frozen=True)
class TruncationRule:
    """Tolerance plus the norm in which the truncation error is measured."""

    tolerance: float
    norm: str = "frobenius"

    def __post_init__(self):
        if not self.tolerance > 0:
            raise ValueError(f"truncation tolerance must be positive, got {self.tolerance}")
        if self.norm not in _NORMS:
            raise ValueError(f"norm must be one of {_NORMS}, got {self.norm!r}")


@dataclass(frozen=True)
class LowRankFactorPair:
    """Factored matrix X = C @ D.T with equal-width factors."""

    C: np.ndarray
    D: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=np.float64)
        D = np.asarray(self.D, dtype=np.float64)
        if C.ndim != 2 or D.ndim != 2 or C.shape[1] != D.shape[1]:
            raise ValueError(f"factors must share a column count, got {C.shape} and {D.shape}")
        if (C.size and not np.isfinite(C).all()) or (D.size and not np.isfinite(D).all()):
            raise ValueError("factors contain non-finite entries")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "D", D)

    @property
    def rank(self):
        return self.C.shape[1]

    def to_dense(self):
        return self.C @ self.D.T


@dataclass(frozen=True)
class SymLowRankFactor:
    """Factored symmetric matrix X = C @ S @ C.T with small symmetric S."""

    C: np.ndarray
    S: np.ndarray

    def __post_init__(self):
        C = np.asarray(self.C, dtype=np.float64)
        S = np.asarray(self.S, dtype=np.float64)
        p = C.shape[1] if C.ndim == 2 else -1
        if C.ndim != 2 or S.shape != (p, p):
            raise ValueError(f"factor is {C.shape}, middle must be ({p}, {p}), got {S.shape}")
        if (C.size and not np.isfinite(C).all()) or (S.size and not np.isfinite(S).all()):
            raise ValueError("factors contain non-finite entries")
        nS = np.linalg.norm(S)
        if np.linalg.norm(S - S.T) > 1e-12 * max(nS, 1e-300):
            raise ValueError("middle factor S must be symmetric")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "S", S)

    @property
    def rank(self):
        return self.C.shape[1]

    def to_dense(self):
        return self.C @ self.S @ self.C.T


def _keep_count(values, rule):
    """Number of leading entries kept from magnitude-descending ``values``."""
    values = np.abs(values)
    if rule.norm == "spectral":
        return int(np.count_nonzero(values >= rule.tolerance))
    # frobenius: greedily drop the largest tail whose Euclidean norm <= tol
    tail = np.sqrt(np.cumsum(values[::-1] ** 2))[::-1]
    keep = int(np.count_nonzero(tail > rule.tolerance))
    return keep


def compress(pair, rule):
    """Truncate a two-sided low-rank product per Algorithm-style QR + SVD.

    Returns a new pair with square-root-balanced factors; the dropped part is
    bounded by ``rule.tolerance`` in the rule's norm.  A product entirely
    below the tolerance comes back with zero columns.
    """
    if not isinstance(rule, TruncationRule):
        raise TypeError("rule must be a TruncationRule")
    n = pair.C.shape[0]
    if pair.rank == 0:
        return pair
    Qc, Rc = _qr_reduced_signed(pair.C)
    Qd, Rd = _qr_reduced_signed(pair.D)
    U, sig, Vt = svd(Rc @ Rd.T)
    keep = _keep_count(sig, rule)
    if keep == 0:
        return LowRankFactorPair(np.zeros((n, 0)), np.zeros((pair.D.shape[0], 0)))
    root = np.sqrt(sig[:keep])
    return LowRankFactorPair(Qc @ (U[:, :keep] * root), Qd @ (Vt[:keep].T * root))


def _eig_by_magnitude(core, rule):
    """Eigendecomposition of a small symmetric core, truncated by |eigenvalue|."""
    W, lam = eig_sym(core)
    order = np.argsort(-np.abs(lam), kind="stable")
    lam_m = lam[order]
    keep = _keep_count(lam_m, rule)
    kept_idx = np.sort(order[:keep])  # keep eigenvalue-descending presentation
    return W[:, kept_idx], lam[kept_idx]


def compress_sym(fac, rule):
    """Truncate a symmetric product; output has orthonormal C and diagonal S.

    Eigenvalues are kept by magnitude so an indefinite middle factor keeps its
    signs real (no complex arithmetic is introduced).
    """
    if not isinstance(rule, TruncationRule):
        raise TypeError("rule must be a TruncationRule")
    n = fac.C.shape[0]
    if fac.rank == 0:
        return fac
    Qc, Rc = _qr_reduced_signed(fac.C)
    core = Rc @ fac.S @ Rc.T
    W, lam = _eig_by_magnitude(0.5 * (core + core.T), rule)
    if lam.size == 0:
        return SymLowRankFactor(np.zeros((n, 0)), np.zeros((0, 0)))
    return SymLowRankFactor(Qc @ W, np.diag(lam))


def psd_project(fac):
    """Nearest symmetric positive semidefinite matrix, in factored form.

    Discards the negative (and zero) eigenvalue part of ``C @ S @ C.T``.
    """
    n = fac.C.shape[0]
    if fac.rank == 0:
        return fac
    Qc, Rc = _qr_reduced_signed(fac.C)
    core = Rc @ fac.S @ Rc.T
    W, lam = eig_sym(0.5 * (core + core.T))
    keep = lam > 0.0
    if not keep.any():
        return SymLowRankFactor(np.zeros((n, 0)), np.zeros((0, 0)))
    return SymLowRankFactor(Qc @ W[:, keep], np.diag(lam[keep]))
