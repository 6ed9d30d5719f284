"""Dense decomposition kernels used throughout the package.

All kernels work on real ``float64`` matrices, reject non-finite input, and
fix deterministic sign conventions (nonnegative R diagonal in QR, first
nonzero component of each singular/eigen vector nonnegative) so that repeated
runs produce bitwise identical factors.  The heavy lifting is delegated to
LAPACK through numpy/scipy; these wrappers only add the contracts.
"""

import numpy as np
import scipy.linalg

from .errors import DimensionMismatchError, NonConvergenceError

__all__ = ["qr_economy", "svd", "eig_sym", "real_schur"]


def _as_matrix(M, name="matrix"):
    M = np.asarray(M, dtype=np.float64)
    if M.ndim != 2:
        raise DimensionMismatchError(f"{name} must be 2-dimensional, got shape {M.shape}")
    if M.size and not np.isfinite(M).all():
        raise ValueError(f"{name} contains non-finite entries")
    return M


def _fix_vector_signs(U, *companions):
    """Flip column signs so the first nonzero component of each column is >= 0.

    ``companions`` receive the same flips on their rows (for V* in an SVD).
    """
    U = np.array(U, copy=True)
    out = [np.array(c, copy=True) for c in companions]
    for i in range(U.shape[1]):
        col = U[:, i]
        big = np.abs(col).max(initial=0.0)
        if big == 0.0:
            continue
        nz = np.nonzero(np.abs(col) > 1e-12 * big)[0]
        if nz.size and col[nz[0]] < 0:
            U[:, i] = -col
            for c in out:
                c[i, :] = -c[i, :]
    return (U, *out) if out else U


def _qr_reduced_signed(M):
    """Reduced QR with nonnegative R diagonal; no shape restriction."""
    Q, R = np.linalg.qr(M, mode="reduced")
    d = np.sign(np.diagonal(R)).copy()
    d[d == 0] = 1.0
    return Q * d, R * d[:, None]


def qr_economy(M):
    """Economy-size QR decomposition of a tall matrix.

    Parameters
    ----------
    M : (n, k) array_like, n >= k

    Returns
    -------
    Q : (n, k) ndarray with orthonormal columns
    R : (k, k) ndarray, upper triangular with nonnegative diagonal
    """
    M = _as_matrix(M, "M")
    n, k = M.shape
    if n < k:
        raise DimensionMismatchError(f"economy QR needs n >= k, got {M.shape}")
    return _qr_reduced_signed(M)


def svd(M):
    """Singular value decomposition M = U @ diag(s) @ Vt.

    Singular values are nonincreasing; the first nonzero component of every
    left singular vector is nonnegative (Vt is flipped accordingly).
    """
    M = _as_matrix(M, "M")
    try:
        U, s, Vt = np.linalg.svd(M, full_matrices=False)
    except np.linalg.LinAlgError as exc:
        raise NonConvergenceError(f"SVD did not converge: {exc}") from exc
    U, Vt = _fix_vector_signs(U, Vt)
    return U, s, Vt


def eig_sym(M):
    """Eigendecomposition of a symmetric matrix, eigenvalues descending.

    The input is symmetrized internally; asymmetry beyond ``1e-12`` relative
    is rejected.  Returns ``(W, lam)`` with ``M ~= W @ diag(lam) @ W.T``.
    """
    M = _as_matrix(M, "M")
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"eig_sym needs a square matrix, got {M.shape}")
    nrm = np.linalg.norm(M)
    asym = np.linalg.norm(M - M.T)
    if asym > 1e-12 * max(nrm, 1e-300):
        raise ValueError(f"matrix is not symmetric: ||M - M.T|| = {asym:.3e}, ||M|| = {nrm:.3e}")
    Msym = 0.5 * (M + M.T)
    try:
        lam, W = np.linalg.eigh(Msym)
    except np.linalg.LinAlgError as exc:
        raise NonConvergenceError(f"symmetric eigensolver did not converge: {exc}") from exc
    order = np.argsort(-lam, kind="stable")  # stable: ties keep eigh's order
    lam = lam[order]
    W = _fix_vector_signs(W[:, order])
    return W, lam


def real_schur(M):
    """Real Schur form M = Q @ T @ Q.T with quasi-triangular T."""
    M = _as_matrix(M, "M")
    if M.shape[0] != M.shape[1]:
        raise DimensionMismatchError(f"real_schur needs a square matrix, got {M.shape}")
    try:
        T, Q = scipy.linalg.schur(M, output="real")
    except scipy.linalg.LinAlgError as exc:  # pragma: no cover - rare QR-iteration failure
        raise NonConvergenceError(f"Schur QR iteration did not converge: {exc}") from exc
    return Q, T
