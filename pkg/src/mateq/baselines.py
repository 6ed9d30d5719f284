"""Comparison solvers: inexact extended Krylov methods and two-pass Lanczos.

The extended Krylov solvers (:func:`eksm_lyap`, :func:`eksm_sylv`) interleave
images under the operator and under its inverse, with the inverse applied
inexactly by a block iterative solver (:func:`block_cg` for SPD operators,
:func:`block_gmres` otherwise).  The projected matrix is assembled by
explicit projection of cached operator images, so every operator application
is counted.

:func:`sksm_two_pass` is the short-recurrence polynomial method for symmetric
coefficients: pass one runs a block Lanczos three-term recurrence keeping
three live blocks and monitors the cheap residual; pass two regenerates the
basis to assemble the solution factor, roughly doubling the operator calls
but never storing the basis.
"""

import time
from dataclasses import dataclass

import numpy as np

from .arnoldi import HappyBreakdown, arnoldi_extend, arnoldi_init
from .compression import LowRankFactorPair, SymLowRankFactor, TruncationRule, _eig_by_magnitude
from .dense_eq import solve_lyapunov_ldlt, solve_sylvester_dense
from .errors import (
    IndefiniteOperatorError,
    LossOfOrthogonalityError,
    MemoryExhaustedError,
    NonConvergenceError,
    RankDeficientBlockError,
)
from .linalg import qr_economy
from .restarted import SolveReport, _as_block, _factor_pair, _product_norm, _sym_product_norm
from .residuals import residual_norm_lyap, true_residual_lyap, true_residual_sylv
from .sparse import OpCounter, estimate_norm2, spmm

__all__ = ["InnerSolverConfig", "block_cg", "block_gmres", "eksm_lyap", "eksm_sylv",
           "sksm_two_pass"]


@dataclass
class InnerSolverConfig:
    """Settings for the inner linear solves of the extended Krylov methods."""

    kind: str = "block-cg"
    tol: float = 1e-8
    max_iter: int = 2000
    restart: int = 50  # block-gmres only

    def __post_init__(self):
        if self.kind not in ("block-cg", "block-gmres"):
            raise ValueError(f"kind must be 'block-cg' or 'block-gmres', got {self.kind!r}")
        if not 0 < self.tol < 1:
            raise ValueError("inner tolerance must lie in (0, 1)")

    def solve(self, A, RHS, counter):
        if self.kind == "block-cg":
            return block_cg(A, RHS, self, counter)
        return block_gmres(A, RHS, self, counter)


def block_cg(A, RHS, cfg, counter):
    """Coupled block conjugate gradients for SPD A.

    Search directions are re-orthonormalized by a block QR every step, which
    keeps the small Gram systems well conditioned for clustered right-hand
    sides.  Stops at ``||A X - RHS||_F <= cfg.tol * ||RHS||_F``.
    """
    RHS = np.asarray(RHS, dtype=np.float64)
    rhs_norm = np.linalg.norm(RHS)
    if rhs_norm == 0:
        return np.zeros_like(RHS)
    X = np.zeros_like(RHS)
    R = RHS.copy()
    P, _ = qr_economy(R)
    for _ in range(cfg.max_iter):
        W = spmm(A, P, counter)
        M = P.T @ W
        M = 0.5 * (M + M.T)
        try:
            lo = np.linalg.cholesky(M)
        except np.linalg.LinAlgError:
            raise IndefiniteOperatorError(
                "block CG: search-direction Gram matrix is not positive definite"
            ) from None
        alpha = np.linalg.solve(lo.T, np.linalg.solve(lo, P.T @ R))
        X += P @ alpha
        R -= W @ alpha
        if np.linalg.norm(R) <= cfg.tol * rhs_norm:
            return X
        beta = -np.linalg.solve(lo.T, np.linalg.solve(lo, W.T @ R))
        P, _ = qr_economy(R + P @ beta)
    raise NonConvergenceError(f"block CG did not reach {cfg.tol:g} in {cfg.max_iter} iterations")


def block_gmres(A, RHS, cfg, counter):
    """Restarted block GMRES for a nonsingular operator.

    Each cycle builds a block Arnoldi basis of at most ``cfg.restart`` steps
    and minimizes the residual over it through a small least-squares solve.
    """
    RHS = np.asarray(RHS, dtype=np.float64)
    n, s = RHS.shape
    rhs_norm = np.linalg.norm(RHS)
    if rhs_norm == 0:
        return np.zeros_like(RHS)
    X = np.zeros_like(RHS)
    R = RHS.copy()
    total = 0
    while total < cfg.max_iter:
        # column scaling keeps the start block full rank when some right-hand
        # sides converge earlier than others (block deflation is unsupported)
        scale = np.linalg.norm(R, axis=0)
        scale[scale == 0] = 1.0
        try:
            dec = arnoldi_init(A, R / scale, counter,
                               max_steps=min(cfg.restart, cfg.max_iter - total))
        except RankDeficientBlockError as exc:
            raise NonConvergenceError(
                f"block GMRES restart block is rank deficient at residual "
                f"{np.linalg.norm(R) / rhs_norm:.3e} (deflation unsupported): {exc}"
            ) from exc
        rhs_small = dec.r0 * scale
        Y = None
        for _ in range(dec.max_steps):
            try:
                arnoldi_extend(dec)
            except HappyBreakdown:
                pass
            total += 1
            j = dec.m
            Hbar = np.zeros(((j + 1) * s, j * s))
            Hbar[: j * s, :] = dec.H
            bnd = dec.boundary
            if bnd is not None:
                Hbar[j * s :, (j - 1) * s :] = bnd
            E1R = np.zeros(((j + 1) * s, s))
            E1R[:s, :] = rhs_small
            Y, _, _, _ = np.linalg.lstsq(Hbar, E1R, rcond=None)
            res = np.linalg.norm(Hbar @ Y - E1R)
            if res <= cfg.tol * rhs_norm or dec.breakdown:
                break
        X += dec.basis @ Y
        R = RHS - spmm(A, X, counter)
        if np.linalg.norm(R) <= cfg.tol * rhs_norm:
            return X
    raise NonConvergenceError(
        f"block GMRES did not reach {cfg.tol:g} in {cfg.max_iter} iterations"
    )


class _ExtendedBasis:
    """Interleaved direct/inverse Krylov basis with cached operator images.

    Blocks come in pairs: the image part (from applying the operator) and the
    inverse part (from the inner solve).  The projection ``T = U* (A U)`` is
    filled incrementally from the cached images, so its assembly costs no
    extra operator applications beyond the one image per new block.
    """

    def __init__(self, A, C, inner, counter, max_dim):
        self.A = A
        self.inner = inner
        self.counter = counter
        self.max_dim = max_dim
        n, s = C.shape
        self.s = s
        if 2 * s > max_dim:
            raise MemoryExhaustedError(
                f"even the starting extended block needs {2 * s} columns > {max_dim}"
            )
        inv = inner.solve(A, C, counter)
        Q, R0 = qr_economy(np.hstack([C, inv]))
        self.U = Q
        self.proj_rhs = R0[:, :s]  # U* C, nonzero only in the leading 2s rows
        self.AU = np.hstack([spmm(A, Q[:, :s], counter), spmm(A, Q[:, s:], counter)])
        self.T = self.U.T @ self.AU

    @property
    def dim(self):
        return self.U.shape[1]

    def rhs_block(self):
        out = np.zeros((self.dim, self.s))
        out[: 2 * self.s, :] = self.proj_rhs
        return out

    def residual_factor(self, Y):
        """F Y with F the out-of-space part of the cached images."""
        F = self.AU - self.U @ self.T
        return F @ Y

    def extend(self):
        s = self.s
        if self.dim + 2 * s > self.max_dim:
            raise MemoryExhaustedError(
                f"extended basis would exceed {self.max_dim} columns; cannot reach the tolerance"
            )
        xi = self.AU[:, -2 * s : -s]  # cached image of the previous direct block
        eta = self.inner.solve(self.A, self.U[:, -s:], self.counter)
        W = np.hstack([xi, eta])
        proj = self.U.T @ W
        W = W - self.U @ proj
        W = W - self.U @ (self.U.T @ W)
        Qn, _ = qr_economy(W)
        self.U = np.hstack([self.U, Qn])
        new_images = np.hstack(
            [spmm(self.A, Qn[:, :s], self.counter), spmm(self.A, Qn[:, s:], self.counter)]
        )
        self.AU = np.hstack([self.AU, new_images])
        d_old = self.T.shape[0]
        T = np.zeros((self.dim, self.dim))
        T[:d_old, :d_old] = self.T
        T[:, d_old:] = self.U.T @ new_images
        T[d_old:, :d_old] = Qn.T @ self.AU[:, :d_old]
        self.T = T


def _solution_cut(tol_res, *norms):
    """Truncation level for the returned solution factors.

    Discarded solution mass is amplified by the coefficient norms in the
    residual, so cut where the induced residual perturbation stays below the
    solve tolerance.
    """
    total = sum(norms)
    return tol_res / total if total > 0 else tol_res


def _finish_sym(U, Y, tol):
    """Eigen-truncate the small solution and lift it to full size."""
    rule = TruncationRule(tol, "spectral")
    W, lam = _eig_by_magnitude(Y, rule)
    return SymLowRankFactor(U @ W, np.diag(lam))


def eksm_lyap(A, C, inner, tol_res, max_dim):
    """Extended Krylov solver for A X + X A* + C C* = 0 with inexact inverses.

    Raises :class:`MemoryExhaustedError` when the basis would outgrow
    ``max_dim`` before the residual tolerance is met.
    """
    C = _as_block(C)
    t0 = time.perf_counter()
    counter = OpCounter()
    s = C.shape[1]
    rhs_norm = _sym_product_norm(C, np.eye(s), "frobenius")
    basis = _ExtendedBasis(A, C, inner, counter, max_dim)
    report = SolveReport(
        solver=f"eksm-{inner.kind.split('-')[1]}", n=A.n, s=s, norm="frobenius",
        tol_res=tol_res, tol_comp=None, memmax=max_dim, k_max=None, seed=None,
    )
    report.rhs_norm = rhs_norm
    outer = 0
    while True:
        Ctil = basis.rhs_block()
        Y = solve_lyapunov_ldlt(basis.T, Ctil, np.eye(s))
        r = float(np.sqrt(2.0) * np.linalg.norm(basis.residual_factor(Y)))
        report.residual_history.append(r)
        if r <= tol_res:
            break
        basis.extend()
        outer += 1
    norm_a = estimate_norm2(A)
    fac = _finish_sym(basis.U, Y, _solution_cut(tol_res, norm_a, norm_a))
    report.converged = True
    report.iterations = outer
    report.basis_dim = basis.dim
    report.peak_live_columns = basis.dim
    report.final_residual = r
    report.final_relative_residual = r / rhs_norm if rhs_norm else float("nan")
    report.solution_rank = fac.rank
    report.true_residual = true_residual_lyap(A, C, fac.C, fac.S, "frobenius")
    report.true_relative_residual = (
        report.true_residual / rhs_norm if rhs_norm else float("nan")
    )
    report.counters = {"A": counter.as_dict()}
    report.efficiency = counter.matvecs / counter.a_calls if counter.a_calls else float("nan")
    report.wall_time_s = time.perf_counter() - t0
    return fac, report


def eksm_sylv(A, B, C, D, inner_a, inner_b, tol_res, max_dim):
    """Two-sided extended Krylov solver for A X + X B + C D* = 0.

    Grows one extended basis for (A, C) and one for (B*, D) in lockstep, with
    independent counters for the two operators.
    """
    C = _as_block(C)
    D = _as_block(D)
    t0 = time.perf_counter()
    cnt_a, cnt_b = OpCounter(), OpCounter()
    s = C.shape[1]
    rhs_norm = _product_norm(C, D, "frobenius")
    Bt = B.transpose()
    ba = _ExtendedBasis(A, C, inner_a, cnt_a, max_dim)
    bb = _ExtendedBasis(Bt, D, inner_b, cnt_b, max_dim)
    report = SolveReport(
        solver=f"eksm-{inner_a.kind.split('-')[1]}", n=A.n, s=s, norm="frobenius",
        tol_res=tol_res, tol_comp=None, memmax=max_dim, k_max=None, seed=None,
    )
    report.rhs_norm = rhs_norm
    outer = 0
    while True:
        F = ba.rhs_block() @ bb.rhs_block().T
        Y = solve_sylvester_dense(ba.T, bb.T, F)
        r = float(np.hypot(
            np.linalg.norm(ba.residual_factor(Y)),
            np.linalg.norm(bb.residual_factor(Y.T)),
        ))
        report.residual_history.append(r)
        if r <= tol_res:
            break
        ba.extend()
        bb.extend()
        outer += 1
    cut = _solution_cut(tol_res, estimate_norm2(A), estimate_norm2(B))
    YL, YR = _factor_pair(Y, TruncationRule(cut, "spectral"))
    fac = LowRankFactorPair(ba.U @ YL, bb.U @ YR)
    report.converged = True
    report.iterations = outer
    report.basis_dim = ba.dim
    report.peak_live_columns = ba.dim + bb.dim
    report.final_residual = r
    report.final_relative_residual = r / rhs_norm if rhs_norm else float("nan")
    report.solution_rank = fac.rank
    report.true_residual = true_residual_sylv(A, B, C, D, fac.C, fac.D, "frobenius")
    report.true_relative_residual = (
        report.true_residual / rhs_norm if rhs_norm else float("nan")
    )
    report.counters = {"A": cnt_a.as_dict(), "B": cnt_b.as_dict()}
    report.efficiency = cnt_a.matvecs / cnt_a.a_calls if cnt_a.a_calls else float("nan")
    report.wall_time_s = time.perf_counter() - t0
    return fac, report


def sksm_two_pass(A, C, tol_res, max_m, verify=False):
    """Two-pass block Lanczos solver for A X + X A* + C C* = 0, A symmetric.

    Pass one keeps only three basis blocks live while growing the projected
    block tridiagonal matrix and checking the cheap residual each step; pass
    two regenerates the basis to accumulate the solution factor.  With
    ``verify=True`` the factored true residual is compared against the cheap
    one at the end and a serious mismatch raises
    :class:`LossOfOrthogonalityError`.
    """
    if not A.symmetric:
        raise ValueError("two-pass Lanczos requires a symmetric operator")
    C = _as_block(C)
    t0 = time.perf_counter()
    counter = OpCounter()
    n, s = C.shape
    rhs_norm = _sym_product_norm(C, np.eye(s), "frobenius")
    report = SolveReport(
        solver="sksm-two-pass", n=n, s=s, norm="frobenius", tol_res=tol_res,
        tol_comp=None, memmax=None, k_max=None, seed=None,
    )
    report.rhs_norm = rhs_norm

    def lanczos_step(U_prev, U_cur, beta_prev):
        W = spmm(A, U_cur, counter)
        if U_prev is not None:
            W = W - U_prev @ beta_prev.T
        alpha = U_cur.T @ W
        alpha = 0.5 * (alpha + alpha.T)
        W = W - U_cur @ alpha
        Qn, beta = qr_economy(W)
        return Qn, alpha, beta

    U1, R0 = qr_economy(C)
    alphas, betas = [], []
    U_prev, U_cur = None, U1
    beta_prev = None
    Y = None
    m = 0
    converged = False
    for j in range(1, max_m + 1):
        Qn, alpha, beta = lanczos_step(U_prev, U_cur, beta_prev)
        alphas.append(alpha)
        H = np.zeros((j * s, j * s))
        for i, a in enumerate(alphas):
            H[i * s : (i + 1) * s, i * s : (i + 1) * s] = a
        for i, b in enumerate(betas):
            H[(i + 1) * s : (i + 2) * s, i * s : (i + 1) * s] = b
            H[i * s : (i + 1) * s, (i + 1) * s : (i + 2) * s] = b.T
        Ctil = np.zeros((j * s, s))
        Ctil[:s, :] = R0
        Y = solve_lyapunov_ldlt(H, Ctil, np.eye(s))
        r = residual_norm_lyap(beta, Y, "frobenius")
        report.residual_history.append(r)
        m = j
        if r <= tol_res:
            converged = True
            break
        betas.append(beta)
        U_prev, U_cur, beta_prev = U_cur, Qn, beta
    report.converged = converged
    report.iterations = m

    norm_a = estimate_norm2(A)
    rule = TruncationRule(_solution_cut(tol_res, norm_a, norm_a), "spectral")
    WY, lam = _eig_by_magnitude(Y, rule)
    XL = np.zeros((n, WY.shape[1]))
    U_prev, U_cur = None, U1
    beta_prev = None
    for j in range(m):
        XL += U_cur @ WY[j * s : (j + 1) * s, :]
        if j < m - 1:
            Qn, _, beta = lanczos_step(U_prev, U_cur, beta_prev)
            U_prev, U_cur, beta_prev = U_cur, Qn, beta
    fac = SymLowRankFactor(XL, np.diag(lam))
    report.final_residual = report.residual_history[-1]
    report.final_relative_residual = (
        report.final_residual / rhs_norm if rhs_norm else float("nan")
    )
    report.solution_rank = fac.rank
    report.true_residual = true_residual_lyap(A, C, fac.C, fac.S, "frobenius")
    report.true_relative_residual = (
        report.true_residual / rhs_norm if rhs_norm else float("nan")
    )
    report.counters = {"A": counter.as_dict()}
    report.efficiency = counter.matvecs / counter.a_calls if counter.a_calls else float("nan")
    report.peak_live_columns = 3 * s
    report.basis_dim = m * s
    report.wall_time_s = time.perf_counter() - t0
    if verify and report.true_residual > 10 * max(report.final_residual, tol_res):
        raise LossOfOrthogonalityError(
            f"computed residual {report.final_residual:.3e} but actual residual "
            f"{report.true_residual:.3e}; the Lanczos basis has lost orthogonality"
        )
    return fac, report
