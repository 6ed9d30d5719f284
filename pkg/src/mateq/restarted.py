"""Restarted block Krylov solvers with low-rank compression.

Both drivers run cycles of the block Arnoldi projection method under a hard
budget on simultaneously stored basis columns.  Each cycle solves a small
projected equation at every inner step and checks a cheap residual norm; on
restart, the residual of the accumulated solution is itself a low-rank
product assembled from the boundary blocks of the Arnoldi relation, so it is
compressed and used as the next cycle's right-hand side.  The accumulated
solution factors are compressed after every cycle as well.

The per-cycle iteration budget divides the column budget by the width of the
current residual factor, so the basis depth adapts automatically as the
residual rank evolves.  The attainable accuracy degrades by at most
``(restarts + 1) * (||A|| + ||B|| + 1) * tol_comp`` beyond the residual
tolerance, which is what :func:`eval_residual_bound` evaluates and what the
default compression-tolerance rule keeps below ``tol_res``.
"""

import time
from dataclasses import dataclass, field

import numpy as np

from .arnoldi import HappyBreakdown, arnoldi_extend, arnoldi_init
from .compression import (
    LowRankFactorPair,
    SymLowRankFactor,
    TruncationRule,
    _eig_by_magnitude,
    _keep_count,
    compress,
    compress_sym,
    psd_project,
)
from .dense_eq import solve_lyapunov_ldlt, solve_sylvester_dense
from .errors import MemoryBudgetError
from .linalg import _qr_reduced_signed, svd
from .residuals import (
    explicit_residual_lyap,
    explicit_residual_sylv,
    residual_norm_lyap,
    residual_norm_sylv,
    true_residual_lyap,
    true_residual_sylv,
)
from .sparse import OpCounter, estimate_norm2

__all__ = [
    "SolverConfig",
    "SolveReport",
    "restarted_sylv",
    "restarted_lyap",
    "eval_residual_bound",
    "eval_error_bound_normal",
]

_NORM_EST_ITERS = 20
_NORM_EST_SEED = 42
_NORM_EST_METHOD = f"power-iteration({_NORM_EST_ITERS} iters, seed {_NORM_EST_SEED})"
_VERIFY_MAX_N = 2000


@dataclass
class SolverConfig:
    """Budget and tolerance settings shared by the restarted solvers.

    ``tol_comp`` governs the compression of the accumulated solution factors
    (and the factorization of the projected solution); ``tol_comp=None``
    selects the rule ``tol_res / ((k_max + 1) * (||A|| + ||B|| + 1))`` with
    power-iteration norm estimates, which keeps the accumulated,
    norm-amplified compression error below the residual tolerance.

    ``tol_comp_res`` governs the compression of the residual factors between
    cycles.  Residual truncation errors enter the attainable accuracy
    un-amplified (coefficient one per cycle, versus ``||A|| + ||B|| + 1`` for
    the solution side), so this side tolerates a much coarser cut; keeping it
    coarse is what stabilizes the residual rank and thereby the per-cycle
    iteration budget.  ``None`` means: follow ``tol_comp`` when that is set
    explicitly, otherwise ``1e-3 * tol_res`` (a thousand restarts' worth of
    discarded residual mass still stays below ``tol_res``).
    """

    memmax: int
    k_max: int = 100
    tol_res: float = 1e-6
    tol_comp: float | None = None
    tol_comp_res: float | None = None
    norm: str = "frobenius"
    seed: int = 0

    def validate(self, s):
        if self.memmax < 4 * s:
            raise MemoryBudgetError(
                f"memmax = {self.memmax} is below 4*s = {4 * s}; no iteration possible"
            )
        if self.k_max < 0:
            raise ValueError("k_max must be >= 0")
        if not self.tol_res > 0:
            raise ValueError("tol_res must be positive")
        for name in ("tol_comp", "tol_comp_res"):
            val = getattr(self, name)
            if val is not None and not val > 0:
                raise ValueError(f"{name} must be positive")
        if self.norm not in ("frobenius", "spectral"):
            raise ValueError(f"norm must be 'frobenius' or 'spectral', got {self.norm!r}")

    def resolved_tolerances(self, norm_a, norm_b):
        """Return (solution-side, residual-side) compression tolerances."""
        sol = self.tol_comp
        if sol is None:
            sol = _default_tol_comp(self.tol_res, self.k_max, norm_a, norm_b)
        res = self.tol_comp_res
        if res is None:
            res = self.tol_comp if self.tol_comp is not None else max(sol, 1e-3 * self.tol_res)
        return sol, res


@dataclass
class SolveReport:
    """Everything a solve run measured, in plot-ready form.

    ``residual_history`` holds the cheap residual norm of every inner
    iteration (absolute, same scale as ``tol_res``); ``cycle_starts`` marks
    the 0-based history index where each cycle begins.  Ranks are recorded
    after the per-cycle compressions.  ``peak_live_columns`` is the largest
    number of basis columns held simultaneously across all Krylov sessions.
    """

    solver: str
    n: int
    s: int
    norm: str
    tol_res: float
    tol_comp: float | None
    memmax: int | None
    k_max: int | None
    seed: int | None
    tol_comp_res: float | None = None
    converged: bool = False
    iterations: int = 0
    restarts: int = 0
    residual_history: list = field(default_factory=list)
    cycle_starts: list = field(default_factory=list)
    residual_ranks: list = field(default_factory=list)
    solution_ranks: list = field(default_factory=list)
    cycle_budgets: list = field(default_factory=list)
    cycle_inner_iterations: list = field(default_factory=list)
    min_eigenvalues: list | None = None
    rhs_norm: float = 0.0
    final_residual: float = float("nan")
    final_relative_residual: float = float("nan")
    true_residual: float = float("nan")
    true_relative_residual: float = float("nan")
    solution_rank: int = 0
    counters: dict = field(default_factory=dict)
    efficiency: float = float("nan")
    norm_estimate_a: float = float("nan")
    norm_estimate_b: float | None = None
    norm_estimate_method: str = _NORM_EST_METHOD
    residual_bound: float | None = None
    peak_live_columns: int = 0
    basis_dim: int | None = None
    wall_time_s: float = 0.0
    explicit_history: list | None = None
    cycle_explicit_residuals: list | None = None

    def to_dict(self):
        return dict(self.__dict__)


def _as_block(V):
    """Coerce a right-hand-side factor to an (n, s) float array."""
    V = np.asarray(V, dtype=np.float64)
    if V.ndim == 1:
        V = V[:, None]
    if V.ndim != 2 or V.shape[1] < 1:
        raise ValueError(f"right-hand-side factor must be n x s, got shape {V.shape}")
    return V


def eval_residual_bound(tol_res, k_bar, tol_comp, norm_a, norm_b):
    """Attainable residual level after k_bar restarts with compression."""
    if min(tol_res, k_bar, tol_comp, norm_a, norm_b) < 0:
        raise ValueError("all bound inputs must be nonnegative")
    return tol_res + (k_bar + 1) * (norm_a + norm_b + 1) * tol_comp


def eval_error_bound_normal(tol_res, k_bar, tol_comp, re_lambda_a1, re_lambda_b1):
    """Solution-error bound for normal coefficients with a positive gap."""
    gap = re_lambda_a1 + re_lambda_b1
    if not gap > 0:
        raise ValueError(f"spectral gap must be positive, got {gap}")
    return (tol_res + (k_bar + 1) * tol_comp) / gap + (k_bar + 1) * tol_comp


def _default_tol_comp(tol_res, k_max, norm_a, norm_b):
    return tol_res / ((k_max + 1) * (norm_a + norm_b + 1))


def _product_norm(C, D, norm):
    """||C @ D.T|| without forming the product."""
    _, Rc = _qr_reduced_signed(C)
    _, Rd = _qr_reduced_signed(D)
    core = Rc @ Rd.T
    if norm == "frobenius":
        return float(np.linalg.norm(core))
    return float(np.linalg.norm(core, 2)) if core.size else 0.0


def _sym_product_norm(C, S, norm):
    """||C @ S @ C.T|| without forming the product."""
    _, Rc = _qr_reduced_signed(C)
    core = Rc @ S @ Rc.T
    if norm == "frobenius":
        return float(np.linalg.norm(core))
    return float(np.linalg.norm(core, 2)) if core.size else 0.0


def _factor_pair(Y, rule):
    """Truncated SVD split Y ~= YL @ YR.T with square-root balancing."""
    U, sig, Vt = svd(Y)
    keep = _keep_count(sig, rule)
    root = np.sqrt(sig[:keep])
    return U[:, :keep] * root, Vt[:keep].T * root


def _try_extend(dec):
    """Extend unless already broken down; swallow the breakdown signal."""
    if dec.breakdown:
        return
    try:
        arnoldi_extend(dec)
    except HappyBreakdown:
        pass


def restarted_sylv(A, B, C, D, config, verify=False):
    """Memory-budgeted restarted solver for A X + X B + C D* = 0.

    Returns the compressed solution factors and a :class:`SolveReport`.
    Non-convergence within ``k_max`` restarts is reported through the
    ``converged`` flag, not an exception.  With ``verify=True`` (small n
    only) the dense residual is formed at every inner iteration and at every
    cycle boundary and stored alongside the cheap values.
    """
    C = _as_block(C)
    D = _as_block(D)
    n, s = C.shape
    if A.n != n or B.n != n or D.shape != (n, s):
        raise ValueError("coefficient/right-hand-side dimensions disagree")
    config.validate(s)
    if verify and n > _VERIFY_MAX_N:
        raise ValueError(f"verify mode forms dense residuals; n is limited to {_VERIFY_MAX_N}")
    t0 = time.perf_counter()
    Bt = B.transpose()
    cnt_a, cnt_b = OpCounter(), OpCounter()
    norm_a = estimate_norm2(A, _NORM_EST_ITERS, _NORM_EST_SEED)
    norm_b = estimate_norm2(B, _NORM_EST_ITERS, _NORM_EST_SEED)
    tol_sol, tol_res_fac = config.resolved_tolerances(norm_a, norm_b)
    rule_sol = TruncationRule(tol_sol, config.norm)
    rule_res = TruncationRule(tol_res_fac, config.norm)
    report = SolveReport(
        solver="restarted-sylv", n=n, s=s, norm=config.norm, tol_res=config.tol_res,
        tol_comp=tol_sol, tol_comp_res=tol_res_fac, memmax=config.memmax,
        k_max=config.k_max, seed=config.seed,
        norm_estimate_a=norm_a, norm_estimate_b=norm_b,
    )
    report.rhs_norm = _product_norm(C, D, config.norm)
    if verify:
        report.explicit_history = []
        report.cycle_explicit_residuals = []

    XL = np.zeros((n, 0))
    XR = np.zeros((n, 0))
    Ck, Dk = C, D
    converged = False
    peak = 0
    cycles_run = 0

    for k in range(config.k_max + 1):
        sk = Ck.shape[1]
        if sk == 0:
            converged = True
            break
        mk = config.memmax // (2 * sk) - 2
        if mk < 1:
            raise MemoryBudgetError(
                f"cycle {k}: residual rank {sk} needs more than memmax = {config.memmax} columns"
            )
        cycles_run += 1
        report.cycle_budgets.append(mk)
        report.cycle_starts.append(len(report.residual_history))
        dec_a = arnoldi_init(A, Ck, cnt_a, max_steps=mk)
        dec_b = arnoldi_init(Bt, Dk, cnt_b, max_steps=mk)
        rhs_core = dec_a.r0 @ dec_b.r0.T
        flagconv = False
        Y = None
        for _ in range(mk):
            _try_extend(dec_a)
            _try_extend(dec_b)
            peak = max(peak, dec_a.materialized_columns + dec_b.materialized_columns)
            ka, kb = dec_a.m * sk, dec_b.m * sk
            F = np.zeros((ka, kb))
            F[:sk, :sk] = rhs_core
            Y = solve_sylvester_dense(dec_a.H, dec_b.H, F)
            r = residual_norm_sylv(dec_a.boundary, dec_b.boundary, Y, config.norm)
            report.residual_history.append(r)
            if verify:
                Xacc = XL @ XR.T + dec_a.basis @ Y @ dec_b.basis.T
                report.explicit_history.append(
                    explicit_residual_sylv(A, B, C, D, Xacc, config.norm)
                )
            if r <= config.tol_res:
                flagconv = True
                break
            if dec_a.breakdown and dec_b.breakdown:
                break
        report.cycle_inner_iterations.append(
            len(report.residual_history) - report.cycle_starts[-1]
        )
        YL, YR = _factor_pair(Y, rule_sol)
        XL = np.hstack([XL, dec_a.basis @ YL])
        XR = np.hstack([XR, dec_b.basis @ YR])
        sol = compress(LowRankFactorPair(XL, XR), rule_sol)
        XL, XR = sol.C, sol.D
        report.solution_ranks.append(XL.shape[1])
        if verify:
            report.cycle_explicit_residuals.append(
                explicit_residual_sylv(A, B, C, D, XL @ XR.T, config.norm)
            )
        if flagconv:
            converged = True
            break
        Cn = np.hstack([dec_a.boundary_image(), dec_a.basis @ Y[:, -sk:]])
        Dn = np.hstack([dec_b.basis @ Y[-sk:, :].T, dec_b.boundary_image()])
        res = compress(LowRankFactorPair(Cn, Dn), rule_res)
        Ck, Dk = res.C, res.D
        report.residual_ranks.append(Ck.shape[1])
        dec_a = dec_b = None  # release both bases before the next cycle allocates

    report.converged = converged
    report.iterations = len(report.residual_history)
    report.restarts = max(cycles_run - 1, 0)
    report.final_residual = report.residual_history[-1] if report.residual_history else 0.0
    report.final_relative_residual = (
        report.final_residual / report.rhs_norm if report.rhs_norm else float("nan")
    )
    report.solution_rank = XL.shape[1]
    report.true_residual = true_residual_sylv(A, B, C, D, XL, XR, config.norm)
    report.true_relative_residual = (
        report.true_residual / report.rhs_norm if report.rhs_norm else float("nan")
    )
    report.counters = {"A": cnt_a.as_dict(), "B": cnt_b.as_dict()}
    report.efficiency = cnt_a.matvecs / cnt_a.a_calls if cnt_a.a_calls else float("nan")
    report.residual_bound = eval_residual_bound(
        config.tol_res, report.restarts, max(tol_sol, tol_res_fac), norm_a, norm_b
    )
    report.peak_live_columns = peak
    report.wall_time_s = time.perf_counter() - t0
    return LowRankFactorPair(XL, XR), report


def restarted_lyap(A, C, config, verify=False, project_spsd=False):
    """Memory-budgeted restarted solver for A X + X A* + C C* = 0.

    Uses a single approximation space per cycle.  After the first restart the
    residual becomes indefinite, so residual factors carry a small symmetric
    middle matrix (factored form C S C*) through compression and into the
    projected equations; the accumulated solution is kept in the same form
    with its running middle factor.  ``project_spsd=True`` discards the
    negative eigenvalue part of the final solution.
    """
    C = _as_block(C)
    n, s = C.shape
    if A.n != n:
        raise ValueError("coefficient/right-hand-side dimensions disagree")
    config.validate(s)
    if verify and n > _VERIFY_MAX_N:
        raise ValueError(f"verify mode forms dense residuals; n is limited to {_VERIFY_MAX_N}")
    t0 = time.perf_counter()
    cnt_a = OpCounter()
    norm_a = estimate_norm2(A, _NORM_EST_ITERS, _NORM_EST_SEED)
    tol_sol, tol_res_fac = config.resolved_tolerances(norm_a, norm_a)
    rule_sol = TruncationRule(tol_sol, config.norm)
    rule_res = TruncationRule(tol_res_fac, config.norm)
    report = SolveReport(
        solver="restarted-lyap", n=n, s=s, norm=config.norm, tol_res=config.tol_res,
        tol_comp=tol_sol, tol_comp_res=tol_res_fac, memmax=config.memmax,
        k_max=config.k_max, seed=config.seed,
        norm_estimate_a=norm_a, norm_estimate_b=norm_a,
    )
    report.min_eigenvalues = []
    report.rhs_norm = _sym_product_norm(C, np.eye(s), config.norm)
    if verify:
        report.explicit_history = []
        report.cycle_explicit_residuals = []

    XL = np.zeros((n, 0))
    SX = np.zeros((0, 0))
    Ck = C
    Dmid = np.eye(s)
    converged = False
    peak = 0
    cycles_run = 0

    for k in range(config.k_max + 1):
        sk = Ck.shape[1]
        if sk == 0:
            converged = True
            break
        mk = config.memmax // sk - 1
        if mk < 1:
            raise MemoryBudgetError(
                f"cycle {k}: residual rank {sk} needs more than memmax = {config.memmax} columns"
            )
        cycles_run += 1
        report.cycle_budgets.append(mk)
        report.cycle_starts.append(len(report.residual_history))
        dec = arnoldi_init(A, Ck, cnt_a, max_steps=mk)
        flagconv = False
        Y = None
        for _ in range(mk):
            _try_extend(dec)
            peak = max(peak, dec.materialized_columns)
            kk = dec.m * sk
            Ctil = np.zeros((kk, sk))
            Ctil[:sk, :] = dec.r0
            Y = solve_lyapunov_ldlt(dec.H, Ctil, Dmid)
            r = residual_norm_lyap(dec.boundary, Y, config.norm)
            report.residual_history.append(r)
            if verify:
                Xacc = XL @ SX @ XL.T + dec.basis @ Y @ dec.basis.T
                report.explicit_history.append(
                    explicit_residual_lyap(A, C, Xacc, config.norm)
                )
            if r <= config.tol_res:
                flagconv = True
                break
            if dec.breakdown:
                break
        report.cycle_inner_iterations.append(
            len(report.residual_history) - report.cycle_starts[-1]
        )
        WY, lam = _eig_by_magnitude(Y, rule_sol)
        Snew = np.zeros((SX.shape[0] + lam.size,) * 2)
        Snew[: SX.shape[0], : SX.shape[0]] = SX
        Snew[SX.shape[0]:, SX.shape[0]:] = np.diag(lam)
        sol = compress_sym(
            SymLowRankFactor(np.hstack([XL, dec.basis @ WY]), Snew), rule_sol
        )
        XL, SX = sol.C, sol.S
        report.solution_ranks.append(XL.shape[1])
        report.min_eigenvalues.append(
            float(np.diagonal(SX).min()) if SX.size else 0.0
        )
        if verify:
            report.cycle_explicit_residuals.append(
                explicit_residual_lyap(A, C, XL @ SX @ XL.T, config.norm)
            )
        if flagconv:
            converged = True
            break
        Cn = np.hstack([dec.boundary_image(), dec.basis @ Y[:, -sk:]])
        swap = np.zeros((2 * sk, 2 * sk))
        swap[:sk, sk:] = np.eye(sk)
        swap[sk:, :sk] = np.eye(sk)
        res = compress_sym(SymLowRankFactor(Cn, swap), rule_res)
        Ck, Dmid = res.C, res.S
        report.residual_ranks.append(Ck.shape[1])
        dec = None  # release the basis before the next cycle allocates

    final = SymLowRankFactor(XL, SX)
    if project_spsd:
        final = psd_project(final)
        XL, SX = final.C, final.S
    report.converged = converged
    report.iterations = len(report.residual_history)
    report.restarts = max(cycles_run - 1, 0)
    report.final_residual = report.residual_history[-1] if report.residual_history else 0.0
    report.final_relative_residual = (
        report.final_residual / report.rhs_norm if report.rhs_norm else float("nan")
    )
    report.solution_rank = XL.shape[1]
    report.true_residual = true_residual_lyap(A, C, XL, SX, config.norm)
    report.true_relative_residual = (
        report.true_residual / report.rhs_norm if report.rhs_norm else float("nan")
    )
    report.counters = {"A": cnt_a.as_dict()}
    report.efficiency = cnt_a.matvecs / cnt_a.a_calls if cnt_a.a_calls else float("nan")
    report.residual_bound = eval_residual_bound(
        config.tol_res, report.restarts, max(tol_sol, tol_res_fac), norm_a, norm_a
    )
    report.peak_live_columns = peak
    report.wall_time_s = time.perf_counter() - t0
    return final, report
