"""Outer sigma-relaxation loop with the experiment-protocol schedules.

Driving sigma_k -> 0 while warm-starting each relaxed solve at the previous
answer yields, under MPCC-LICQ at the limit, an MPCC lifted-stationary
point of the capped problem.  The schedules follow the experimental
protocol: the initial point minimizes q(x) + 0.5 ||x||_1 over F,
sigma_k = 10^{-k} min(q(x0), sigma_cap), and the cap width follows
nu_k = max(1 - (k+1)/K, nu).  Termination requires simultaneously a small
outer step, Res <= 1e-3 and a stable zero count at the 1e-6 threshold.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field

import numpy as np

from .alm import AlmConfig, feasible_point, run_alm
from .core import (
    VlcsProblem,
    count_zeros,
    evaluate_gh,
    phi_sum,
    residual_res,
)
from .dca import sparsity_objective
from .errors import InfeasibleError, NonconvergenceError, ParameterError
from .inner import ConvexModel, SolverOptions, prox_point_solve, project_onto_F
from .stationarity import StationarityCertificate, certify_point, lifted_residual


def default_eps_outer(k: int) -> float:
    """Outer stationarity tolerances eps^k -> 0 (floored at 1e-8)."""
    return max(1e-8, 1e-3 * 10.0 ** (-k))


# below this the complementarity value of the initial point counts as zero
DEGENERATE_COMP_TOL = 1e-10


@dataclass(frozen=True)
class OuterConfig:
    nu_final: float
    K: int = 20
    sigma_cap: float = 1e3
    eps_outer: callable = default_eps_outer
    max_outer_k: int = 20
    zero_tol: float = 1e-6
    act_tol: float = 1e-6
    step_tol: float = 1e-8
    res_tol: float = 1e-3
    certify: bool = True

    def __post_init__(self):
        if not (0 < self.nu_final < 1):
            raise ParameterError(f"nu_final must lie in (0,1), got {self.nu_final}")
        if self.K < 1:
            raise ParameterError(f"K must be >= 1, got {self.K}")
        if not (self.sigma_cap > 0):
            raise ParameterError(f"sigma_cap must be positive, got {self.sigma_cap}")


@dataclass
class SolveReport:
    """Result of one sparse solve (capped method or a baseline)."""

    x_star: np.ndarray
    zeros_recovered: int
    matched_zeros: int | None
    res: float
    phi_value: float
    outer_iters: int
    total_inner_iters: int
    wall_time: float
    stationarity: StationarityCertificate | None
    converged: bool
    method: str = "capped"
    param: float = np.nan
    nnz_true: int | None = None
    trace: list = field(default_factory=list)


def initial_point(p: VlcsProblem, tol: float = 1e-8, opts: SolverOptions = None):
    """Approximate minimizer of (Ax-b)^T(Cx-d) + 0.5 ||x||_1 over F."""
    y0 = project_onto_F(p, np.zeros(p.n), tol=max(tol, 1e-9), opts=opts)
    model = ConvexModel(
        problem=p,
        l1_weights=np.full(p.n, 0.5),
        lin=np.zeros(p.n),
        prox_center=None,
        prox_weight=0.0,
        kappa=1.0,
    )
    try:
        res = prox_point_solve(model, y0, tol=tol, opts=opts)
        y = res.y
    except NonconvergenceError as exc:
        if exc.best is None:
            raise
        y = exc.best.y
    viol = max(
        float(np.max(p.b - p.A @ y, initial=0.0)),
        float(np.max(p.d - p.C @ y, initial=0.0)),
    )
    if viol > 1e-9:
        y = project_onto_F(p, y, tol=1e-10, opts=opts)
    return y


def sigma_schedule(p: VlcsProblem, x0, k: int, sigma_cap: float = 1e3) -> float:
    """sigma_k = 10^{-k} min(q(x0), sigma_cap), with a documented fallback.

    A nonpositive seed means x0 already solves the complementarity system;
    the schedule then degrades to sigma_cap 10^{-k} so downstream code can
    still run a polishing pass.
    """
    if k < 1:
        raise ParameterError(f"k must be >= 1, got {k}")
    if not (sigma_cap > 0):
        raise ParameterError(f"sigma_cap must be positive, got {sigma_cap}")
    _, _, comp = evaluate_gh(p, x0)
    seed = min(comp, sigma_cap)
    if seed <= 0:
        seed = sigma_cap
    return float(seed * 10.0 ** (-k))


def nu_schedule(k: int, K: int, nu_final: float) -> float:
    """Cap-width schedule max(1 - (k+1)/K, nu); constant nu when K = 1."""
    if K < 1:
        raise ParameterError(f"K must be >= 1, got {K}")
    if not (nu_final > 0):
        raise ParameterError(f"nu_final must be positive, got {nu_final}")
    return float(max(1.0 - (k + 1) / K, nu_final))


def _zero_count_stat(x, zero_tol):
    return int(np.count_nonzero(np.abs(x) > zero_tol))


def solve_sparse(
    p: VlcsProblem,
    cfg: OuterConfig,
    alm_cfg: AlmConfig = None,
    x_true=None,
    mode: str = "capped",
    weights=None,
    x0=None,
    method_label: str = None,
    opts: SolverOptions = None,
) -> SolveReport:
    """Full three-level solve; returns a report with a final certificate.

    ALM failures at some outer k are not raised: the report carries the
    best iterate with converged=False, as do runs that exhaust max_outer_k
    without meeting the three termination criteria simultaneously.
    """
    t_start = time.perf_counter()
    alm_cfg = alm_cfg or AlmConfig()
    opts = opts or SolverOptions()
    method_label = method_label or mode

    if x0 is None:
        x0 = initial_point(p, opts=opts)
    else:
        x0 = np.asarray(x0, dtype=float).ravel()
    _, _, comp0 = evaluate_gh(p, x0)

    trace = []
    total_inner = 0
    converged = False
    warm = None

    # a numerically zero seed means x0 already solves the system; the
    # schedule formula would collapse, so run one tight polishing pass
    degenerate = comp0 <= DEGENERATE_COMP_TOL
    x_feas = None
    x_prev = x0
    x_best = x0
    k_used = 0
    max_k = 1 if degenerate else cfg.max_outer_k

    for k in range(1, max_k + 1):
        if degenerate:
            # x0 already solves the system: polish once at the final cap
            # width inside a tight relaxation of the achieved residual
            sigma_k = max(1e-8, 10.0 * abs(comp0))
            nu_k = cfg.nu_final
        else:
            sigma_k = sigma_schedule(p, x0, k, cfg.sigma_cap)
            nu_k = nu_schedule(k, cfg.K, cfg.nu_final)
        eps_k = cfg.eps_outer(k)
        try:
            if x_feas is None:
                if degenerate:
                    x_feas = x0
                else:
                    x_feas, _comp_feas = feasible_point(p, opts=opts)
            x_k, alm_trace = run_alm(
                p, sigma_k, nu_k, x_prev, alm_cfg, x_feas=x_feas,
                mode=mode, weights=weights, warm=warm, opts=opts,
            )
        except (InfeasibleError, NonconvergenceError) as exc:
            trace.append({"k": k, "sigma": sigma_k, "nu": nu_k, "error": str(exc)})
            break
        warm = alm_trace.warm
        total_inner += alm_trace.inner_iterations
        resid = lifted_residual(
            (p, sigma_k), x_k, nu_k, act_tol=cfg.act_tol, mode=mode, weights=weights
        )
        if resid > eps_k:
            # tighten the inner tolerances once and continue from x_k
            tight = AlmConfig(
                mu0=alm_cfg.mu0, rho0=alm_cfg.rho0, gamma=alm_cfg.gamma,
                tau=alm_cfg.tau, theta=alm_cfg.theta,
                eps_schedule=lambda l: max(1e-10, eps_k * 0.1**l),
                max_outer=10, xi_tol=alm_cfg.xi_tol, step_tol=alm_cfg.step_tol,
                rho_max=alm_cfg.rho_max, dca_max_iter=alm_cfg.dca_max_iter,
                act_tol=alm_cfg.act_tol,
            )
            try:
                x_k, extra_trace = run_alm(
                    p, sigma_k, nu_k, x_k, tight, x_feas=x_feas,
                    mode=mode, weights=weights, warm=warm, opts=opts,
                )
                warm = extra_trace.warm
                total_inner += extra_trace.inner_iterations
                resid = lifted_residual(
                    (p, sigma_k), x_k, nu_k, act_tol=cfg.act_tol,
                    mode=mode, weights=weights,
                )
            except (InfeasibleError, NonconvergenceError):
                pass

        step = float(np.linalg.norm(x_k - x_prev))
        res_k = residual_res(p, x_k)
        nzero = _zero_count_stat(x_k, cfg.zero_tol)
        trace.append({
            "k": k, "sigma": sigma_k, "nu": nu_k, "step": step, "res": res_k,
            "nonzeros": nzero, "lifted_residual": resid, "eps_k": eps_k,
            "alm_iterations": len(alm_trace.mu), "alm_converged": alm_trace.converged,
        })
        x_best = x_k
        k_used = k
        stable = nzero == _zero_count_stat(x_prev, cfg.zero_tol)
        x_prev = x_k
        if degenerate:
            converged = True
            break
        if step <= cfg.step_tol and res_k <= cfg.res_tol and stable:
            converged = True
            break

    x_star = x_best
    zeros = count_zeros(x_star, cfg.zero_tol)
    matched = None
    nnz_true = None
    if x_true is not None:
        x_true = np.asarray(x_true, dtype=float).ravel()
        matched = int(np.count_nonzero((x_true == 0.0) & (np.abs(x_star) <= cfg.zero_tol)))
        nnz_true = int(np.count_nonzero(x_true))
    cert = None
    if cfg.certify:
        cert = certify_point(p, x_star, cfg.nu_final, act_tol=cfg.act_tol)
    return SolveReport(
        x_star=x_star,
        zeros_recovered=zeros,
        matched_zeros=matched,
        res=residual_res(p, x_star),
        phi_value=(
            phi_sum(x_star, cfg.nu_final)
            if mode == "capped"
            else sparsity_objective(x_star, cfg.nu_final, mode, weights)
        ),
        outer_iters=k_used,
        total_inner_iters=total_inner,
        wall_time=time.perf_counter() - t_start,
        stationarity=cert,
        converged=converged,
        method=method_label,
        param=cfg.nu_final if mode == "capped" else np.nan,
        nnz_true=nnz_true,
        trace=trace,
    )
