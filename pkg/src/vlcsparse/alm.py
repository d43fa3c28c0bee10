"""Augmented Lagrangian loop for the sigma-relaxed problem at fixed sigma.

Minimizes the sparsity objective over S_sigma = {x in F : q(x) <= sigma}
by penalizing q(x) - sigma <= 0 and keeping the polyhedron F explicit.
Each outer step solves the AL subproblem with the DC algorithm to a
measured first-order residual eps_l, then applies the classical
multiplier / penalty updates

    mu_{l+1}  = [mu_l + rho_l h_sigma(x_l)]_+
    xi_{l+1}  = min(mu_{l+1}/rho_l, -h_sigma(x_l))
    rho_{l+1} = rho_l                     if l > 0 and |xi_{l+1}| <= theta |xi_l|
                max(gamma rho_l, mu_{l+1}^{1+tau})  otherwise,

with an upper safeguard Upsilon on the AL value enforced by restarting the
inner solve from a feasible reference point.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import VlcsProblem, al_penalty_value, evaluate_gh
from .dca import DcaResult, psi_value, run_dca, sparsity_objective
from .errors import (
    InfeasibleError,
    NonconvergenceError,
    ParameterError,
    PreconditionError,
    SafeguardError,
)
from .inner import ConvexModel, SolverOptions, WarmStart, prox_point_solve, project_onto_F
from .stationarity import al_residual


def default_eps_schedule(l: int) -> float:
    """Inner stationarity tolerances eps_l -> 0 (floored at 1e-8)."""
    return max(1e-8, 1e-2 * 0.1**l)


@dataclass(frozen=True)
class AlmConfig:
    mu0: float = 0.0
    rho0: float = 1.0
    gamma: float = 10.0
    tau: float = 0.5
    theta: float = 0.8
    eps_schedule: callable = default_eps_schedule
    max_outer: int = 50
    xi_tol: float = 1e-8
    step_tol: float = 1e-8
    rho_max: float = 1e14
    upsilon_slack: float = 1e-6
    dca_max_iter: int = 5000
    act_tol: float = 1e-6

    def __post_init__(self):
        if not (self.gamma > 1):
            raise ParameterError(f"gamma must exceed 1, got {self.gamma}")
        if not (0 < self.tau < 1):
            raise ParameterError(f"tau must lie in (0,1), got {self.tau}")
        if not (0 < self.theta < 1):
            raise ParameterError(f"theta must lie in (0,1), got {self.theta}")
        if self.mu0 < 0 or self.rho0 <= 0:
            raise ParameterError("mu0 must be >= 0 and rho0 > 0")


@dataclass
class AlmState:
    """Outer iterate of the AL loop."""

    x: np.ndarray
    mu: float
    rho: float
    xi: float
    upsilon: float
    l: int


@dataclass
class AlmTrace:
    """Per-iteration diagnostics of one run_alm call."""

    mu: list = field(default_factory=list)
    rho: list = field(default_factory=list)
    xi: list = field(default_factory=list)
    h_sigma: list = field(default_factory=list)
    h_plus: list = field(default_factory=list)
    al_value: list = field(default_factory=list)
    residual: list = field(default_factory=list)
    eps: list = field(default_factory=list)
    dca_iterations: list = field(default_factory=list)
    inner_iterations: int = 0
    restarts: int = 0
    converged: bool = False
    warm: WarmStart = None


def al_penalty(p: VlcsProblem, x, mu: float, rho: float, sigma: float) -> float:
    """AL penalty (1/(2 rho))([mu + rho h_sigma(x)]_+^2 - mu^2)."""
    _, _, comp = evaluate_gh(p, x)
    return al_penalty_value(comp, mu, rho, sigma)


def update_multiplier(mu: float, rho: float, h: float):
    """Multiplier and complementarity-measure updates (mu', xi')."""
    if not (rho > 0):
        raise ParameterError(f"rho must be positive, got {rho}")
    mu_next = max(mu + rho * h, 0.0)
    xi_next = min(mu_next / rho, -h)
    return mu_next, xi_next


def update_rho(rho: float, mu_next: float, xi_prev: float, xi_next: float,
               cfg: AlmConfig, l: int) -> float:
    """Penalty update: keep rho when |xi'| <= theta |xi| (and l > 0)."""
    if l > 0 and abs(xi_next) <= cfg.theta * abs(xi_prev):
        return rho
    return min(max(cfg.gamma * rho, mu_next ** (1.0 + cfg.tau)), cfg.rho_max)


def feasible_point(p: VlcsProblem, tol: float = 1e-9, opts: SolverOptions = None):
    """Minimize q(x) over F; q >= 0 on F, so the value gauges solvability."""
    x0 = project_onto_F(p, np.zeros(p.n), tol=max(tol, 1e-9), opts=opts)
    model = ConvexModel(
        problem=p,
        l1_weights=np.zeros(p.n),
        lin=np.zeros(p.n),
        prox_center=None,
        prox_weight=0.0,
        kappa=1.0,
    )
    try:
        res = prox_point_solve(model, x0, tol=tol, opts=opts)
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
    _, _, comp = evaluate_gh(p, y)
    return y, comp


def run_alm(
    p: VlcsProblem,
    sigma: float,
    nu: float,
    x_init,
    cfg: AlmConfig = None,
    x_feas=None,
    mode: str = "capped",
    weights=None,
    warm: WarmStart = None,
    opts: SolverOptions = None,
):
    """Run the AL loop at fixed sigma; returns (x, AlmTrace).

    Stops when |xi_{l+1}| <= xi_tol and the outer step falls below
    step_tol, or after max_outer iterations.  Every accepted iterate obeys
    the Upsilon safeguard; violations trigger one restart of the inner
    solve from the feasible reference point and a SafeguardError if the
    restart does not cure them.
    """
    cfg = cfg or AlmConfig()
    if not (sigma > 0 and nu > 0):
        raise ParameterError("sigma and nu must be positive")
    x = np.asarray(x_init, dtype=float).ravel().copy()
    if x.shape != (p.n,):
        raise ParameterError(f"x_init must have length {p.n}")
    viol = max(
        float(np.max(p.b - p.A @ x, initial=0.0)),
        float(np.max(p.d - p.C @ x, initial=0.0)),
    )
    if viol > 1e-6:
        raise PreconditionError(f"x_init violates F by {viol:.3e}")
    if viol > 0:
        x = project_onto_F(p, x, tol=1e-10, opts=opts)

    if x_feas is None:
        x_feas, comp_feas = feasible_point(p, opts=opts)
    else:
        x_feas = np.asarray(x_feas, dtype=float).ravel()
        _, _, comp_feas = evaluate_gh(p, x_feas)
    if comp_feas > sigma + 1e-8:
        raise InfeasibleError(
            f"no feasible point of the relaxed problem found: min q over F is "
            f"{comp_feas:.3e} > sigma = {sigma:.3e}"
        )

    upsilon = (
        max(
            sparsity_objective(x_feas, nu, mode, weights),
            psi_value(p, x, cfg.mu0, cfg.rho0, sigma, nu, mode, weights),
        )
        + cfg.upsilon_slack
    )

    trace = AlmTrace()
    mu, rho, xi = cfg.mu0, cfg.rho0, np.inf
    warm = warm or WarmStart()
    x_prev = None
    for l in range(cfg.max_outer):
        eps_l = cfg.eps_schedule(l)
        x, warm, resid, dca_total = _inner_solve(
            p, x, mu, rho, sigma, nu, eps_l, cfg, mode, weights, warm, opts, trace
        )

        al_val = psi_value(p, x, mu, rho, sigma, nu, mode, weights)
        if al_val > upsilon + 1e-9 * (1.0 + abs(upsilon)):
            trace.restarts += 1
            x, warm, resid, extra = _inner_solve(
                p, x_feas, mu, rho, sigma, nu, eps_l, cfg, mode, weights,
                WarmStart(), opts, trace,
            )
            dca_total += extra
            al_val = psi_value(p, x, mu, rho, sigma, nu, mode, weights)
            if al_val > upsilon + 1e-9 * (1.0 + abs(upsilon)):
                raise SafeguardError(
                    f"AL value {al_val:.6e} exceeds safeguard {upsilon:.6e} "
                    f"after restart from the feasible reference"
                )

        _, _, comp = evaluate_gh(p, x)
        h = comp - sigma
        mu_next, xi_next = update_multiplier(mu, rho, h)
        rho_next = update_rho(rho, mu_next, xi, xi_next, cfg, l)

        trace.mu.append(mu)
        trace.rho.append(rho)
        trace.xi.append(xi_next)
        trace.h_sigma.append(h)
        trace.h_plus.append(max(h, 0.0))
        trace.al_value.append(al_val)
        trace.residual.append(resid)
        trace.eps.append(eps_l)
        trace.dca_iterations.append(dca_total)

        step = np.inf if x_prev is None else float(np.linalg.norm(x - x_prev))
        x_prev = x.copy()
        mu, rho, xi = mu_next, rho_next, xi_next
        if abs(xi_next) <= cfg.xi_tol and step <= cfg.step_tol:
            trace.converged = True
            break

    trace.warm = warm
    return x, trace


def _inner_solve(p, x_start, mu, rho, sigma, nu, eps_l, cfg, mode, weights, warm,
                 opts, trace):
    """Run the DC algorithm and tighten until the measured residual passes."""
    dca_tol = max(eps_l / 4.0, 1e-10)
    inner_tol = max(eps_l / 10.0, 1e-10)
    x = x_start
    total = 0
    resid = np.inf
    for _try in range(4):
        out: DcaResult = run_dca(
            p, mu, rho, sigma, nu, x,
            tol=dca_tol, max_iter=cfg.dca_max_iter, inner_tol=inner_tol,
            warm=warm, mode=mode, weights=weights, opts=opts,
        )
        x, warm = out.x, out.warm
        total += out.subproblem_solves
        trace.inner_iterations += out.inner_iterations
        resid = al_residual(
            p, x, mu, rho, sigma, nu, act_tol=cfg.act_tol, mode=mode, weights=weights
        )
        if resid <= eps_l:
            break
        dca_tol = max(dca_tol / 10.0, 1e-12)
        inner_tol = max(inner_tol / 10.0, 1e-12)
    return x, warm, resid, total
