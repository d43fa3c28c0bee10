"""Strongly convex inner subproblems over the polyhedron F.

Everything the pipeline has to minimize over F = {y : Ay >= b, Cy >= d}
fits one canonical model

    sum_i w_i |y_i| + lin^T y + (t/2) ||y - a||^2 + kappa q(y) + AL(y)
    s.t.  Ay >= b, Cy >= d, [Ey = f], [q(y) <= q_cap]

with q(y) = (Ay - b)^T (Cy - d) and AL the augmented Lagrangian penalty
(1/(2 rho)) ([mu + rho (q(y) - sigma)]_+^2 - mu^2).  The DC-algorithm
subproblem, Euclidean projections, the initial-point program and the l1
baselines are all instances.

Solver architecture:

* a forward-backward-forward (Tseng) splitting on the primal-dual KKT
  operator with an Armijo linesearch provides the globally convergent
  phase; the iterations run on diagonally equilibrated data (generated
  matrices are badly scaled: ||A^T C|| can exceed 1e6, which would pin the
  step size near zero otherwise);
* an active-set Newton polish solves the smooth KKT system on the current
  sign/activity pattern and certifies the final residual; warm-started DC
  iterations usually land here immediately.

Convergence and all returned residuals are always measured on the
ORIGINAL (unscaled) first-order system; points carry exact zeros on
thresholded coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, replace

import numpy as np

from .core import VlcsProblem, theta_slopes_for
from .errors import (
    InfeasibleError,
    NonconvergenceError,
    ParameterError,
    PreconditionError,
)

DEFAULT_FEAS_TOL = 1e-8
DEFAULT_KKT_TOL = 1e-8

_LAST_IPM_STATS = None


@dataclass(frozen=True)
class ConvexModel:
    """Coefficients of the canonical convex program (see module docstring)."""

    problem: VlcsProblem
    l1_weights: np.ndarray            # w >= 0 componentwise
    lin: np.ndarray                   # extra linear term
    prox_center: np.ndarray | None    # a (None disables the prox term)
    prox_weight: float = 0.0          # t >= 0
    kappa: float = 0.0                # weight of q(y) in the objective
    al_mu: float = 0.0                # AL penalty, enabled when al_rho > 0
    al_rho: float = 0.0
    al_sigma: float = 0.0
    q_cap: float | None = None        # hard constraint q(y) <= q_cap
    E: np.ndarray | None = None       # equality rows
    f_eq: np.ndarray | None = None

    def __post_init__(self):
        n = self.problem.n
        w = np.asarray(self.l1_weights, dtype=float)
        if w.ndim == 0:
            w = np.full(n, float(w))
        if w.shape != (n,) or np.any(w < 0):
            raise ParameterError("l1_weights must be a nonnegative vector of length n")
        object.__setattr__(self, "l1_weights", w)
        lin = np.zeros(n) if self.lin is None else np.asarray(self.lin, dtype=float)
        if lin.shape != (n,):
            raise ParameterError("lin must have length n")
        object.__setattr__(self, "lin", lin)
        if self.prox_center is not None:
            a = np.asarray(self.prox_center, dtype=float)
            if a.shape != (n,):
                raise ParameterError("prox_center must have length n")
            object.__setattr__(self, "prox_center", a)
        if self.prox_weight < 0 or self.kappa < 0 or self.al_rho < 0:
            raise ParameterError("prox_weight, kappa and al_rho must be nonnegative")
        if self.E is not None:
            E = np.atleast_2d(np.asarray(self.E, dtype=float))
            f = np.asarray(self.f_eq, dtype=float).ravel()
            if E.shape[1] != n or f.shape != (E.shape[0],):
                raise ParameterError("equality block shape mismatch")
            object.__setattr__(self, "E", E)
            object.__setattr__(self, "f_eq", f)

    @property
    def al_on(self) -> bool:
        return self.al_rho > 0

    @property
    def n_eq(self) -> int:
        return 0 if self.E is None else self.E.shape[0]


class _Data:
    """Solver-facing problem data, possibly diagonally equilibrated.

    Constraint rows are scaled (A <- diag(ra) A diag(s), etc.) while the
    complementarity quadratic q is kept exact through (Q, qlin, qconst)
    expressed in the scaled variables, because row scaling would distort
    the product (Ay-b)^T (Cy-d).
    """

    def __init__(self, model: ConvexModel, s=None, ra=None, rc=None, re=None):
        p = model.problem
        n, m = p.n, p.m
        self.model = model
        self.n = n
        self.m = m
        self.s = np.ones(n) if s is None else s
        self.ra = np.ones(m) if ra is None else ra
        self.rc = np.ones(m) if rc is None else rc
        ne = model.n_eq
        self.re = (np.ones(ne) if re is None else re) if ne else None

        S = self.s
        self.A = self.ra[:, None] * p.A * S[None, :]
        self.C = self.rc[:, None] * p.C * S[None, :]
        self.b = self.ra * p.b
        self.d = self.rc * p.d
        Q, qlin, qconst = p.comp_quadratic()
        self.Q = (S[:, None] * Q) * S[None, :]
        self.qlin = S * qlin
        self.qconst = qconst
        if model.E is not None:
            self.E = self.re[:, None] * model.E * S[None, :]
            self.f = self.re * model.f_eq
        else:
            self.E = None
            self.f = None
        self.w1 = model.l1_weights * S
        self.lin = model.lin * S
        if model.prox_center is not None and model.prox_weight > 0:
            self.tvec = model.prox_weight * S * S
            self.a = model.prox_center / S
        else:
            self.tvec = None
            self.a = None
        self.kappa = model.kappa
        self.al_on = model.al_on
        self.al_mu = model.al_mu
        self.al_rho = model.al_rho
        self.al_sigma = model.al_sigma
        self.q_cap = model.q_cap

    # -- evaluations -------------------------------------------------------
    def q_parts(self, y):
        """Return (g, h, q, gradq); g, h are the (scaled) constraint slacks."""
        g = self.A @ y - self.b
        h = self.C @ y - self.d
        gradq = self.Q @ y + self.qlin
        q = 0.5 * float(y @ (gradq + self.qlin)) + self.qconst
        return g, h, q, gradq

    def pi(self, q):
        if not self.al_on:
            return 0.0
        return max(self.al_mu + self.al_rho * (q - self.al_sigma), 0.0)

    def value(self, y):
        val = float(self.w1 @ np.abs(y)) + float(self.lin @ y)
        _, _, q, _ = self.q_parts(y)
        val += self.kappa * q
        if self.tvec is not None:
            val += 0.5 * float(self.tvec @ (y - self.a) ** 2)
        if self.al_on:
            val += (self.pi(q) ** 2 - self.al_mu**2) / (2.0 * self.al_rho)
        return val

    def smooth_grad(self, y, q=None, gradq=None, gamma=0.0):
        if gradq is None:
            _, _, q, gradq = self.q_parts(y)
        coef = self.kappa + self.pi(q) + gamma
        v = self.lin + coef * gradq
        if self.tvec is not None:
            v = v + self.tvec * (y - self.a)
        return v

    # -- scaling transport ---------------------------------------------------
    def unscale_point(self, y, lam_a, lam_c, eta):
        return (
            self.s * y,
            self.ra * lam_a,
            self.rc * lam_c,
            None if eta is None or self.re is None else self.re * eta,
        )

    def scale_duals(self, lam_a, lam_c, eta):
        return (
            lam_a / self.ra,
            lam_c / self.rc,
            None if eta is None or self.re is None else eta / self.re,
        )


def _make_scaled(model: ConvexModel, y0, gamma0):
    """Equilibrate columns by curvature/column norms, then rows to unit norm.

    The curvature estimate includes the augmented Lagrangian terms at the
    entry point (pi Q plus the rank-one rho grad q grad q^T), which is what
    makes the splitting iterations usable on the badly scaled generated
    data; the caller re-equilibrates when the solve stalls because these
    coefficients move.
    """
    p = model.problem
    Q, qlin, qconst = p.comp_quadratic()
    K_coln = np.sqrt(np.linalg.norm(p.A, axis=0) ** 2 + np.linalg.norm(p.C, axis=0) ** 2)
    data0 = _Data(model)
    _, _, q0, gradq0 = data0.q_parts(y0)
    pi0 = data0.pi(q0)
    coef0 = model.kappa + pi0 + gamma0
    curv = (model.prox_weight if model.prox_center is not None else 0.0) + coef0 * np.abs(
        np.diag(Q)
    )
    if model.al_on and (pi0 > 0 or q0 >= model.al_sigma - 10.0 / max(model.al_rho, 1e-12)):
        curv = curv + model.al_rho * gradq0**2
    if model.q_cap is not None:
        curv = curv + np.abs(gradq0)
    s = 1.0 / np.sqrt(np.maximum(curv + K_coln, 1e-12))
    s = np.clip(s, 1e-8, 1e8)
    ra = 1.0 / np.maximum(np.linalg.norm(p.A * s[None, :], axis=1), 1e-12)
    rc = 1.0 / np.maximum(np.linalg.norm(p.C * s[None, :], axis=1), 1e-12)
    ra = np.clip(ra, 1e-10, 1e12)
    rc = np.clip(rc, 1e-10, 1e12)
    re = None
    if model.E is not None:
        re = 1.0 / np.maximum(np.linalg.norm(model.E * s[None, :], axis=1), 1e-12)
        re = np.clip(re, 1e-10, 1e12)
    return _Data(model, s=s, ra=ra, rc=rc, re=re), data0


@dataclass
class InnerResult:
    """Solution of a canonical subproblem with a measured KKT residual."""

    y: np.ndarray
    kkt_residual: float
    iterations: int
    objective: float
    lam_a: np.ndarray = None
    lam_c: np.ndarray = None
    gamma: float = 0.0
    eta: np.ndarray = None
    converged: bool = True


@dataclass
class WarmStart:
    """Dual (and optional primal) warm start carried across related solves."""

    lam_a: np.ndarray = None
    lam_c: np.ndarray = None
    gamma: float = 0.0
    eta: np.ndarray = None
    y: np.ndarray = None

    @classmethod
    def from_result(cls, res: InnerResult) -> "WarmStart":
        return cls(lam_a=res.lam_a, lam_c=res.lam_c, gamma=res.gamma, eta=res.eta, y=res.y)


@dataclass
class SolverOptions:
    feas_tol: float = DEFAULT_FEAS_TOL
    armijo_delta: float = 0.9
    shrink: float = 0.7
    grow: float = 1.15
    alpha_min: float = 1e-16
    alpha_max: float = 1e8
    dual_bound: float = 1e10
    polish_keepalive: int = 200
    max_pattern_rounds: int = 12
    max_newton_iters: int = 15
    equilibrate: bool = True
    use_ipm: bool = True
    max_ipm_iters: int = 60
    fbf_budget: int = 600


def _kkt_residual(data: _Data, y, lam_a, lam_c, gamma, eta):
    """Componentwise KKT residual (stationarity, feasibility, complementarity)."""
    g, h, q, gradq = data.q_parts(y)
    v = data.smooth_grad(y, q, gradq, gamma=gamma)
    v = v - data.A.T @ lam_a - data.C.T @ lam_c
    if data.E is not None:
        v = v + data.E.T @ eta
    w = data.w1
    nz = y != 0.0
    stat_sq = float(np.sum((v[nz] + w[nz] * np.sign(y[nz])) ** 2))
    stat_sq += float(np.sum(np.maximum(np.abs(v[~nz]) - w[~nz], 0.0) ** 2))
    stat = np.sqrt(stat_sq)
    feas = max(float(np.max(-g, initial=0.0)), float(np.max(-h, initial=0.0)))
    comp = max(
        float(np.max(np.abs(lam_a * g), initial=0.0)),
        float(np.max(np.abs(lam_c * h), initial=0.0)),
    )
    if data.E is not None:
        feas = max(feas, float(np.max(np.abs(data.E @ y - data.f), initial=0.0)))
    if data.q_cap is not None:
        feas = max(feas, q - data.q_cap)
        comp = max(comp, abs(gamma * (q - data.q_cap)))
    return max(stat, feas, comp)


def _measure_original(data0: _Data, data: _Data, y, lam_a, lam_c, gamma, eta):
    """KKT residual of the ORIGINAL system at the unscaled point."""
    yu, lau, lcu, etau = data.unscale_point(y, lam_a, lam_c, eta)
    return _kkt_residual(data0, yu, lau, lcu, gamma, etau), (yu, lau, lcu, etau)


def _polish(data: _Data, y, lam_a, lam_c, gamma, eta, check, tol, opts: SolverOptions):
    """Active-set Newton on the smooth KKT system of the current pattern.

    ``check(y, la, lc, gm, et)`` measures the residual that decides
    success (the caller passes the unscaled measurement).  Returns
    (y, lam_a, lam_c, gamma, eta, kkt, certified) for the best measured
    candidate, or None when no finite candidate was produced; certified
    means the pattern is consistent and kkt <= tol.
    """
    with np.errstate(over="ignore", invalid="ignore"):
        return _polish_impl(data, y, lam_a, lam_c, gamma, eta, check, tol, opts)


def _pattern_key(pat):
    supp, sgn, act_a, act_c, cap_on = pat
    return (supp.tobytes(), sgn.tobytes(), act_a.tobytes(), act_c.tobytes(), cap_on)


def _apply_change(pat, change, v):
    """Return a copy of the pattern with one audit item applied."""
    supp, sgn, act_a, act_c, cap_on = (pat[0].copy(), pat[1].copy(),
                                       pat[2].copy(), pat[3].copy(), pat[4])
    kind, i = change
    if kind == "drop_a":
        act_a[i] = False
    elif kind == "add_a":
        act_a[i] = True
    elif kind == "drop_c":
        act_c[i] = False
    elif kind == "add_c":
        act_c[i] = True
    elif kind == "grow":
        supp[i] = True
        sgn[i] = -np.sign(v[i])
    elif kind == "shrink":
        supp[i] = False
    elif kind == "cap_on":
        cap_on = True
    elif kind == "cap_off":
        cap_on = False
    return supp, sgn, act_a, act_c, cap_on


def _polish_impl(data, y, lam_a, lam_c, gamma, eta, check, tol, opts):
    n = data.n
    y = y.copy()
    y[np.abs(y) < 1e-12] = 0.0
    g0 = data.A @ y - data.b
    h0 = data.C @ y - data.d
    _, _, q0, _ = data.q_parts(y)
    pat = (
        y != 0.0,
        np.sign(y),
        (lam_a > 0) | (g0 <= 0),
        (lam_c > 0) | (h0 <= 0),
        data.q_cap is not None and (gamma > 0 or q0 > data.q_cap),
    )
    ne = 0 if data.E is None else data.E.shape[0]
    eta = np.zeros(ne) if eta is None else eta.copy()
    point = (y, lam_a.copy(), lam_c.copy(), gamma, eta)
    seen = set()
    eps = max(1e-9, 0.1 * tol)

    # monotone guard: pattern moves are re-anchored at the best measured
    # candidate (seeded with the incoming point, so the result is never
    # worse than the input); two non-improving rounds switch from bulk
    # pattern updates to classical one-change-at-a-time pivoting
    best_kkt = check(y, np.maximum(lam_a, 0.0), np.maximum(lam_c, 0.0),
                     max(gamma, 0.0), eta if ne else None)
    best_point = (y.copy(), np.maximum(lam_a, 0.0), np.maximum(lam_c, 0.0),
                  max(gamma, 0.0), eta.copy())
    best_pat = None
    best_changes = []
    pivot_ptr = 0
    single_mode = False
    stale = 0

    def next_single():
        nonlocal pivot_ptr
        while pivot_ptr < len(best_changes):
            cand = _apply_change(best_pat, best_changes[pivot_ptr][:2], best_changes[pivot_ptr][2])
            pivot_ptr += 1
            if _pattern_key(cand) not in seen:
                return cand
        return None

    def give_up():
        if best_point is None:
            return None
        yb, lab, lcb, gab, etab = best_point
        return yb, lab, lcb, gab, (etab if ne else None), best_kkt, False

    for _round in range(opts.max_pattern_rounds):
        key = _pattern_key(pat)
        if key in seen:
            if not single_mode and best_pat is not None:
                single_mode = True
                nxt = next_single()
                if nxt is None:
                    return give_up()
                pat, point = nxt, best_point
                continue
            return give_up()
        seen.add(key)

        solved = _pattern_newton(data, pat, point, ne, tol, opts)
        if solved is None:
            return give_up()
        ycand, lamAf, lamCf, gamf, eta_var, audit_v = solved
        changes = _audit(data, pat, ycand, lamAf, lamCf, gamf, audit_v, eps)
        clean = (
            np.maximum(lamAf, 0.0),
            np.maximum(lamCf, 0.0),
            max(gamf, 0.0),
        )
        consistent = (
            not changes
            and np.all(lamAf >= -eps)
            and np.all(lamCf >= -eps)
            and gamf >= -eps
        )
        kkt = check(ycand, clean[0], clean[1], clean[2], eta_var if ne else None)
        if consistent and kkt <= tol:
            return ycand, clean[0], clean[1], clean[2], (eta_var if ne else None), kkt, True
        if np.isfinite(kkt) and kkt < 0.999 * best_kkt:
            best_kkt = kkt
            best_point = (ycand, clean[0], clean[1], clean[2], eta_var)
            best_pat = pat
            best_changes = changes
            pivot_ptr = 0
            stale = 0
        else:
            stale += 1
            if stale >= 2:
                single_mode = True
        if not changes:
            return give_up()

        if single_mode:
            if best_pat is None:
                return give_up()
            nxt = next_single()
            if nxt is None:
                return give_up()
            pat, point = nxt, best_point
        else:
            new_pat = pat
            for kind, i, v in changes:
                new_pat = _apply_change(new_pat, (kind, i), v)
            pat = new_pat
            point = (ycand, clean[0], clean[1], clean[2], eta_var)
    return give_up()


def _audit(data, pat, ycand, lamAf, lamCf, gamf, v, eps):
    """Rank pattern inconsistencies of a candidate, most severe first.

    Returns a list of (kind, index, v) items; v is the dual-residual vector
    used to sign newly grown coordinates.
    """
    supp, sgn, act_a, act_c, cap_on = pat
    g = data.A @ ycand - data.b
    h = data.C @ ycand - data.d
    _, _, q, _ = data.q_parts(ycand)
    items = []
    for i in np.flatnonzero(act_a):
        if lamAf[i] < -eps:
            items.append((-lamAf[i], ("drop_a", i)))
    for i in np.flatnonzero(act_c):
        if lamCf[i] < -eps:
            items.append((-lamCf[i], ("drop_c", i)))
    for i in np.flatnonzero(~act_a & (g < -eps)):
        items.append((-g[i], ("add_a", i)))
    for i in np.flatnonzero(~act_c & (h < -eps)):
        items.append((-h[i], ("add_c", i)))
    excess = np.abs(v) - data.w1
    for i in np.flatnonzero(~supp & (excess > eps)):
        items.append((excess[i], ("grow", i)))
    for i in np.flatnonzero(supp & (np.sign(ycand) != sgn) & (ycand != 0.0)):
        items.append((abs(ycand[i]), ("shrink", i)))
    for i in np.flatnonzero(supp & (ycand == 0.0)):
        items.append((eps, ("shrink", i)))
    if data.q_cap is not None:
        if cap_on and gamf < -eps:
            items.append((-gamf, ("cap_off", 0)))
        elif not cap_on and q > data.q_cap + eps:
            items.append((q - data.q_cap, ("cap_on", 0)))
    items.sort(key=lambda t: -t[0])
    return [(kind, i, v) for _sev, (kind, i) in items]


def _pattern_newton(data, pat, point, ne, tol, opts):
    """Damped (semismooth) Newton on the KKT system of a fixed pattern."""
    supp, sgn, act_a, act_c, cap_on = pat
    n = data.n
    y0, lam_a0, lam_c0, gamma0, eta0 = point
    S = np.flatnonzero(supp)
    iA = np.flatnonzero(act_a)
    iC = np.flatnonzero(act_c)
    nS, nA, nC = S.size, iA.size, iC.size
    nG = 1 if cap_on else 0
    dim = nS + nA + nC + nG + ne
    if dim == 0:
        return None

    AS = data.A[iA][:, S]
    CS = data.C[iC][:, S]
    ES = data.E[:, S] if ne else None
    yS = np.where(np.sign(y0[S]) == sgn[S], y0[S], 0.0).copy()
    lamA = lam_a0[iA].copy()
    lamC = lam_c0[iC].copy()
    gam = gamma0 if cap_on else 0.0
    QSS = data.Q[np.ix_(S, S)]
    eta_var = eta0.copy() if ne else np.zeros(0)

    def residual(yS, lamA, lamC, gam, eta_v):
        # the AL penalty is C^1: the residual uses pi = [mu + rho (q-sigma)]_+
        # and the Jacobian a one-sided second derivative
        yfull = np.zeros(n)
        yfull[S] = yS
        g, h, q, gradq = data.q_parts(yfull)
        pi = data.pi(q)
        coef = data.kappa + pi + gam
        v = data.lin[S] + coef * gradq[S]
        if data.tvec is not None:
            v = v + data.tvec[S] * (yS - data.a[S])
        v = v + data.w1[S] * sgn[S]
        if nA:
            v = v - AS.T @ lamA
        if nC:
            v = v - CS.T @ lamC
        if ne:
            v = v + ES.T @ eta_v
        parts = [v]
        if nA:
            parts.append(g[iA])
        if nC:
            parts.append(h[iC])
        if cap_on:
            parts.append(np.array([q - data.q_cap]))
        if ne:
            parts.append(data.E @ yfull - data.f)
        return np.concatenate(parts), gradq, q, pi

    R, gradq, qval, pi = residual(yS, lamA, lamC, gam, eta_var)
    if not np.all(np.isfinite(R)):
        return None
    force_curv = False
    for _newton in range(opts.max_newton_iters):
        rn = float(np.max(np.abs(R)))
        if not np.isfinite(rn):
            return None
        if rn <= 0.02 * max(tol, 1e-12):
            break
        coef = data.kappa + pi + gam
        J = np.zeros((dim, dim))
        Jyy = coef * QSS
        if data.tvec is not None:
            Jyy = Jyy + np.diag(data.tvec[S])
        if pi > 0 or force_curv:
            Jyy = Jyy + data.al_rho * np.outer(gradq[S], gradq[S])
        J[:nS, :nS] = Jyy
        off = nS
        if nA:
            J[:nS, off : off + nA] = -AS.T
            J[off : off + nA, :nS] = AS
            off += nA
        if nC:
            J[:nS, off : off + nC] = -CS.T
            J[off : off + nC, :nS] = CS
            off += nC
        if cap_on:
            J[:nS, off] = gradq[S]
            J[off, :nS] = gradq[S]
            off += 1
        if ne:
            J[:nS, off : off + ne] = ES.T
            J[off : off + ne, :nS] = ES
        try:
            du = np.linalg.solve(J, -R)
        except np.linalg.LinAlgError:
            du, *_ = np.linalg.lstsq(J, -R, rcond=None)
        if not np.all(np.isfinite(du)):
            return None
        step = 1.0
        improved = False
        while step >= 1e-6:
            yS2 = yS + step * du[:nS]
            lamA2 = lamA + step * du[nS : nS + nA]
            lamC2 = lamC + step * du[nS + nA : nS + nA + nC]
            gam2 = gam + step * du[nS + nA + nC] if cap_on else 0.0
            eta2 = eta_var + step * du[nS + nA + nC + nG :] if ne else eta_var
            R2, gradq2, qval2, pi2 = residual(yS2, lamA2, lamC2, gam2, eta2)
            rn2 = float(np.max(np.abs(R2)))
            if np.isfinite(rn2) and (rn2 < rn * (1 - 1e-4 * step) or rn2 <= 0.02 * max(tol, 1e-12)):
                yS, lamA, lamC, gam, eta_var = yS2, lamA2, lamC2, gam2, eta2
                R, gradq, qval, pi = R2, gradq2, qval2, pi2
                improved = True
                break
            step *= 0.5
        if not improved:
            # a step computed on the inactive side of the penalty kink can be
            # ascent on the active side; retry with the rank-one curvature of
            # the active generalized Jacobian included
            if data.al_on and not force_curv and pi <= 0:
                force_curv = True
                continue
            break

    ycand = np.zeros(n)
    ycand[S] = yS
    ycand[~supp] = 0.0
    lamAf = np.zeros(data.m)
    lamCf = np.zeros(data.m)
    lamAf[iA] = lamA
    lamCf[iC] = lamC
    gamf = gam if cap_on else 0.0
    g, h, q, gradq = data.q_parts(ycand)
    v = data.smooth_grad(ycand, q, gradq, gamma=gamf)
    v = v - data.A.T @ lamAf - data.C.T @ lamCf
    if ne:
        v = v + data.E.T @ eta_var
    return ycand, lamAf, lamCf, gamf, (eta_var if ne else np.zeros(0)), v


def _ipm(data: _Data, y_init, max_ipm_iters=80):
    """Infeasible primal-dual interior point on the epigraph reformulation.

    Variables z = (y, r, tau): r_i >= |y_i| carries the l1 term, tau >= 0
    with tau >= mu/rho + q(y) - sigma carries the AL penalty exactly (its
    contribution to the objective is rho tau^2 / 2).  The hard cap becomes
    the quadratic inequality q(y) <= q_cap.  Everything is convex and C^2,
    so Mehrotra predictor-corrector steps apply; the reduced Newton system
    is dense of size 2n + n_eq (+1).

    Returns (y, lam_a, lam_c, gamma_cap, eta, ok); multipliers live in the
    same (scaled) space as ``data``.
    """
    n = data.n
    m = data.m
    al = data.al_on
    cap = data.q_cap is not None
    ne = 0 if data.E is None else data.E.shape[0]
    ntau = 1 if al else 0
    dim = 2 * n + ntau
    M = 2 * m + 2 * n + (2 if al else 0) + (1 if cap else 0)
    K = np.vstack([data.A, data.C])
    cvec = np.concatenate([data.b, data.d])
    tvec = data.tvec if data.tvec is not None else np.zeros(n)
    acen = data.a if data.a is not None else np.zeros(n)

    y = np.asarray(y_init, dtype=float).copy()
    r = np.abs(y) + 1.0
    _, _, q0, _ = data.q_parts(y)
    tau = (max(data.al_mu / data.al_rho + q0 - data.al_sigma, 0.0) + 1.0) if al else 0.0

    def gvals_and_grad(y, r, tau):
        g_, h_, q, gradq = data.q_parts(y)
        vals = [K @ y - cvec, r - y, r + y]
        if al:
            vals.append(np.array([tau]))
            vals.append(np.array([data.al_sigma - data.al_mu / data.al_rho + tau - q]))
        if cap:
            vals.append(np.array([data.q_cap - q]))
        return np.concatenate(vals), q, gradq

    gv, q, gradq = gvals_and_grad(y, r, tau)
    s = np.maximum(gv, 1.0)
    lam = np.ones(M)
    eta = np.zeros(ne)
    i_q = 2 * m + 2 * n + 1 if al else None          # AL quadratic row
    i_cap = M - 1 if cap else None

    def build_G(gradq):
        G = np.zeros((M, dim))
        G[: 2 * m, :n] = K
        G[2 * m : 2 * m + n, :n] = -np.eye(n)
        G[2 * m : 2 * m + n, n : 2 * n] = np.eye(n)
        G[2 * m + n : 2 * m + 2 * n, :n] = np.eye(n)
        G[2 * m + n : 2 * m + 2 * n, n : 2 * n] = np.eye(n)
        if al:
            G[2 * m + 2 * n, 2 * n] = 1.0
            G[i_q, :n] = -gradq
            G[i_q, 2 * n] = 1.0
        if cap:
            G[i_cap, :n] = -gradq
        return G

    def grad_phi(y, r, tau, gradq):
        gy = data.lin + tvec * (y - acen) + data.kappa * gradq
        parts = [gy, data.w1]
        if al:
            parts.append(np.array([data.al_rho * tau]))
        return np.concatenate(parts)

    ok = False
    stall = 0
    best_mu = np.inf
    scale = 1.0 + float(np.max(np.abs(grad_phi(y, r, tau, gradq)), initial=0.0))
    for _it in range(max_ipm_iters):
        G = build_G(gradq)
        r_d = grad_phi(y, r, tau, gradq) - G.T @ lam
        if ne:
            r_d = r_d + np.concatenate([data.E.T @ eta, np.zeros(n + ntau)])
        r_p = gv - s
        r_e = (data.E @ y - data.f) if ne else np.zeros(0)
        mu_bar = float(s @ lam) / M
        if (
            mu_bar <= 1e-13 * scale
            and float(np.max(np.abs(r_p), initial=0.0)) <= 1e-11 * scale
            and float(np.max(np.abs(r_d), initial=0.0)) <= 1e-11 * scale
            and float(np.max(np.abs(r_e), initial=0.0)) <= 1e-11 * scale
        ):
            ok = True
            break
        if mu_bar < 0.95 * best_mu:
            best_mu = mu_bar
            stall = 0
        else:
            stall += 1
            if stall >= 10:
                break

        lam_q = (lam[i_q] if al else 0.0) + (lam[i_cap] if cap else 0.0)
        Hyy = np.diag(tvec) + (data.kappa + lam_q) * data.Q
        D = lam / np.maximum(s, 1e-300)

        def reduced_solve(rhs_d, rhs_comp, rhs_p):
            # eliminate (ds, dlam): dlam = -S^-1 (rhs_comp + Lam (G dz + rhs_p))
            w = (rhs_comp / np.maximum(s, 1e-300)) + D * rhs_p
            big = np.zeros((dim + ne, dim + ne))
            big[:dim, :dim] = G.T @ (D[:, None] * G)
            big[:n, :n] += Hyy
            if al:
                big[2 * n, 2 * n] += data.al_rho
            big[:dim, :dim] += 1e-12 * np.eye(dim)
            if ne:
                Etil = np.zeros((ne, dim))
                Etil[:, :n] = data.E
                big[:dim, dim:] = Etil.T
                big[dim:, :dim] = Etil
                big[dim:, dim:] = -1e-12 * np.eye(ne)
            rhs = np.concatenate([-rhs_d - G.T @ w, -r_e])
            try:
                sol = np.linalg.solve(big, rhs)
            except np.linalg.LinAlgError:
                sol, *_ = np.linalg.lstsq(big, rhs, rcond=None)
            dz = sol[:dim]
            deta = sol[dim:]
            ds = G @ dz + rhs_p
            dlam = -(rhs_comp + lam * ds) / np.maximum(s, 1e-300)
            return dz, ds, dlam, deta

        # predictor
        dz_a, ds_a, dlam_a, deta_a = reduced_solve(r_d, s * lam, r_p)
        def step_len(v, dv):
            neg = dv < 0
            if not np.any(neg):
                return 1.0
            return min(1.0, 0.995 * float(np.min(-v[neg] / dv[neg])))
        ap = step_len(s, ds_a)
        ad = step_len(lam, dlam_a)
        mu_aff = float((s + ap * ds_a) @ (lam + ad * dlam_a)) / M
        sigma_c = min(1.0, (mu_aff / max(mu_bar, 1e-300)) ** 3)
        # corrector
        comp_rhs = s * lam + ds_a * dlam_a - sigma_c * mu_bar
        dz, ds, dlam, deta = reduced_solve(r_d, comp_rhs, r_p)
        ap = step_len(s, ds)
        ad = step_len(lam, dlam)
        if not (np.all(np.isfinite(dz)) and np.all(np.isfinite(dlam))):
            break
        y = y + ap * dz[:n]
        r = r + ap * dz[n : 2 * n]
        if al:
            tau = max(tau + ap * dz[2 * n], 0.0)
        s = s + ap * ds
        lam = lam + ad * dlam
        if ne:
            eta = eta + ad * deta
        gv, q, gradq = gvals_and_grad(y, r, tau)
        # keep slacks consistent and positive for the nonlinear rows
        s = np.maximum(s, 1e-300)

    global _LAST_IPM_STATS
    _LAST_IPM_STATS = (
        _it,
        mu_bar,
        float(np.max(np.abs(r_p), initial=0.0)),
        float(np.max(np.abs(r_d), initial=0.0)),
    )
    # identify the active pattern the interior-point way (lambda_j > s_j),
    # zero the inactive multipliers and the coordinates whose two epigraph
    # rows are both active
    act = lam > s
    lam_clean = np.where(act, lam, 0.0)
    lam_a = lam_clean[:m].copy()
    lam_c = lam_clean[m : 2 * m].copy()
    zero_mask = act[2 * m : 2 * m + n] & act[2 * m + n : 2 * m + 2 * n]
    y_out = y.copy()
    y_out[zero_mask] = 0.0
    gamma_cap = float(lam_clean[i_cap]) if cap else 0.0
    return y_out, lam_a, lam_c, gamma_cap, (eta if ne else None), ok


def _round_ipm_point(y):
    """Zero the numerically vanished coordinates of an interior iterate."""
    yy = y.copy()
    az = np.abs(yy)
    thresh = 1e-9 * (1.0 + float(az.max(initial=0.0)))
    yy[az <= thresh] = 0.0
    return yy


def solve_canonical(
    model: ConvexModel,
    y0,
    tol: float = DEFAULT_KKT_TOL,
    max_iter: int = 60_000,
    warm: WarmStart | None = None,
    opts: SolverOptions | None = None,
) -> InnerResult:
    """Minimize the canonical model to a certified (unscaled) KKT residual.

    Strategy: try the active-set Newton polish from the warm pattern (the
    common case across warm-started DC iterations), then run the interior
    point method and certify its rounded pattern with the polish, and only
    then fall back to the splitting iterations.  Raises NonconvergenceError
    (carrying the best iterate) if nothing reaches the tolerance, and
    InfeasibleError when the dual iterates diverge while the primal stays
    infeasible.
    """
    # transient overflow in stiff penalty regions is tolerated and caught
    # by explicit finiteness guards
    with np.errstate(over="ignore", invalid="ignore"):
        return _solve_canonical_impl(model, y0, tol, max_iter, warm, opts)


def _solve_canonical_impl(model, y0, tol, max_iter, warm, opts):
    if not (tol > 0):
        raise ParameterError(f"tol must be positive, got {tol}")
    opts = opts or SolverOptions()
    p = model.problem
    n, mrows = p.n, p.m
    y_orig = np.array(y0, dtype=float).copy()
    if y_orig.shape != (n,):
        raise ParameterError(f"y0 must have length {n}")
    lam_a0 = np.zeros(mrows)
    lam_c0 = np.zeros(mrows)
    gamma = 0.0
    eta0 = np.zeros(model.n_eq) if model.E is not None else None
    if warm is not None:
        if warm.lam_a is not None:
            lam_a0 = np.maximum(np.asarray(warm.lam_a, dtype=float).copy(), 0.0)
        if warm.lam_c is not None:
            lam_c0 = np.maximum(np.asarray(warm.lam_c, dtype=float).copy(), 0.0)
        if model.q_cap is not None:
            gamma = max(float(warm.gamma), 0.0)
        if model.E is not None and warm.eta is not None:
            eta0 = np.asarray(warm.eta, dtype=float).copy()

    if opts.equilibrate:
        data, data0 = _make_scaled(model, y_orig, gamma)
    else:
        data = data0 = _Data(model)
    y = y_orig / data.s
    lam_a, lam_c, eta = data.scale_duals(lam_a0, lam_c0, eta0)

    hard = model.q_cap is not None
    has_eq = model.E is not None
    w1 = data.w1

    def B(yv, la, lc, gm, et):
        g, h, q, gradq = data.q_parts(yv)
        by = data.smooth_grad(yv, q, gradq, gamma=gm)
        by = by - data.A.T @ la - data.C.T @ lc
        if has_eq:
            by = by + data.E.T @ et
        bga = (data.q_cap - q) if hard else 0.0
        bet = (data.f - data.E @ yv) if has_eq else None
        return by, g, h, bga, bet

    def pack_norm(dy, dla, dlc, dga, det):
        ssum = float(dy @ dy) + float(dla @ dla) + float(dlc @ dlc) + dga * dga
        if det is not None:
            ssum += float(det @ det)
        return np.sqrt(ssum)

    alpha = 1.0
    best = None
    best_kkt = np.inf

    def consider(yv, la, lc, gm, et):
        nonlocal best, best_kkt
        kkt, unscaled = _measure_original(data0, data, yv, la, lc, gm, et)
        if kkt < best_kkt:
            best_kkt = kkt
            best = unscaled + (gm,)
        return kkt

    def finish(point, kkt, iters, ok):
        yu, lau, lcu, etau, gm = point
        return InnerResult(
            y=yu,
            kkt_residual=kkt,
            iterations=iters,
            objective=data0.value(yu),
            lam_a=lau,
            lam_c=lcu,
            gamma=gm,
            eta=etau,
            converged=ok,
        )

    def check(yv, la, lc, gm, et):
        return _measure_original(data0, data, yv, la, lc, gm, et)[0]

    def try_polish(yv, la, lc, gm, et, iters):
        pol = _polish(data, yv, la, lc, gm, et, check, tol, opts)
        if pol is None:
            return None, None
        py, pla, plc, pga, pet, pkkt, certified = pol
        if certified:
            yu, lau, lcu, etau = data.unscale_point(py, pla, plc, pet)
            return finish((yu, lau, lcu, etau, pga), pkkt, iters, True), None
        if np.isfinite(pkkt):
            consider(py, pla, plc, pga, pet)
        return None, (py, pla, plc, pga, pet, pkkt)

    # phase 1: polish straight from the warm pattern (the dominant fast
    # path across warm-started DC iterations)
    done, cand = try_polish(y, lam_a, lam_c, gamma, eta, 0)
    if done is not None:
        return done

    # phase 2: interior point on the epigraph reformulation, then certify
    # its rounded pattern with the polish
    if opts.use_ipm:
        yi, lai, lci, gai, etai, _ok = _ipm(data, y, max_ipm_iters=opts.max_ipm_iters)
        if np.all(np.isfinite(yi)):
            yr = _round_ipm_point(yi)
            gai_eff = gai if hard else 0.0
            etai_eff = etai if has_eq else None
            consider(yr, lai, lci, gai_eff, etai_eff)
            done, cand2 = try_polish(yr, lai, lci, gai_eff, etai_eff, 0)
            if done is not None:
                return done
            if cand2 is not None and (cand is None or cand2[5] < cand[5]):
                cand = cand2
            # continue the fallback from the most promising point seen
            if cand is not None and cand[5] < _measure_original(
                data0, data, yr, lai, lci, gai_eff, etai_eff
            )[0]:
                y, lam_a, lam_c, gamma = cand[0], cand[1], cand[2], cand[3]
                eta = cand[4] if has_eq else None
            else:
                y, lam_a, lam_c, gamma = yr, lai, lci, gai_eff
                eta = etai_eff
    elif cand is not None and cand[5] < best_kkt * 1.001:
        y, lam_a, lam_c, gamma = cand[0], cand[1], cand[2], cand[3]
        eta = cand[4] if has_eq else None

    # phase 3: forward-backward-forward splitting fallback (short budget:
    # it only needs to perturb the pattern enough for the next polish)
    max_iter = min(max_iter, opts.fbf_budget)
    it = 0
    last_failed_sig = None
    est = np.inf
    last_polish_est = np.inf
    last_polish_it = -1
    est_marks = []
    rescales = 0
    while it < max_iter:
        # the AL coefficients drift with the iterate; a stalled natural
        # residual triggers re-equilibration around the current point
        if opts.equilibrate and it > 0 and it % 400 == 0:
            est_marks.append(est)
            if (
                len(est_marks) >= 2
                and rescales < 8
                and np.isfinite(est_marks[-1])
                and est_marks[-1] > 0.5 * est_marks[-2]
            ):
                yu, lau, lcu, etau = data.unscale_point(y, lam_a, lam_c, eta)
                data, _ = _make_scaled(model, yu, gamma)
                y = yu / data.s
                lam_a, lam_c, eta = data.scale_duals(lau, lcu, etau)
                w1 = data.w1
                alpha = 1.0
                last_failed_sig = None
                est_marks = []
                rescales += 1

        # the Newton polish runs on progress: at entry, on every 10x drop of
        # the natural residual, in the endgame, and as a periodic keep-alive
        want_polish = (
            it == 0
            or est < 0.1 * last_polish_est
            or (est <= 100.0 * tol and est < 0.5 * last_polish_est)
            or it - last_polish_it >= opts.polish_keepalive
        )
        if want_polish:
            sig = ((np.abs(y) > 1e-12).tobytes(), (lam_a > 0).tobytes(),
                   (lam_c > 0).tobytes())
            pol = None if sig == last_failed_sig else _polish(
                data, y, lam_a, lam_c, gamma, eta, check, tol, opts)
            last_polish_it = it
            last_polish_est = est
            if pol is not None:
                py, pla, plc, pga, pet, pkkt, certified = pol
                if certified:
                    yu, lau, lcu, etau = data.unscale_point(py, pla, plc, pet)
                    return finish((yu, lau, lcu, etau, pga), pkkt, it, True)
                if pkkt < 0.5 * best_kkt:
                    # adopt a clearly better (if uncertified) pattern solve;
                    # the splitting keeps converging from any starting point
                    y, lam_a, lam_c, gamma = py, pla, plc, pga
                    eta = pet if has_eq else None
                    consider(y, lam_a, lam_c, gamma, eta)
                else:
                    last_failed_sig = sig
            else:
                last_failed_sig = sig

        by, g, h, bga, bet = B(y, lam_a, lam_c, gamma, eta)
        for _ls in range(60):
            yb = y - alpha * by
            yb = np.sign(yb) * np.maximum(np.abs(yb) - alpha * w1, 0.0)
            lab = np.maximum(lam_a - alpha * g, 0.0)
            lcb = np.maximum(lam_c - alpha * h, 0.0)
            gab = max(gamma - alpha * bga, 0.0) if hard else 0.0
            etb = (eta - alpha * bet) if has_eq else None
            byb, gb, hb, bgab, betb = B(yb, lab, lcb, gab, etb)
            diff = pack_norm(byb - by, gb - g, hb - h, bgab - bga, None if bet is None else betb - bet)
            dist = pack_norm(yb - y, lab - lam_a, lcb - lam_c, gab - gamma, None if bet is None else etb - eta)
            if alpha * diff <= opts.armijo_delta * dist + 1e-18:
                break
            alpha = max(alpha * opts.shrink, opts.alpha_min)
        else:
            raise NonconvergenceError(
                "linesearch failed to find an acceptable step",
                best=None if best is None else finish(best, best_kkt, it, False),
                residual=best_kkt,
            )

        # natural residual at the resolvent point bounds dist(0, T(zbar))
        est = pack_norm(
            (y - yb) / alpha - by + byb,
            (lam_a - lab) / alpha - g + gb,
            (lam_c - lcb) / alpha - h + hb,
            ((gamma - gab) / alpha - bga + bgab) if hard else 0.0,
            ((eta - etb) / alpha - bet + betb) if has_eq else None,
        )
        if est <= tol:
            kkt = consider(yb, lab, lcb, gab, etb)
            if kkt <= tol:
                yu, lau, lcu, etau = data.unscale_point(yb, lab, lcb, etb)
                return finish((yu, lau, lcu, etau, gab), kkt, it + 1, True)
        elif it % 50 == 49:
            consider(yb, lab, lcb, gab, etb)

        y = yb - alpha * (byb - by)
        lam_a = np.maximum(lab - alpha * (gb - g), 0.0)
        lam_c = np.maximum(lcb - alpha * (hb - h), 0.0)
        gamma = max(gab - alpha * (bgab - bga), 0.0) if hard else 0.0
        eta = (etb - alpha * (betb - bet)) if has_eq else None
        if not (np.all(np.isfinite(y)) and np.isfinite(est)):
            raise NonconvergenceError(
                "iterates became non-finite (problem numerically intractable "
                "at the current penalty magnitudes)",
                best=None if best is None else finish(best, best_kkt, it, False),
                residual=best_kkt,
            )
        if _ls == 0:
            alpha = min(alpha * opts.grow, opts.alpha_max)

        dual_inf = max(
            float(np.max(lam_a, initial=0.0)), float(np.max(lam_c, initial=0.0)), gamma
        )
        if dual_inf > opts.dual_bound:
            prim_viol = max(float(np.max(-g, initial=0.0)), float(np.max(-h, initial=0.0)))
            if prim_viol > opts.feas_tol:
                raise InfeasibleError(
                    f"dual iterates diverged (|dual| > {opts.dual_bound:g}) with primal "
                    f"violation {prim_viol:.3e}; the polyhedron appears infeasible"
                )
        it += 1

    if best is None:
        consider(y, lam_a, lam_c, gamma, eta)
    raise NonconvergenceError(
        f"inner solver did not reach tol={tol:g} in {max_iter} iterations "
        f"(best residual {best_kkt:.3e})",
        best=finish(best, best_kkt, max_iter, False),
        residual=best_kkt,
    )


def prox_point_solve(
    model: ConvexModel,
    y0,
    tol: float = DEFAULT_KKT_TOL,
    max_iter: int = 60_000,
    max_prox_iters: int = 200,
    opts: SolverOptions | None = None,
) -> InnerResult:
    """Minimize a model WITHOUT a proximal term via proximal-point rounds.

    Programs like min q(y) + w^T|y| over F are convex but not strongly
    convex; iterating y_{t+1} = argmin model + 0.5 ||y - y_t||^2 keeps every
    inner solve strongly convex (fast path) and converges to a minimizer of
    the original program.  Rounds are inexact (inner tolerance follows the
    outer residual down) and consecutive near-parallel steps trigger an
    extrapolated re-centering to traverse polyhedral creep quickly.
    Termination certifies the ORIGINAL first-order system.
    """
    if model.prox_weight != 0:
        raise ParameterError("prox_point_solve expects a model without a proximal term")
    data0 = _Data(model)
    z = np.asarray(y0, dtype=float).copy()
    warm = None
    res = None
    total = 0
    best = None
    best_kkt = np.inf
    prev_step = None
    boost = 1.0
    # the interior point method does not need strong convexity: a direct
    # attempt usually settles the program in one shot
    try:
        res = solve_canonical(model, z, tol=tol, max_iter=max_iter, opts=opts)
        return res
    except NonconvergenceError as exc:
        if exc.best is not None:
            best = exc.best
            best_kkt = exc.best.kkt_residual
            z = exc.best.y.copy()
    for _t in range(max_prox_iters):
        itol = max(min(tol, 1e-9), min(1e-3, 0.05 * best_kkt))
        inner = replace(model, prox_center=z, prox_weight=1.0)
        try:
            res = solve_canonical(inner, z, tol=itol, max_iter=max_iter,
                                  warm=warm, opts=opts)
        except NonconvergenceError as exc:
            if exc.best is None:
                raise
            res = exc.best
            if best is not None:
                # retreat from an overshoot center and restart cautiously
                z = best.y.copy()
                warm = WarmStart.from_result(best)
                prev_step = None
                boost = 1.0
                continue
        warm = WarmStart.from_result(res)
        total += res.iterations
        kkt = _kkt_residual(data0, res.y, res.lam_a, res.lam_c, res.gamma, res.eta)
        if kkt < best_kkt:
            best_kkt = kkt
            best = res
        if kkt <= tol:
            return InnerResult(
                y=res.y, kkt_residual=kkt, iterations=total,
                objective=data0.value(res.y), lam_a=res.lam_a, lam_c=res.lam_c,
                gamma=res.gamma, eta=res.eta, converged=True,
            )
        # extrapolate through polyhedral creep: repeated step directions
        # move the next prox center several steps ahead
        step = res.y - z
        ns = float(np.linalg.norm(step))
        if prev_step is not None and ns > 0:
            nprev = float(np.linalg.norm(prev_step))
            cosang = float(step @ prev_step) / (ns * nprev) if nprev > 0 else 0.0
            boost = min(boost * 2.0, 16.0) if cosang > 0.995 else 1.0
        prev_step = step
        z = res.y + (boost - 1.0) * step
    raise NonconvergenceError(
        f"proximal-point loop did not certify tol={tol:g} in {max_prox_iters} "
        f"rounds (best residual {best_kkt:.3e})",
        best=best,
        residual=best_kkt,
    )


# --------------------------------------------------------------------------
# Public operations
# --------------------------------------------------------------------------


@dataclass(frozen=True)
class SubproblemSpec:
    """One DC-algorithm subproblem: linearized concave part at ``anchor``.

    Minimizes |y|_1/nu + AL(y; mu, rho, sigma) - sum_i theta'_{d_i}(anchor_i) y_i
    + 0.5 ||y - anchor||^2 over F.
    """

    problem: VlcsProblem
    anchor: np.ndarray
    d: np.ndarray
    mu: float
    rho: float
    sigma: float
    nu: float

    def __post_init__(self):
        if not (self.rho > 0 and self.sigma > 0 and self.nu > 0):
            raise ParameterError("rho, sigma and nu must be positive")
        if self.mu < 0:
            raise ParameterError("mu must be nonnegative")
        anchor = np.asarray(self.anchor, dtype=float).ravel()
        d = np.asarray(self.d, dtype=int).ravel()
        if anchor.shape != (self.problem.n,) or d.shape != (self.problem.n,):
            raise ParameterError("anchor and d must have length n")
        if not np.all(np.isin(d, (1, 2, 3))):
            raise ParameterError("selector entries must be in {1, 2, 3}")
        object.__setattr__(self, "anchor", anchor)
        object.__setattr__(self, "d", d)

    def model(self) -> ConvexModel:
        slopes = theta_slopes_for(self.anchor, self.d, self.nu)
        return ConvexModel(
            problem=self.problem,
            l1_weights=np.full(self.problem.n, 1.0 / self.nu),
            lin=-slopes,
            prox_center=self.anchor,
            prox_weight=1.0,
            al_mu=self.mu,
            al_rho=self.rho,
            al_sigma=self.sigma,
        )


def solve_subproblem(
    spec: SubproblemSpec,
    tol: float = DEFAULT_KKT_TOL,
    max_iter: int = 60_000,
    warm: WarmStart | None = None,
    opts: SolverOptions | None = None,
) -> InnerResult:
    """Solve one DC subproblem to a certified first-order residual <= tol."""
    p = spec.problem
    viol = max(
        float(np.max(p.b - p.A @ spec.anchor, initial=0.0)),
        float(np.max(p.d - p.C @ spec.anchor, initial=0.0)),
    )
    if viol > 1e-6:
        raise PreconditionError(f"anchor violates F by {viol:.3e}")
    y0 = spec.anchor if (warm is None or warm.y is None) else warm.y
    return solve_canonical(spec.model(), y0, tol=tol, max_iter=max_iter, warm=warm, opts=opts)


def project_onto_F(
    p: VlcsProblem,
    x,
    tol: float = DEFAULT_KKT_TOL,
    max_iter: int = 60_000,
    opts: SolverOptions | None = None,
) -> np.ndarray:
    """Euclidean projection of x onto F = {y : Ay >= b, Cy >= d}."""
    x = np.asarray(x, dtype=float).ravel()
    model = ConvexModel(
        problem=p,
        l1_weights=np.zeros(p.n),
        lin=np.zeros(p.n),
        prox_center=x,
        prox_weight=1.0,
    )
    res = solve_canonical(model, x, tol=tol, max_iter=max_iter, opts=opts)
    return res.y
