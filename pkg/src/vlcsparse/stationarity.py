"""Stationarity certification and first-order residuals for affine MPCCs.

At a point of the complementarity solution set S the classical classes
(C-, M-, S-stationarity) ask for multipliers (u, v) with

    A^T u + C^T v  in  dPhi(x),   u_i = 0 on I_+0,   v_i = 0 on I_0+,

plus per-class sign conditions on the biactive set I_00 (C: u_i v_i >= 0,
M: u_i > 0 & v_i > 0 or u_i v_i = 0, S: u_i >= 0 & v_i >= 0).  The lifted
classes replace dPhi by the DC selection d(|x_i|/nu) - theta'_{d_i};
lifted stationarity asks for SOME admissible selector d, d-stationarity
for EVERY one.  Selector ambiguity only occurs at |x_i| = nu, so the
enumeration is over tie coordinates.

All multiplier systems reduce to bounded-variable least squares (interval
targets at zero coordinates, signed multipliers on active rows); branch
disjunctions on I_00 are searched depth-first with relaxation pruning and
an explicit call budget, beyond which a flag is reported as undetermined.

Because Phi is separable and the limiting subdifferential of phi at the
cap |t| = nu is exactly the two-point set of DC selections, the C system
and the lifted system coincide coordinatewise; the code decides them with
one search and keeps both flags.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import lsq_linear

from .core import (
    DEFAULT_ACT_TOL,
    VlcsProblem,
    evaluate_gh,
    index_sets,
    residual_res,
)
from .errors import ParameterError, PreconditionError
from .inner import ConvexModel, SolverOptions, WarmStart, solve_canonical

DEFAULT_STRICT_TOL = 1e-10
DEFAULT_RANK_TOL = 1e-8
DEFAULT_DECISION_TOL = 1e-6
DEFAULT_BUDGET = 2048
M_ENUM_CAP = 3**12
TIE_ENUM_CAP = 2**12


@dataclass
class StationarityCertificate:
    """Per-point classification flags with multipliers and diagnostics.

    Flags are three-valued: True / False / None (undetermined, e.g. when a
    branch enumeration exceeded its budget).  ``residual`` is the smallest
    attained norm in the lifted multiplier system among the selections the
    search visited (0 up to the decision tolerance when is_lifted is True).
    """

    is_c: bool | None = None
    is_m: bool | None = None
    is_s: bool | None = None
    is_lifted: bool | None = None
    is_d: bool | None = None
    u: np.ndarray | None = None
    v: np.ndarray | None = None
    d: np.ndarray | None = None
    residual: float = np.nan
    licq: bool | None = None
    licq_min_sv: float = np.nan
    tolerances: dict = field(default_factory=dict)
    note: str = ""


def class_label(cert: StationarityCertificate) -> str:
    """Compact deterministic label for CSV reports, e.g. 'S+d' or 'C+lifted'."""
    if cert.is_s is None and cert.is_c is None and cert.is_lifted is None:
        return "und"
    if cert.is_s:
        cms = "S"
    elif cert.is_m:
        cms = "M"
    elif cert.is_c:
        cms = "C"
    else:
        cms = "-"
    if cert.is_d:
        return f"{cms}+d"
    if cert.is_lifted:
        return f"{cms}+lifted"
    return cms


def format_certificate(cert: StationarityCertificate) -> str:
    """Multi-line human-readable rendering used by the check subcommand."""

    def flag(v):
        return {True: "yes", False: "no", None: "undetermined"}[v]

    lines = [
        f"C-stationary:        {flag(cert.is_c)}",
        f"M-stationary:        {flag(cert.is_m)}",
        f"S-stationary:        {flag(cert.is_s)}",
        f"lifted-stationary:   {flag(cert.is_lifted)}",
        f"d-stationary:        {flag(cert.is_d)}",
        f"lifted residual:     {cert.residual:.3e}",
        f"MPCC-LICQ:           {flag(cert.licq)} (min singular value {cert.licq_min_sv:.3e})",
    ]
    if cert.u is not None:
        lines.append(f"multipliers u:       {np.array2string(cert.u, precision=6)}")
        lines.append(f"multipliers v:       {np.array2string(cert.v, precision=6)}")
    if cert.d is not None:
        lines.append(f"selector d:          {np.array2string(cert.d)}")
    if cert.note:
        lines.append(f"note:                {cert.note}")
    return "\n".join(lines)


def check_mpcc_licq(p: VlcsProblem, x, act_tol: float = DEFAULT_ACT_TOL,
                    rank_tol: float = DEFAULT_RANK_TOL):
    """Linear independence of active gradients {A_i : i in I_G} u {C_i : i in I_H}.

    Returns (flag, min_singular_value); vacuously true with no active rows.
    """
    isets = index_sets(p, x, act_tol)
    rows = [p.A[sorted(isets.i_g)], p.C[sorted(isets.i_h)]]
    R = np.vstack([r for r in rows if r.size]) if (isets.i_g or isets.i_h) else None
    if R is None or R.shape[0] == 0:
        return True, np.inf
    if R.shape[0] > R.shape[1]:
        return False, 0.0
    sv = np.linalg.svd(R, compute_uv=False)
    return bool(sv[-1] > rank_tol * sv[0]), float(sv[-1])


# --------------------------------------------------------------------------
# Bounded least-squares feasibility engine
# --------------------------------------------------------------------------


def _bounded_lsq(M, rhs, lo, hi):
    """min ||M z - rhs|| s.t. lo <= z <= hi; returns (z, residual norm)."""
    if M.shape[1] == 0:
        return np.zeros(0), float(np.linalg.norm(rhs))
    try:
        sol = lsq_linear(M, rhs, bounds=(lo, hi), method="bvls")
        z = sol.x
    except Exception:
        sol = lsq_linear(M, rhs, bounds=(lo, hi), method="trf")
        z = sol.x
    return z, float(np.linalg.norm(M @ z - rhs))


class _System:
    """A^T u + C^T v = g with interval/fixed targets and branch dimensions.

    Variables are z = [u over ju, v over jv, s over interval coordinates];
    the equality is encoded as columns [A[ju]^T, C[jv]^T, -I_intervals]
    against the fixed part of g.  ``dims`` lists enumeration dimensions:
    ("sign", i) with bound options for (u_i, v_i), and ("gsel", j) with a
    finite set of admissible target values at a tie coordinate.
    """

    def __init__(self, p, ju, jv, g_fixed, g_lo, g_hi, interval_mask):
        self.ju = list(ju)
        self.jv = list(jv)
        n = p.n
        cols = [p.A[self.ju].T if self.ju else np.zeros((n, 0)),
                p.C[self.jv].T if self.jv else np.zeros((n, 0))]
        self.int_idx = np.flatnonzero(interval_mask)
        S = np.zeros((n, self.int_idx.size))
        for kk, j in enumerate(self.int_idx):
            S[j, kk] = -1.0
        cols.append(S)
        self.M = np.hstack(cols)
        self.rhs0 = g_fixed.copy()
        self.nu_ = len(self.ju)
        self.nv_ = len(self.jv)
        self.base_lo = np.concatenate([
            np.full(self.nu_ + self.nv_, -np.inf), g_lo[self.int_idx]
        ])
        self.base_hi = np.concatenate([
            np.full(self.nu_ + self.nv_, np.inf), g_hi[self.int_idx]
        ])
        self.dims = []
        self.scale = max(1.0, float(np.max(np.abs(g_fixed), initial=0.0)),
                         float(np.max(np.abs(g_hi), initial=0.0)))

    def u_col(self, i):
        return self.ju.index(i)

    def v_col(self, i):
        return self.nu_ + self.jv.index(i)

    def restrict(self, i_00, kind, strict_tol):
        """Attach per-index branch dimensions for the I_00 sign conditions."""
        for i in sorted(i_00):
            cu, cv = self.u_col(i), self.v_col(i)
            if kind == "s":
                self.base_lo[cu] = 0.0
                self.base_lo[cv] = 0.0
            elif kind == "c":
                self.dims.append(("sign", i, [
                    {cu: (0.0, np.inf), cv: (0.0, np.inf)},
                    {cu: (-np.inf, 0.0), cv: (-np.inf, 0.0)},
                ]))
            elif kind == "m":
                self.dims.append(("sign", i, [
                    {cu: (strict_tol, np.inf), cv: (strict_tol, np.inf)},
                    {cu: (0.0, 0.0)},
                    {cv: (0.0, 0.0)},
                ]))
            else:
                raise ParameterError(f"unknown restriction kind {kind!r}")

    def add_gsel(self, j, values):
        self.dims.append(("gsel", j, [{"g": (j, val)} for val in values]))


def _solve_prefix(sys_: _System, assignment, tol):
    """Solve the relaxation fixing dims[k] = assignment[k] for assigned k.

    Unassigned sign dimensions stay free and unassigned tie coordinates are
    relaxed to the interval hull of their options, so an infeasible prefix
    certifies infeasibility of every completion.
    """
    lo = sys_.base_lo.copy()
    hi = sys_.base_hi.copy()
    rhs = sys_.rhs0.copy()
    extra_j, extra_lo, extra_hi = [], [], []
    for k, (kind, _key, options) in enumerate(sys_.dims):
        choice = assignment.get(k)
        if choice is None:
            if kind == "gsel":
                vals = [opt["g"][1] for opt in options]
                j = options[0]["g"][0]
                rhs[j] = 0.0
                extra_j.append(j)
                extra_lo.append(min(vals))
                extra_hi.append(max(vals))
            continue
        opt = options[choice]
        for ck, bounds in opt.items():
            if ck == "g":
                j, val = bounds
                rhs[j] = val
            else:
                lo[ck] = max(lo[ck], bounds[0])
                hi[ck] = min(hi[ck], bounds[1])
    if extra_j:
        S = np.zeros((rhs.size, len(extra_j)))
        for kk, j in enumerate(extra_j):
            S[j, kk] = -1.0
        M = np.hstack([sys_.M, S])
        lo = np.concatenate([lo, extra_lo])
        hi = np.concatenate([hi, extra_hi])
    else:
        M = sys_.M
    z, res = _bounded_lsq(M, rhs, lo, hi)
    return res <= tol * sys_.scale, z, res


def _search_exists(sys_: _System, tol, budget, fixed=None):
    """DFS over branch dims with relaxation pruning.

    Returns (decision, witness_z, witness_assignment, best_full_residual);
    decision is True/False/None (None = call budget exhausted), best_full
    residual is the smallest norm among fully assigned systems solved.
    """
    calls = [0]
    best_res = [np.inf]
    fixed = fixed or {}

    def rec(idx, assignment):
        if calls[0] >= budget:
            return None, None, None
        while idx < len(sys_.dims) and idx in assignment:
            idx += 1
        calls[0] += 1
        feas, z, res = _solve_prefix(sys_, assignment, tol)
        if idx >= len(sys_.dims):
            best_res[0] = min(best_res[0], res)
            if feas:
                return True, z, dict(assignment)
            return False, None, None
        if not feas:
            return False, None, None
        undecided = False
        for choice in range(len(sys_.dims[idx][2])):
            assignment[idx] = choice
            ok, z2, asg = rec(idx + 1, assignment)
            del assignment[idx]
            if ok:
                return True, z2, asg
            if ok is None:
                undecided = True
        return (None, None, None) if undecided else (False, None, None)

    ok, z, asg = rec(0, dict(fixed))
    return ok, z, asg, best_res[0]


def _search_forall_gsel(sys_: _System, tol, budget):
    """For-all over 'gsel' (tie selector) dims, exists over 'sign' dims."""
    gsel = [k for k, d in enumerate(sys_.dims) if d[0] == "gsel"]
    if not gsel:
        return _search_exists(sys_, tol, budget)[0]
    counts = [len(sys_.dims[k][2]) for k in gsel]
    total = int(np.prod(counts))
    if total > TIE_ENUM_CAP:
        return None
    combo = [0] * len(gsel)
    while True:
        fixed = {k: c for k, c in zip(gsel, combo)}
        ok, _z, _a, _r = _search_exists(sys_, tol, budget, fixed=fixed)
        if ok is False:
            return False
        if ok is None:
            return None
        for pos in range(len(combo) - 1, -1, -1):
            combo[pos] += 1
            if combo[pos] < counts[pos]:
                break
            combo[pos] = 0
        else:
            return True


# --------------------------------------------------------------------------
# Classification
# --------------------------------------------------------------------------


def _coordinate_targets(x, nu, zero_tol, tie_tol):
    """Per-coordinate targets of the multiplier systems.

    Returns (g_fixed, g_lo, g_hi, interval_mask, tie_idx); tie coordinates
    (|x_j| = nu) are left at 0 in g_fixed and enumerated by the caller.
    Identical for the limiting subdifferential of Phi and for the DC
    selections, see module docstring.
    """
    x = np.asarray(x, dtype=float)
    n = x.size
    g_fixed = np.zeros(n)
    g_lo = np.zeros(n)
    g_hi = np.zeros(n)
    interval = np.zeros(n, dtype=bool)
    ties = []
    for j in range(n):
        t = x[j]
        if abs(t) <= zero_tol:
            interval[j] = True
            g_lo[j] = -1.0 / nu
            g_hi[j] = 1.0 / nu
        elif abs(abs(t) - nu) <= tie_tol:
            ties.append(j)
        elif abs(t) < nu:
            g_fixed[j] = np.sign(t) / nu
        else:
            g_fixed[j] = 0.0
    return g_fixed, g_lo, g_hi, interval, ties


def _witness(sys_: _System, z, m):
    u = np.zeros(m)
    v = np.zeros(m)
    if z is not None and z.size >= sys_.nu_ + sys_.nv_:
        u[sys_.ju] = z[: sys_.nu_]
        v[sys_.jv] = z[sys_.nu_ : sys_.nu_ + sys_.nv_]
    return u, v


def classify(
    p: VlcsProblem,
    x,
    nu: float,
    act_tol: float = DEFAULT_ACT_TOL,
    zero_tol: float = None,
    strict_tol: float = DEFAULT_STRICT_TOL,
    decision_tol: float = DEFAULT_DECISION_TOL,
    budget: int = DEFAULT_BUDGET,
) -> StationarityCertificate:
    """Classify x (which must lie in S up to act_tol) for the capped problem.

    The search order exploits the implication chain: S-stationarity is
    decided first (it implies M and C); the C/lifted system is decided
    once; d-stationarity enumerates selector ties only when they exist.
    """
    if not (nu > 0):
        raise ParameterError(f"nu must be positive, got {nu}")
    x = np.asarray(x, dtype=float).ravel()
    res = residual_res(p, x)
    if res > act_tol:
        raise PreconditionError(
            f"point is not in S to act_tol: Res = {res:.3e} > {act_tol:g}"
        )
    zero_tol = act_tol if zero_tol is None else zero_tol
    tie_tol = act_tol
    isets = index_sets(p, x, act_tol)
    ju = sorted(isets.i_0plus | isets.i_00)
    jv = sorted(isets.i_plus0 | isets.i_00)
    g_fixed, g_lo, g_hi, interval, ties = _coordinate_targets(x, nu, zero_tol, tie_tol)
    licq_flag, licq_sv = check_mpcc_licq(p, x, act_tol)

    def fresh(kind):
        sys_ = _System(p, ju, jv, g_fixed, g_lo, g_hi, interval)
        if kind is not None:
            sys_.restrict(isets.i_00, kind, strict_tol)
        for j in ties:
            sys_.add_gsel(j, [np.sign(x[j]) / nu, 0.0])
        return sys_

    cert = StationarityCertificate(
        licq=licq_flag,
        licq_min_sv=licq_sv,
        tolerances={
            "act_tol": act_tol,
            "zero_tol": zero_tol,
            "strict_tol": strict_tol,
            "decision_tol": decision_tol,
            "budget": budget,
        },
    )

    # S-stationarity: plain bounds, no branching beyond selector ties.
    s_ok, s_z, _s_asg, _ = _search_exists(fresh("s"), decision_tol, budget)
    cert.is_s = s_ok

    # C-stationarity and lifted stationarity share one system (the limiting
    # subdifferential of phi at the cap equals the set of DC selections).
    sys_c = fresh("c")
    c_ok, c_z, c_asg, c_res = _search_exists(sys_c, decision_tol, budget)
    cert.is_c = c_ok
    cert.is_lifted = c_ok
    cert.residual = c_res if np.isfinite(c_res) else np.nan
    if c_ok:
        u, v = _witness(sys_c, c_z, p.m)
        cert.u, cert.v = u, v
        d = np.ones(p.n, dtype=int)
        d[x >= nu + tie_tol] = 2
        d[x <= -(nu + tie_tol)] = 3
        for k, (kind, _key, options) in enumerate(sys_c.dims):
            if kind != "gsel":
                continue
            j, val = options[c_asg[k]]["g"]
            d[j] = 1 if val != 0.0 else (2 if x[j] > 0 else 3)
        cert.d = d
    elif s_ok:
        u, v = _witness(fresh("s"), s_z, p.m)
        cert.u, cert.v = u, v

    # d-stationarity: equal to lifted without ties, else for-all over ties.
    if not ties:
        cert.is_d = cert.is_lifted
    elif len(ties) > 12:
        cert.is_d = None
        cert.note = "tie enumeration cap exceeded"
    elif cert.is_lifted is False:
        cert.is_d = False
    else:
        cert.is_d = _search_forall_gsel(fresh("c"), decision_tol, budget)

    # M-stationarity via the chain shortcuts, else branch enumeration.
    if cert.is_s:
        cert.is_m = True
    elif cert.is_c is False:
        cert.is_m = False
    elif len(isets.i_00) > 12 or 3 ** len(isets.i_00) > M_ENUM_CAP:
        cert.is_m = None
        cert.note = (cert.note + "; " if cert.note else "") + "M-branch cap exceeded"
    else:
        m_ok, _, _, _ = _search_exists(fresh("m"), decision_tol, budget)
        cert.is_m = m_ok

    # Guard the implication chain against budget asymmetries.
    if cert.is_s and cert.is_c is False:
        cert.is_c = None
        cert.is_lifted = None
    if cert.is_d and cert.is_lifted is False:
        cert.is_lifted = None
    return cert


def certify_point(p, x, nu, act_tol=DEFAULT_ACT_TOL, **kwargs) -> StationarityCertificate:
    """classify(), but precondition failures yield an undetermined certificate."""
    try:
        return classify(p, x, nu, act_tol=act_tol, **kwargs)
    except PreconditionError as exc:
        licq_flag, licq_sv = check_mpcc_licq(p, x, act_tol)
        return StationarityCertificate(
            licq=licq_flag,
            licq_min_sv=licq_sv,
            note=str(exc),
            tolerances={"act_tol": act_tol},
        )


# --------------------------------------------------------------------------
# First-order residuals of the relaxed problems
# --------------------------------------------------------------------------


def _l1_targets(x, nu, mode, weights, zero_tol):
    """Fixed slope / interval data of the sparsity term for residual LSQs."""
    x = np.asarray(x, dtype=float)
    n = x.size
    if mode == "capped":
        w = np.full(n, 1.0 / nu)
    elif mode == "l1":
        w = np.ones(n)
    elif mode == "weighted":
        w = np.asarray(weights, dtype=float)
    else:
        raise ParameterError(f"unknown mode {mode!r}")
    zero = np.abs(x) <= zero_tol
    fixed = np.where(zero, 0.0, np.sign(x) * w)
    return w, zero, fixed


def al_residual(
    p: VlcsProblem,
    x,
    mu: float,
    rho: float,
    sigma: float,
    nu: float,
    act_tol: float = DEFAULT_ACT_TOL,
    mode: str = "capped",
    weights=None,
    zero_tol: float = 1e-9,
) -> float:
    """dist(0, grad penalty + d(sparsity) - theta' + N_F(x)) at an AL iterate.

    This is the stopping quantity of the AL loop: the penalty gradient is
    [mu + rho h_sigma(x)]_+ grad q(x), the normal cone of F is generated by
    the active rows of A and C, and the subgradient interval applies at
    zero coordinates.  Selector ties are resolved by taking the minimum
    over single-coordinate alternatives.
    """
    x = np.asarray(x, dtype=float).ravel()
    g, h, comp = evaluate_gh(p, x)
    pi = max(mu + rho * (comp - sigma), 0.0)
    gradq = p.A.T @ h + p.C.T @ g
    w, zero, fixed = _l1_targets(x, nu, mode, weights, zero_tol)

    act_a = np.flatnonzero(g <= act_tol)
    act_c = np.flatnonzero(h <= act_tol)
    idx = np.flatnonzero(zero)
    S = np.zeros((x.size, idx.size))
    for kk, j in enumerate(idx):
        S[j, kk] = 1.0
    M = np.hstack([-p.A[act_a].T, -p.C[act_c].T, S])
    lo = np.concatenate([np.zeros(act_a.size + act_c.size), -w[idx]])
    hi = np.concatenate([np.full(act_a.size + act_c.size, np.inf), w[idx]])

    def residual_for(theta_slopes):
        base = pi * gradq + fixed - theta_slopes
        _, r = _bounded_lsq(M, -base, lo, hi)
        return r

    if mode == "capped":
        from .core import d_selector, theta_slopes_for

        d0 = d_selector(x, nu)
        best = residual_for(theta_slopes_for(x, d0, nu))
        for j in np.flatnonzero(np.abs(np.abs(x) - nu) <= act_tol):
            d = d0.copy()
            d[j] = 1 if d0[j] != 1 else (2 if x[j] > 0 else 3)
            best = min(best, residual_for(theta_slopes_for(x, d, nu)))
        return best
    return residual_for(np.zeros(x.size))


def lifted_residual(
    p_relaxed,
    x,
    nu: float,
    act_tol: float = DEFAULT_ACT_TOL,
    mode: str = "capped",
    weights=None,
    zero_tol: float = 1e-9,
) -> float:
    """Residual of the sigma-relaxed lifted system at x in S_sigma.

    Normal-cone elements of S_sigma are - A^T alpha - C^T beta + gamma
    grad q(x) with alpha, beta >= 0 supported on active rows and gamma >= 0
    admissible only when the relaxed complementarity constraint is active.
    """
    p, sigma = p_relaxed
    x = np.asarray(x, dtype=float).ravel()
    g, h, comp = evaluate_gh(p, x)
    feas_viol = max(float(np.max(-g, initial=0.0)), float(np.max(-h, initial=0.0)),
                    comp - sigma)
    if feas_viol > act_tol:
        raise PreconditionError(
            f"point is not in the relaxed feasible set to act_tol "
            f"(violation {feas_viol:.3e})"
        )
    gradq = p.A.T @ h + p.C.T @ g
    w, zero, fixed = _l1_targets(x, nu, mode, weights, zero_tol)
    act_a = np.flatnonzero(g <= act_tol)
    act_c = np.flatnonzero(h <= act_tol)
    gamma_on = comp >= sigma - act_tol

    idx = np.flatnonzero(zero)
    S = np.zeros((x.size, idx.size))
    for kk, j in enumerate(idx):
        S[j, kk] = 1.0

    blocks = [-p.A[act_a].T, -p.C[act_c].T, S]
    lo = [np.zeros(act_a.size), np.zeros(act_c.size), -w[zero]]
    hi = [np.full(act_a.size, np.inf), np.full(act_c.size, np.inf), w[zero]]
    if gamma_on:
        blocks.append(gradq.reshape(-1, 1))
        lo.append(np.zeros(1))
        hi.append(np.full(1, np.inf))
    M = np.hstack(blocks)
    lo = np.concatenate(lo)
    hi = np.concatenate(hi)

    def residual_for(theta_slopes):
        base = fixed - theta_slopes
        try:
            _, r = _bounded_lsq(M, -base, lo, hi)
        except Exception:
            return np.inf
        return r

    if mode == "capped":
        from .core import d_selector, theta_slopes_for

        d0 = d_selector(x, nu)
        best = residual_for(theta_slopes_for(x, d0, nu))
        for j in np.flatnonzero(np.abs(np.abs(x) - nu) <= act_tol):
            d = d0.copy()
            d[j] = 1 if d0[j] != 1 else (2 if x[j] > 0 else 3)
            best = min(best, residual_for(theta_slopes_for(x, d, nu)))
        return best
    return residual_for(np.zeros(x.size))


# --------------------------------------------------------------------------
# Distances to the solution set and the error-bound probe
# --------------------------------------------------------------------------


def _psd_check(p: VlcsProblem, tol=1e-8):
    Q, _, _ = p.comp_quadratic()
    w = np.linalg.eigvalsh(0.5 * (Q + Q.T))
    scale = max(1.0, float(np.max(np.abs(w), initial=0.0)))
    return float(w[0]) >= -tol * scale, w


def dist_to_solution_set(
    p: VlcsProblem,
    x,
    x_ref,
    tol: float = 1e-9,
    act_tol: float = DEFAULT_ACT_TOL,
    opts: SolverOptions = None,
) -> float:
    """Euclidean distance from x to S via its polyhedral characterization.

    When A^T C is PSD and x_ref solves the system, S coincides with
    {y in F : (A^T C + C^T A)(y - x_ref) = 0, (b^T C + d^T A)(y - x_ref) = 0},
    so the distance is a convex projection.
    """
    ok, eigw = _psd_check(p)
    if not ok:
        raise PreconditionError(
            f"A^T C is not PSD (min eigenvalue {eigw[0]:.3e}); the polyhedral "
            f"characterization of S does not apply"
        )
    x = np.asarray(x, dtype=float).ravel()
    x_ref = np.asarray(x_ref, dtype=float).ravel()
    r = residual_res(p, x_ref)
    if r > act_tol:
        raise PreconditionError(f"x_ref is not in S to act_tol: Res = {r:.3e}")
    Q, _, _ = p.comp_quadratic()
    w, V = np.linalg.eigh(0.5 * (Q + Q.T))
    scale = max(1.0, float(np.max(np.abs(w))))
    keep = w > 1e-12 * scale
    rows = [V[:, keep].T * 1.0] if np.any(keep) else []
    qvec = p.C.T @ p.b + p.A.T @ p.d
    if np.linalg.norm(qvec) > 0:
        rows.append((qvec / np.linalg.norm(qvec)).reshape(1, -1))
    E = np.vstack(rows) if rows else None
    f = E @ x_ref if E is not None else None
    model = ConvexModel(
        problem=p,
        l1_weights=np.zeros(p.n),
        lin=np.zeros(p.n),
        prox_center=x,
        prox_weight=1.0,
        E=E,
        f_eq=f,
    )
    res = solve_canonical(model, x_ref, tol=tol, opts=opts)
    return float(np.linalg.norm(x - res.y))


@dataclass
class ProbeResult:
    rows: list           # (sigma, dist) pairs, sigma decreasing
    beta: float          # smallest constant with dist <= beta (sqrt(sigma)+sigma)
    points: list = field(default_factory=list)


def error_bound_probe(
    p: VlcsProblem,
    x_ref,
    sigma_list,
    probe_point=None,
    tol: float = 1e-9,
    act_tol: float = DEFAULT_ACT_TOL,
    opts: SolverOptions = None,
) -> ProbeResult:
    """Empirical check of the affine error bound dist(x, S) <= beta (sqrt(s)+s).

    For each sigma the probe samples a feasible point of S_sigma by
    projecting a fixed exterior point onto {y in F : q(y) <= sigma} (warm
    started along the decreasing sigma sequence), then measures its distance
    to S.  The fitted beta is the smallest constant covering all rows.
    """
    sigmas = [float(s) for s in sigma_list]
    if not sigmas or any(s <= 0 for s in sigmas):
        raise ParameterError("sigma_list must contain positive values")
    if any(s2 >= s1 for s1, s2 in zip(sigmas, sigmas[1:])):
        raise ParameterError("sigma_list must be strictly decreasing")
    x_ref = np.asarray(x_ref, dtype=float).ravel()
    if probe_point is None:
        g, h, _ = evaluate_gh(p, x_ref)
        grad = p.A.T @ h + p.C.T @ g
        nrm = np.linalg.norm(grad)
        probe_point = x_ref + (grad / nrm if nrm > 0 else np.ones(p.n) / np.sqrt(p.n))
    z0 = np.asarray(probe_point, dtype=float).ravel()

    rows = []
    points = []
    warm = None
    y_prev = x_ref
    beta = 0.0
    for s in sigmas:
        model = ConvexModel(
            problem=p,
            l1_weights=np.zeros(p.n),
            lin=np.zeros(p.n),
            prox_center=z0,
            prox_weight=1.0,
            q_cap=s,
        )
        res = solve_canonical(model, y_prev, tol=tol, warm=warm, opts=opts)
        warm = WarmStart.from_result(res)
        y_prev = res.y
        dist = dist_to_solution_set(p, res.y, x_ref, tol=tol, act_tol=act_tol, opts=opts)
        rows.append((s, dist))
        points.append(res.y)
        beta = max(beta, dist / (np.sqrt(s) + s))
    return ProbeResult(rows=rows, beta=beta, points=points)
