"""Problem data, the capped-l1 surrogate, index sets and scalar residuals.

A vertical linear complementarity system (VLCS) is described by matrices
A, C (m x n) and vectors b, d (length m); the task is to find x with

    Ax - b >= 0,  Cx - d >= 0,  (Ax - b)^T (Cx - d) = 0.

Sparsity of x is promoted by the capped-l1 surrogate
phi(t) = min(1, |t|/nu), which admits the DC split
phi(t) = |t|/nu - max{theta_1(t), theta_2(t), theta_3(t)} with
theta_1 = 0, theta_2 = t/nu - 1, theta_3 = -t/nu - 1.

Everything in this module is a pure function over immutable inputs.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .errors import DimensionError, ParameterError

DEFAULT_ACT_TOL = 1e-6
DEFAULT_ZERO_TOL = 1e-6


def _as_vector(v, length, name):
    v = np.asarray(v, dtype=float).ravel()
    if v.shape != (length,):
        raise DimensionError(f"{name} must have length {length}, got shape {v.shape}")
    return v


@dataclass(frozen=True)
class VlcsProblem:
    """Affine complementarity system (A, C, b, d).

    G(x) = Ax - b and H(x) = Cx - d; the feasible polyhedron is
    F = {x : G(x) >= 0, H(x) >= 0} and the solution set is
    S = {x in F : G(x)^T H(x) = 0}.
    """

    A: np.ndarray
    C: np.ndarray
    b: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        A = np.atleast_2d(np.asarray(self.A, dtype=float))
        C = np.atleast_2d(np.asarray(self.C, dtype=float))
        if A.shape != C.shape:
            raise DimensionError(f"A and C must have identical shape, got {A.shape} vs {C.shape}")
        m, n = A.shape
        if m < 1 or n < 1:
            raise ParameterError("problem must have m >= 1 and n >= 1")
        b = _as_vector(self.b, m, "b")
        d = _as_vector(self.d, m, "d")
        for name, arr in (("A", A), ("C", C), ("b", b), ("d", d)):
            if not np.all(np.isfinite(arr)):
                raise ParameterError(f"{name} contains non-finite entries")
        object.__setattr__(self, "A", A)
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "b", b)
        object.__setattr__(self, "d", d)

    @property
    def m(self) -> int:
        return self.A.shape[0]

    @property
    def n(self) -> int:
        return self.A.shape[1]

    def comp_quadratic(self):
        """Return (Q, q, c0) with (Ax-b)^T(Cx-d) = 0.5 x^T Q x + q^T x + c0.

        Q = A^T C + C^T A is the (symmetric) Hessian of the complementarity
        product; it is PSD exactly when A^T C is.  Cached: every inner solve
        reuses it.
        """
        cached = getattr(self, "_comp_quad", None)
        if cached is None:
            Q = self.A.T @ self.C
            Q = Q + Q.T
            q = -(self.A.T @ self.d + self.C.T @ self.b)
            c0 = float(self.b @ self.d)
            cached = (Q, q, c0)
            object.__setattr__(self, "_comp_quad", cached)
        return cached


@dataclass(frozen=True)
class CappedL1Params:
    """Parameters of the capped-l1 surrogate.

    nu is the cap width (entries with |t| >= nu count fully); zero_tol is
    only used when counting coordinates as zero in reports.
    """

    nu: float
    zero_tol: float = DEFAULT_ZERO_TOL

    def __post_init__(self):
        if not (self.nu > 0):
            raise ParameterError(f"nu must be positive, got {self.nu}")
        if self.zero_tol < 0:
            raise ParameterError(f"zero_tol must be nonnegative, got {self.zero_tol}")


@dataclass(frozen=True)
class IndexSets:
    """Active index sets of a (near-)complementary point.

    i_0plus = i_g \\ i_h, i_plus0 = i_h \\ i_g and i_00 = i_g & i_h are
    mutually disjoint and cover i_g | i_h.
    """

    i_g: frozenset
    i_h: frozenset
    i_0plus: frozenset = field(init=False)
    i_plus0: frozenset = field(init=False)
    i_00: frozenset = field(init=False)
    act_tol: float = DEFAULT_ACT_TOL

    def __post_init__(self):
        object.__setattr__(self, "i_0plus", frozenset(self.i_g - self.i_h))
        object.__setattr__(self, "i_plus0", frozenset(self.i_h - self.i_g))
        object.__setattr__(self, "i_00", frozenset(self.i_g & self.i_h))


def _check_nu(nu):
    if not (nu > 0):
        raise ParameterError(f"nu must be positive, got {nu}")


def phi_capped(t: float, nu: float) -> float:
    """Capped-l1 value min(1, |t|/nu); even in t, nondecreasing in |t|."""
    _check_nu(nu)
    return min(1.0, abs(t) / nu)


def phi_sum(x, nu: float) -> float:
    """Sum of phi_capped over coordinates; equals ||x||_0 when nonzeros >= nu."""
    _check_nu(nu)
    x = np.asarray(x, dtype=float)
    return float(np.minimum(1.0, np.abs(x) / nu).sum())


def theta_value(t, piece, nu):
    """Value of the affine piece theta_piece at t (piece in {1,2,3})."""
    if piece == 1:
        return np.zeros_like(np.asarray(t, dtype=float))
    if piece == 2:
        return np.asarray(t, dtype=float) / nu - 1.0
    if piece == 3:
        return -np.asarray(t, dtype=float) / nu - 1.0
    raise ParameterError(f"theta piece must be 1, 2 or 3, got {piece}")


def theta_slope(piece, nu):
    """Slope of the affine piece theta_piece: 0, 1/nu or -1/nu."""
    if piece == 1:
        return 0.0
    if piece == 2:
        return 1.0 / nu
    if piece == 3:
        return -1.0 / nu
    raise ParameterError(f"theta piece must be 1, 2 or 3, got {piece}")


def theta_max(x, nu):
    """Componentwise max{theta_1, theta_2, theta_3} = max(0, |t|/nu - 1)."""
    x = np.asarray(x, dtype=float)
    return np.maximum(0.0, np.abs(x) / nu - 1.0)


def active_theta_set(t: float, nu: float) -> frozenset:
    """Indices among {1,2,3} attaining max{0, t/nu - 1, -t/nu - 1} at t.

    |t| < nu gives {1}; t = +-nu gives a two-element tie; |t| > nu gives
    the single non-constant piece.
    """
    _check_nu(nu)
    vals = (0.0, t / nu - 1.0, -t / nu - 1.0)
    best = max(vals)
    return frozenset(i + 1 for i, v in enumerate(vals) if v == best)


def d_selector(x, nu: float) -> np.ndarray:
    """Deterministic piece selector: 1 if |x_i| < nu, 2 if x_i >= nu, 3 if x_i <= -nu.

    Ties at |x_i| = nu resolve to the non-constant piece (2 or 3), matching
    the >=/<= branches of the selector rule.
    """
    _check_nu(nu)
    x = np.asarray(x, dtype=float)
    d = np.ones(x.shape, dtype=int)
    d[x >= nu] = 2
    d[x <= -nu] = 3
    return d


def theta_slopes_for(x, d, nu):
    """Vector of slopes theta'_{d_i}(x_i) for a selector vector d."""
    d = np.asarray(d)
    s = np.zeros(d.shape, dtype=float)
    s[d == 2] = 1.0 / nu
    s[d == 3] = -1.0 / nu
    return s


def evaluate_gh(p: VlcsProblem, x):
    """Return (g, h, comp) = (Ax - b, Cx - d, g^T h)."""
    x = _as_vector(x, p.n, "x")
    g = p.A @ x - p.b
    h = p.C @ x - p.d
    return g, h, float(g @ h)


def h_sigma(p: VlcsProblem, x, sigma: float) -> float:
    """Relaxed complementarity gap G(x)^T H(x) - sigma."""
    if not (sigma > 0):
        raise ParameterError(f"sigma must be positive, got {sigma}")
    _, _, comp = evaluate_gh(p, x)
    return comp - sigma


def residual_res(p: VlcsProblem, x) -> float:
    """Natural residual Res = ||min(Ax - b, Cx - d)||_inf.

    Zero exactly on the solution set; positive both for infeasibility and
    for complementarity overlap.
    """
    g, h, _ = evaluate_gh(p, x)
    return float(np.abs(np.minimum(g, h)).max())


def index_sets(p: VlcsProblem, x, act_tol: float = DEFAULT_ACT_TOL) -> IndexSets:
    """Active sets i_g = {|G_i| <= act_tol}, i_h = {|H_i| <= act_tol} at x.

    The caller is responsible for x being (approximately) feasible; this
    routine only thresholds.
    """
    if act_tol < 0:
        raise ParameterError(f"act_tol must be nonnegative, got {act_tol}")
    g, h, _ = evaluate_gh(p, x)
    i_g = frozenset(int(i) for i in np.flatnonzero(np.abs(g) <= act_tol))
    i_h = frozenset(int(i) for i in np.flatnonzero(np.abs(h) <= act_tol))
    return IndexSets(i_g=i_g, i_h=i_h, act_tol=act_tol)


def al_penalty_value(comp: float, mu: float, rho: float, sigma: float) -> float:
    """Augmented Lagrangian penalty at a given complementarity value.

    (1/(2 rho)) ([mu + rho (comp - sigma)]_+^2 - mu^2); shared by the DC
    objective, the AL loop and the report metrics.
    """
    if not (rho > 0):
        raise ParameterError(f"rho must be positive, got {rho}")
    t = max(mu + rho * (comp - sigma), 0.0)
    return (t * t - mu * mu) / (2.0 * rho)


def count_zeros(x, zero_tol: float = DEFAULT_ZERO_TOL) -> int:
    """Number of coordinates with |x_i| <= zero_tol."""
    return int(np.count_nonzero(np.abs(np.asarray(x, dtype=float)) <= zero_tol))


def zero_pattern(x, zero_tol: float = DEFAULT_ZERO_TOL) -> np.ndarray:
    """Boolean mask of coordinates counted as zero at zero_tol."""
    return np.abs(np.asarray(x, dtype=float)) <= zero_tol


# --------------------------------------------------------------------------
# Problem text format
#
#   VLCS m n
#   m lines of n decimals          (A)
#   one line of m decimals         (b)
#   m lines of n decimals          (C)
#   one line of m decimals         (d)
#
# ASCII, '.' decimal separator, scientific notation permitted.  The truth
# sidecar is "XTRUE n" followed by n decimals.
# --------------------------------------------------------------------------


def _fmt_row(row):
    return " ".join(repr(float(v)) for v in row)


def write_problem(path, p: VlcsProblem) -> None:
    """Write a problem in the plain-text VLCS format."""
    lines = [f"VLCS {p.m} {p.n}"]
    lines.extend(_fmt_row(row) for row in p.A)
    lines.append(_fmt_row(p.b))
    lines.extend(_fmt_row(row) for row in p.C)
    lines.append(_fmt_row(p.d))
    with open(path, "w", encoding="ascii") as fh:
        fh.write("\n".join(lines) + "\n")


def read_problem(path) -> VlcsProblem:
    """Read a problem from the plain-text VLCS format."""
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    if len(tokens) < 3 or tokens[0] != "VLCS":
        raise ParameterError(f"{path}: expected 'VLCS m n' header")
    try:
        m, n = int(tokens[1]), int(tokens[2])
    except ValueError as exc:
        raise ParameterError(f"{path}: malformed dimensions in header") from exc
    need = 3 + 2 * m * n + 2 * m
    if len(tokens) != need:
        raise ParameterError(f"{path}: expected {need} tokens for m={m}, n={n}, got {len(tokens)}")
    try:
        vals = np.array([float(t) for t in tokens[3:]])
    except ValueError as exc:
        raise ParameterError(f"{path}: malformed numeric entry") from exc
    A = vals[: m * n].reshape(m, n)
    b = vals[m * n : m * n + m]
    C = vals[m * n + m : 2 * m * n + m].reshape(m, n)
    d = vals[2 * m * n + m :]
    return VlcsProblem(A=A, C=C, b=b, d=d)


def write_truth(path, x_true) -> None:
    """Write the sidecar truth vector ("XTRUE n" followed by n decimals)."""
    x = np.asarray(x_true, dtype=float).ravel()
    with open(path, "w", encoding="ascii") as fh:
        fh.write(f"XTRUE {x.size}\n{_fmt_row(x)}\n")


def read_truth(path) -> np.ndarray:
    """Read the sidecar truth vector."""
    with open(path, "r", encoding="ascii") as fh:
        tokens = fh.read().split()
    if len(tokens) < 2 or tokens[0] != "XTRUE":
        raise ParameterError(f"{path}: expected 'XTRUE n' header")
    n = int(tokens[1])
    if len(tokens) != 2 + n:
        raise ParameterError(f"{path}: expected {n} entries, got {len(tokens) - 2}")
    return np.array([float(t) for t in tokens[2:]])
