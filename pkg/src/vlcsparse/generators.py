"""Test-instance construction: random VLCS, market equilibrium, 2-D fixture.

Random family: A ~ U(-20, 20)^{m x n}, B ~ U(0,1)^{k x m} with k = floor(m/2),
M diagonal with floor(k/3) random U(0,1) entries, C = B^T M B A, which makes
A^T C = (BA)^T M (BA) positive semi-definite by construction.  A planted
solution x_true with a prescribed number of nonzeros and prescribed active
sets I_G, I_H determines b and d.

Market family: n1 producers and m1 products clearing a linear inverse-demand
market; the producer KKT systems stack into A = (ee^T + I) (x) B with
B carrying the price-demand slopes and C = blockdiag(D_i) the capacity rows,
so m = n1*m1 and n = 2*n1*m1.

All randomness flows through named substreams of one seed so instances are
bit-reproducible; substream k of SeedSequence(seed) drives, in order:
A, B, M, index sets, x_true, b-slacks, d-slacks, market data.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .core import VlcsProblem, residual_res
from .errors import GenerationError, ParameterError

_STREAMS = ("A", "B", "M", "sets", "xtrue", "b_slack", "d_slack", "market")


def _streams(seed):
    children = np.random.SeedSequence(seed).spawn(len(_STREAMS))
    return {name: np.random.Generator(np.random.PCG64(ss))
            for name, ss in zip(_STREAMS, children)}


def _pick(rng, pool, count):
    """Deterministic unordered sample: argsort of uniform keys."""
    keys = rng.random(len(pool))
    order = np.argsort(keys, kind="stable")
    return np.asarray(pool)[order[:count]]


@dataclass(frozen=True)
class RandomVlcsSpec:
    """Shape of a planted random instance.

    s_active is |I_G(x_true)| = |I_H(x_true)| and overlap is |I_00(x_true)|.
    Covering {1..m} with those cardinalities forces 2 s_active - overlap = m.
    """

    m: int
    n: int
    nnz: int
    s_active: int
    overlap: int
    seed: int = 0

    def __post_init__(self):
        if self.m < 1 or self.n < 1:
            raise ParameterError("m and n must be positive")
        if not (0 <= self.nnz <= self.n):
            raise ParameterError(f"nnz must lie in [0, n], got {self.nnz}")
        if not (0 <= self.overlap <= self.s_active <= self.m):
            raise ParameterError("need 0 <= overlap <= s_active <= m")
        if 2 * self.s_active - self.overlap < self.m:
            raise ParameterError(
                f"cover condition violated: 2*s_active - overlap = "
                f"{2 * self.s_active - self.overlap} < m = {self.m}"
            )
        if 2 * self.s_active - self.overlap > self.m:
            raise ParameterError(
                f"|I_G u I_H| = 2*s_active - overlap = {2 * self.s_active - self.overlap} "
                f"cannot exceed m = {self.m} while keeping |I_00| = overlap"
            )

    @classmethod
    def default_sets(cls, m, n, nnz, seed=0):
        """Paper-proportioned active sets: s = 3m/5, overlap = m/5."""
        s = int(round(0.6 * m))
        return cls(m=m, n=n, nnz=nnz, s_active=s, overlap=2 * s - m, seed=seed)


def gen_random_vlcs(spec: RandomVlcsSpec, compat_paper_bd: bool = False,
                    max_resample: int = 100):
    """Generate (problem, x_true) with x_true solving the system exactly.

    Default rule for inactive rows: b_i = (A x_true)_i - r_i with
    r_i ~ U(0.5, 1.5) (and symmetrically for d), which guarantees strict
    inactivity for any sign pattern of x_true.  With compat_paper_bd the
    literal doubling rule b_i = (2 A x_true)_i is used instead; it only
    yields a feasible x_true when (A x_true)_i < 0 on every inactive row,
    so x_true is resampled up to max_resample times.
    """
    rngs = _streams(spec.seed)
    m, n = spec.m, spec.n
    A = rngs["A"].uniform(-20.0, 20.0, size=(m, n))
    k = m // 2
    if k < 1:
        raise ParameterError("m must be at least 2 for the random family")
    B = rngs["B"].random((k, m))
    s = k // 3
    if s < 1:
        raise ParameterError("m must be at least 6 so that floor(floor(m/2)/3) >= 1")
    diag_pos = _pick(rngs["M"], np.arange(k), s)
    mdiag = np.zeros(k)
    mdiag[np.sort(diag_pos)] = rngs["M"].random(s)
    C = B.T @ (mdiag[:, None] * (B @ A))

    order = _pick(rngs["sets"], np.arange(m), m)
    i_00 = np.sort(order[: spec.overlap])
    g_only = np.sort(order[spec.overlap : spec.s_active])
    h_only = np.sort(order[spec.s_active : 2 * spec.s_active - spec.overlap])
    i_g = np.sort(np.concatenate([i_00, g_only]))
    i_h = np.sort(np.concatenate([i_00, h_only]))
    off_g = np.setdiff1d(np.arange(m), i_g)
    off_h = np.setdiff1d(np.arange(m), i_h)

    rx = rngs["xtrue"]
    for attempt in range(max_resample):
        support = np.sort(_pick(rx, np.arange(n), spec.nnz))
        vals = rx.uniform(0.5, 2.0, size=spec.nnz)
        signs = np.where(rx.random(spec.nnz) < 0.5, -1.0, 1.0)
        x_true = np.zeros(n)
        x_true[support] = signs * vals
        ax = A @ x_true
        cx = C @ x_true
        if not compat_paper_bd:
            b = ax.copy()
            b[off_g] -= rngs["b_slack"].uniform(0.5, 1.5, size=off_g.size)
            d = cx.copy()
            d[off_h] -= rngs["d_slack"].uniform(0.5, 1.5, size=off_h.size)
            break
        # literal doubling rule: G_i(x_true) = -(A x_true)_i off the active set
        if np.all(ax[off_g] < -1e-10) and np.all(cx[off_h] < -1e-10):
            b = ax.copy()
            b[off_g] = 2.0 * ax[off_g]
            d = cx.copy()
            d[off_h] = 2.0 * cx[off_h]
            break
    else:
        raise GenerationError(
            f"compat b/d rule kept x_true infeasible after {max_resample} resamples"
        )

    p = VlcsProblem(A=A, C=C, b=b, d=d)
    res = residual_res(p, x_true)
    if res > 1e-10:
        raise GenerationError(f"constructed x_true has Res = {res:.3e}")
    return p, x_true


@dataclass(frozen=True)
class MarketSpec:
    """Market-equilibrium instance data for n1 producers and m1 products."""

    n1: int
    m1: int
    gamma: np.ndarray      # no-demand prices, length m1, > 0
    beta: np.ndarray       # price-demand slopes, length m1, > 0
    w_s: np.ndarray        # spot-market weights, n1 x m1, > 0
    w_f: np.ndarray        # futures-market weights, n1 x m1, > 0
    q_bar: np.ndarray      # capacity bounds, n1 x m1
    seed: int = 0

    def __post_init__(self):
        if self.n1 < 1 or self.m1 < 1:
            raise ParameterError("n1 and m1 must be positive")
        for name, shape in (("gamma", (self.m1,)), ("beta", (self.m1,)),
                            ("w_s", (self.n1, self.m1)), ("w_f", (self.n1, self.m1)),
                            ("q_bar", (self.n1, self.m1))):
            arr = np.asarray(getattr(self, name), dtype=float)
            if arr.shape != shape:
                raise ParameterError(f"{name} must have shape {shape}, got {arr.shape}")
            object.__setattr__(self, name, arr)
        if np.any(self.gamma <= 0) or np.any(self.beta <= 0):
            raise ParameterError("gamma and beta must be strictly positive")
        if np.any(self.w_s <= 0) or np.any(self.w_f <= 0):
            raise ParameterError("market weights must be strictly positive")

    @classmethod
    def sample(cls, n1, m1, seed=0):
        """Draw beta_l = randi([5,10])/10, unit weights, gamma and q_bar U(1,10)."""
        rng = _streams(seed)["market"]
        beta = rng.integers(5, 11, size=m1).astype(float) / 10.0
        gamma = rng.uniform(1.0, 10.0, size=m1)
        q_bar = rng.uniform(1.0, 10.0, size=(n1, m1))
        ones = np.ones((n1, m1))
        return cls(n1=n1, m1=m1, gamma=gamma, beta=beta, w_s=ones, w_f=ones,
                   q_bar=q_bar, seed=seed)


def gen_market_vlcs(spec: MarketSpec) -> VlcsProblem:
    """Assemble the market VLCS: A = (ee^T + I) (x) B, C = blockdiag(D_i).

    Variable layout per producer i and product l: column 2l-1 holds the
    futures quantity f_il and column 2l the spot quantity s_il.  Row l of B
    carries -beta_l at both columns of the pair; D_i carries the negated
    producer weights.  b stacks -gamma per producer (zero fixed production
    cost) and d stacks -q_bar_i.
    """
    n1, m1 = spec.n1, spec.m1
    B = np.zeros((m1, 2 * m1))
    for l in range(m1):
        B[l, 2 * l] = -spec.beta[l]
        B[l, 2 * l + 1] = -spec.beta[l]
    A = np.kron(np.ones((n1, n1)) + np.eye(n1), B)
    C = np.zeros((n1 * m1, n1 * 2 * m1))
    for i in range(n1):
        Di = np.zeros((m1, 2 * m1))
        for l in range(m1):
            Di[l, 2 * l] = -spec.w_f[i, l]       # futures column 2l-1 (0-based 2l)
            Di[l, 2 * l + 1] = -spec.w_s[i, l]   # spot column 2l (0-based 2l+1)
        C[i * m1 : (i + 1) * m1, i * 2 * m1 : (i + 1) * 2 * m1] = Di
    b = -np.tile(spec.gamma, n1)
    d = -spec.q_bar.reshape(-1)
    return VlcsProblem(A=A, C=C, b=b, d=d)


@dataclass(frozen=True)
class Example31Points:
    """Labeled points of the 2-D analytic fixture."""

    nu: float
    sigma: float
    x_bar_sigma: np.ndarray   # lifted stationary for the relaxed problem
    x_bar: np.ndarray         # (nu, 1): lifted- but not d-stationary
    def ray(self, t: float) -> np.ndarray:
        """Global minimizer family (0, t), t >= 1."""
        if t < 1:
            raise ParameterError("the minimizer ray requires t >= 1")
        return np.array([0.0, float(t)])


def example31_fixture(nu: float, sigma: float):
    """The 2-D system {z1 >= 0, z2 - 1 >= 0, z1 (z2 - 1) = 0} with markers.

    Requires 0 < sigma < nu < 0.5 so that the labeled points have their
    documented properties.
    """
    if not (0 < sigma < nu < 0.5):
        raise ParameterError(
            f"fixture requires 0 < sigma < nu < 0.5, got sigma={sigma}, nu={nu}"
        )
    p = VlcsProblem(A=[[1.0, 0.0]], C=[[0.0, 1.0]], b=[0.0], d=[1.0])
    x_bar_sigma = np.array([nu + sigma, sigma / (2.0 * (nu + sigma)) + 1.0])
    points = Example31Points(
        nu=nu,
        sigma=sigma,
        x_bar_sigma=x_bar_sigma,
        x_bar=np.array([nu, 1.0]),
    )
    return p, points
