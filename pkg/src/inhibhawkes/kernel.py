"""Truncated transition kernels and what can be computed from them.

States of the box ``{0..N}^2`` are enumerated row-major, ``(i, j) -> i*(N+1) + j``.
Mass that leaves the box is dropped and tracked per row as a defect, never
redistributed, so every probability computed here is a lower bound on the
untruncated one.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
import scipy.sparse as sp
from scipy.special import gammaln
from scipy.stats import poisson

from .errors import DefectTooLarge, NoConvergence, WindowEmpty
from .process import Params, State, Trajectory, intensity, poisson_pmf

#: Poisson tail mass below which row entries are dropped into the defect.
TAIL_CUT = 1e-14


def state_index(s: State, N: int) -> int:
    return s.i * (N + 1) + s.j


def index_state(idx: int, N: int) -> State:
    return State(*divmod(int(idx), N + 1))


def intensity_grid(p: Params, N: int) -> np.ndarray:
    """Intensities ``s_ij`` on the box, shape ``(N+1, N+1)``."""
    r = np.arange(N + 1, dtype=float)
    return np.maximum(p.a * r[:, None] + p.b * r[None, :] + p.lam, 0.0)


def poisson_pmf_table(mu: np.ndarray, kmax: int) -> np.ndarray:
    """``pmf[..., k]`` for ``k = 0..kmax``; zero means give a point mass at 0."""
    mu = np.asarray(mu, dtype=float)
    k = np.arange(kmax + 1, dtype=float)
    with np.errstate(divide="ignore", invalid="ignore"):
        logmu = np.log(mu)[..., None]
        logpmf = k * logmu - mu[..., None] - gammaln(k + 1)
    zero = mu == 0
    logpmf = np.where(zero[..., None], np.where(k == 0, 0.0, -np.inf), logpmf)
    return np.exp(logpmf)


@dataclass
class TruncatedKernel:
    """Row-substochastic transition matrix on ``{0..N}^2``."""

    params: Params
    N: int
    matrix: sp.csr_matrix
    row_defect: np.ndarray

    @property
    def n_states(self) -> int:
        return (self.N + 1) ** 2

    def entry(self, src: State, dst: State) -> float:
        return float(self.matrix[state_index(src, self.N), state_index(dst, self.N)])

    def apply(self, weights: np.ndarray) -> np.ndarray:
        """Left action ``w -> w P``."""
        return self.matrix.T @ weights


def build_kernel(p: Params, N: int) -> TruncatedKernel:
    """Exact transition probabilities restricted to the box ``{0..N}^2``.

    Within a row, targets ``(k, i)`` past the point where the Poisson upper
    tail drops below ``TAIL_CUT`` are omitted; the row defect is the exact
    Poisson tail beyond the last kept ``k``.
    """
    if N < 1:
        raise ValueError("N must be >= 1")
    size = N + 1
    s = intensity_grid(p, N).ravel()
    hi = np.where(s > 0, poisson.isf(TAIL_CUT, s), 0.0)
    hi = np.minimum(np.nan_to_num(hi, nan=N), N).astype(np.int64)
    pmf = poisson_pmf_table(s, N)
    k = np.arange(size)
    keep = (k[None, :] <= hi[:, None]) & (pmf > 0)
    rows, ks = np.nonzero(keep)
    # source (i, j) -> target (k, i)
    src_i = rows // size
    cols = ks * size + src_i
    matrix = sp.csr_matrix((pmf[rows, ks], (rows, cols)), shape=(size * size, size * size))
    defect = np.where(s > 0, poisson.sf(hi, s), 0.0)
    return TruncatedKernel(p, N, matrix, defect)


def p2_closed_form(p: Params, src: State, dst: State) -> float:
    """Two-step probability; the intermediate state is forced to be ``(l, i)``."""
    i, j = src
    k, l = dst
    s1 = intensity(p, State(i, j))
    s2 = intensity(p, State(l, i))
    if (s1 == 0 and l > 0) or (s2 == 0 and k > 0):
        return 0.0
    log_num = -(s1 + s2)
    if l:
        log_num += l * np.log(s1)
    if k:
        log_num += k * np.log(s2)
    return float(np.exp(log_num - gammaln(l + 1) - gammaln(k + 1)))


def pn_closed_form(p: Params, src: State, dst: State, n: int, cap: int) -> float:
    """``n``-step probability as a sum over intermediate counts ``m_1..m_{n-2} <= cap``.

    Each term is the product of Poisson factors along the count sequence
    ``(j, i, m_1, ..., m_{n-2}, l, k)``. The sum is accumulated one
    intermediate at a time, which is the same sum in factored form.
    Nondecreasing in ``cap`` and equal to ``P^n`` in the limit.
    """
    if n < 3:
        raise ValueError("n must be >= 3")
    if cap < 0:
        raise ValueError("cap must be >= 0")
    i, j = src
    k, l = dst
    m = np.arange(cap + 1, dtype=float)
    # h[m1] = P(first count = m1), previous count i
    h = poisson_pmf_table(np.array(intensity(p, src)), cap)
    lag = np.full(cap + 1, float(i))  # the count preceding m1 (fixed)
    if n == 3:
        s_last = np.maximum(p.a * m + p.b * lag + p.lam, 0.0)  # s(m1, i)
        f_l = poisson_pmf_table(s_last, l)[:, l]
        s_k = np.maximum(p.a * l + p.b * m + p.lam, 0.0)  # s(l, m1)
        f_k = poisson_pmf_table(s_k, k)[:, k]
        return float(np.sum(h * f_l * f_k))
    # H[x, y]: mass of (current = x, previous = y) over intermediates
    s_first = np.maximum(p.a * m + p.b * i + p.lam, 0.0)
    H = h[None, :] * poisson_pmf_table(s_first, cap).T  # H[m2, m1]
    S = np.maximum(p.a * m[:, None] + p.b * m[None, :] + p.lam, 0.0)  # s(x, y)
    table = poisson_pmf_table(S, cap)  # table[x, y, z] = pmf(z; s(x, y))
    for _ in range(n - 4):
        H = np.einsum("xy,xyz->zx", H, table)
    f_l = poisson_pmf_table(S, l)[..., l]  # pmf(l; s(x, y))
    s_k = np.maximum(p.a * l + p.b * m + p.lam, 0.0)  # s(l, x)
    f_k = poisson_pmf_table(s_k, k)[:, k]
    return float(np.sum(H * f_l * f_k[:, None]))


@dataclass
class Distribution:
    """Nonnegative weights on the box ``{0..N}^2`` with total mass in (0, 1]."""

    N: int
    weights: np.ndarray

    @property
    def mass(self) -> float:
        return float(self.weights.sum())

    def normalized(self) -> np.ndarray:
        return self.weights / self.weights.sum()

    def weight(self, s: State) -> float:
        return float(self.weights[state_index(s, self.N)])

    @classmethod
    def point_mass(cls, s: State, N: int) -> Distribution:
        w = np.zeros((N + 1) ** 2)
        w[state_index(s, N)] = 1.0
        return cls(N, w)


def tv_distance(d1: Distribution, d2: Distribution) -> float:
    """Total variation distance after normalising both to mass 1."""
    if d1.N != d2.N:
        raise ValueError("distributions live on different boxes")
    return float(0.5 * np.abs(d1.normalized() - d2.normalized()).sum())


@dataclass
class StationaryResult:
    pi: Distribution
    residual: float
    leak: float
    iterations: int


def stationary(
    k: TruncatedKernel,
    tol: float = 1e-10,
    *,
    defect_budget: float = 1e-3,
    max_iter: int = 100_000,
) -> StationaryResult:
    """Invariant law by power iteration from the point mass at ``(0, 0)``.

    Each iterate is renormalised. Iteration stops when successive iterates
    are within ``tol`` in total variation. ``leak`` is the mass the fixed
    point loses per step through the box edge; if it exceeds
    ``defect_budget`` the truncation is not trustworthy and DefectTooLarge
    is raised. ``residual`` is ``||pi P - pi||_TV`` with ``pi P``
    renormalised, matching the iteration; the leak is reported beside it.
    """
    v = Distribution.point_mass(State(0, 0), k.N).weights
    for it in range(1, max_iter + 1):
        w = k.apply(v)
        mass = w.sum()
        if mass <= 0:
            raise DefectTooLarge("all mass left the box")
        w /= mass
        diff = 0.5 * np.abs(w - v).sum()
        v = w
        if diff < tol:
            break
    else:
        raise NoConvergence(f"power iteration did not reach tol={tol} in {max_iter} steps")
    vp = k.apply(v)
    leak = float(1.0 - vp.sum())
    if leak > defect_budget:
        raise DefectTooLarge(f"stationary leak {leak:.3g} exceeds budget {defect_budget:.3g}")
    residual = float(0.5 * np.abs(vp / vp.sum() - v).sum())
    return StationaryResult(Distribution(k.N, v), residual, leak, it)


@dataclass
class RateFit:
    beta_hat: float
    r_squared: float
    tv: np.ndarray
    window: tuple[int, int] = field(default=(0, 0))


def tv_sequence(k: TruncatedKernel, init: State, pi: Distribution, horizon: int) -> np.ndarray:
    """``d_n = tv(Law(X_n), pi)`` for ``n = 0..horizon``."""
    v = Distribution.point_mass(init, k.N).weights
    target = pi.normalized()
    out = np.empty(horizon + 1)
    for n in range(horizon + 1):
        out[n] = 0.5 * np.abs(v / v.sum() - target).sum()
        if n < horizon:
            v = k.apply(v)
    return out


def fit_log_linear(d: np.ndarray, lo: float = 1e-12, hi: float = 0.5) -> RateFit:
    """Least-squares fit of ``log d_n`` on ``n`` over ``lo < d_n < hi``."""
    n = np.arange(len(d))
    mask = (d > lo) & (d < hi)
    if mask.sum() < 3:
        raise WindowEmpty(f"only {int(mask.sum())} points with {lo} < d_n < {hi}")
    x, y = n[mask].astype(float), np.log(d[mask])
    slope, intercept = np.polyfit(x, y, 1)
    resid = y - (slope * x + intercept)
    ss_tot = np.sum((y - y.mean()) ** 2)
    r2 = 1.0 - np.sum(resid**2) / ss_tot if ss_tot > 0 else 1.0
    idx = n[mask]
    return RateFit(float(np.exp(-slope)), float(r2), d, (int(idx[0]), int(idx[-1])))


def geometric_rate(k: TruncatedKernel, init: State, pi: Distribution, horizon: int) -> RateFit:
    """Empirical geometric convergence rate ``beta_hat`` of ``Law(X_n)`` to ``pi``."""
    return fit_log_linear(tv_sequence(k, init, pi, horizon))


def occupation_measure(t: Trajectory, N: int, burn_in: int = 0) -> tuple[Distribution, float]:
    """Visit frequencies of the chain states inside the box.

    Returns the distribution (mass = fraction of visits inside the box) and
    the fraction of visits outside it.
    """
    st = t.states()[burn_in:]
    inside = (st[:, 0] <= N) & (st[:, 1] <= N)
    idx = st[inside, 0] * (N + 1) + st[inside, 1]
    w = np.bincount(idx, minlength=(N + 1) ** 2).astype(float) / len(st)
    return Distribution(N, w), float(1.0 - inside.mean())


def p_chain(p: Params, path: list[State]) -> float:
    """Probability of following ``path`` step by step."""
    prob = 1.0
    for src, dst in zip(path, path[1:]):
        if dst.j != src.i:
            return 0.0
        prob *= poisson_pmf(dst.i, intensity(p, src))
    return prob
