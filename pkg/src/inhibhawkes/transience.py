"""Numerical evidence for the transient regime.

Two mechanisms drive escape. In T1 (``a < 0 < 1 < b``) the chain bounces
between the axes: from ``(i, 0)`` with ``a*i + lam <= 0`` the next count is
forced to 0 and the one after is ``Poisson(b*i + lam)``, so axis values grow
by roughly ``b`` every two steps. In T2 the counts grow like ``theta**n``,
with ``theta`` the largest root of ``x**2 - a*x - b``, and consecutive ratios
settle near ``theta``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .classification import dominant_eigenvalue
from .errors import NotTransientT2, RegionMismatch
from .process import MEAN_CAP, Params, State, Status, Trajectory, simulate

DEFAULT_ESCAPE_LEVEL = 1e6
DEFAULT_HORIZON = 500
DEFAULT_RATIO_THRESHOLD = 1e4
DEFAULT_RATIO_EPS = 0.05


def choose_r(p: Params) -> float:
    """Midpoint of ``(1, theta)``; satisfies ``r**2 - a*r - b < 0``."""
    theta = dominant_eigenvalue(p)
    if theta is None or not theta > 1:
        raise NotTransientT2(f"dominant eigenvalue {theta} is not > 1 at ({p.a}, {p.b})")
    r = (1 + theta) / 2
    assert r * r - p.a * r - p.b < 0
    return r


def t2b_conditions(p: Params, r: float, eps: float) -> dict[str, bool]:
    theta = dominant_eigenvalue(p)
    return {
        "r^2 - a*r - b < 0": r * r - p.a * r - p.b < 0,
        "r^2 - a*(r-eps) - b < 0": r * r - p.a * (r - eps) - p.b < 0,
        "theta^2 - theta*eps + b > 0": theta * theta - theta * eps + p.b > 0,
        "0 < eps < theta": 0 < eps < theta,
    }


def choose_eps_T2b(p: Params, r: float) -> float:
    """Halve ``eps`` from ``(theta - 1)/2`` until every T2b condition holds."""
    if not p.b < 0:
        raise RegionMismatch("T2b needs b < 0")
    theta = dominant_eigenvalue(p)
    if theta is None or not theta > 1:
        raise NotTransientT2(f"dominant eigenvalue {theta} is not > 1")
    eps = (theta - 1) / 2
    for _ in range(200):
        if all(t2b_conditions(p, r, eps).values()):
            return eps
        eps /= 2
    raise RuntimeError("eps schedule did not terminate")  # unreachable when r < theta


def growth_rate(t: Trajectory | np.ndarray) -> float | None:
    """Slope of ``log(X_n + 1)`` over the last half of the stored counts.

    None when that half contains a zero: the run has not taken off.
    """
    counts = t.counts if isinstance(t, Trajectory) else np.asarray(t)
    if len(counts) < 20:
        raise ValueError("growth_rate needs at least 20 counts")
    start = len(counts) // 2
    tail = counts[start:]
    if np.any(tail == 0):
        return None
    n = np.arange(start, len(counts), dtype=float)
    y = np.log(tail.astype(float) + 1.0)
    return float(np.polyfit(n, y, 1)[0])


@dataclass(frozen=True)
class RatioReport:
    fraction: float
    count: int

    @property
    def vacuous(self) -> bool:
        return self.count == 0


def ratio_theta_fraction(
    t: Trajectory | np.ndarray,
    theta: float,
    eps: float = DEFAULT_RATIO_EPS,
    threshold: float = DEFAULT_RATIO_THRESHOLD,
) -> RatioReport:
    """Share of indices with ``X_n >= threshold`` whose next ratio is within ``eps`` of ``theta``.

    With no qualifying index the fraction is 1 and ``count`` is 0.
    """
    if not theta > 1:
        raise ValueError("theta must be > 1")
    c = (t.counts if isinstance(t, Trajectory) else np.asarray(t)).astype(float)
    cur, nxt = c[:-1], c[1:]
    sel = cur >= threshold
    count = int(sel.sum())
    if count == 0:
        return RatioReport(1.0, 0)
    ok = np.abs(nxt[sel] / cur[sel] - theta) <= eps
    return RatioReport(float(ok.mean()), count)


def zero_threshold(p: Params) -> int:
    """Smallest ``i >= 1`` with ``a*i + lam <= 0`` (``a < 0``)."""
    if not p.a < 0:
        raise RegionMismatch("needs a < 0")
    i = max(1, math.ceil(-p.lam / p.a))
    while p.a * i + p.lam > 0:
        i += 1
    while i > 1 and p.a * (i - 1) + p.lam <= 0:
        i -= 1
    return i


@dataclass
class AxisCycleReport:
    deterministic_zero_ok: bool
    threshold: int
    indices: np.ndarray = field(repr=False)
    two_step_factors: np.ndarray = field(repr=False)


def axis_cycle_check(p: Params, t: Trajectory) -> AxisCycleReport:
    """Check the forced zero after every qualifying axis visit.

    An index ``n`` qualifies when ``X_{n-1} = 0`` and ``X_n >= zero_threshold``.
    Each must be followed by ``X_{n+1} = 0``; the ratios ``X_{n+2} / X_n``
    are collected as two-step growth factors, which average about ``b``.
    """
    if not (p.a < 0 and p.b > 1):
        raise RegionMismatch(f"({p.a}, {p.b}) is not in T1")
    i0 = zero_threshold(p)
    c = t.counts
    n = np.arange(1, len(c) - 1)
    qual = n[(c[n - 1] == 0) & (c[n] >= i0)]
    ok = bool(np.all(c[qual + 1] == 0))
    with_next = qual[qual + 2 < len(c)]
    factors = c[with_next + 2] / c[with_next].astype(float)
    return AxisCycleReport(ok, i0, qual, factors)


@dataclass
class RunRecord:
    index: int
    escaped: bool
    escape_step: int | None
    growth_rate: float | None
    ratio_fraction: float | None
    trajectory: Trajectory = field(repr=False)


@dataclass
class EscapeStats:
    escape_fraction: float
    mean_escape_step: float | None
    runs: list[RunRecord]


def escape_step(t: Trajectory, level: float) -> int | None:
    """First ``n + 1`` with ``X_n + X_{n+1} >= level``, or the cut index of an escaped run."""
    c = t.counts.astype(float)
    hit = np.nonzero(c[:-1] + c[1:] >= level)[0]
    if len(hit):
        return int(hit[0] + 1)
    if t.status is not Status.COMPLETED:
        return t.status_step
    return None


def escape_statistics(
    p: Params,
    runs: int,
    horizon: int = DEFAULT_HORIZON,
    escape_level: float = DEFAULT_ESCAPE_LEVEL,
    seed: int = 0,
    *,
    mean_cap: float = MEAN_CAP,
    ratio_eps: float = DEFAULT_RATIO_EPS,
    ratio_threshold: float = DEFAULT_RATIO_THRESHOLD,
) -> EscapeStats:
    """Simulate ``runs`` trajectories from ``(0, 0)``; run ``k`` uses child stream ``k``."""
    if runs < 1:
        raise ValueError("runs must be >= 1")
    theta = dominant_eigenvalue(p)
    records = []
    for k in range(runs):
        t = simulate(p, State(0, 0), horizon, seed, index=k, mean_cap=mean_cap)
        step = escape_step(t, escape_level)
        g = growth_rate(t) if len(t.counts) >= 20 else None
        rf = None
        if theta is not None and theta > 1:
            rf = ratio_theta_fraction(t, theta, ratio_eps, ratio_threshold).fraction
        records.append(RunRecord(k, step is not None, step, g, rf, t))
    steps = [r.escape_step for r in records if r.escaped]
    return EscapeStats(
        escape_fraction=len(steps) / runs,
        mean_escape_step=float(np.mean(steps)) if steps else None,
        runs=records,
    )
