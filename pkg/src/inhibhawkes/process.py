"""The two-lag Poisson autoregression with inhibition.

Counts follow ``X[n] ~ Poisson((a*X[n-1] + b*X[n-2] + lam)+)``. The pair
``(X[n], X[n-1])`` is a Markov chain on the nonnegative integer lattice and
most of the package works with that chain, written ``State(i, j)``.

Indexing convention: a trajectory starts from ``State(X1, X0)`` and
``counts[n]`` holds ``X[n]``, so ``counts[:2] == [X0, X1]``.

Random streams: trajectory ``k`` of an ensemble with master seed ``s`` draws
from ``PCG64(SeedSequence(s, spawn_key=(k,)))``. ``SeedSequence`` hashes the
entropy and spawn key together, so child streams are independent of execution
order and ensembles are bit-identical whether run serially or in parallel.
"""

from __future__ import annotations

import csv
import enum
import io
import json
import math
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import MeanCapExceeded

#: Largest Poisson mean sampled exactly; larger means mark the run as escaped.
MEAN_CAP = 1e12
#: Counts above this are flagged as overflow instead of stored.
COUNT_MAX = 2**62
# numpy refuses means above roughly 9.2e18
_NUMPY_LAM_MAX = float(np.iinfo(np.int64).max) - 2**40


@dataclass(frozen=True)
class Params:
    """Model coefficients: lag-1 ``a``, lag-2 ``b`` and baseline ``lam > 0``."""

    a: float
    b: float
    lam: float = 1.0

    def __post_init__(self):
        for name in ("a", "b", "lam"):
            value = getattr(self, name)
            if not math.isfinite(value):
                raise ValueError(f"{name} must be finite, got {value!r}")
        if not self.lam > 0:
            raise ValueError(f"lam must be > 0, got {self.lam!r}")

    def to_dict(self) -> dict:
        return {"a": self.a, "b": self.b, "lambda": self.lam}

    @classmethod
    def from_dict(cls, d: dict) -> Params:
        return cls(float(d["a"]), float(d["b"]), float(d.get("lambda", d.get("lam", 1.0))))


class State(NamedTuple):
    """Chain state ``(i, j) = (X[n], X[n-1])``."""

    i: int
    j: int


def _check_state(s: State) -> None:
    if s.i < 0 or s.j < 0:
        raise ValueError(f"state coordinates must be nonnegative, got {tuple(s)}")


def intensity(p: Params, s: State) -> float:
    """Poisson mean of the next count from state ``s``."""
    _check_state(s)
    return max(p.a * s.i + p.b * s.j + p.lam, 0.0)


def poisson_pmf(k: int, mu: float) -> float:
    """Poisson probability mass with the convention ``0**0 == 1``."""
    if k < 0:
        return 0.0
    if mu == 0.0:
        return 1.0 if k == 0 else 0.0
    return math.exp(k * math.log(mu) - mu - math.lgamma(k + 1))


def transition_prob(p: Params, src: State, dst: State) -> float:
    """One-step probability ``P(src, dst)``; zero unless ``dst.j == src.i``."""
    if dst.j != src.i:
        return 0.0
    return poisson_pmf(dst.i, intensity(p, src))


def make_rng(seed: int, index: int | None = None) -> np.random.Generator:
    """Random stream for a master seed, optionally the ``index``-th child."""
    if index is None:
        ss = np.random.SeedSequence(seed)
    else:
        ss = np.random.SeedSequence(seed, spawn_key=(index,))
    return np.random.Generator(np.random.PCG64(ss))


def step(p: Params, s: State, rng: np.random.Generator, mean_cap: float = MEAN_CAP) -> State:
    """Advance the chain one step.

    Raises
    ------
    MeanCapExceeded
        If the Poisson mean is above ``mean_cap``.
    """
    mu = intensity(p, s)
    if mu > mean_cap:
        raise MeanCapExceeded(mu, mean_cap)
    if mu == 0.0:
        return State(0, s.i)
    return State(int(rng.poisson(mu)), s.i)


class Status(str, enum.Enum):
    COMPLETED = "completed"
    ESCAPED = "escaped"
    OVERFLOW = "overflow"


@dataclass(frozen=True)
class Trajectory:
    """A simulated count sequence.

    ``status_step`` is ``None`` for completed runs. For escaped and overflow
    runs it is the index of the last stored count, so ``len(counts) ==
    status_step + 1``; the count that could not be drawn (or stored) would
    have had index ``status_step + 1``.
    """

    params: Params
    init: State
    counts: np.ndarray
    seed: int
    status: Status = Status.COMPLETED
    status_step: int | None = None

    @property
    def n_steps(self) -> int:
        return len(self.counts) - 2

    def states(self) -> np.ndarray:
        """Array of chain states ``(X[n], X[n-1])`` for ``n >= 1``."""
        c = self.counts
        return np.column_stack([c[1:], c[:-1]])

    def to_json_dict(self) -> dict:
        return {
            "seed": int(self.seed),
            "params": self.params.to_dict(),
            "init": [int(self.init.i), int(self.init.j)],
            "status": self.status.value,
            "status_step": self.status_step,
            "counts": [int(x) for x in self.counts],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_json_dict())

    @classmethod
    def from_json_dict(cls, d: dict) -> Trajectory:
        return cls(
            params=Params.from_dict(d["params"]),
            init=State(*d["init"]),
            counts=np.asarray(d["counts"], dtype=np.int64),
            seed=int(d["seed"]),
            status=Status(d["status"]),
            status_step=d["status_step"],
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["n", "x"])
        for n, x in enumerate(self.counts):
            w.writerow([n, int(x)])
        return buf.getvalue()

    def __eq__(self, other):
        if not isinstance(other, Trajectory):
            return NotImplemented
        return (
            self.params == other.params
            and self.init == other.init
            and self.seed == other.seed
            and self.status == other.status
            and self.status_step == other.status_step
            and np.array_equal(self.counts, other.counts)
        )


def simulate(
    p: Params,
    init: State,
    n_steps: int,
    seed: int,
    *,
    index: int | None = None,
    mean_cap: float = MEAN_CAP,
) -> Trajectory:
    """Simulate ``n_steps`` new counts from ``init = State(X1, X0)``.

    The run is cut short, with the status recording where, if the Poisson
    mean exceeds ``mean_cap`` (escaped) or a drawn count exceeds
    ``COUNT_MAX`` (overflow). ``index`` selects a child stream of ``seed``.
    """
    if n_steps < 0:
        raise ValueError("n_steps must be >= 0")
    _check_state(init)
    if init.i > COUNT_MAX or init.j > COUNT_MAX:
        raise ValueError("initial counts exceed COUNT_MAX")
    if not 0 < mean_cap <= _NUMPY_LAM_MAX:
        raise ValueError(f"mean_cap must lie in (0, {_NUMPY_LAM_MAX:.3g}]")
    rng = make_rng(seed, index)
    counts = [int(init.j), int(init.i)]
    status, status_step = Status.COMPLETED, None
    a, b, lam = p.a, p.b, p.lam
    prev, cur = counts
    for _ in range(n_steps):
        mu = a * cur + b * prev + lam
        if mu <= 0.0:
            k = 0
        elif mu > mean_cap:
            status, status_step = Status.ESCAPED, len(counts) - 1
            break
        else:
            k = int(rng.poisson(mu))
            if k > COUNT_MAX:
                status, status_step = Status.OVERFLOW, len(counts) - 1
                break
        counts.append(k)
        prev, cur = cur, k
    return Trajectory(
        params=p,
        init=init,
        counts=np.asarray(counts, dtype=np.int64),
        seed=seed,
        status=status,
        status_step=status_step,
    )
