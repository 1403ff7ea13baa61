"""Foster-Lyapunov drift certificates for the recurrent regime.

A certificate is a function ``V >= 1``, a rate ``eps`` in (0, 1), a constant
``K`` and a drift set ``D`` such that

    E_x[V(X_1)] - V(x) <= -eps * V(x) + K * 1_D(x)

holds at every state ``x`` of a finite verification box. Three families of
``V`` cover the recurrent region between them:

* ``LinearR1``     ``alpha*i + beta*j + 1``
* ``AngularR2``    ``i/(j+1) + 1``
* ``QuadraticR3``  ``1 + (i^2 - a*i*j + (b^2+1)/2 * j^2)`` off the zero-intensity set ``A``

For the angular and quadratic families the drift set is ``A`` plus a finite
set ``C`` of violating states; for the linear family it is ``C`` alone and
``C`` may contain states of ``A``.

Finiteness of ``C`` cannot be seen from a finite scan. It is backed by two
checks: the leading linear/quadratic part of ``drift + eps*V`` is negative
(definite), which the parameter conditions verify symbolically, and the
drift margin on the outer shell of the box is negative.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import poisson

from .classification import Phase, classify, recurrent_sublabels
from .errors import BoxTooSmall, RegionMismatch
from .process import Params, State, intensity, poisson_pmf

DEFAULT_BOX = 64
MAX_BOX = 4096
_MAX_HALVINGS = 80


class DriftKind(str, enum.Enum):
    LINEAR_R1 = "LinearR1"
    ANGULAR_R2 = "AngularR2"
    QUADRATIC_R3 = "QuadraticR3"


@dataclass(frozen=True)
class DriftFunction:
    kind: DriftKind
    alpha: float | None = None
    beta: float | None = None
    a: float | None = None
    b: float | None = None

    def __post_init__(self):
        if self.kind is DriftKind.LINEAR_R1:
            if not (self.alpha and self.alpha > 0 and self.beta and self.beta > 0):
                raise ValueError("LinearR1 needs alpha > 0 and beta > 0")
        elif self.kind is DriftKind.QUADRATIC_R3:
            if self.a is None or self.b is None:
                raise ValueError("QuadraticR3 needs the model's a and b")

    @classmethod
    def linear(cls, alpha: float, beta: float) -> DriftFunction:
        return cls(DriftKind.LINEAR_R1, alpha=alpha, beta=beta)

    @classmethod
    def angular(cls) -> DriftFunction:
        return cls(DriftKind.ANGULAR_R2)

    @classmethod
    def quadratic(cls, a: float, b: float) -> DriftFunction:
        return cls(DriftKind.QUADRATIC_R3, a=a, b=b)

    def to_dict(self) -> dict:
        d = {"kind": self.kind.value}
        if self.kind is DriftKind.LINEAR_R1:
            d.update(alpha=self.alpha, beta=self.beta)
        elif self.kind is DriftKind.QUADRATIC_R3:
            d.update(a=self.a, b=self.b)
        return d


# -- vectorised kernels (I, J are integer arrays of equal shape) -----------


def _s(p: Params, I, J):
    return np.maximum(p.a * I + p.b * J + p.lam, 0.0)


def _in_A(p: Params, I, J):
    return p.a * I + p.b * J + p.lam <= 0


def _V(fn: DriftFunction, p: Params, I, J):
    I = np.asarray(I, dtype=float)
    J = np.asarray(J, dtype=float)
    if fn.kind is DriftKind.LINEAR_R1:
        return fn.alpha * I + fn.beta * J + 1.0
    if fn.kind is DriftKind.ANGULAR_R2:
        return I / (J + 1.0) + 1.0
    q = I * I - fn.a * I * J + (fn.b * fn.b + 1) / 2 * J * J
    return 1.0 + np.where(_in_A(p, I, J), 0.0, q)


def _EV(fn: DriftFunction, p: Params, I, J):
    """Closed-form ``E[V(X_1)]``; an upper bound for the quadratic family."""
    I = np.asarray(I, dtype=float)
    J = np.asarray(J, dtype=float)
    s = _s(p, I, J)
    if fn.kind is DriftKind.LINEAR_R1:
        return fn.alpha * s + fn.beta * I + 1.0
    if fn.kind is DriftKind.ANGULAR_R2:
        return s / (I + 1.0) + 1.0
    bound = 1.0 + s * (s + 1) - fn.a * I * s + (fn.b * fn.b + 1) / 2 * I * I
    # zero intensity: the move to (0, i) is deterministic, use it exactly
    exact_on_A = _V(fn, p, np.zeros_like(I), I)
    return np.where(s == 0, exact_on_A, bound)


# -- scalar API -------------------------------------------------------------


def in_A(p: Params, s: State) -> bool:
    """True iff the intensity at ``s`` is zero."""
    return bool(_in_A(p, s.i, s.j))


def evaluate_V(fn: DriftFunction, p: Params, s: State) -> float:
    return float(_V(fn, p, s.i, s.j))


def expected_V_after(fn: DriftFunction, p: Params, s: State, mode: str = "closed") -> float:
    """``E[V(X_1) | X_0 = s]``.

    ``mode="closed"`` uses the Poisson moments ``E k = mu`` and
    ``E k^2 = mu (mu + 1)``; for the quadratic family off ``A`` this is an
    upper bound (the indicator is dropped). ``mode="exact"`` sums the series
    over ``k`` until the Poisson upper tail is below 1e-16.
    """
    if mode == "closed":
        return float(_EV(fn, p, s.i, s.j))
    if mode != "exact":
        raise ValueError(f"unknown mode {mode!r}")
    mu = intensity(p, s)
    if mu == 0:
        return evaluate_V(fn, p, State(0, s.i))
    kmax = int(poisson.isf(1e-16, mu)) + 1
    ks = np.arange(kmax + 1)
    pmf = poisson.pmf(ks, mu)
    vals = _V(fn, p, ks, np.full_like(ks, s.i))
    return float(np.sum(pmf * vals))


def drift(fn: DriftFunction, p: Params, s: State, mode: str = "closed") -> float:
    """``Delta V(s)``; an upper bound in closed mode for the quadratic family."""
    return expected_V_after(fn, p, s, mode) - evaluate_V(fn, p, s)


# -- parameter selection ------------------------------------------------------


def parameter_conditions(fn: DriftFunction, p: Params, eps: float) -> dict[str, bool]:
    """Named inequalities that make the leading part of ``drift + eps*V`` negative."""
    a, b = p.a, p.b
    out = {"0 < eps < 1": 0 < eps < 1}
    if fn.kind is DriftKind.LINEAR_R1:
        beta = fn.beta
        out["alpha == 1"] = fn.alpha == 1.0
        out["beta > 0"] = beta > 0
        out["b/(1-eps) < beta"] = b / (1 - eps) < beta
        out["beta < 1-a-eps"] = beta < 1 - a - eps
        out["beta < 1-eps"] = beta < 1 - eps
    elif fn.kind is DriftKind.ANGULAR_R2:
        out["a^2/4 + b < b*eps < 0"] = a * a / 4 + b < b * eps < 0
        out["a^2 + 4b(1-eps) < 0"] = a * a + 4 * b * (1 - eps) < 0
        # the eps*V term contributes eps*i*j to the numerator
        out["(a+eps)^2 + 4b(1-eps) < 0"] = (a + eps) ** 2 + 4 * b * (1 - eps) < 0
    else:
        c_ii = (b * b - 1) / 2 + eps
        c_jj = (b * b * (1 + eps) + eps - 1) / 2
        c_ij = a * (b + 1 - eps)
        out["(b^2-1)/2 + eps < 0"] = c_ii < 0
        out["det > 0"] = c_ii * c_jj - c_ij * c_ij / 4 > 0
        out["quadratic positive-definite"] = 2 * (b * b + 1) - a * a > 0
    return out


def choose_parameters(p: Params, label: str) -> tuple[DriftFunction, float]:
    """Drift function and rate ``eps`` for the named recurrent sub-region.

    Deterministic: ``eps`` walks down ``1/2, 1/4, ...`` (R1, R3) or starts at
    the midpoint of the admissible interval (R2) and is halved until every
    condition of :func:`parameter_conditions` holds.
    """
    if label not in recurrent_sublabels(p.a, p.b):
        raise RegionMismatch(f"({p.a}, {p.b}) is not in {label}")
    a, b = p.a, p.b
    if label == "R2":
        eps = (a * a / 4 + b) / (2 * b)
        candidates = (eps / 2**n for n in range(_MAX_HALVINGS))
        make = lambda e: DriftFunction.angular()  # noqa: E731
    elif label == "R1":
        candidates = (0.5**n for n in range(1, _MAX_HALVINGS))

        def make(e):
            lo = max(b, 0.0) / (1 - e)
            hi = min(1 - a - e, 1 - e)
            if not hi > lo:
                return None
            return DriftFunction.linear(1.0, (lo + hi) / 2)
    else:
        candidates = (0.5**n for n in range(1, _MAX_HALVINGS))
        make = lambda e: DriftFunction.quadratic(a, b)  # noqa: E731
    for eps in candidates:
        fn = make(eps)
        if fn is not None and all(parameter_conditions(fn, p, eps).values()):
            return fn, eps
    raise RegionMismatch(f"no admissible eps found for {label} at ({a}, {b})")


# -- certificate ----------------------------------------------------------------


def _grid(B: int):
    r = np.arange(B + 1)
    return np.meshgrid(r, r, indexing="ij")


def _excludes_A(fn: DriftFunction) -> bool:
    return fn.kind is not DriftKind.LINEAR_R1


def exceptional_set(
    fn: DriftFunction, p: Params, eps: float, B: int
) -> tuple[list[State], float]:
    """Violating states in ``{0..B}^2`` and the drift margin on the outer shell.

    ``C`` holds the states (outside ``A`` unless ``fn`` is linear) where
    ``drift + eps*V > 0``, plus exact ties up to a relative 1e-9. The margin is the max of ``drift + eps*V`` over
    the same candidates on the shell ``max(i, j) >= B - 1``.

    Raises
    ------
    BoxTooSmall
        If ``C`` reaches the shell.
    """
    if not 0 < eps < 1:
        raise ValueError("eps must lie in (0, 1)")
    I, J = _grid(B)
    V = _V(fn, p, I, J)
    g = _EV(fn, p, I, J) - (1 - eps) * V
    candidate = ~_in_A(p, I, J) if _excludes_A(fn) else np.ones_like(I, dtype=bool)
    # near-ties go into C so rounding cannot break the re-verification
    viol = candidate & (g > -1e-9 * V)
    shell = np.maximum(I, J) >= B - 1
    on_shell = candidate & shell
    margin = float(g[on_shell].max()) if on_shell.any() else -math.inf
    if (viol & shell).any():
        raise BoxTooSmall(f"exceptional set reaches the edge of box B={B}")
    C = [State(int(i), int(j)) for i, j in zip(I[viol], J[viol])]
    return C, margin


def _sup_EV_on_A(fn: DriftFunction, p: Params) -> float:
    # From (i, j) in A the chain moves to (0, i). With b < 0 every i occurs in A.
    if fn.kind is DriftKind.ANGULAR_R2:
        return 1.0
    if fn.kind is DriftKind.QUADRATIC_R3:
        if p.b >= 0:
            raise RegionMismatch("quadratic certificate expects b < 0")
        # (0, i) is outside A iff b*i + lam > 0
        i_top = math.ceil(p.lam / -p.b)
        i = np.arange(i_top + 1)
        return float(max(1.0, np.max(_V(fn, p, np.zeros_like(i), i))))
    raise ValueError("linear certificates do not use A")


@dataclass
class DriftReport:
    params: Params
    label: str
    fn: DriftFunction
    epsilon: float
    K: float
    C: list[State]
    box: int
    boundary_margin: float
    conditions: dict[str, bool] = field(default_factory=dict)

    @property
    def drift_set_includes_A(self) -> bool:
        return _excludes_A(self.fn)

    def in_drift_set(self, s: State) -> bool:
        return (self.drift_set_includes_A and in_A(self.params, s)) or s in set(self.C)

    def verify(self) -> bool:
        """Re-check the drift inequality at every state of the box.

        Independent of how ``C`` was found: recomputes the drift everywhere
        and tests membership in ``A`` and in the stored ``C`` list.
        """
        p, fn = self.params, self.fn
        I, J = _grid(self.box)
        V = _V(fn, p, I, J)
        d = _EV(fn, p, I, J) - V
        member = np.zeros(I.shape, dtype=bool)
        for s in self.C:
            member[s.i, s.j] = True
        if self.drift_set_includes_A:
            member |= _in_A(p, I, J)
            if any(in_A(p, s) for s in self.C):
                return False
        ok = d <= -self.epsilon * V + self.K * member
        return bool(ok.all()) and self.boundary_margin < 0 and all(self.conditions.values())

    def to_dict(self, max_listed: int = 100) -> dict:
        return {
            "params": self.params.to_dict(),
            "label": self.label,
            "fn": self.fn.to_dict(),
            "epsilon": self.epsilon,
            "K": self.K,
            "drift_set": "A u C" if self.drift_set_includes_A else "C",
            "A_rule": "a*i + b*j + lambda <= 0",
            "C_size": len(self.C),
            "C": [list(s) for s in self.C] if len(self.C) <= max_listed else None,
            "box": self.box,
            "boundary_margin": self.boundary_margin,
            "conditions": self.conditions,
            "sound": self.verify(),
        }


def certify_label(p: Params, label: str, box: int = DEFAULT_BOX, max_box: int = MAX_BOX) -> DriftReport:
    fn, eps = choose_parameters(p, label)
    B = box
    while True:
        try:
            C, margin = exceptional_set(fn, p, eps, B)
            break
        except BoxTooSmall:
            if B * 2 > max_box:
                raise
            B *= 2
    K = 1.0
    if C:
        I = np.array([s.i for s in C])
        J = np.array([s.j for s in C])
        K = max(K, float(np.max(_EV(fn, p, I, J))))
    if _excludes_A(fn):
        K = max(K, _sup_EV_on_A(fn, p))
        I, J = _grid(B)
        on_A = _in_A(p, I, J)
        if on_A.any():
            K = max(K, float(np.max(_EV(fn, p, I[on_A], J[on_A]))))
    return DriftReport(p, label, fn, eps, K, C, B, margin, parameter_conditions(fn, p, eps))


def certify(p: Params, box: int = DEFAULT_BOX, max_box: int = MAX_BOX) -> DriftReport:
    """Drift certificate for a recurrent parameter pair.

    Sub-regions are tried in the order R1, R2, R3; if one cannot be closed
    within ``max_box`` the next applicable one is tried.
    """
    label = classify(p)
    if label.phase is not Phase.RECURRENT:
        raise RegionMismatch(f"({p.a}, {p.b}) is {label.phase.value}, not Recurrent")
    err: Exception | None = None
    for sub in label.sublabels:
        try:
            return certify_label(p, sub, box, max_box)
        except (BoxTooSmall, RegionMismatch) as e:
            err = e
    assert err is not None
    raise err


def two_step_to_origin(p: Params, s: State) -> float:
    """``P^2(s, (0, 0))``; the only path runs through ``(0, s.i)``."""
    return poisson_pmf(0, intensity(p, s)) * poisson_pmf(0, intensity(p, State(0, s.i)))
