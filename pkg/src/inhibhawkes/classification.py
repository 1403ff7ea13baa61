"""Phase diagram, dominant eigenvalue and strong irreducibility."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

from .process import Params, State

DEFAULT_TOL = 1e-12

RECURRENT_LABELS = ("R1", "R2", "R3")
TRANSIENT_LABELS = ("T1", "T2a", "T2b")


class Phase(str, enum.Enum):
    RECURRENT = "Recurrent"
    TRANSIENT = "Transient"
    BOUNDARY = "Boundary"


@dataclass(frozen=True)
class RegionLabel:
    """Phase plus every sub-region the point belongs to.

    Sub-regions overlap (R2 and R3 share points), so all matches are kept in
    the fixed order of ``RECURRENT_LABELS`` / ``TRANSIENT_LABELS``. Boundary
    points carry no sub-labels.
    """

    phase: Phase
    sublabels: tuple[str, ...] = ()

    def __post_init__(self):
        allowed = {
            Phase.RECURRENT: RECURRENT_LABELS,
            Phase.TRANSIENT: TRANSIENT_LABELS,
            Phase.BOUNDARY: (),
        }[self.phase]
        if any(s not in allowed for s in self.sublabels):
            raise ValueError(f"sublabels {self.sublabels} invalid for {self.phase.value}")
        if (self.phase is Phase.BOUNDARY) != (not self.sublabels):
            raise ValueError("only boundary points may have empty sublabels")


def critical_b(a: float) -> float:
    """Critical lag-2 coefficient: recurrent below, transient above."""
    if a <= 0:
        return 1.0
    if a < 2:
        return 1.0 - a
    return -a * a / 4.0


def recurrent_sublabels(a: float, b: float) -> tuple[str, ...]:
    out = []
    if a < 1 and b < 1 and a + b < 1:
        out.append("R1")
    if a > 0 and a * a + 4 * b < 0:
        out.append("R2")
    if 1 <= a < 2 and -1 < b < 1 - a:
        out.append("R3")
    return tuple(out)


def transient_sublabels(a: float, b: float) -> tuple[str, ...]:
    out = []
    if a < 0 and b > 1:
        out.append("T1")
    t2 = (0 <= a < 2 and a + b > 1) or (a >= 2 and a * a + 4 * b > 0)
    if t2:
        out.append("T2a" if b >= 0 else "T2b")
    return tuple(out)


def classify(p: Params, tol: float = DEFAULT_TOL) -> RegionLabel:
    """Place ``(a, b)`` in the phase diagram.

    Points within ``tol`` of the critical curve are labelled Boundary and
    nothing more is claimed about them.
    """
    if tol < 0:
        raise ValueError("tol must be >= 0")
    bc = critical_b(p.a)
    if abs(p.b - bc) <= tol:
        return RegionLabel(Phase.BOUNDARY)
    if p.b < bc:
        return RegionLabel(Phase.RECURRENT, recurrent_sublabels(p.a, p.b))
    return RegionLabel(Phase.TRANSIENT, transient_sublabels(p.a, p.b))


def dominant_eigenvalue(p: Params) -> float | None:
    """Largest real root of ``x**2 - a*x - b``, or None if the roots are complex."""
    disc = p.a * p.a + 4 * p.b
    if disc < 0:
        return None
    return (p.a + math.sqrt(disc)) / 2


class Irreducibility(str, enum.Enum):
    STRONGLY_IRREDUCIBLE = "StronglyIrreducible"
    CLASS_OF_ORIGIN_IS_S = "ClassOfOriginIsS"
    NOT_STRONGLY_IRREDUCIBLE = "NotStronglyIrreducible"
    UNRESOLVED_CLASS = "UnresolvedClass"


@dataclass(frozen=True)
class IrreducibilityReport:
    """Outcome of the strong-irreducibility test.

    ``witness`` is a state unreachable from ``(0, 0)``; it and ``k_star`` are
    set exactly when the verdict is NotStronglyIrreducible. In that regime the
    communicating class of the origin is not identified, which ``note``
    records with the ``UnresolvedClass`` marker.
    """

    verdict: Irreducibility
    witness: State | None = None
    k_star: int | None = None
    note: str = ""

    def __post_init__(self):
        has_witness = self.witness is not None
        if has_witness != (self.verdict is Irreducibility.NOT_STRONGLY_IRREDUCIBLE):
            raise ValueError("witness must be present iff not strongly irreducible")
        if has_witness != (self.k_star is not None):
            raise ValueError("k_star must be present iff witness is")

    def to_dict(self) -> dict:
        return {
            "verdict": self.verdict.value,
            "witness": list(self.witness) if self.witness is not None else None,
            "k_star": self.k_star,
            "note": self.note,
        }


def _min_k(slope: float, lam: float) -> int:
    # smallest k >= 0 with slope*k + lam <= 0, slope < 0
    k = max(math.ceil(-lam / slope), 0)
    while slope * k + lam > 0:
        k += 1
    while k > 0 and slope * (k - 1) + lam <= 0:
        k -= 1
    return k


def irreducibility(p: Params) -> IrreducibilityReport:
    a, b, lam = p.a, p.b, p.lam
    if a >= 0 or (a > -lam and a + b >= 0):
        return IrreducibilityReport(Irreducibility.STRONGLY_IRREDUCIBLE)
    if a <= -lam:
        return IrreducibilityReport(
            Irreducibility.CLASS_OF_ORIGIN_IS_S,
            note="class of (0,0) is {(0,0)} together with both axes",
        )
    # -lam < a < 0 and a + b < 0
    k_star = _min_k(a, lam) if b <= 0 else _min_k(a + b, lam)
    return IrreducibilityReport(
        Irreducibility.NOT_STRONGLY_IRREDUCIBLE,
        witness=State(1, k_star),
        k_star=k_star,
        note=f"{Irreducibility.UNRESOLVED_CLASS.value}: communicating class of (0,0) not identified",
    )
