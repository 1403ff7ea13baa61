"""Grid sweeps over ``(a, b)`` reproducing the phase partition."""

from __future__ import annotations

import csv
import io
from dataclasses import dataclass

import numpy as np

from .classification import DEFAULT_TOL, classify, dominant_eigenvalue
from .process import Params, State, Status, simulate
from .transience import DEFAULT_ESCAPE_LEVEL, escape_step

SIM_STEPS = 200


@dataclass
class GridPoint:
    a: float
    b: float
    phase: str
    sublabels: tuple[str, ...]
    theta: float | None
    max_count: int | None = None
    escaped: bool | None = None


def phase_diagram(
    a_range: tuple[float, float],
    b_range: tuple[float, float],
    grid: int,
    *,
    lam: float = 1.0,
    tol: float = DEFAULT_TOL,
    with_simulation: bool = False,
    seed: int = 0,
    steps: int = SIM_STEPS,
    escape_level: float = DEFAULT_ESCAPE_LEVEL,
) -> list[GridPoint]:
    """Classify a ``grid x grid`` lattice, ``a`` varying slowest.

    With ``with_simulation`` each point also gets a ``steps``-step run from
    ``(0, 0)`` on child stream ``k`` (its row number) of ``seed``.
    """
    if grid < 2:
        raise ValueError("grid must be >= 2")
    out = []
    for a in np.linspace(*a_range, grid):
        for b in np.linspace(*b_range, grid):
            p = Params(float(a), float(b), lam)
            lab = classify(p, tol)
            pt = GridPoint(p.a, p.b, lab.phase.value, lab.sublabels, dominant_eigenvalue(p))
            if with_simulation:
                t = simulate(p, State(0, 0), steps, seed, index=len(out))
                pt.max_count = int(t.counts.max())
                pt.escaped = t.status is not Status.COMPLETED or escape_step(t, escape_level) is not None
            out.append(pt)
    return out


def to_csv(points: list[GridPoint]) -> str:
    with_sim = bool(points) and points[0].escaped is not None
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    header = ["a", "b", "phase", "sublabels", "theta"]
    if with_sim:
        header += ["max_count", "escaped"]
    w.writerow(header)
    for pt in points:
        row = [repr(pt.a), repr(pt.b), pt.phase, ";".join(pt.sublabels),
               "" if pt.theta is None else repr(pt.theta)]
        if with_sim:
            row += [pt.max_count, int(pt.escaped)]
        w.writerow(row)
    return buf.getvalue()
