"""Two-lag Poisson autoregression with inhibition.

``X_n ~ Poisson((a*X_{n-1} + b*X_{n-2} + lam)_+)``: simulation, phase
classification, Foster-Lyapunov certificates, truncated-kernel analysis and
transience diagnostics.
"""

__version__ = "0.1.0"

from .classification import (
    Irreducibility,
    IrreducibilityReport,
    Phase,
    RegionLabel,
    classify,
    critical_b,
    dominant_eigenvalue,
    irreducibility,
)
from .errors import (
    BoxTooSmall,
    DefectTooLarge,
    DomainError,
    MeanCapExceeded,
    NoConvergence,
    NotTransientT2,
    RegionMismatch,
    WindowEmpty,
)
from .kernel import (
    Distribution,
    TruncatedKernel,
    build_kernel,
    geometric_rate,
    occupation_measure,
    pn_closed_form,
    stationary,
    tv_distance,
)
from .lyapunov import DriftFunction, DriftKind, DriftReport, certify, choose_parameters, drift
from .process import Params, State, Status, Trajectory, intensity, make_rng, simulate, step, transition_prob
from .transience import axis_cycle_check, escape_statistics, growth_rate, ratio_theta_fraction

__all__ = [
    "BoxTooSmall", "DefectTooLarge", "Distribution", "DomainError", "DriftFunction", "DriftKind",
    "DriftReport", "Irreducibility", "IrreducibilityReport", "MeanCapExceeded", "NoConvergence",
    "NotTransientT2", "Params", "Phase", "RegionLabel", "RegionMismatch", "State", "Status",
    "Trajectory", "TruncatedKernel", "WindowEmpty", "axis_cycle_check", "build_kernel", "certify",
    "choose_parameters", "classify", "critical_b", "dominant_eigenvalue", "drift",
    "escape_statistics", "geometric_rate", "growth_rate", "intensity", "irreducibility",
    "make_rng", "occupation_measure", "pn_closed_form", "ratio_theta_fraction", "simulate",
    "stationary", "step", "transition_prob", "tv_distance",
]
