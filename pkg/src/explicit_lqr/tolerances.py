"""Numerical tolerances used throughout the package.

Every classification (feasible, redundant, tight, full-dimensional) reads its
threshold from :data:`TOL`, so a single override changes all of them
consistently.
"""
from dataclasses import dataclass, replace


@dataclass(frozen=True)
class Tolerances:
    feas: float = 1e-8        # constraint satisfaction / containment slack
    redundancy: float = 1e-9  # row i redundant iff max C_i z <= d_i + redundancy
    tight: float = 1e-7       # activity read-off, facet intersections
    margin: float = 1e-7      # LP margin separating full-dim from degenerate
    rank: float = 1e-9        # relative rank tolerance for LICQ
    interior: float = 1e-5    # distance-to-facet guard for oracle tuple checks


TOL = Tolerances()


def set_tolerances(**overrides):
    """Replace the global tolerances; returns the previous value."""
    global TOL
    previous = TOL
    for key, value in overrides.items():
        if value is not None and value <= 0:
            raise ValueError(f"tolerance {key} must be positive, got {value}")
    TOL = replace(TOL, **{k: v for k, v in overrides.items() if v is not None})
    return previous


def current():
    return TOL
