"""Explicit constrained LQR with stage-structured active sets.

Typical use::

    from explicit_lqr import Setup, build_atlas, example1

    setup = Setup.from_spec(example1())
    atlas1 = build_atlas(setup, 1)                    # tree search
    atlas2 = build_atlas(setup, 2, previous=atlas1)   # horizon extension
"""
from .atlas import (Atlas, PersistentRegionSet, Setup, build_atlas, build_PN, check_persistence,
                    check_PN_invariance, converged, evaluate, locate, mark_persistence)
from .bitset import ActiveSetTuple
from .enumeration import enumerate_extension, enumerate_tree, inject_persistent_offspring
from .kkt import CriticalRegion, KKTSolution, feasibility_lp, licq_check, optimality_lp, solve_kkt
from .lqcore import ProblemSpec, condense, example1, load_problem, solve_dare
from .terminal import build_terminal_set

__all__ = [
    "ActiveSetTuple", "Atlas", "CriticalRegion", "KKTSolution", "PersistentRegionSet",
    "ProblemSpec", "Setup", "build_PN", "build_atlas", "build_terminal_set", "check_PN_invariance",
    "check_persistence", "condense", "converged", "enumerate_extension", "enumerate_tree",
    "evaluate", "example1", "feasibility_lp", "inject_persistent_offspring", "licq_check",
    "load_problem", "locate", "mark_persistence", "optimality_lp", "solve_dare", "solve_kkt",
]
