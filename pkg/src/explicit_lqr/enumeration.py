"""Complete enumeration of optimal active sets.

Two routes produce the same atlas: a pruned breadth-first search over all
row subsets, and horizon extension, which only prepends a stage-0 block to
the active sets already known for the shorter horizon.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from . import tolerances
from .bitset import concat, from_rows, is_persistent_form, persistent_offspring
from .errors import HorizonMismatch
from .kkt import CriticalRegion, feasibility_lp, optimality_lp, solve_kkt
from .lqcore import CondensedQP

TREE = "tree"
EXTENSION = "extension"


@dataclass
class EnumerationReport:
    horizon: int
    method: str
    candidates_tested: int = 0
    pruned: int = 0
    regions_found: int = 0
    degenerate: list = field(default_factory=list)   # optimal but lower-dimensional

    def to_json(self) -> dict:
        return {"horizon": self.horizon, "method": self.method,
                "candidatesTested": self.candidates_tested, "pruned": self.pruned,
                "regionsFound": self.regions_found,
                "degenerate": [str(r.active_set) for r in self.degenerate]}


def _passes(res, eps) -> bool:
    return res.optimal and res.optimum > eps


def _evaluate(qp, a, report, include_degenerate, eps):
    """Optimality certificate then KKT solve; returns a region or None.

    Optimal active sets whose region is lower-dimensional are kept in the
    report: they carry no law of their own but can seed full-dimensional
    regions at the next horizon.
    """
    if not _passes(optimality_lp(qp, a), eps):
        return None
    cr = solve_kkt(qp, a)
    if cr.full_dim or include_degenerate:
        return cr
    report.degenerate.append(cr)
    return None


def enumerate_tree(qp: CondensedQP, include_degenerate: bool = False):
    """Breadth-first search over row subsets with superset pruning.

    A subset whose feasibility margin is not positive is discarded together
    with all its supersets.  Rows that do not depend on the inputs (stage-0
    state rows) are excluded up front: making one tight confines ``x`` to a
    hyperplane.
    """
    eps = tolerances.current().margin
    report = EnumerationReport(qp.N, TREE)
    param = set(int(i) for i in qp.parameter_rows())
    pruned = [1 << i for i in param]
    rows = [i for i in range(qp.q) if i not in param]
    regions = []
    level = [()]
    while level:
        nxt = []
        for S in level:
            mask = sum(1 << i for i in S)
            if any(p & mask == p for p in pruned):
                continue
            a = from_rows(S, qp.layout)
            report.candidates_tested += 1
            if not _passes(feasibility_lp(qp, a), eps):
                pruned.append(mask)
                report.pruned += 1
                continue
            cr = _evaluate(qp, a, report, include_degenerate, eps)
            if cr is not None:
                regions.append(cr)
            top = S[-1] if S else -1
            nxt.extend(S + (j,) for j in rows if j > top)
        level = nxt
    regions.sort(key=lambda r: r.active_set)
    report.regions_found = len(regions)
    return regions, report


def _prefixes(stage_rows):
    """Subsets of ``stage_rows`` by cardinality, then lexicographically."""
    for k in range(len(stage_rows) + 1):
        yield from combinations(stage_rows, k)


def enumerate_extension(qp: CondensedQP, parents, include_degenerate: bool = False):
    """Regions for horizon ``N + 1`` from the complete atlas for ``N``.

    Every candidate is ``concat(alpha, a)`` for a parent tuple ``a`` and a
    stage-0 subset ``alpha``.  Per parent, supersets of an infeasible
    ``alpha`` are skipped.  ``parents`` should include the lower-dimensional
    optimal active sets of the shorter horizon (``report.degenerate``): a set
    violating LICQ at ``N`` may extend to a full-dimensional region.
    """
    eps = tolerances.current().margin
    report = EnumerationReport(qp.N, EXTENSION)
    width = qp.layout.stage_width
    param = set(int(i) for i in qp.parameter_rows())
    stage_rows = [i for i in range(width) if i not in param]
    regions = {}
    for parent in parents:
        a_N = parent.active_set if isinstance(parent, CriticalRegion) else parent
        if a_N.N != qp.N - 1:
            raise HorizonMismatch(f"parent {a_N} has horizon {a_N.N}, expected {qp.N - 1}")
        if a_N.layout.with_horizon(qp.N) != qp.layout:
            raise HorizonMismatch(f"parent {a_N} has an incompatible row layout")
        dead = []
        for alpha in _prefixes(stage_rows):
            mask = sum(1 << i for i in alpha)
            if any(p & mask == p for p in dead):
                continue
            prefix = [1 if i in alpha else 0 for i in range(width)]
            a = concat(prefix, a_N)
            if a in regions:
                continue
            report.candidates_tested += 1
            if not _passes(feasibility_lp(qp, a), eps):
                dead.append(mask)
                report.pruned += 1
                continue
            cr = _evaluate(qp, a, report, include_degenerate, eps)
            if cr is not None:
                regions[a] = cr
    out = sorted(regions.values(), key=lambda r: r.active_set)
    report.regions_found = len(out)
    return out, report


def inject_persistent_offspring(qp: CondensedQP, regions, include_degenerate: bool = False):
    """Add the persistent offspring of every persistent-form region.

    In a complete atlas the offspring are all present already; the second
    return value lists the tuples that had to be added.
    """
    merged = {r.active_set: r for r in regions}
    missing = []
    for r in list(regions):
        if not is_persistent_form(r.active_set):
            continue
        for child in persistent_offspring(r.active_set):
            if child in merged:
                continue
            cr = solve_kkt(qp, child)
            if cr.full_dim or include_degenerate:
                merged[child] = cr
                missing.append(child)
    return sorted(merged.values(), key=lambda r: r.active_set), missing


def tuples(regions) -> list:
    """Canonically ordered tuples of a region list."""
    return sorted(r.active_set for r in regions)

