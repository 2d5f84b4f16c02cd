"""Halfspace polytopes and the dense linear programs behind them.

All LPs go through :func:`lp_solve`, which wraps the HiGHS dual simplex with
tightened feasibility tolerances.  HiGHS is deterministic for identical
inputs, so every classification below is reproducible run to run.
"""
from __future__ import annotations

import enum
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from . import tolerances
from .errors import DimensionMismatch, DimensionNot2D, EmptyPolytope, UnboundedPolytope

_HIGHS_OPTIONS = {
    "primal_feasibility_tolerance": 1e-10,
    "dual_feasibility_tolerance": 1e-10,
    "presolve": True,
}


class LPStatus(enum.Enum):
    OPTIMAL = "optimal"
    INFEASIBLE = "infeasible"
    UNBOUNDED = "unbounded"


@dataclass(frozen=True)
class LPResult:
    status: LPStatus
    optimum: float
    point: np.ndarray | None

    @property
    def optimal(self) -> bool:
        return self.status is LPStatus.OPTIMAL


def _frozen(a, ndim):
    arr = np.array(a, dtype=float)
    if ndim == 2 and arr.ndim == 1:
        arr = arr.reshape(-1, 1) if arr.size else arr.reshape(0, 0)
    arr.setflags(write=False)
    return arr


def lp_solve(c, Ceq=None, deq=None, Cineq=None, dineq=None, bounds=None) -> LPResult:
    """Maximize ``c @ z`` subject to ``Ceq z = deq`` and ``Cineq z <= dineq``.

    Variables are free unless ``bounds`` (a list of ``(lo, hi)`` pairs, ``None``
    meaning infinite) is given.  Infeasibility and unboundedness are reported
    through the status, never raised.
    """
    c = np.asarray(c, dtype=float).ravel()
    nv = c.size

    def _pair(M, v, name):
        if M is None or np.size(M) == 0:
            return None, None
        M = np.atleast_2d(np.asarray(M, dtype=float))
        v = np.asarray(v, dtype=float).ravel()
        if M.shape[1] != nv or M.shape[0] != v.size:
            raise DimensionMismatch(f"{name}: {M.shape} vs {v.size} rows, {nv} variables")
        return M, v

    Ceq, deq = _pair(Ceq, deq, "equalities")
    Cineq, dineq = _pair(Cineq, dineq, "inequalities")
    if bounds is None:
        bounds = [(None, None)] * nv
    res = linprog(-c, A_ub=Cineq, b_ub=dineq, A_eq=Ceq, b_eq=deq, bounds=bounds,
                  method="highs-ds", options=_HIGHS_OPTIONS)
    if res.status == 0:
        return LPResult(LPStatus.OPTIMAL, float(-res.fun), np.asarray(res.x))
    if res.status == 2:
        return LPResult(LPStatus.INFEASIBLE, -np.inf, None)
    if res.status == 3:
        return LPResult(LPStatus.UNBOUNDED, np.inf, None)
    # Numerical trouble: retry once with the interior point method.
    res = linprog(-c, A_ub=Cineq, b_ub=dineq, A_eq=Ceq, b_eq=deq, bounds=bounds,
                  method="highs-ipm", options=_HIGHS_OPTIONS)
    if res.status == 0:
        return LPResult(LPStatus.OPTIMAL, float(-res.fun), np.asarray(res.x))
    if res.status == 3:
        return LPResult(LPStatus.UNBOUNDED, np.inf, None)
    return LPResult(LPStatus.INFEASIBLE, -np.inf, None)


@dataclass(frozen=True, eq=False)
class Polytope:
    """The set ``{z : C z <= d}``."""

    C: np.ndarray
    d: np.ndarray
    irredundant: bool = False

    def __post_init__(self):
        C = _frozen(self.C, 2)
        d = _frozen(self.d, 1).ravel()
        if C.shape[0] != d.size:
            raise DimensionMismatch(f"C has {C.shape[0]} rows but d has {d.size}")
        object.__setattr__(self, "C", C)
        object.__setattr__(self, "d", d)

    @property
    def dim(self) -> int:
        return self.C.shape[1]

    @property
    def n_rows(self) -> int:
        return self.C.shape[0]

    @classmethod
    def box(cls, lower, upper):
        lower = np.asarray(lower, dtype=float)
        upper = np.asarray(upper, dtype=float)
        n = lower.size
        C = np.vstack([np.eye(n), -np.eye(n)])
        return cls(C, np.concatenate([upper, -lower]))

    def slack(self, x):
        return self.d - self.C @ np.asarray(x, dtype=float)

    def contains_point(self, x, tol=None) -> bool:
        """Membership with a row-norm scaled tolerance."""
        tol = tolerances.current().feas if tol is None else tol
        scale = np.maximum(1.0, np.linalg.norm(self.C, axis=1))
        return bool(np.all(self.slack(x) >= -tol * scale))

    def normalized(self) -> "Polytope":
        """Rows scaled to unit norm; zero rows dropped when trivially satisfied."""
        norms = np.linalg.norm(self.C, axis=1)
        keep = norms > 1e-12
        if np.any(~keep & (self.d < -tolerances.current().feas)):
            raise EmptyPolytope("a zero row has a negative bound")
        return Polytope(self.C[keep] / norms[keep, None], self.d[keep] / norms[keep],
                        self.irredundant)

    def scaled(self, lam: float) -> "Polytope":
        """The set ``lam * P`` (valid for ``lam > 0``)."""
        return Polytope(self.C, lam * self.d, self.irredundant)

    def intersect(self, other: "Polytope") -> "Polytope":
        return Polytope(np.vstack([self.C, other.C]), np.concatenate([self.d, other.d]))

    def to_json(self) -> dict:
        return {"C": self.C.tolist(), "d": self.d.tolist()}

    @classmethod
    def from_json(cls, obj) -> "Polytope":
        C = np.asarray(obj["C"], dtype=float)
        d = np.asarray(obj["d"], dtype=float)
        if C.size == 0:
            C = C.reshape(0, int(obj.get("dim", 0)))
        return cls(C, d)

    def __repr__(self):
        return f"Polytope(rows={self.n_rows}, dim={self.dim}, irredundant={self.irredundant})"


def chebyshev_center(P: Polytope):
    """Center and radius of the largest ball inside ``P``.

    A negative radius means the rows admit no interior; ``-inf`` means the
    system is infeasible even with a negative radius (a zero row with a
    negative bound).
    """
    norms = np.linalg.norm(P.C, axis=1)
    n = P.dim
    c = np.zeros(n + 1)
    c[-1] = 1.0
    res = lp_solve(c, Cineq=np.hstack([P.C, norms[:, None]]), dineq=P.d,
                   bounds=[(None, None)] * n + [(None, 1e6)])
    if res.status is LPStatus.INFEASIBLE:
        return np.full(n, np.nan), -np.inf
    if res.status is LPStatus.UNBOUNDED or res.optimum >= 1e6 - 1:
        raise UnboundedPolytope("polytope is unbounded")
    return res.point[:n], res.optimum


def is_empty(P: Polytope) -> bool:
    res = lp_solve(np.zeros(P.dim), Cineq=P.C, dineq=P.d)
    return res.status is LPStatus.INFEASIBLE


def remove_redundant(P: Polytope) -> Polytope:
    """Drop rows implied by the others.

    Row ``i`` is redundant iff ``max C_i z`` over the remaining rows does not
    exceed ``d_i`` (both sides measured in units of ``|C_i|``).  Rows are
    visited in order, so of two identical rows the later one survives.
    """
    if P.n_rows == 0:
        return Polytope(P.C, P.d, irredundant=True)
    if is_empty(P):
        raise EmptyPolytope("cannot remove redundancy from an empty polytope")
    tol = tolerances.current().redundancy
    norms = np.linalg.norm(P.C, axis=1)
    keep = [i for i in range(P.n_rows) if norms[i] > 1e-12]
    Cn = np.zeros_like(P.C)
    dn = np.zeros_like(P.d)
    Cn[keep] = P.C[keep] / norms[keep, None]
    dn[keep] = P.d[keep] / norms[keep]
    for i in list(keep):
        others = [j for j in keep if j != i]
        if not others:
            continue
        res = lp_solve(Cn[i], Cineq=Cn[others], dineq=dn[others])
        if res.optimal and res.optimum <= dn[i] + tol:
            keep = others
    return Polytope(P.C[keep], P.d[keep], irredundant=True)


def contains(P: Polytope, Q: Polytope, M=None, tol=None) -> bool:
    """True iff ``M Q`` (``Q`` itself when ``M`` is None) lies inside ``P``."""
    tol = tolerances.current().feas if tol is None else tol
    for i in range(P.n_rows):
        row = P.C[i] if M is None else P.C[i] @ np.asarray(M, dtype=float)
        res = lp_solve(row, Cineq=Q.C, dineq=Q.d)
        if res.status is LPStatus.INFEASIBLE:
            return True  # empty Q is contained in anything
        if res.status is LPStatus.UNBOUNDED:
            return False
        if res.optimum > P.d[i] + tol * max(1.0, np.linalg.norm(P.C[i])):
            return False
    return True


def containment_slack(P: Polytope, Q: Polytope) -> float:
    """Largest violation ``max_i (max_{z in Q} C_i z - d_i)`` over rows of ``P``."""
    worst = -np.inf
    for i in range(P.n_rows):
        res = lp_solve(P.C[i], Cineq=Q.C, dineq=Q.d)
        if res.status is LPStatus.UNBOUNDED:
            return np.inf
        if res.optimal:
            worst = max(worst, res.optimum - P.d[i])
    return worst


def poly_equal(P: Polytope, Q: Polytope, tol=None) -> bool:
    return contains(P, Q, tol=tol) and contains(Q, P, tol=tol)


def bounding_box(P: Polytope):
    n = P.dim
    lo = np.empty(n)
    hi = np.empty(n)
    for k in range(n):
        e = np.zeros(n)
        e[k] = 1.0
        top = lp_solve(e, Cineq=P.C, dineq=P.d)
        bot = lp_solve(-e, Cineq=P.C, dineq=P.d)
        if not (top.optimal and bot.optimal):
            raise UnboundedPolytope("polytope is unbounded or empty")
        hi[k] = top.optimum
        lo[k] = -bot.optimum
    return lo, hi


def vertices2d(P: Polytope) -> np.ndarray:
    """Counterclockwise vertex cycle of a bounded full-dimensional polygon."""
    if P.dim != 2:
        raise DimensionNot2D(f"expected a 2-D polytope, got dimension {P.dim}")
    Pn = P.normalized()
    tol = tolerances.current().tight
    pts = []
    m = Pn.n_rows
    for i in range(m):
        for j in range(i + 1, m):
            M = Pn.C[[i, j]]
            if abs(np.linalg.det(M)) < 1e-12:
                continue
            v = np.linalg.solve(M, Pn.d[[i, j]])
            if np.all(Pn.C @ v <= Pn.d + tol):
                pts.append(v)
    if not pts:
        return np.zeros((0, 2))
    pts = np.array(pts)
    uniq = []
    for p in pts:
        if not any(np.linalg.norm(p - u) <= 1e-9 * max(1.0, np.linalg.norm(u)) for u in uniq):
            uniq.append(p)
    uniq = np.array(uniq)
    center = uniq.mean(axis=0)
    angles = np.arctan2(uniq[:, 1] - center[1], uniq[:, 0] - center[0])
    order = np.lexsort((uniq[:, 1], uniq[:, 0], np.round(angles, 12)))
    return uniq[order]


def sample_interior(P: Polytope, count: int, rng: np.random.Generator, shrink=0.95):
    """Hit-and-run samples strictly inside ``P``.

    Starts at the Chebyshev center; every step picks a random direction and a
    uniform point on the chord, contracted by ``shrink`` toward the current
    point so samples keep a positive distance from all facets.
    """
    center, radius = chebyshev_center(P)
    if not radius > 0:
        raise EmptyPolytope("polytope has no interior")
    Pn = P.normalized()
    x = center.copy()
    out = []
    for _ in range(count):
        for _ in range(3):
            direction = rng.standard_normal(P.dim)
            direction /= np.linalg.norm(direction)
            rate = Pn.C @ direction
            slack = Pn.d - Pn.C @ x
            with np.errstate(divide="ignore", invalid="ignore"):
                steps = slack / rate
            t_max = np.min(steps[rate > 1e-14], initial=np.inf)
            t_min = np.max(steps[rate < -1e-14], initial=-np.inf)
            if not (np.isfinite(t_max) and np.isfinite(t_min)):
                raise UnboundedPolytope("polytope is unbounded")
            t = rng.uniform(shrink * t_min, shrink * t_max)
            x = x + t * direction
        out.append(x.copy())
    return np.array(out).reshape(count, P.dim)
