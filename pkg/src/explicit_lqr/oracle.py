"""Independent pointwise checks: a dense QP solver, brute-force enumeration, sampling.

Nothing here uses the critical-region machinery, so agreement with an atlas
is a genuine cross-check.
"""
from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations

import numpy as np

from . import tolerances
from .bitset import ActiveSetTuple, from_rows
from .errors import InfeasiblePoint, SamplingExhausted, TooLarge
from .geom import bounding_box, chebyshev_center, lp_solve
from .kkt import optimality_lp, solve_kkt
from .lqcore import CondensedQP

MAX_REJECTIONS = 1_000_000


@dataclass(frozen=True, eq=False)
class OracleResult:
    minimizer: np.ndarray
    active_tuple: ActiveSetTuple
    objective: float
    multipliers: np.ndarray     # one per row of G, zero off the final working set
    iterations: int

    def kkt_residual(self, qp: CondensedQP, x) -> float:
        """Worst violation of stationarity, primal and dual feasibility, complementarity."""
        x = np.asarray(x, dtype=float)
        u, lam = self.minimizer, self.multipliers
        slack = qp.w + qp.E @ x - qp.G @ u
        parts = [qp.H @ u + qp.F.T @ x + qp.G.T @ lam, np.minimum(slack, 0.0),
                 np.minimum(lam, 0.0), lam * slack]
        return float(max(np.max(np.abs(p), initial=0.0) for p in parts))


def feasible_start(qp: CondensedQP, x):
    """Some ``u`` with ``G u <= w + E x``, or ``None``."""
    rhs = qp.w + qp.E @ np.asarray(x, dtype=float)
    res = lp_solve(np.zeros(qp.nu), Cineq=qp.G, dineq=rhs)
    return res.point if res.optimal else None


def feasible(qp: CondensedQP, x) -> bool:
    x = np.asarray(x, dtype=float)
    rhs = qp.w + qp.E @ x
    if np.any(rhs[qp.parameter_rows()] < -tolerances.current().feas):
        return False
    return feasible_start(qp, x) is not None


def solve_qp_at(qp: CondensedQP, x, max_iter: int = 1000) -> OracleResult:
    """Primal active-set method for the QP at the fixed parameter ``x``.

    Starts with an empty working set at an LP-feasible point.  Each step solves
    the equality-constrained subproblem, moves to the first blocking row (adding
    it) or, at a stationary point, drops the most negative multiplier.  Ties go
    to the lowest row index.
    """
    x = np.asarray(x, dtype=float)
    u = feasible_start(qp, x)
    if u is None:
        raise InfeasiblePoint(f"no feasible input sequence at x = {x.tolist()}")
    H, G = qp.H, qp.G
    rhs = qp.w + qp.E @ x
    g_lin = qp.F.T @ x
    nu = qp.nu
    W: list = []
    lam_W = np.zeros(0)
    scale = max(1.0, float(np.max(np.abs(H))))
    for it in range(1, max_iter + 1):
        g = H @ u + g_lin
        k = len(W)
        KKT = np.zeros((nu + k, nu + k))
        KKT[:nu, :nu] = H
        if k:
            KKT[:nu, nu:] = G[W].T
            KKT[nu:, :nu] = G[W]
        sol = np.linalg.solve(KKT, np.concatenate([-g, np.zeros(k)]))
        p, lam_W = sol[:nu], sol[nu:]
        if np.max(np.abs(p), initial=0.0) <= 1e-12 * scale * max(1.0, np.max(np.abs(u), initial=0.0)):
            if k == 0 or np.min(lam_W) >= -1e-12:
                break
            drop = int(np.argmin(lam_W))     # argmin picks the lowest index on ties
            W.pop(drop)
            continue
        Gp = G @ p
        step, block = 1.0, None
        for i in range(qp.q):
            if i in W or Gp[i] <= 1e-14:
                continue
            ratio = max(rhs[i] - G[i] @ u, 0.0) / Gp[i]
            if ratio < step:
                step, block = ratio, i
        u = u + step * p
        if block is not None:
            W.append(block)
            W.sort()
    else:
        raise RuntimeError(f"active-set iteration did not finish in {max_iter} steps")
    lam = np.zeros(qp.q)
    lam[W] = lam_W
    tight = tolerances.current().tight
    active = [i for i in range(qp.q) if abs(G[i] @ u - rhs[i]) <= tight]
    return OracleResult(u, from_rows(active, qp.layout), qp.objective(x, u), lam, it)


def exhaustive_active_sets(qp: CondensedQP, max_rows: int = 12) -> set:
    """Every row subset whose optimality margin is positive and region full-dimensional."""
    if qp.q > max_rows:
        raise TooLarge(f"{qp.q} rows means 2^{qp.q} subsets; limit is {max_rows} rows")
    eps = tolerances.current().margin
    found = set()
    for k in range(qp.q + 1):
        for S in combinations(range(qp.q), k):
            a = from_rows(S, qp.layout)
            res = optimality_lp(qp, a)
            if res.optimal and res.optimum > eps and solve_kkt(qp, a).full_dim:
                found.add(a)
    return found


def sample_feasible(qp: CondensedQP, count: int, seed: int = 0) -> np.ndarray:
    """Seeded rejection sampling of feasible parameters.

    Candidates are drawn uniformly from the bounding box of the state
    constraint set grown by its Chebyshev radius.  Draw ``i`` uses its own
    generator seeded with ``(seed, i)``.
    """
    X = qp.state_polytope()
    lo, hi = bounding_box(X)
    _, radius = chebyshev_center(X)
    lo, hi = lo - radius, hi + radius
    out = []
    rejected = 0
    i = 0
    while len(out) < count:
        x = np.random.default_rng([seed, i]).uniform(lo, hi)
        i += 1
        if X.contains_point(x, 0.0) and feasible(qp, x):
            out.append(x)
            continue
        rejected += 1
        if rejected >= MAX_REJECTIONS:
            raise SamplingExhausted(f"{rejected} rejections before {count} samples")
    return np.array(out).reshape(count, qp.n)
