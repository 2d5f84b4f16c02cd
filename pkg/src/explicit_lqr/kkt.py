"""KKT solution of a candidate active set and the LP certificates around it.

For an active set ``A`` with inactive complement ``I`` the stationarity and
tightness conditions of the condensed QP are affine in ``x``::

    H u + F' x + G_A' s = 0,     G_A u = w_A + E_A x

so both the optimizer ``u = Ku x + ku`` and the multipliers ``s = L x + l0``
are affine.  The critical region is where the inactive rows hold and the
multipliers are nonnegative.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.linalg

from . import tolerances
from .bitset import FORWARD, ActiveSetTuple, is_persistent_form, to_backward_order
from .errors import DegenerateKKT, LengthMismatch
from .geom import LPResult, Polytope, chebyshev_center, lp_solve, remove_redundant
from .lqcore import CondensedQP


@dataclass(frozen=True, eq=False)
class KKTSolution:
    Ku: np.ndarray
    ku: np.ndarray
    Lam: np.ndarray
    lam0: np.ndarray
    active_set: ActiveSetTuple

    def u(self, x) -> np.ndarray:
        return self.Ku @ np.asarray(x, dtype=float) + self.ku

    def sigma(self, x) -> np.ndarray:
        """Multipliers of the active rows (inactive ones are zero)."""
        return self.Lam @ np.asarray(x, dtype=float) + self.lam0

    def stationarity_residual(self, qp: CondensedQP, x) -> float:
        x = np.asarray(x, dtype=float)
        GA = qp.G[_rows(self.active_set)]
        r = qp.H @ self.u(x) + GA.T @ self.sigma(x) + qp.F.T @ x
        return float(np.max(np.abs(r), initial=0.0))


@dataclass(frozen=True, eq=False)
class CriticalRegion:
    active_set: ActiveSetTuple
    law: KKTSolution
    region: Polytope
    full_dim: bool
    licq: bool
    weakly_active: bool
    persistent_form: bool
    center: np.ndarray
    radius: float

    @property
    def tuple_text(self) -> str:
        return str(self.active_set)

    def contains(self, x, tol=None) -> bool:
        return self.region.contains_point(x, tol)


def _rows(a: ActiveSetTuple) -> list:
    if a.order != FORWARD:
        a = to_backward_order(a)
    return a.rows()


def _check(qp: CondensedQP, a: ActiveSetTuple):
    if len(a.bits) != qp.q:
        raise LengthMismatch(f"tuple has {len(a.bits)} bits, problem has {qp.q} rows")
    rows = _rows(a)
    inactive = [i for i in range(qp.q) if i not in set(rows)]
    return rows, inactive


def licq_check(qp: CondensedQP, a: ActiveSetTuple) -> bool:
    """True iff the active rows of ``G`` are linearly independent."""
    rows, _ = _check(qp, a)
    if not rows:
        return True
    GA = qp.G[rows]
    if len(rows) > GA.shape[1]:
        return False
    scale = np.linalg.norm(GA)
    if scale == 0.0:
        return False
    _, R, _ = scipy.linalg.qr(GA.T, mode="economic", pivoting=True)
    rank = int(np.sum(np.abs(np.diag(R)) > tolerances.current().rank * scale))
    return rank == len(rows)


def _margin_lp(qp: CondensedQP, a: ActiveSetTuple, stationarity: bool) -> LPResult:
    # variables: z (nu), x (n), [lambda (|A|)], t
    rows, inactive = _check(qp, a)
    nu, n, na = qp.nu, qp.n, len(rows)
    nl = na if stationarity else 0
    nv = nu + n + nl + 1
    Ceq, deq, Cin, din = [], [], [], []
    if na:
        Ceq.append(np.hstack([qp.G[rows], -qp.E[rows], np.zeros((na, nl + 1))]))
        deq.append(qp.w[rows])
    if stationarity:
        Ceq.append(np.hstack([qp.H, qp.F.T, qp.G[rows].T, np.zeros((nu, 1))]))
        deq.append(np.zeros(nu))
        if na:
            Cin.append(np.hstack([np.zeros((na, nu + n)), -np.eye(na), np.ones((na, 1))]))
            din.append(np.zeros(na))
    if inactive:
        ni = len(inactive)
        Cin.append(np.hstack([qp.G[inactive], -qp.E[inactive], np.zeros((ni, nl)), np.ones((ni, 1))]))
        din.append(qp.w[inactive])
    c = np.zeros(nv)
    c[-1] = 1.0
    bounds = [(None, None)] * (nu + n) + [(0, None)] * nl + [(0, 1)]
    return lp_solve(c,
                    np.vstack(Ceq) if Ceq else None, np.concatenate(deq) if deq else None,
                    np.vstack(Cin) if Cin else None, np.concatenate(din) if din else None,
                    bounds=bounds)


def feasibility_lp(qp: CondensedQP, a: ActiveSetTuple) -> LPResult:
    """Largest margin ``t`` by which the inactive rows can be strict while ``a`` is tight."""
    return _margin_lp(qp, a, stationarity=False)


def optimality_lp(qp: CondensedQP, a: ActiveSetTuple) -> LPResult:
    """As :func:`feasibility_lp`, adding stationarity and ``t <= lambda``."""
    return _margin_lp(qp, a, stationarity=True)


def _affine_law(qp: CondensedQP, rows):
    """Optimizer, multipliers and consistency equalities as affine maps of ``x``."""
    try:
        cho = scipy.linalg.cho_factor(qp.H)
    except np.linalg.LinAlgError as exc:
        raise DegenerateKKT("Hessian is not positive definite") from exc
    HiF = scipy.linalg.cho_solve(cho, qp.F.T)        # H^-1 F'
    n = qp.n
    if not rows:
        return -HiF, np.zeros(qp.nu), np.zeros((0, n)), np.zeros(0), np.zeros((0, n)), np.zeros(0), True
    GA = qp.G[rows]
    HiG = scipy.linalg.cho_solve(cho, GA.T)          # H^-1 G_A'
    M = GA @ HiG
    M = 0.5 * (M + M.T)
    # s = -M^+ (w_A + (E_A + G_A H^-1 F') x)
    rhs_x = qp.E[rows] + GA @ HiF
    rhs_0 = qp.w[rows]
    evals, evecs = np.linalg.eigh(M)
    if not np.all(np.isfinite(evals)):
        raise DegenerateKKT("bordered KKT system is not finite")
    cut = tolerances.current().rank * max(1.0, float(np.max(np.abs(evals))))
    keep = evals > cut
    licq = bool(np.all(keep))
    V = evecs[:, keep]
    Mpinv = V @ np.diag(1.0 / evals[keep]) @ V.T
    Lam = -Mpinv @ rhs_x
    lam0 = -Mpinv @ rhs_0
    Ku = -HiF - HiG @ Lam
    ku = -HiG @ lam0
    # tightness is solvable only where the right-hand side lies in range(M)
    Nb = evecs[:, ~keep]
    return Ku, ku, Lam, lam0, Nb.T @ rhs_x, Nb.T @ rhs_0, licq


def solve_kkt(qp: CondensedQP, a: ActiveSetTuple) -> CriticalRegion:
    """Affine law and critical region of the active set ``a``."""
    rows, inactive = _check(qp, a)
    tol = tolerances.current()
    Ku, ku, Lam, lam0, Cx, c0, licq = _affine_law(qp, rows)
    licq = licq and licq_check(qp, a)
    C = np.vstack([qp.G[inactive] @ Ku - qp.E[inactive], -Lam, Cx, -Cx])
    d = np.concatenate([qp.w[inactive] - qp.G[inactive] @ ku, lam0, -c0, c0])
    norms = np.linalg.norm(C, axis=1)
    scale = max(1.0, float(np.max(np.abs(d), initial=0.0)))
    flat = norms <= 1e-12 * scale
    if np.any(flat & (d < -tol.feas * scale)):
        # a constant row that can never hold: empty region
        C, d = np.zeros((1, qp.n)), np.array([-1.0])
    else:
        C, d = C[~flat], d[~flat]
    region = Polytope(C, d)
    center, radius = chebyshev_center(region)
    full_dim = bool(radius > tol.margin)
    if radius >= 0:
        region = remove_redundant(region)
    weak = bool(np.any(np.linalg.norm(np.hstack([Lam, lam0[:, None]]), axis=1) <= tol.tight))
    law = KKTSolution(Ku=Ku, ku=ku, Lam=Lam, lam0=lam0, active_set=a)
    return CriticalRegion(active_set=a, law=law, region=region, full_dim=full_dim, licq=licq,
                          weakly_active=weak, persistent_form=is_persistent_form(a),
                          center=center, radius=float(radius))
