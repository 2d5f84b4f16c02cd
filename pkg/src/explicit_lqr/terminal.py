"""The LQR-admissible set and the maximal positively invariant terminal set."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import NotFinitelyDetermined, UnstableClosedLoop
from .geom import Polytope, contains, poly_equal, remove_redundant, sample_interior
from .lqcore import ProblemSpec, UnconstrainedSolution


@dataclass(frozen=True, eq=False)
class TerminalSet:
    T: Polytope
    determined_at: int
    Acl: np.ndarray

    @property
    def qT(self) -> int:
        return self.T.n_rows


def build_XU(spec: ProblemSpec, unc: UnconstrainedSolution) -> Polytope:
    """States in ``X`` whose LQR input ``Kinf x`` lies in ``U``."""
    C = np.vstack([spec.X.C, spec.U.C @ unc.Kinf])
    d = np.concatenate([spec.X.d, spec.U.d])
    return remove_redundant(Polytope(C, d))


def build_terminal_set(spec: ProblemSpec, unc: UnconstrainedSolution, k_max: int = 200) -> TerminalSet:
    """Gilbert-Tan iteration for the maximal admissible set of ``x+ = Acl x``.

    ``Omega_{k+1} = {x : Acl^{k+1} x in XU} & Omega_k`` until two successive
    sets coincide.  The new rows are stacked ahead of the old ones, so the
    surviving rows of the last predicted step come first in the result.
    """
    Acl = unc.Acl
    if max(abs(np.linalg.eigvals(Acl))) >= 1:
        raise UnstableClosedLoop("closed loop A + B Kinf is not Schur stable")
    XU = build_XU(spec, unc)
    omega = XU
    power = np.eye(spec.n)
    for k in range(k_max):
        power = power @ Acl
        new_rows = Polytope(XU.C @ power, XU.d)
        candidate = remove_redundant(new_rows.intersect(omega))
        if poly_equal(candidate, omega):
            return TerminalSet(T=omega, determined_at=k, Acl=Acl)
        omega = candidate
    raise NotFinitelyDetermined(k_max)


def scaled_invariance_check(ts: TerminalSet, lam: float, samples: int = 100, seed: int = 0,
                            steps: int = 20) -> bool:
    """Certify ``Acl (lam T)`` is inside ``lam T`` and sampled orbits stay interior.

    The set certificate is one LP per row of ``T``.  Sampled points are drawn
    strictly inside ``lam T`` and their orbits must keep positive slack.
    """
    if not 0 < lam < 1:
        raise ValueError("lambda must lie in (0, 1)")
    scaled = ts.T.scaled(lam)
    if not contains(scaled, scaled, M=ts.Acl):
        return False
    if samples <= 0:
        return True
    rng = np.random.default_rng(seed)
    Tn = ts.T.normalized()
    for x in sample_interior(scaled, samples, rng):
        for _ in range(steps):
            x = ts.Acl @ x
            if not scaled.contains_point(x) or np.any(Tn.d - Tn.C @ x <= 0):
                return False
    return True
