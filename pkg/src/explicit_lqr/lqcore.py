"""Problem data, the unconstrained LQR solution, and the condensed parametric QP.

The finite-horizon problem

    min  1/2 |x(N)|_P^2 + 1/2 sum_k (|x(k)|_Q^2 + |u(k)|_R^2)
    s.t. x(k+1) = A x(k) + B u(k),  x(k) in X,  u(k) in U,  x(N) in T

is condensed into ``min 1/2 x'Yx + 1/2 u'Hu + x'Fu  s.t.  G u <= w + E x``
with the constraint rows stacked stage by stage, terminal rows last.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .errors import (DimensionMismatch, InvalidProblem, NoConvergence,
                     SingularInnerMatrix, UnstableClosedLoop)
from .geom import Polytope, bounding_box

STAGE_ORDERS = ("xu", "ux")


def _matrix(a, name):
    arr = np.array(a, dtype=float)
    if arr.ndim == 0:
        arr = arr.reshape(1, 1)
    if arr.ndim == 1:
        arr = arr.reshape(-1, 1)
    if arr.ndim != 2:
        raise DimensionMismatch(f"{name} must be a matrix")
    arr.setflags(write=False)
    return arr


@dataclass(frozen=True, eq=False)
class ProblemSpec:
    """System, weights and constraint polytopes of the regulation problem.

    ``stage_order`` fixes the row order inside a stage: ``"xu"`` puts the
    state rows of ``X`` before the input rows of ``U``, ``"ux"`` the reverse.
    Within each block, rows keep the order given in ``X`` and ``U``.
    """

    A: np.ndarray
    B: np.ndarray
    Q: np.ndarray
    R: np.ndarray
    X: Polytope
    U: Polytope
    stage_order: str = "xu"
    name: str = ""

    def __post_init__(self):
        for key in ("A", "B", "Q", "R"):
            object.__setattr__(self, key, _matrix(getattr(self, key), key))
        n, m = self.n, self.m
        if self.A.shape != (n, n):
            raise DimensionMismatch(f"A must be square, got {self.A.shape}")
        if self.B.shape[0] != n:
            raise DimensionMismatch(f"B must have {n} rows, got {self.B.shape}")
        if self.Q.shape != (n, n):
            raise DimensionMismatch(f"Q must be {n}x{n}, got {self.Q.shape}")
        if self.R.shape != (m, m):
            raise DimensionMismatch(f"R must be {m}x{m}, got {self.R.shape}")
        if self.X.dim != n:
            raise DimensionMismatch(f"X lives in dimension {self.X.dim}, expected {n}")
        if self.U.dim != m:
            raise DimensionMismatch(f"U lives in dimension {self.U.dim}, expected {m}")
        if self.stage_order not in STAGE_ORDERS:
            raise InvalidProblem(f"stage_order must be one of {STAGE_ORDERS}")
        self._validate()

    @property
    def n(self) -> int:
        return self.A.shape[0]

    @property
    def m(self) -> int:
        return self.B.shape[1]

    @property
    def qX(self) -> int:
        return self.X.n_rows

    @property
    def qU(self) -> int:
        return self.U.n_rows

    def _validate(self):
        n = self.n
        ctrb = np.hstack([np.linalg.matrix_power(self.A, k) @ self.B for k in range(n)])
        if np.linalg.matrix_rank(ctrb) < n:
            raise InvalidProblem("(A, B) is not controllable")
        if not np.allclose(self.Q, self.Q.T, atol=1e-12):
            raise InvalidProblem("Q is not symmetric")
        if np.min(np.linalg.eigvalsh(self.Q)) < -1e-12:
            raise InvalidProblem("Q is not positive semidefinite")
        if not np.allclose(self.R, self.R.T, atol=1e-12):
            raise InvalidProblem("R is not symmetric")
        if np.min(np.linalg.eigvalsh(self.R)) <= 0:
            raise InvalidProblem("R is not positive definite")
        for label, poly in (("X", self.X), ("U", self.U)):
            if np.any(poly.d <= 0):
                raise InvalidProblem(f"{label} must contain the origin in its interior")
            try:
                bounding_box(poly)
            except Exception as exc:
                raise InvalidProblem(f"{label} must be bounded") from exc

    def to_json(self) -> dict:
        return {
            "name": self.name,
            "A": self.A.tolist(), "B": self.B.tolist(),
            "Q": self.Q.tolist(), "R": self.R.tolist(),
            "X": self.X.to_json(), "U": self.U.to_json(),
            "stage_order": self.stage_order,
        }

    @classmethod
    def from_json(cls, obj) -> "ProblemSpec":
        try:
            return cls(A=obj["A"], B=obj["B"], Q=obj["Q"], R=obj["R"],
                       X=Polytope.from_json(obj["X"]), U=Polytope.from_json(obj["U"]),
                       stage_order=obj.get("stage_order", "xu"), name=obj.get("name", ""))
        except KeyError as exc:
            raise InvalidProblem(f"missing field {exc}") from exc


def load_problem(path) -> ProblemSpec:
    with open(path, encoding="utf-8") as fh:
        return ProblemSpec.from_json(json.load(fh))


def example1() -> ProblemSpec:
    """The two-state, single-input example shipped with the package."""
    return load_problem(Path(__file__).parent / "data" / "example1.json")


@dataclass(frozen=True, eq=False)
class UnconstrainedSolution:
    P: np.ndarray
    Kinf: np.ndarray
    Acl: np.ndarray
    iterations: int = 0


def dare_residual(spec: ProblemSpec, P) -> float:
    A, B, Q, R = spec.A, spec.B, spec.Q, spec.R
    rhs = A.T @ (P - P @ B @ np.linalg.solve(R + B.T @ P @ B, B.T @ P)) @ A + Q
    return float(np.max(np.abs(P - rhs)))


def solve_dare(spec: ProblemSpec, tol: float = 1e-12, max_iter: int = 100_000) -> UnconstrainedSolution:
    """Riccati recursion from ``P_0 = Q`` until successive iterates agree to ``tol``."""
    A, B, Q, R = spec.A, spec.B, spec.Q, spec.R
    P = Q.copy()
    change = np.inf
    for it in range(1, max_iter + 1):
        inner = R + B.T @ P @ B
        if np.linalg.cond(inner) > 1e12:
            raise SingularInnerMatrix("R + B'PB is numerically singular")
        P_next = A.T @ (P - P @ B @ np.linalg.solve(inner, B.T @ P)) @ A + Q
        P_next = 0.5 * (P_next + P_next.T)
        change = float(np.max(np.abs(P_next - P)))
        P = P_next
        if change <= tol:
            break
    else:
        raise NoConvergence(max_iter, change)
    K = -np.linalg.solve(B.T @ P @ B + R, B.T @ P @ A)
    Acl = A + B @ K
    if max(abs(np.linalg.eigvals(Acl))) >= 1:
        raise UnstableClosedLoop("the Riccati fixed point does not stabilize (A, B)")
    for arr in (P, K, Acl):
        arr.setflags(write=False)
    return UnconstrainedSolution(P=P, Kinf=K, Acl=Acl, iterations=it)


@dataclass(frozen=True)
class StageLayout:
    """Row bookkeeping for the stage-by-stage constraint order.

    Stage ``k < N`` occupies ``qX + qU`` rows starting at ``row_origin(k)``;
    the ``qT`` terminal rows start at ``row_origin(N)``.  Indices are 0-based.
    """

    N: int
    qX: int
    qU: int
    qT: int
    stage_order: str = "xu"

    @property
    def stage_width(self) -> int:
        return self.qX + self.qU

    @property
    def q(self) -> int:
        return self.N * self.stage_width + self.qT

    def row_origin(self, k: int) -> int:
        if not 0 <= k <= self.N:
            raise IndexError(f"stage {k} outside 0..{self.N}")
        return k * self.stage_width

    def state_rows(self, k: int) -> range:
        start = self.row_origin(k) + (self.qU if self.stage_order == "ux" else 0)
        return range(start, start + self.qX)

    def input_rows(self, k: int) -> range:
        start = self.row_origin(k) + (0 if self.stage_order == "ux" else self.qX)
        return range(start, start + self.qU)

    def terminal_rows(self) -> range:
        start = self.row_origin(self.N)
        return range(start, start + self.qT)

    def with_horizon(self, N: int) -> "StageLayout":
        return StageLayout(N, self.qX, self.qU, self.qT, self.stage_order)


@dataclass(frozen=True, eq=False)
class CondensedQP:
    N: int
    H: np.ndarray
    F: np.ndarray
    Y: np.ndarray
    G: np.ndarray
    w: np.ndarray
    E: np.ndarray
    layout: StageLayout
    Phi: np.ndarray    # stacked x(0..N) = Phi @ x0 + Gamma @ u
    Gamma: np.ndarray

    @property
    def q(self) -> int:
        return self.G.shape[0]

    @property
    def n(self) -> int:
        return self.E.shape[1]

    @property
    def nu(self) -> int:
        return self.H.shape[0]

    def objective(self, x, u) -> float:
        x = np.asarray(x, dtype=float)
        u = np.asarray(u, dtype=float)
        return float(0.5 * x @ self.Y @ x + 0.5 * u @ self.H @ u + x @ self.F @ u)

    def states(self, x, u) -> np.ndarray:
        """Predicted states x(0..N) as an (N+1, n) array."""
        return (self.Phi @ np.asarray(x, dtype=float)
                + self.Gamma @ np.asarray(u, dtype=float)).reshape(self.N + 1, self.n)

    def parameter_rows(self) -> np.ndarray:
        """Indices of rows that do not involve ``u`` (the stage-0 state rows)."""
        return np.flatnonzero(np.max(np.abs(self.G), axis=1) <= 1e-14) if self.nu else np.arange(self.q)

    def state_polytope(self) -> Polytope:
        """The state constraint set ``X`` recovered from the stage-0 rows."""
        rows = list(self.layout.state_rows(0))
        return Polytope(-self.E[rows], self.w[rows])


def prediction_matrices(A, B, N):
    """``Phi``, ``Gamma`` with stacked ``x(0..N) = Phi x0 + Gamma u``."""
    n, m = B.shape
    Phi = np.vstack([np.linalg.matrix_power(A, k) for k in range(N + 1)])
    Gamma = np.zeros(((N + 1) * n, N * m))
    for k in range(1, N + 1):
        for j in range(k):
            Gamma[k * n:(k + 1) * n, j * m:(j + 1) * m] = np.linalg.matrix_power(A, k - 1 - j) @ B
    return Phi, Gamma


def condense(spec: ProblemSpec, unc: UnconstrainedSolution, T: Polytope, N: int) -> CondensedQP:
    if N < 1:
        raise ValueError("horizon must be at least 1")
    n, m = spec.n, spec.m
    if T.dim != n or unc.P.shape != (n, n):
        raise DimensionMismatch("terminal set or Riccati solution has the wrong dimension")
    Phi, Gamma = prediction_matrices(spec.A, spec.B, N)
    Qbar = np.kron(np.eye(N + 1), spec.Q)
    Qbar[N * n:, N * n:] = unc.P
    Rbar = np.kron(np.eye(N), spec.R)
    H = Gamma.T @ Qbar @ Gamma + Rbar
    H = 0.5 * (H + H.T)
    F = Phi.T @ Qbar @ Gamma
    Y = Phi.T @ Qbar @ Phi

    layout = StageLayout(N, spec.qX, spec.qU, T.n_rows, spec.stage_order)
    G = np.zeros((layout.q, N * m))
    w = np.zeros(layout.q)
    E = np.zeros((layout.q, n))
    for k in range(N):
        xs = list(layout.state_rows(k))
        G[xs] = spec.X.C @ Gamma[k * n:(k + 1) * n]
        w[xs] = spec.X.d
        E[xs] = -spec.X.C @ Phi[k * n:(k + 1) * n]
        us = list(layout.input_rows(k))
        G[us, k * m:(k + 1) * m] = spec.U.C
        w[us] = spec.U.d
    ts = list(layout.terminal_rows())
    G[ts] = T.C @ Gamma[N * n:]
    w[ts] = T.d
    E[ts] = -T.C @ Phi[N * n:]
    for arr in (H, F, Y, G, w, E, Phi, Gamma):
        arr.setflags(write=False)
    return CondensedQP(N=N, H=H, F=F, Y=Y, G=G, w=w, E=E, layout=layout, Phi=Phi, Gamma=Gamma)


def stage_cost(spec: ProblemSpec, x, u) -> float:
    x = np.asarray(x, dtype=float)
    u = np.asarray(u, dtype=float)
    return float(0.5 * (x @ spec.Q @ x + u @ spec.R @ u))


def terminal_cost(unc: UnconstrainedSolution, x) -> float:
    x = np.asarray(x, dtype=float)
    return float(0.5 * x @ unc.P @ x)

