"""Open-loop and receding-horizon simulation over an atlas."""
from __future__ import annotations

import csv
from dataclasses import dataclass

import numpy as np

from .errors import DimensionMismatch, OutsideDomain
from .lqcore import stage_cost, terminal_cost


@dataclass(frozen=True, eq=False)
class Trajectory:
    states: np.ndarray      # (K+1, n)
    inputs: np.ndarray      # (K, m)
    tuples: list            # located tuple text per step ("" where none was used)
    total_cost: float

    @property
    def steps(self) -> int:
        return self.inputs.shape[0]


def _cost(atlas, states, inputs, with_terminal):
    spec = atlas.setup.spec
    cost = sum(stage_cost(spec, x, u) for x, u in zip(states[:-1], inputs))
    if with_terminal:
        cost += terminal_cost(atlas.setup.unc, states[-1])
    return float(cost)


def open_loop(atlas, x0, K: int | None = None, with_terminal: bool = True) -> Trajectory:
    """Stored optimal sequence for ``N`` steps, LQR feedback afterwards."""
    from .atlas import locate

    N, m = atlas.horizon, atlas.setup.spec.m
    K = 3 * N if K is None else K
    x0 = np.asarray(x0, dtype=float)
    r = locate(atlas, x0)
    if r is None:
        raise OutsideDomain(x0, 0)
    planned = r.law.u(x0).reshape(N, m)
    A, B, Kinf = atlas.setup.spec.A, atlas.setup.spec.B, atlas.setup.unc.Kinf
    states = [x0]
    inputs = []
    for k in range(K):
        u = planned[k] if k < N else Kinf @ states[-1]
        inputs.append(u)
        states.append(A @ states[-1] + B @ u)
    states, inputs = np.array(states), np.array(inputs).reshape(K, m)
    tuples = [str(r.active_set)] + [""] * (K - 1) if K else []
    return Trajectory(states, inputs, tuples, _cost(atlas, states, inputs, with_terminal))


def mpc_closed_loop(atlas, x0, K: int | None = None, with_terminal: bool = True) -> Trajectory:
    """Apply the first move of the located law at every step."""
    from .atlas import locate

    N, m = atlas.horizon, atlas.setup.spec.m
    K = 3 * N if K is None else K
    A, B = atlas.setup.spec.A, atlas.setup.spec.B
    states = [np.asarray(x0, dtype=float)]
    inputs, tuples = [], []
    for k in range(K):
        x = states[-1]
        r = locate(atlas, x)
        if r is None:
            raise OutsideDomain(x, k)
        u = r.law.u(x)[:m]
        inputs.append(u)
        tuples.append(str(r.active_set))
        states.append(A @ x + B @ u)
    states, inputs = np.array(states), np.array(inputs).reshape(K, m)
    return Trajectory(states, inputs, tuples, _cost(atlas, states, inputs, with_terminal))


def compare_trajectories(t1: Trajectory, t2: Trajectory, steps: int | None = None) -> float:
    """Infinity norm of state and input differences over the first ``steps``."""
    if t1.states.shape[1] != t2.states.shape[1] or t1.inputs.shape[1] != t2.inputs.shape[1]:
        raise DimensionMismatch("trajectories have different state or input dimensions")
    steps = min(t1.steps, t2.steps) if steps is None else steps
    if steps > min(t1.steps, t2.steps):
        raise DimensionMismatch(f"trajectories are shorter than {steps} steps")
    dx = np.abs(t1.states[:steps + 1] - t2.states[:steps + 1])
    du = np.abs(t1.inputs[:steps] - t2.inputs[:steps])
    return float(max(np.max(dx, initial=0.0), np.max(du, initial=0.0)))


def write_csv(traj: Trajectory, fh):
    """Columns ``k, x_1..x_n, u_1..u_m, tuple``; the last row has no input."""
    n, m = traj.states.shape[1], traj.inputs.shape[1]
    writer = csv.writer(fh, lineterminator="\n")
    writer.writerow(["k"] + [f"x_{i + 1}" for i in range(n)] + [f"u_{j + 1}" for j in range(m)] + ["tuple"])
    for k, x in enumerate(traj.states):
        u = [repr(float(v)) for v in traj.inputs[k]] if k < traj.steps else [""] * m
        tup = traj.tuples[k] if k < len(traj.tuples) else ""
        writer.writerow([k] + [repr(float(v)) for v in x] + u + [tup])
