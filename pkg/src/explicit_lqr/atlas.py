"""The explicit solution at one horizon, and the structure across horizons."""
from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field, replace

import numpy as np

from . import tolerances
from .bitset import (FORWARD, ActiveSetTuple, drop_stages, is_outmost, is_persistent_form,
                     pad_with_zero_stages, persistent_offspring, strip_zero_stages)
from .enumeration import enumerate_extension, enumerate_tree
from .errors import (FingerprintMismatch, HorizonMismatch, OutsideDomain, SamplingExhausted,
                     StructureViolation)
from .geom import Polytope, chebyshev_center, poly_equal, sample_interior
from .kkt import CriticalRegion, KKTSolution
from .lqcore import CondensedQP, ProblemSpec, UnconstrainedSolution, condense, solve_dare
from .terminal import TerminalSet, build_terminal_set


def fingerprint(spec: ProblemSpec, T: Polytope) -> str:
    """Hash of the problem data and terminal set (rounded to 10 digits)."""
    payload = {"problem": spec.to_json(),
               "T": {"C": np.round(T.C, 10).tolist(), "d": np.round(T.d, 10).tolist()}}
    text = json.dumps(payload, sort_keys=True)
    return hashlib.sha256(text.encode()).hexdigest()


@dataclass(frozen=True, eq=False)
class Setup:
    """Problem data with its LQR solution and terminal set."""

    spec: ProblemSpec
    unc: UnconstrainedSolution
    terminal: TerminalSet

    @classmethod
    def from_spec(cls, spec: ProblemSpec) -> "Setup":
        unc = solve_dare(spec)
        return cls(spec, unc, build_terminal_set(spec, unc))

    def qp(self, N: int) -> CondensedQP:
        return condense(self.spec, self.unc, self.terminal.T, N)

    @property
    def fingerprint(self) -> str:
        return fingerprint(self.spec, self.terminal.T)


@dataclass(frozen=True, eq=False)
class Atlas:
    horizon: int
    regions: tuple
    setup: Setup
    qp: CondensedQP
    degenerate: tuple = ()
    persistent: frozenset = frozenset()
    report: object = None

    def __post_init__(self):
        regions = tuple(sorted(self.regions, key=lambda r: r.active_set))
        object.__setattr__(self, "regions", regions)
        object.__setattr__(self, "degenerate",
                           tuple(sorted(self.degenerate, key=lambda r: r.active_set)))
        seen = [r.active_set for r in regions]
        if len(set(seen)) != len(seen):
            raise StructureViolation("duplicate tuples in atlas", str(seen))

    @property
    def fingerprint(self) -> str:
        return self.setup.fingerprint

    @property
    def tuples(self) -> list:
        return [r.active_set for r in self.regions]

    def region_of(self, a: ActiveSetTuple):
        for r in self.regions:
            if r.active_set == a:
                return r
        return None

    def __len__(self):
        return len(self.regions)

    # -- serialization --------------------------------------------------------
    def to_json(self) -> dict:
        return {
            "horizon": self.horizon,
            "fingerprint": self.fingerprint,
            "problem": self.setup.spec.to_json(),
            "terminal": {**self.setup.terminal.T.to_json(),
                         "determinedAt": self.setup.terminal.determined_at},
            "regions": [_region_json(r) for r in self.regions],
            "degenerate": [_region_json(r) for r in self.degenerate],
            "persistent": sorted(str(a) for a in self.persistent),
        }

    @classmethod
    def from_json(cls, obj) -> "Atlas":
        spec = ProblemSpec.from_json(obj["problem"])
        T = Polytope.from_json(obj["terminal"])
        if fingerprint(spec, T) != obj["fingerprint"]:
            raise FingerprintMismatch("stored fingerprint does not match problem and terminal set")
        unc = solve_dare(spec)
        setup = Setup(spec, unc, TerminalSet(T, int(obj["terminal"].get("determinedAt", 0)), unc.Acl))
        qp = setup.qp(int(obj["horizon"]))
        regions = [_region_from_json(r, qp) for r in obj["regions"]]
        degenerate = [_region_from_json(r, qp) for r in obj.get("degenerate", [])]
        persistent = frozenset(ActiveSetTuple.parse(t, qp.layout, FORWARD)
                               for t in obj.get("persistent", []))
        return cls(qp.N, tuple(regions), setup, qp, tuple(degenerate), persistent)

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_json(), fh, indent=1)
            fh.write("\n")

    @classmethod
    def load(cls, path) -> "Atlas":
        with open(path) as fh:
            return cls.from_json(json.load(fh))


def _region_json(r: CriticalRegion) -> dict:
    return {
        "tuple": str(r.active_set),
        "law": {"K": r.law.Ku.tolist(), "k": r.law.ku.tolist(),
                "Lambda": r.law.Lam.tolist(), "lambda0": r.law.lam0.tolist()},
        "region": r.region.to_json(),
        "flags": {"fullDim": r.full_dim, "licq": r.licq, "weaklyActive": r.weakly_active,
                  "persistentForm": r.persistent_form},
        "center": [float(v) for v in r.center],
        "radius": r.radius,
    }


def _region_from_json(obj, qp: CondensedQP) -> CriticalRegion:
    a = ActiveSetTuple.parse(obj["tuple"], qp.layout, FORWARD)
    if a.N != qp.N:
        raise HorizonMismatch(f"tuple {obj['tuple']} does not have horizon {qp.N}")
    law = obj["law"]
    n = qp.n
    Lam = np.array(law.get("Lambda", []), dtype=float).reshape(-1, n)
    kkt = KKTSolution(np.array(law["K"], dtype=float).reshape(qp.nu, n),
                      np.array(law["k"], dtype=float), Lam,
                      np.array(law.get("lambda0", []), dtype=float), a)
    flags = obj.get("flags", {})
    return CriticalRegion(a, kkt, Polytope.from_json(obj["region"]),
                          bool(flags.get("fullDim", True)), bool(flags.get("licq", True)),
                          bool(flags.get("weaklyActive", False)), is_persistent_form(a),
                          np.array(obj.get("center", [np.nan] * n), dtype=float),
                          float(obj.get("radius", np.nan)))


def build_atlas(setup: Setup, N: int, previous: Atlas | None = None,
                include_degenerate: bool = False) -> Atlas:
    """Tree search, or extension of ``previous`` (horizon ``N - 1``) when given."""
    qp = setup.qp(N)
    if previous is None:
        regions, report = enumerate_tree(qp, include_degenerate)
    else:
        if previous.fingerprint != setup.fingerprint:
            raise FingerprintMismatch("previous atlas belongs to a different problem")
        if previous.horizon != N - 1:
            raise HorizonMismatch(f"cannot extend horizon {previous.horizon} to {N}")
        parents = list(previous.regions) + list(previous.degenerate)
        regions, report = enumerate_extension(qp, parents, include_degenerate)
    return Atlas(N, tuple(regions), setup, qp, tuple(report.degenerate), report=report)


# -- point location ------------------------------------------------------------
def locate(atlas: Atlas, x, tol: float = 1e-8):
    """First region (canonical order) containing ``x``; ``None`` if there is none."""
    x = np.asarray(x, dtype=float)
    for r in atlas.regions:
        if r.region.contains_point(x, tol):
            return r
    return None


def evaluate(atlas: Atlas, x):
    """Stacked optimal input sequence and its first move at ``x``."""
    r = locate(atlas, x)
    if r is None:
        raise OutsideDomain(x)
    u = r.law.u(x)
    return u, u[:atlas.setup.spec.m]


# -- persistence ---------------------------------------------------------------
def _same_problem(a: Atlas, b: Atlas):
    if a.fingerprint != b.fingerprint:
        raise FingerprintMismatch("atlases belong to different problems")
    if b.horizon != a.horizon + 1:
        raise HorizonMismatch(f"expected horizons N and N+1, got {a.horizon} and {b.horizon}")


def _sample_points(region: Polytope, count: int, seed: int):
    if count <= 0:
        return np.zeros((0, region.dim))
    return sample_interior(region, count, np.random.default_rng(seed))


def law_gap(r_short: CriticalRegion, r_long: CriticalRegion, points) -> float:
    """Largest difference of the shorter law and the leading part of the longer one."""
    nu = r_short.law.Ku.shape[0]
    gap = 0.0
    for x in points:
        gap = max(gap, float(np.max(np.abs(r_short.law.u(x) - r_long.law.u(x)[:nu]), initial=0.0)))
    return gap


@dataclass
class PersistenceCheck:
    persistent: list = field(default_factory=list)
    violations: list = field(default_factory=list)   # (tuple text, reason)
    converse_checked: int = 0
    law_gap: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.violations


def check_persistence(short: Atlas, long: Atlas, samples: int = 20, seed: int = 0,
                      law_tol: float = 1e-7) -> PersistenceCheck:
    """Compare every persistent-form region at ``N`` with its padded copy at ``N + 1``."""
    _same_problem(short, long)
    out = PersistenceCheck()
    feas = tolerances.current().feas
    for r in short.regions:
        if not r.persistent_form:
            continue
        padded = pad_with_zero_stages(r.active_set, 1)
        twin = long.region_of(padded)
        if twin is None:
            out.violations.append((str(r.active_set), f"{padded} missing at horizon {long.horizon}"))
            continue
        if not poly_equal(r.region, twin.region, tol=feas):
            out.violations.append((str(r.active_set), "regions differ"))
            continue
        pts = _sample_points(r.region, samples, seed)
        gap = law_gap(r, twin, pts)
        out.law_gap = max(out.law_gap, gap)
        if gap > law_tol:
            out.violations.append((str(r.active_set), f"laws differ by {gap:.3g}"))
            continue
        out.persistent.append(r.active_set)
    short_set = set(short.tuples)
    for a in long.tuples:
        if not is_persistent_form(a) or any(a.stage(a.N - 1)):
            continue
        out.converse_checked += 1
        if strip_zero_stages(a, 1) not in short_set:
            out.violations.append((str(a), f"truncation missing at horizon {short.horizon}"))
    return out


def mark_persistence(short: Atlas, long: Atlas, samples: int = 20, seed: int = 0) -> Atlas:
    """Copy of ``short`` with its persistent regions marked; raises on any violation."""
    chk = check_persistence(short, long, samples, seed)
    if chk.violations:
        text, reason = chk.violations[0]
        raise StructureViolation(reason, text)
    return replace(short, persistent=frozenset(chk.persistent))


def prefix_violations(short: Atlas, long: Atlas) -> list:
    """Tuples at ``N + 1`` whose one-stage truncation is not an active set at ``N``."""
    known = set(short.tuples) | {r.active_set for r in short.degenerate}
    return [a for a in long.tuples if drop_stages(a, 1) not in known]


def persistent_lookalikes(short: Atlas, long: Atlas) -> list:
    """Non-persistent-form regions at ``N`` that reappear unchanged at ``N + 1``."""
    found = []
    for r in short.regions:
        if r.persistent_form:
            continue
        for s in long.regions:
            if poly_equal(r.region, s.region):
                found.append((r.active_set, s.active_set))
    return found


def converged(short: Atlas, long: Atlas) -> bool:
    """True iff the longer atlas is the shorter one padded by an inactive stage."""
    _same_problem(short, long)
    if not all(r.persistent_form for r in short.regions):
        return False
    if short.persistent and set(short.persistent) != set(short.tuples):
        return False
    short_set = set(short.tuples)
    for a in long.tuples:
        if not is_persistent_form(a) or any(a.stage(a.N - 1)):
            return False
        if strip_zero_stages(a, 1) not in short_set:
            return False
    return len(long) == len(short)


# -- the union of persistent regions ------------------------------------------
@dataclass(frozen=True, eq=False)
class PersistentRegionSet:
    members: tuple          # canonically ordered tuples
    generators: tuple       # members that are no other member's offspring
    regions: tuple
    terminal: Polytope

    @property
    def outmost(self) -> tuple:
        return tuple(a for a in self.generators if is_outmost(a))

    def reconstruct(self) -> set:
        """Members regenerated from the generators by repeated offspring."""
        out = set(self.generators)
        frontier = list(out)
        while frontier:
            nxt = []
            for a in frontier:
                for child in persistent_offspring(a):
                    if child not in out:
                        out.add(child)
                        nxt.append(child)
            frontier = nxt
        return out

    def contains(self, x, tol: float = 1e-8, include_terminal: bool = True) -> bool:
        if include_terminal and self.terminal.contains_point(x, tol):
            return True
        return any(r.region.contains_point(x, tol) for r in self.regions)


def build_PN(atlas: Atlas) -> PersistentRegionSet:
    """Persistent-form regions of ``atlas`` and their generating tuples."""
    regions = tuple(r for r in atlas.regions if r.persistent_form)
    members = tuple(r.active_set for r in regions)
    member_set = set(members)
    produced = set()
    for a in members:
        for child in persistent_offspring(a):
            if child not in member_set:
                raise StructureViolation("offspring of a persistent tuple is missing", str(child))
            produced.add(child)
    generators = tuple(a for a in members if a not in produced)
    return PersistentRegionSet(members, generators, regions, atlas.setup.terminal.T)


@dataclass
class InvarianceReport:
    trajectories: int = 0
    states_checked: int = 0
    combinations: int = 0
    mpc_gap: float = 0.0
    violations: list = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.violations


def check_PN_invariance(atlas: Atlas, pn: PersistentRegionSet, samples: int = 50,
                        seed: int = 0, combinations: int = 100, mpc: bool = True,
                        mpc_tol: float = 1e-7) -> InvarianceReport:
    """Simulate from sampled member points and test convex combinations.

    Every open-loop state must stay in the persistent union or the terminal
    set; with ``mpc`` the receding-horizon loop must reproduce the open loop.
    Convex combinations of member points must be feasible.
    """
    from .sim import compare_trajectories, mpc_closed_loop, open_loop

    rep = InvarianceReport()
    steps = 3 * atlas.horizon
    pool = []
    for i, r in enumerate(pn.regions):
        pts = _sample_points(r.region, samples, seed + i)
        pool.extend(pts)
        for x0 in pts:
            traj = open_loop(atlas, x0, steps)
            rep.trajectories += 1
            for k, x in enumerate(traj.states):
                rep.states_checked += 1
                if not pn.contains(x):
                    rep.violations.append((str(r.active_set), f"open loop leaves at step {k}"))
                    break
            if mpc:
                try:
                    closed = mpc_closed_loop(atlas, x0, steps)
                except OutsideDomain as exc:
                    rep.violations.append((str(r.active_set), f"closed loop: {exc}"))
                    continue
                gap = compare_trajectories(traj, closed, steps)
                rep.mpc_gap = max(rep.mpc_gap, gap)
                if gap > mpc_tol:
                    rep.violations.append((str(r.active_set), f"closed loop differs by {gap:.3g}"))
    if pool and combinations > 0:
        rng = np.random.default_rng(seed)
        pool = np.array(pool)
        for _ in range(combinations):
            i, j = rng.integers(len(pool), size=2)
            theta = rng.uniform()
            x = theta * pool[i] + (1 - theta) * pool[j]
            rep.combinations += 1
            if locate(atlas, x) is None:
                rep.violations.append(("hull", f"combination {x.tolist()} not located"))
    return rep


def interior_samples(r: CriticalRegion, count: int, seed: int = 0):
    """Sampled points strictly inside a region."""
    _, radius = chebyshev_center(r.region)
    if not radius > 0:
        raise SamplingExhausted("region has no interior")
    return _sample_points(r.region, count, seed)
