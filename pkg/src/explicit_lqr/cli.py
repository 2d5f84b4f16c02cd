"""Command-line front end.

Exit codes: 0 success, 1 a verified property failed, 2 bad input,
3 numerical failure, 4 fingerprint mismatch, 5 drawing needs two states.
"""
from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import tolerances
from .atlas import (Atlas, Setup, build_atlas, build_PN, check_persistence, check_PN_invariance,
                    converged, evaluate, locate, prefix_violations)
from .errors import (DegenerateKKT, DimensionNot2D, EmptyPolytope, ExplicitLQRError,
                     FingerprintMismatch, InvalidProblem, NoConvergence, NotFinitelyDetermined,
                     SingularInnerMatrix, UnboundedPolytope, UnstableClosedLoop)
from .lqcore import example1, load_problem
from .oracle import sample_feasible, solve_qp_at
from .sim import mpc_closed_loop, open_loop, write_csv
from .svg import atlas_svg

EXIT_FAIL, EXIT_INPUT, EXIT_NUMERIC, EXIT_FINGERPRINT, EXIT_NOT2D = 1, 2, 3, 4, 5
NUMERICAL = (NoConvergence, SingularInnerMatrix, UnstableClosedLoop, NotFinitelyDetermined,
             DegenerateKKT, EmptyPolytope, UnboundedPolytope, np.linalg.LinAlgError)


class StageError(Exception):
    def __init__(self, stage, code, exc):
        self.stage, self.code = stage, code
        super().__init__(f"{stage}: {exc}")


class _Stage:
    """Context manager that maps exceptions to exit codes and names the failing step."""

    def __init__(self, name):
        self.name = name

    def __enter__(self):
        return self

    def __exit__(self, kind, exc, tb):
        if exc is None or isinstance(exc, StageError):
            return False
        if isinstance(exc, FingerprintMismatch):
            raise StageError(self.name, EXIT_FINGERPRINT, exc) from exc
        if isinstance(exc, DimensionNot2D):
            raise StageError(self.name, EXIT_NOT2D, exc) from exc
        if isinstance(exc, NUMERICAL):
            raise StageError(self.name, EXIT_NUMERIC, exc) from exc
        if isinstance(exc, (json.JSONDecodeError, InvalidProblem, KeyError, ValueError,
                            TypeError, OSError)):
            raise StageError(self.name, EXIT_INPUT, exc) from exc
        if isinstance(exc, ExplicitLQRError):
            raise StageError(self.name, EXIT_NUMERIC, exc) from exc
        return False


def _problem(arg):
    with _Stage("load problem"):
        return example1() if arg in (None, "example1") else load_problem(arg)


def _setup(spec):
    with _Stage("riccati and terminal set"):
        return Setup.from_spec(spec)


def _load_atlas(path):
    with _Stage(f"load atlas {path}"):
        return Atlas.load(path)


def _vector(text, n):
    with _Stage("parse state"):
        x = np.array([float(v) for v in text.split(",")])
        if x.size != n:
            raise ValueError(f"expected {n} comma-separated numbers, got {x.size}")
        return x


def _dump(obj, path: Path):
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(obj, indent=1, sort_keys=True) + "\n")


def _write_atlas(atlas, out: Path):
    out.mkdir(parents=True, exist_ok=True)
    atlas.save(out / f"atlas_{atlas.horizon}.json")
    _dump(atlas.report.to_json(), out / "report.json")
    print(f"horizon {atlas.horizon}: {len(atlas)} regions "
          f"({atlas.report.method}, {atlas.report.candidates_tested} candidates tested)")
    for a in atlas.tuples:
        print(f"  {a}")


def cmd_solve(args):
    previous = _load_atlas(args.extend_from) if args.extend_from else None
    if previous is not None:
        setup = previous.setup
        if args.problem:
            spec_setup = _setup(_problem(args.problem))
            if spec_setup.fingerprint != setup.fingerprint:
                raise StageError("extend", EXIT_FINGERPRINT, "atlas and problem differ")
        N = args.horizon or previous.horizon + 1
    else:
        setup = _setup(_problem(args.problem))
        N = args.horizon or 1
    with _Stage("enumerate"):
        atlas = build_atlas(setup, N, previous, include_degenerate=args.include_degenerate)
    with _Stage("write"):
        _write_atlas(atlas, Path(args.out))
    return 0


def cmd_extend(args):
    if not args.extend_from:
        raise StageError("extend", EXIT_INPUT, "--extend-from is required")
    return cmd_solve(args)


def cmd_persist(args):
    short, long = _load_atlas(args.atlas[0]), _load_atlas(args.atlas[1])
    with _Stage("persistence"):
        chk = check_persistence(short, long, samples=args.samples, seed=args.seed)
        pn = build_PN(long)
        report = {
            "horizons": [short.horizon, long.horizon],
            "persistent": [str(a) for a in chk.persistent],
            "violations": [list(v) for v in chk.violations],
            "persistentFormNext": [str(a) for a in pn.members],
            "generators": [str(a) for a in pn.generators],
            "outmost": [str(a) for a in pn.outmost],
            "converged": converged(short, long),
        }
    with _Stage("write"):
        _dump(report, Path(args.out) / "persistence.json")
    print(f"persistent at N={short.horizon}: {len(chk.persistent)}; "
          f"persistent form at N={long.horizon}: {len(pn.members)}; converged: {report['converged']}")
    return EXIT_FAIL if chk.violations else 0


def cmd_simulate(args):
    atlas = _load_atlas(args.atlas)
    x0 = _vector(args.x0, atlas.setup.spec.n)
    with _Stage("simulate"):
        run = mpc_closed_loop if args.mode == "mpc" else open_loop
        traj = run(atlas, x0, args.steps)
    if args.csv:
        with _Stage("write"):
            Path(args.csv).parent.mkdir(parents=True, exist_ok=True)
            with open(args.csv, "w") as fh:
                write_csv(traj, fh)
    else:
        write_csv(traj, sys.stdout)
    return 0


def cmd_locate(args):
    atlas = _load_atlas(args.atlas)
    x = _vector(args.x, atlas.setup.spec.n)
    r = locate(atlas, x)
    if r is None:
        print("not found")
        return EXIT_FAIL
    u, _ = evaluate(atlas, x)
    print(f"{r.active_set} u={' '.join(repr(float(v)) for v in u)}")
    return 0


def cmd_export_svg(args):
    atlas = _load_atlas(args.atlas)
    persistent = set(atlas.persistent) if atlas.persistent else None
    with _Stage("export svg"):
        text = atlas_svg(atlas, persistent)
        Path(args.out).parent.mkdir(parents=True, exist_ok=True)
        Path(args.out).write_text(text)
    print(f"wrote {args.out} ({len(atlas)} regions)")
    return 0


def _prop_prefix(short, long, samples, seed):
    bad = prefix_violations(short, long)
    return not bad, f"{len(long)} tuples, {len(bad)} violations"


def _prop_persistence(short, long, samples, seed):
    chk = check_persistence(short, long, samples=min(samples, 20), seed=seed)
    return chk.ok, f"{len(chk.persistent)} persistent, {len(chk.violations)} violations"


def _prop_invariance(short, long, samples, seed):
    pn = build_PN(long)
    inv = check_PN_invariance(long, pn, samples=max(1, samples // max(1, len(pn.regions))),
                              seed=seed, combinations=samples)
    return inv.ok, (f"{inv.trajectories} trajectories, {inv.combinations} combinations, "
                    f"{len(inv.violations)} violations")


def _prop_oracle(short, long, samples, seed):
    worst, mismatched, interior = 0.0, 0, 0
    guard = tolerances.current().interior
    for x in sample_feasible(long.qp, samples, seed):
        res = solve_qp_at(long.qp, x)
        r = locate(long, x)
        if r is None:
            mismatched += 1
            continue
        worst = max(worst, float(np.max(np.abs(r.law.u(x) - res.minimizer))))
        Pn = r.region.normalized()
        if np.min(Pn.d - Pn.C @ x) > guard:
            interior += 1
            mismatched += int(r.active_set != res.active_tuple)
    return (worst <= 1e-6 and mismatched == 0,
            f"{samples} samples, max deviation {worst:.2e}, {interior} interior, {mismatched} mismatched")


PROPERTIES = (("prefix property", _prop_prefix),
              ("persistent regions equal", _prop_persistence),
              ("persistent union invariance and MPC equality", _prop_invariance),
              ("oracle agreement", _prop_oracle))


def verify_pair(short, long, samples: int, seed: int) -> list:
    """Run the structural property suite; returns ``(name, passed, detail)`` rows."""
    rows = []
    for name, check in PROPERTIES:
        try:
            ok, detail = check(short, long, samples, seed)
        except ExplicitLQRError as exc:
            ok, detail = False, f"{type(exc).__name__}: {exc}"
        rows.append((name, ok, detail))
    return rows


def cmd_verify(args):
    short, long = _load_atlas(args.atlas[0]), _load_atlas(args.atlas[1])
    with _Stage("verify"):
        if short.fingerprint != long.fingerprint:
            raise FingerprintMismatch("atlases belong to different problems")
        rows = verify_pair(short, long, args.samples, args.seed)
    for name, ok, detail in rows:
        print(f"{'PASS' if ok else 'FAIL'} {name}: {detail}")
    return 0 if all(ok for _, ok, _ in rows) else EXIT_FAIL


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="explicit-lqr",
                                     description="Explicit constrained LQR atlases.")
    for name in ("feas", "redundancy", "tight", "margin", "rank", "interior"):
        parser.add_argument(f"--tol-{name}", type=float, default=None, metavar="X")
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, seed=True):
        p.add_argument("--out", default=".", help="output directory")
        if seed:
            p.add_argument("--samples", type=int, default=100)
            p.add_argument("--seed", type=int, default=0)

    for name, func in (("solve", cmd_solve), ("extend", cmd_extend)):
        p = sub.add_parser(name, help=f"{name} an atlas")
        p.add_argument("--problem", default=None, help="problem JSON file or 'example1'")
        p.add_argument("--horizon", type=int, default=None)
        p.add_argument("--extend-from", default=None, metavar="ATLAS")
        p.add_argument("--include-degenerate", action="store_true")
        common(p, seed=False)
        p.set_defaults(func=func)

    p = sub.add_parser("persist", help="persistence report for atlases N and N+1")
    p.add_argument("atlas", nargs=2)
    common(p)
    p.set_defaults(func=cmd_persist)

    p = sub.add_parser("simulate", help="open-loop or MPC trajectory as CSV")
    p.add_argument("--atlas", required=True)
    p.add_argument("--x0", required=True, help="comma-separated initial state")
    p.add_argument("--steps", type=int, default=None)
    p.add_argument("--mode", choices=("open", "mpc"), default="open")
    p.add_argument("--csv", default=None)
    p.set_defaults(func=cmd_simulate)

    p = sub.add_parser("locate", help="region and law at a state")
    p.add_argument("--atlas", required=True)
    p.add_argument("--x", required=True, help="comma-separated state")
    p.set_defaults(func=cmd_locate)

    p = sub.add_parser("export-svg", help="draw a two-state atlas")
    p.add_argument("--atlas", required=True)
    p.add_argument("--out", default="atlas.svg", help="SVG file")
    p.set_defaults(func=cmd_export_svg)

    p = sub.add_parser("verify", help="structural property suite for atlases N and N+1")
    p.add_argument("atlas", nargs=2)
    common(p)
    p.set_defaults(func=cmd_verify)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    overrides = {k[4:]: v for k, v in vars(args).items() if k.startswith("tol_")}
    try:
        previous = tolerances.set_tolerances(**overrides)
    except ValueError as exc:
        print(f"error in options: {exc}", file=sys.stderr)
        return EXIT_INPUT
    try:
        return args.func(args)
    except StageError as exc:
        print(f"error in {exc}", file=sys.stderr)
        return exc.code
    finally:
        tolerances.set_tolerances(**vars(previous))


if __name__ == "__main__":
    sys.exit(main())
