"""Acceptance suite: one test per criterion, each printing a PASS/FAIL line."""
import time

import numpy as np
import pytest

from explicit_lqr.atlas import (build_PN, check_persistence, check_PN_invariance, interior_samples,
                                law_gap, locate, prefix_violations)
from explicit_lqr.bitset import pad_with_zero_stages, persistent_offspring, strip_zero_stages
from explicit_lqr.enumeration import enumerate_extension, enumerate_tree, tuples
from explicit_lqr.geom import containment_slack, poly_equal, vertices2d
from explicit_lqr.kkt import licq_check
from explicit_lqr.lqcore import dare_residual
from explicit_lqr.oracle import exhaustive_active_sets, feasible, sample_feasible, solve_qp_at
from explicit_lqr.sim import compare_trajectories, mpc_closed_loop, open_loop
from explicit_lqr.terminal import scaled_invariance_check


@pytest.fixture
def verdict(capsys):
    def emit(number, ok, detail):
        with capsys.disabled():
            print(f"\ncriterion {number:2d}: {'PASS' if ok else 'FAIL'} ({detail})")
        assert ok, detail
    return emit


def test_criterion_01_setup_sizes(setup, verdict):
    width = setup.spec.qX + setup.spec.qU
    qT = setup.terminal.qT
    verdict(1, width == 6 and qT == 4, f"qX+qU={width}, qT={qT}")


def test_criterion_02_prefix_property(atlas1, atlas2, atlas3, verdict):
    bad = prefix_violations(atlas1, atlas2) + prefix_violations(atlas2, atlas3)
    verdict(2, not bad, f"{len(atlas2) + len(atlas3)} tuples checked, {len(bad)} violations")


def test_criterion_03_extension_multiplicities(setup, tup, verdict):
    qp2, qp3 = setup.qp(2), setup.qp(3)
    yellow, _ = enumerate_extension(qp2, [tup("100000.0000")])
    green, _ = enumerate_extension(qp2, [tup("000000.0001")])
    dead, _ = enumerate_extension(qp3, [tup("100000.000000.0001")])
    counts = (len(yellow), len(green), len(dead))
    ids_ok = ({str(r.active_set) for r in yellow} ==
              {"000000.100000.0000", "100000.100000.0000", "010000.100000.0000"}
              and [str(r.active_set) for r in green] == ["100000.000000.0001"])
    verdict(3, counts == (3, 1, 0) and ids_ok, f"counts {counts}, identities exact: {ids_ok}")


def test_criterion_04_persistence(atlas1, atlas2, verdict):
    worst_slack, worst_law, problems = -np.inf, 0.0, []
    for r in atlas1.regions:
        if not r.persistent_form:
            continue
        twin = atlas2.region_of(pad_with_zero_stages(r.active_set, 1))
        if twin is None:
            problems.append(str(r.active_set))
            continue
        slack = max(containment_slack(r.region, twin.region), containment_slack(twin.region, r.region))
        gap = law_gap(r, twin, interior_samples(r, 20, seed=0))
        worst_slack, worst_law = max(worst_slack, slack), max(worst_law, gap)
        if slack > 1e-8 or gap > 1e-7:
            problems.append(str(r.active_set))
    short = set(atlas1.tuples)
    for a in atlas2.tuples:
        if a.count and not any(a.terminal) and not any(a.stage(a.N - 1)):
            if strip_zero_stages(a, 1) not in short:
                problems.append(str(a))
    chk = check_persistence(atlas1, atlas2)
    ok = not problems and chk.ok and len(chk.persistent) == 3
    verdict(4, ok, f"slack {worst_slack:.1e}, law gap {worst_law:.1e}, {len(problems)} violations")


def test_criterion_05_terminal_active_regions_vanish(atlas1, atlas2, verdict):
    red = [r for r in atlas1.regions if not r.persistent_form]
    twins = [(str(r.active_set), str(s.active_set)) for r in red for s in atlas2.regions
             if poly_equal(r.region, s.region)]
    names = sorted(str(r.active_set) for r in red)
    ok = names == ["000000.0001", "000000.0010"] and not twins
    verdict(5, ok, f"red {names}, counterparts {twins}")


def test_criterion_06_licq(setup, tup, verdict):
    qp1, qp2 = setup.qp(1), setup.qp(2)
    literal = (licq_check(qp1, tup("010000.0001")), licq_check(qp2, tup("000000.010000.0001")))
    # the same pair with the terminal bit that the region list actually contains
    listed = (licq_check(qp1, tup("010000.0010")), licq_check(qp2, tup("000000.010000.0010")))
    ok = literal == (False, True) and listed == (False, True)
    verdict(6, ok, f"N=1 {literal[0]}, N=2 {literal[1]}; listed pair {listed}")


def test_criterion_07_enumeration_equivalence(setup, atlas1, verdict):
    start = time.perf_counter()
    qp1, qp2 = setup.qp(1), setup.qp(2)
    tree1, rep1 = enumerate_tree(qp1)
    tree2, _ = enumerate_tree(qp2)
    ext2, _ = enumerate_extension(qp2, list(tree1) + list(rep1.degenerate))
    brute = exhaustive_active_sets(qp1)
    elapsed = time.perf_counter() - start
    ok = tuples(ext2) == tuples(tree2) and brute == set(tuples(tree1)) and elapsed < 10
    verdict(7, ok, f"extension {len(ext2)} vs tree {len(tree2)}, exhaustive {len(brute)} "
                   f"vs tree {len(tree1)}, {elapsed:.1f} s")


def test_criterion_08_oracle_agreement(atlas2, verdict):
    qp = atlas2.qp
    worst, interior, matched, missing = 0.0, 0, 0, 0
    for x in sample_feasible(qp, 200, seed=2024):
        res = solve_qp_at(qp, x)
        r = locate(atlas2, x)
        if r is None:
            missing += 1
            continue
        worst = max(worst, float(np.max(np.abs(r.law.u(x) - res.minimizer))))
        Pn = r.region.normalized()
        if np.min(Pn.d - Pn.C @ x) > 1e-5:
            interior += 1
            matched += int(r.active_set == res.active_tuple)
    ok = missing == 0 and worst <= 1e-6 and matched == interior
    verdict(8, ok, f"max deviation {worst:.1e}, tuples {matched}/{interior} interior, "
                   f"{missing} unlocated")


def test_criterion_09_persistent_union(atlas2, verdict):
    pn = build_PN(atlas2)
    rep = check_PN_invariance(atlas2, pn, samples=50, seed=0, combinations=100, mpc=True,
                              mpc_tol=1e-7)
    # convex combinations are also checked against the LP feasibility oracle
    rng = np.random.default_rng(1)
    pts = np.vstack([interior_samples(r, 10, seed=i) for i, r in enumerate(pn.regions)])
    infeasible = 0
    for _ in range(100):
        i, j = rng.integers(len(pts), size=2)
        theta = rng.uniform()
        infeasible += int(not feasible(atlas2.qp, theta * pts[i] + (1 - theta) * pts[j]))
    ok = rep.ok and infeasible == 0 and rep.trajectories == 50 * len(pn.regions)
    verdict(9, ok, f"{rep.trajectories} trajectories, MPC gap {rep.mpc_gap:.1e}, "
                   f"{rep.combinations}+100 combinations, {len(rep.violations) + infeasible} violations")


def _shared_facet_gaps(atlas, count, seed):
    """Law differences at random points on facets shared by two regions."""
    rng = np.random.default_rng(seed)
    edges = []
    for r in atlas.regions:
        V = vertices2d(r.region)
        for k in range(len(V)):
            edges.append((r, V[k], V[(k + 1) % len(V)]))
    gaps = []
    for idx in rng.integers(len(edges), size=20 * count):
        r, a, b = edges[idx]
        p = a + rng.uniform(0.2, 0.8) * (b - a)
        t = (b - a) / np.linalg.norm(b - a)
        normal = np.array([t[1], -t[0]])        # outward for a counterclockwise cycle
        q = p + 1e-6 * normal
        other = next((s for s in atlas.regions if s is not r and s.region.contains_point(q, 0.0)), None)
        if other is None:
            continue
        gaps.append(float(np.max(np.abs(r.law.u(p) - other.law.u(p)))))
        if len(gaps) == count:
            break
    return gaps


def test_criterion_10_offspring_closure(atlas2, tup, verdict):
    present = set(atlas2.tuples)
    missing = [str(c) for a in present if not any(a.terminal)
               for c in persistent_offspring(a) if c not in present]
    example = [str(c) for c in persistent_offspring(tup("010000.100000.0000"))]
    ok = not missing and example == ["100000.000000.0000"]
    verdict(10, ok, f"{len(missing)} missing; offspring of 010000.100000.0000 = {example}")


def test_criterion_11_numerical_bedrock(setup, atlas2, verdict):
    residual = dare_residual(setup.spec, setup.unc.P)
    h_min = float(np.min(np.linalg.eigvalsh(atlas2.qp.H)))
    gaps = _shared_facet_gaps(atlas2, 50, seed=11)
    scaled = {lam: scaled_invariance_check(setup.terminal, lam) for lam in (0.25, 0.5, 0.9)}
    ok = residual <= 1e-9 and h_min > 0 and len(gaps) == 50 and max(gaps) <= 1e-6 and all(scaled.values())
    verdict(11, ok, f"DARE residual {residual:.1e}, min eig H {h_min:.3f}, "
                    f"{len(gaps)} facet points max jump {max(gaps, default=np.nan):.1e}, "
                    f"scaling {scaled}")
