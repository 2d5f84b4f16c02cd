import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from explicit_lqr.atlas import interior_samples
from explicit_lqr.bitset import ActiveSetTuple, from_rows
from explicit_lqr.errors import LengthMismatch
from explicit_lqr.geom import LPStatus
from explicit_lqr.kkt import feasibility_lp, licq_check, optimality_lp, solve_kkt
from explicit_lqr.lqcore import CondensedQP, StageLayout
from explicit_lqr.oracle import solve_qp_at


def test_licq_examples(qp1, qp2, tup):
    assert licq_check(qp1, tup("010000.0001")) is False
    assert licq_check(qp2, tup("000000.010000.0001")) is True
    assert licq_check(qp1, tup("000000.0000")) is True


def test_parameter_row_violates_licq(qp1, tup):
    assert licq_check(qp1, tup("001000.0000")) is False


def test_feasibility_examples(qp1, tup):
    assert feasibility_lp(qp1, tup("000000.0000")).optimum > 1e-7
    assert feasibility_lp(qp1, tup("100000.0000")).optimum > 1e-7
    full = feasibility_lp(qp1, tup("111111.1111"))
    assert full.status is LPStatus.INFEASIBLE or full.optimum <= 1e-7


def test_optimality_examples(qp1, tup):
    assert optimality_lp(qp1, tup("000000.0000")).optimum > 1e-7
    assert optimality_lp(qp1, tup("000000.0001")).optimum > 1e-7
    assert optimality_lp(qp1, tup("110000.0000")).status is LPStatus.INFEASIBLE


def test_optimal_implies_feasible(qp2):
    rng = np.random.default_rng(7)
    for _ in range(40):
        bits = tuple(int(b) for b in rng.random(qp2.q) < 0.15)
        a = ActiveSetTuple(bits, qp2.layout)
        opt = optimality_lp(qp2, a)
        if opt.optimal and opt.optimum > 1e-7:
            assert feasibility_lp(qp2, a).optimum > 1e-7


def test_empty_set_law_is_unconstrained_minimizer(qp2, setup, rng):
    cr = solve_kkt(qp2, ActiveSetTuple.zeros(qp2.layout))
    np.testing.assert_allclose(cr.law.Ku, -np.linalg.solve(qp2.H, qp2.F.T), atol=1e-12)
    np.testing.assert_array_equal(cr.law.ku, 0.0)
    assert cr.full_dim and cr.licq and cr.persistent_form
    ts = setup.terminal.T
    for x in interior_samples(cr, 20, seed=3):
        if ts.contains_point(x):
            np.testing.assert_allclose(cr.law.u(x)[:1], setup.unc.Kinf @ x, atol=1e-7)


def test_region_borders_state_facet(qp1, tup):
    cr = solve_kkt(qp1, tup("100000.0000"))
    assert cr.full_dim and cr.licq and not cr.weakly_active
    # the upper input bound holds with equality throughout the region
    for x in interior_samples(cr, 10, seed=1):
        assert cr.law.u(x)[0] == pytest.approx(1.0, abs=1e-12)


def test_licq_failure_gives_lower_dimensional_region(qp1, tup):
    cr = solve_kkt(qp1, tup("010000.0001"))
    assert not cr.licq
    assert not cr.full_dim


@pytest.mark.parametrize("text", ["000000.0000", "000000.0001", "000000.0010", "010000.0000",
                                  "100000.0000"])
def test_law_matches_oracle(qp1, tup, text):
    cr = solve_kkt(qp1, tup(text))
    for x in interior_samples(cr, 20, seed=11):
        res = solve_qp_at(qp1, x)
        np.testing.assert_allclose(cr.law.u(x), res.minimizer, atol=1e-6)
        assert res.active_tuple == cr.active_set
        assert np.all(cr.law.sigma(x) >= -1e-8)
        assert cr.law.stationarity_residual(qp1, x) <= 1e-7


def test_region_of_every_atlas_entry_matches_oracle(atlas2):
    for cr in atlas2.regions:
        for x in interior_samples(cr, 20, seed=5):
            res = solve_qp_at(atlas2.qp, x)
            assert np.max(np.abs(cr.law.u(x) - res.minimizer)) <= 1e-6
            assert res.active_tuple == cr.active_set


def test_tuple_length_checked(qp2, tup):
    with pytest.raises(LengthMismatch):
        solve_kkt(qp2, tup("000000.0000"))


@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(2, 5), st.integers(0, 2**32 - 1), st.integers(0, 2))
def test_licq_agrees_with_svd_rank(rows, cols, seed, dup):
    rng = np.random.default_rng(seed)
    G = rng.standard_normal((rows, cols))
    if dup and rows > 1:
        G[-1] = G[0] * rng.uniform(0.5, 2.0)   # force dependence
    lay = StageLayout(N=1, qX=0, qU=rows, qT=0)
    n = 1
    qp = CondensedQP(N=1, H=np.eye(cols), F=np.zeros((n, cols)), Y=np.zeros((n, n)), G=G,
                     w=np.ones(rows), E=np.zeros((rows, n)), layout=lay,
                     Phi=np.zeros((2, n)), Gamma=np.zeros((2, cols)))
    a = from_rows(range(rows), lay)
    sv = np.linalg.svd(G, compute_uv=False)
    expected = rows <= cols and sv[-1] > 1e-9 * np.linalg.norm(G)
    assert licq_check(qp, a) == expected
