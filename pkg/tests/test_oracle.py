import numpy as np
import pytest

from explicit_lqr.errors import InfeasiblePoint, TooLarge
from explicit_lqr.oracle import (exhaustive_active_sets, feasible, sample_feasible,
                                 solve_qp_at)


def test_origin(qp2):
    res = solve_qp_at(qp2, [0.0, 0.0])
    np.testing.assert_allclose(res.minimizer, 0.0, atol=1e-14)
    assert res.active_tuple.count == 0
    assert res.objective == pytest.approx(0.0, abs=1e-20)


def test_matches_unconstrained_minimizer_inside(qp2):
    x = np.array([0.3, 0.2])
    res = solve_qp_at(qp2, x)
    np.testing.assert_allclose(res.minimizer, -np.linalg.solve(qp2.H, qp2.F.T @ x), atol=1e-12)


def test_kkt_residual_and_objective(qp2):
    for x in sample_feasible(qp2, 25, seed=1):
        res = solve_qp_at(qp2, x)
        assert res.kkt_residual(qp2, x) <= 1e-6
        assert res.objective == pytest.approx(qp2.objective(x, res.minimizer))


def test_infeasible_point(qp2):
    with pytest.raises(InfeasiblePoint):
        solve_qp_at(qp2, [9.9, 9.9])
    assert not feasible(qp2, [9.9, 9.9])
    assert not feasible(qp2, [20.0, 0.0])


def test_sampling_is_deterministic(qp2):
    a = sample_feasible(qp2, 10, seed=3)
    b = sample_feasible(qp2, 10, seed=3)
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, sample_feasible(qp2, 10, seed=4))
    assert all(feasible(qp2, x) for x in a)
    assert sample_feasible(qp2, 0).shape == (0, 2)


def test_exhaustive_limit(setup):
    with pytest.raises(TooLarge):
        exhaustive_active_sets(setup.qp(2))


def test_exhaustive_loose_instance(loose_setup):
    found = exhaustive_active_sets(loose_setup.qp(1))
    assert [str(a) for a in found] == ["000000.0000"]
