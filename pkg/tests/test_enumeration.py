import pytest

from explicit_lqr.bitset import is_persistent_form
from explicit_lqr.enumeration import (enumerate_extension, enumerate_tree,
                                      inject_persistent_offspring, tuples)
from explicit_lqr.errors import HorizonMismatch
from explicit_lqr.oracle import exhaustive_active_sets

N1 = ["000000.0000", "000000.0001", "000000.0010", "010000.0000", "100000.0000"]
N2 = ["000000.000000.0000", "000000.010000.0000", "000000.010000.0010", "000000.100000.0000",
      "000000.100000.0001", "010000.000000.0000", "010000.000000.0010", "010000.010000.0000",
      "010000.100000.0000", "100000.000000.0000", "100000.000000.0001", "100000.010000.0000",
      "100000.100000.0000"]


def texts(regions):
    return [str(a) for a in tuples(regions)]


def test_tree_horizon_one(atlas1):
    assert [str(a) for a in atlas1.tuples] == N1


def test_tree_horizon_two(atlas2):
    assert [str(a) for a in atlas2.tuples] == N2


def test_extension_equals_tree(atlas2, atlas2_ext, atlas3, setup):
    assert atlas2_ext.tuples == atlas2.tuples
    regions, _ = enumerate_extension(setup.qp(3), list(atlas2.regions) + list(atlas2.degenerate))
    assert tuples(regions) == atlas3.tuples


def test_extension_needs_lower_dimensional_parents(atlas1, setup):
    # without the LICQ-violating parents two regions at N = 2 are lost
    regions, _ = enumerate_extension(setup.qp(2), atlas1.regions)
    missing = set(N2) - set(texts(regions))
    assert missing == {"000000.010000.0010", "000000.100000.0001"}


@pytest.mark.parametrize("parent, children", [
    ("100000.0000", ["000000.100000.0000", "010000.100000.0000", "100000.100000.0000"]),
    ("000000.0001", ["100000.000000.0001"]),
])
def test_single_parent_extensions(setup, tup, parent, children):
    regions, _ = enumerate_extension(setup.qp(2), [tup(parent)])
    assert texts(regions) == children


def test_dead_end_extension(setup, tup):
    regions, report = enumerate_extension(setup.qp(3), [tup("100000.000000.0001")])
    assert regions == []
    assert report.candidates_tested >= 1


def test_extension_tests_fewer_candidates(atlas2, atlas2_ext):
    assert atlas2_ext.report.candidates_tested < atlas2.report.candidates_tested


def test_reports_are_reproducible(setup, atlas1):
    _, again = enumerate_tree(setup.qp(1))
    assert again.to_json() == atlas1.report.to_json()
    assert again.regions_found <= again.candidates_tested


def test_horizon_mismatch(setup, atlas1):
    with pytest.raises(HorizonMismatch):
        enumerate_extension(setup.qp(3), atlas1.regions)


def test_pruning_loses_nothing(qp1, atlas1):
    assert exhaustive_active_sets(qp1) == set(atlas1.tuples)


def test_loose_instance_has_one_region(loose_setup):
    regions, _ = enumerate_tree(loose_setup.qp(2))
    assert texts(regions) == ["000000.000000.0000"]


def test_offspring_already_present(atlas2):
    merged, missing = inject_persistent_offspring(atlas2.qp, atlas2.regions)
    assert missing == []
    assert tuples(merged) == atlas2.tuples


def test_offspring_repairs_truncated_atlas(atlas2, tup):
    gone = tup("100000.000000.0000")
    partial = [r for r in atlas2.regions if r.active_set != gone]
    merged, missing = inject_persistent_offspring(atlas2.qp, partial)
    assert missing == [gone]
    assert tuples(merged) == atlas2.tuples


def test_zero_tuple_has_no_offspring(atlas2):
    zero = [r for r in atlas2.regions if r.active_set.count == 0]
    assert is_persistent_form(zero[0].active_set)
    _, missing = inject_persistent_offspring(atlas2.qp, zero)
    assert missing == []
