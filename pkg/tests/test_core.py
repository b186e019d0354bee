import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aggbounds.core import (AggregateDataset, CovariateSupport, GroupRecord, OutcomeRange,
                            ShapeConstraintSet, UnknownPointError, contrast, flat_index,
                            indicator_matrix, monotone_constraints, support_values,
                            validate_dataset, weight_vector)


def test_indicator_single_binary():
    A = indicator_matrix(CovariateSupport.binary(1))
    np.testing.assert_array_equal(A, [[1, 0], [0, 1]])


def test_indicator_two_binary_rows():
    s = CovariateSupport.binary(2)
    A = indicator_matrix(s)
    np.testing.assert_array_equal(A, [[1, 1, 0, 0], [0, 0, 1, 1], [1, 0, 1, 0], [0, 1, 0, 1]])
    np.testing.assert_array_equal(A.sum(axis=0), [2, 2, 2, 2])


@given(st.lists(st.integers(2, 4), min_size=1, max_size=3))
def test_indicator_partitions_columns(sizes):
    s = CovariateSupport.product([range(n) for n in sizes])
    A = indicator_matrix(s)
    np.testing.assert_array_equal(A.sum(axis=0), np.full(s.K, len(sizes)))
    start = 0
    for n in sizes:
        np.testing.assert_array_equal(A[start:start + n].sum(axis=0), np.ones(s.K))
        start += n


def test_flat_index_row_major():
    s = CovariateSupport.binary(2)
    # (1, 0) is the third point in row-major order; indices are 0-based
    assert flat_index(s, (1, 0)) == 2
    for k in range(s.K):
        assert flat_index(s, support_values(s, k)) == k
    with pytest.raises(UnknownPointError):
        flat_index(s, (2, 0))
    with pytest.raises(UnknownPointError):
        support_values(s, 4)


def test_support_is_sorted_and_distinct():
    s = CovariateSupport([(1, 1), (0, 0)])
    assert s.points == ((0.0, 0.0), (1.0, 1.0))
    with pytest.raises(ValueError):
        CovariateSupport([(0, 1), (0, 1)])
    with pytest.raises(ValueError):
        CovariateSupport([(0, 1), (0,)])


def _ds(marg, y=0.5, rng=OutcomeRange(0, 1)):
    s = CovariateSupport.binary(2)
    return AggregateDataset(s, rng, (GroupRecord("g", 1.0, y, marg),))


GOOD = {(0, 0.0): 0.4, (0, 1.0): 0.6, (1, 0.0): 0.5, (1, 1.0): 0.5}


def test_validate_ok():
    ds, v = validate_dataset(_ds(GOOD))
    assert v == []


def test_validate_marginal_sum():
    bad = dict(GOOD)
    bad[(1, 1.0)] = 0.4
    _, v = validate_dataset(_ds(bad))
    assert len(v) == 1
    assert v[0].kind == "marginal_sum" and v[0].group == "g" and v[0].covariate == "x1"
    assert "marginal sum ≠ 1" in str(v[0]) and "group g" in str(v[0])


def test_validate_y_outside_range():
    _, v = validate_dataset(_ds(GOOD, y=1.2))
    assert [x.message for x in v] == ["outcome mean outside range"]


def test_validate_renormalize_repairs_rounding():
    bad = dict(GOOD)
    bad[(0, 1.0)] = 0.6 + 1e-6
    ds, v = validate_dataset(_ds(bad), renormalize=True)
    assert v == []
    g = ds.groups[0]
    assert abs(g.marginals[(0, 0.0)] + g.marginals[(0, 1.0)] - 1) < 1e-15


def test_validate_unknown_value_and_binary_range():
    bad = dict(GOOD)
    bad[(0, 2.0)] = 0.0
    s = CovariateSupport.binary(2)
    ds = AggregateDataset(s, OutcomeRange(0, 2), (GroupRecord("g", 1.0, 0.5, bad),), binary=True)
    kinds = {x.kind for x in validate_dataset(ds)[1]}
    assert {"unknown_value", "binary_range"} <= kinds


def test_weights():
    s = CovariateSupport.binary(1)
    np.testing.assert_array_equal(contrast(s, [1], [0]), [-1, 1])
    with pytest.raises(ValueError):
        weight_vector(s, [0, 0])
    with pytest.raises(ValueError):
        weight_vector(s, [1, np.nan])
    with pytest.raises(ValueError):
        weight_vector(s, [1, 2, 3])


def test_monotone_rows():
    s = CovariateSupport.binary(2, ("a", "b"))
    sh = monotone_constraints(s, "b", "dec")
    # c(a, b=1) - c(a, b=0) <= 0 for a = 0, 1
    np.testing.assert_array_equal(sh.S, [[-1, 1, 0, 0], [0, 0, -1, 1]])
    np.testing.assert_array_equal(sh.a, [0, 0])
    inc = monotone_constraints(s, "b", "inc")
    np.testing.assert_array_equal(inc.S, -sh.S)


def test_shape_checks():
    with pytest.raises(ValueError):
        ShapeConstraintSet(np.ones((2, 3)), np.zeros(3))
    sh = ShapeConstraintSet(np.ones((1, 3)), [0.0])
    with pytest.raises(ValueError):
        sh.check(4)
