import warnings

import numpy as np
import pytest
import sympy
from hypothesis import given, settings, strategies as st

from aggbounds.core import CovariateSupport, GroupRecord, indicator_matrix
from aggbounds.feasible import (EmptyFeasibleSetError, InconsistentMarginalsWarning, chart,
                                min_slack_joint, relaxed_chart, sample_starts)

from conftest import random_group


def _exact_rank(support):
    A = indicator_matrix(support).astype(int)
    M = sympy.Matrix(np.vstack([A, np.ones(support.K, int)]).tolist())
    return M.rank()


def _group(m1, m2=None):
    marg = {(0, 0.0): m1[0], (0, 1.0): m1[1]}
    if m2 is not None:
        marg.update({(1, 0.0): m2[0], (1, 1.0): m2[1]})
    return GroupRecord("g", 1.0, 0.5, marg)


def test_single_covariate_pins_joint():
    s = CovariateSupport.binary(1)
    p, slack = min_slack_joint(_group((0.3, 0.7)), s)
    np.testing.assert_allclose(p, [0.3, 0.7], atol=1e-12)
    assert slack <= 1e-12
    ch = chart(_group((0.3, 0.7)), s, p)
    assert ch.dim == 0
    assert len(sample_starts(ch, 10, seed=1)) == 1


def test_two_covariates_row_column_sums():
    s = CovariateSupport.binary(2)
    g = _group((0.5, 0.5), (0.5, 0.5))
    p, slack = min_slack_joint(g, s)
    assert slack <= 1e-8
    P = p.reshape(2, 2)
    np.testing.assert_allclose(P.sum(axis=0), 0.5, atol=1e-10)
    np.testing.assert_allclose(P.sum(axis=1), 0.5, atol=1e-10)


def test_restricted_support_slack():
    # p = (t, 1 - t) on {(0,0), (1,1)}: deviation |t - .4| + |1-t - .6| + 2|t - .5| >= 0.2
    s = CovariateSupport([(0, 0), (1, 1)])
    g = _group((0.4, 0.6), (0.5, 0.5))
    p, slack = min_slack_joint(g, s)
    assert abs(slack - 0.2) < 1e-9
    with pytest.warns(InconsistentMarginalsWarning):
        chart(g, s, p, slack)
    with pytest.raises(EmptyFeasibleSetError):
        chart(g, s, p, slack, strict=True)


@pytest.mark.parametrize("L,d", [(1, 0), (2, 1), (3, 4)])
def test_chart_dimension(L, d):
    s = CovariateSupport.binary(L)
    assert s.K - _exact_rank(s) == d
    rng = np.random.default_rng(L)
    g, p0, _ = random_group(s, rng)
    p, _ = min_slack_joint(g, s)
    ch = chart(g, s, p)
    assert ch.dim == d
    N = ch.null_basis
    A_aug = np.vstack([indicator_matrix(s), np.ones(s.K)])
    assert np.abs(A_aug @ N).max(initial=0) < 1e-10
    np.testing.assert_allclose(N.T @ N, np.eye(d), atol=1e-10)


@settings(max_examples=25, deadline=None)
@given(st.lists(st.integers(2, 3), min_size=1, max_size=3), st.integers(0, 10**6))
def test_rank_matches_exact(sizes, seed):
    s = CovariateSupport.product([range(n) for n in sizes])
    g, _, _ = random_group(s, np.random.default_rng(seed))
    p, _ = min_slack_joint(g, s)
    assert chart(g, s, p).dim == s.K - _exact_rank(s)


def test_symmetric_two_by_two_starts():
    s = CovariateSupport.binary(2)
    g = _group((0.5, 0.5), (0.5, 0.5))
    p, slack = min_slack_joint(g, s)
    starts = sample_starts(chart(g, s, p), 0)
    assert len(starts) == 3
    ext = sorted(tuple(np.round(q, 10)) for q in starts[1:])
    assert ext == [(0.0, 0.5, 0.5, 0.0), (0.5, 0.0, 0.0, 0.5)]


@settings(max_examples=20, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10**6))
def test_starts_feasible_and_deterministic(L, seed):
    s = CovariateSupport.binary(L)
    g, _, _ = random_group(s, np.random.default_rng(seed), concentration=0.5)
    p, slack = min_slack_joint(g, s)
    ch = chart(g, s, p)
    a = sample_starts(ch, 8, seed=seed)
    b = sample_starts(ch, 8, seed=seed)
    assert len(a) == len(b)
    for x, y in zip(a, b):
        np.testing.assert_array_equal(x, y)
    A = indicator_matrix(s)
    m = g.marginal_vector(s)
    for q in a:
        assert q.min() >= -1e-10
        assert abs(q.sum() - 1) < 1e-9
        assert np.abs(A @ q - m).max() <= 1e-8


def test_relaxed_chart_bands():
    s = CovariateSupport.binary(2)
    lo = np.array([0.3, 0.5, 0.4, 0.4])
    hi = np.array([0.5, 0.7, 0.6, 0.6])
    ch, slack = relaxed_chart(s, lo, hi)
    assert slack <= 1e-10 and ch.relaxed and ch.dim == 3
    assert ch.violation(ch.base_point)[0] <= 1e-12
    for q in sample_starts(ch, 6, seed=0):
        assert ch.violation(q)[0] <= 1e-10
