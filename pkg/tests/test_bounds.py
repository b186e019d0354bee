import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from aggbounds.bounds import (InfeasibleInnerProblem, InnerProblem, SearchOptions,
                              group_bounds, identified_set, inner_closed_form, inner_lp,
                              inner_value, joint_known_range)
from aggbounds.core import (AggregateDataset, BoundResult, CovariateSupport, FinerMoment,
                            GroupBound, GroupRecord, OutcomeRange, ShapeConstraintSet,
                            contrast, monotone_constraints)

from conftest import random_dataset, random_group

UNIT = OutcomeRange(0.0, 1.0)
FAST = SearchOptions(n_random_starts=8)


def _random_inner(rng):
    K = int(rng.integers(2, 17))
    p = rng.dirichlet(np.full(K, rng.choice([0.3, 1.0, 5.0])))
    p[rng.random(K) < 0.15] = 0.0
    if p.sum() == 0:
        p[0] = 1.0
    p /= p.sum()
    y_lo = float(rng.normal())
    yr = OutcomeRange(y_lo, y_lo + float(rng.uniform(0.1, 3)))
    y = yr.y_lo + yr.width * float(rng.random())
    lam = rng.normal(size=K)
    lam[rng.random(K) < 0.2] = 0.0
    return lam, p, y, yr


# --- closed form ---------------------------------------------------------

def test_closed_form_single_cell():
    for d in ("min", "max"):
        v, c = inner_closed_form([2.0], [1.0], 0.6, UNIT, d)
        assert abs(v - 1.2) < 1e-12 and np.allclose(c, [0.6])


def test_closed_form_two_cell_examples():
    v, c = inner_closed_form([1, 0], [0.9, 0.1], 0.95, UNIT, "min")
    assert abs(v - 0.85 / 0.9) < 1e-12
    np.testing.assert_allclose(c, [0.85 / 0.9, 1.0], atol=1e-12)
    v, c = inner_closed_form([1, 0], [0.9, 0.1], 0.95, UNIT, "max")
    assert abs(v - 1.0) < 1e-12
    np.testing.assert_allclose(c, [1.0, 0.5], atol=1e-12)
    lo, _ = inner_closed_form([1, -1], [0.7, 0.3], 0.6, UNIT, "min")
    hi, _ = inner_closed_form([1, -1], [0.7, 0.3], 0.6, UNIT, "max")
    assert abs(lo + 4 / 7) < 1e-12 and abs(hi - 6 / 7) < 1e-12


def test_closed_form_matches_lp_1000():
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(1000):
        lam, p, y, yr = _random_inner(rng)
        for d in ("min", "max"):
            v, c = inner_closed_form(lam, p, y, yr, d)
            assert c.min() >= yr.y_lo - 1e-12 and c.max() <= yr.y_hi + 1e-12
            assert abs(p @ c - y) < 1e-10
            w, _ = inner_lp(InnerProblem(lam, p, y, yr, d))
            worst = max(worst, abs(v - w))
    assert worst < 1e-8


def test_band_matches_lp():
    rng = np.random.default_rng(7)
    for _ in range(300):
        lam, p, y, yr = _random_inner(rng)
        a, b = sorted(yr.y_lo + yr.width * rng.random(2))
        for d in ("min", "max"):
            prob = InnerProblem(lam, p, (a, b), yr, d)
            v, c = inner_value(prob)
            w, _ = inner_lp(prob)
            assert abs(v - w) < 1e-8
            assert a - 1e-10 <= p @ c <= b + 1e-10


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9), st.floats(0.1, 5.0), st.floats(-3.0, 3.0))
def test_affine_equivariance_closed_form(seed, a, b):
    lam, p, y, yr = _random_inner(np.random.default_rng(seed))
    yr2 = OutcomeRange(a * yr.y_lo + b, a * yr.y_hi + b)
    for d in ("min", "max"):
        v, _ = inner_closed_form(lam, p, y, yr, d)
        w, _ = inner_closed_form(lam, p, a * y + b, yr2, d)
        assert abs(w - (a * v + b * lam.sum())) < 1e-9 * (1 + abs(w))
        wl, _ = inner_lp(InnerProblem(lam, p, a * y + b, yr2, d))
        assert abs(wl - w) < 1e-8 * (1 + abs(w))


@settings(max_examples=60, deadline=None)
@given(st.integers(0, 10**9))
def test_relabeling_closed_form(seed):
    rng = np.random.default_rng(seed)
    lam, p, y, yr = _random_inner(rng)
    perm = rng.permutation(lam.size)
    for d in ("min", "max"):
        v, _ = inner_closed_form(lam, p, y, yr, d)
        w, _ = inner_closed_form(lam[perm], p[perm], y, yr, d)
        assert abs(v - w) < 1e-10


# --- constrained inner program -------------------------------------------

def test_inner_lp_shape_pins_max():
    S = np.array([[1.0, -1.0]])
    v, c = inner_lp(InnerProblem(np.array([1.0, -1.0]), np.array([0.7, 0.3]), 0.6, UNIT,
                                 "max", (S, np.zeros(1))))
    assert abs(v) < 1e-10
    np.testing.assert_allclose(c, [0.6, 0.6], atol=1e-10)


def test_inner_lp_finer_pins_cell():
    s = CovariateSupport.binary(1)
    g = GroupRecord("A", 1.0, 0.6, {(0, 0.0): 0.3, (0, 1.0): 0.7},
                    finer={(0, 1.0): FinerMoment(6 / 7)})
    from aggbounds.bounds import finer_constraints
    fin = finer_constraints(g, s)
    vals = [inner_lp(InnerProblem(np.array([0.0, 1.0]), np.array([0.3, 0.7]), 0.6, UNIT, d,
                                  None, fin))[0] for d in ("min", "max")]
    assert abs(vals[0] - 6 / 7) < 1e-10 and abs(vals[1] - 6 / 7) < 1e-10


def test_inner_lp_infeasible():
    S = np.array([[-1.0, 0.0]])
    with pytest.raises(InfeasibleInnerProblem):
        inner_lp(InnerProblem(np.array([1.0, 0.0]), np.array([0.5, 0.5]), 0.2, UNIT, "min",
                              (S, np.array([-0.9]))))


# --- group and aggregate bounds ------------------------------------------

def test_single_covariate_group(one_cov_group):
    s, g = one_cov_group
    gb = group_bounds(g, s, contrast(s, [1], [0]), UNIT)
    assert abs(gb.lower + 4 / 7) < 1e-10 and abs(gb.upper - 6 / 7) < 1e-10
    np.testing.assert_allclose(gb.witness_lower.p, [0.3, 0.7], atol=1e-12)


def test_aggregation_arithmetic():
    r = BoundResult.from_groups([GroupBound("a", 0.5, 0.0, 1.0), GroupBound("b", 0.5, 0.2, 0.4)])
    assert r.interval == pytest.approx((0.1, 0.7), abs=1e-15)


def test_single_group_dataset_matches_group(one_cov_group):
    s, g = one_cov_group
    ds = AggregateDataset(s, UNIT, (g,))
    r = identified_set(ds, [-1, 1])
    gb = group_bounds(g, s, [-1, 1], UNIT)
    assert r.interval == pytest.approx((gb.lower, gb.upper), abs=1e-14)


@settings(max_examples=15, deadline=None)
@given(st.integers(0, 10**9), st.integers(1, 3))
def test_membership_of_constant_witness(seed, L):
    rng = np.random.default_rng(seed)
    s = CovariateSupport.binary(L)
    ds = random_dataset(s, rng, G=2)
    lam = rng.normal(size=s.K)
    r = identified_set(ds, lam, opts=FAST)
    target = sum(g.share * lam.sum() * g.y_mean for g in ds.groups)
    assert r.lower <= target <= r.upper
    for gb, g in zip(r.per_group, ds.groups):
        assert gb.lower <= lam.sum() * g.y_mean <= gb.upper


def test_witness_replay():
    rng = np.random.default_rng(11)
    s = CovariateSupport.binary(3)
    g, _, _ = random_group(s, rng)
    lam = rng.normal(size=s.K)
    gb = group_bounds(g, s, lam, UNIT, opts=FAST)
    for w, d, ref in ((gb.witness_lower, "min", gb.lower), (gb.witness_upper, "max", gb.upper)):
        v, c = inner_closed_form(lam, w.p, g.y_mean, UNIT, d)
        assert abs(v - ref) < 1e-8
        assert abs(lam @ w.c - ref) < 1e-8
        assert w.p.min() >= 0 and abs(w.p.sum() - 1) < 1e-9


def test_relabeling_group_bounds():
    # swapping covariate order permutes the support points
    rng = np.random.default_rng(5)
    s = CovariateSupport.binary(2)
    g, p, c = random_group(s, rng)
    lam = rng.normal(size=4)
    sw = {(1 - l, v): m for (l, v), m in g.marginals.items()}
    g2 = GroupRecord("g", 1.0, g.y_mean, sw)
    perm = [0, 2, 1, 3]
    a = group_bounds(g, s, lam, UNIT)
    b = group_bounds(g2, s, lam[perm], UNIT)
    assert abs(a.lower - b.lower) < 1e-8 and abs(a.upper - b.upper) < 1e-8


def test_affine_equivariance_group_bounds():
    rng = np.random.default_rng(9)
    s = CovariateSupport.binary(2)
    g, _, _ = random_group(s, rng)
    lam = rng.normal(size=4)
    a, b = 2.5, -1.0
    g2 = GroupRecord("g", 1.0, a * g.y_mean + b, g.marginals)
    r1 = group_bounds(g, s, lam, UNIT)
    r2 = group_bounds(g2, s, lam, OutcomeRange(b, a + b))
    assert abs(r2.lower - (a * r1.lower + b * lam.sum())) < 1e-8
    assert abs(r2.upper - (a * r1.upper + b * lam.sum())) < 1e-8


def test_shape_and_finer_narrow():
    rng = np.random.default_rng(21)
    s = CovariateSupport.binary(2)
    g, p, c = random_group(s, rng, finer=((0, 1.0),))
    c_sorted = c.copy()
    lam = contrast(s, [1, 0], [0, 0])
    base = group_bounds(g, s, lam, UNIT, opts=FAST)
    fin = group_bounds(g, s, lam, UNIT, use_finer=True, opts=FAST)
    assert fin.lower >= base.lower - 1e-6 and fin.upper <= base.upper + 1e-6
    sh = monotone_constraints(s, "x1", "inc")
    if np.all(sh.S @ c_sorted <= 1e-12):
        con = group_bounds(g, s, lam, UNIT, shape=sh, opts=FAST)
        assert con.lower >= base.lower - 1e-6 and con.upper <= base.upper + 1e-6


def test_joint_known_range_d0(one_cov_group):
    s, g = one_cov_group
    r = joint_known_range(g, s, [-1, 1], UNIT)
    assert r.lower_width == 0 and r.upper_width == 0


def test_joint_known_range_symmetric():
    s = CovariateSupport.binary(2)
    g = GroupRecord("g", 1.0, 0.9, {(0, 0.0): .5, (0, 1.0): .5, (1, 0.0): .5, (1, 1.0): .5})
    lam = contrast(s, [1, 0], [0, 0])
    r = joint_known_range(g, s, lam, UNIT)
    # by hand: L ranges from -1 at p=(.5,0,0,.5) to -0.2 at p=(0,.5,.5,0)
    assert r.lower_range == pytest.approx((-1.0, -0.2), abs=1e-8)
    gb = group_bounds(g, s, lam, UNIT)
    assert abs(r.lower_range[0] - gb.lower) < 1e-8
    assert abs(r.upper_range[1] - gb.upper) < 1e-8
    assert r.lower_width > 0


def test_options_validation():
    with pytest.raises(ValueError):
        SearchOptions(max_iters_per_start=0)
    with pytest.raises(ValueError):
        SearchOptions(convergence_tol=0)


def test_basis_replay_matches_lp():
    # a basis reused at a nearby joint is either rejected or exactly optimal
    from aggbounds.bounds import FinerConstraint, _inner_solution, _replay
    rng = np.random.default_rng(77)
    hits = 0
    for _ in range(400):
        s = CovariateSupport.binary(int(rng.integers(1, 4)))
        K = s.K
        p, c0, lam = rng.dirichlet(np.ones(K)), rng.random(K), rng.normal(size=K)
        sh = monotone_constraints(s, "x0", "inc")
        kind = rng.integers(0, 3)
        mask = s.array()[:, 0] == 1

        def problem(q, direction):
            band = float(q @ c0) if kind != 1 else (float(q @ c0) - 0.05, float(q @ c0) + 0.05)
            fin = []
            if kind == 2:
                v = float((q * c0)[mask].sum())
                fin = [FinerConstraint(mask, v, v)]
            shape = (sh.S, sh.a) if kind == 0 else None
            return InnerProblem(lam, q, band, UNIT, direction, shape, fin)

        for d in ("min", "max"):
            try:
                basis = _inner_solution(problem(p, d)).basis
            except InfeasibleInnerProblem:
                continue
            q = np.abs(p + rng.normal(scale=0.01, size=K))
            q /= q.sum()
            hit = _replay(problem(q, d), basis)
            if hit is None:
                continue
            hits += 1
            val, _ = inner_lp(problem(q, d))
            assert abs(hit[0] - val) < 1e-9
    assert hits > 200
