import numpy as np
import pytest

from aggbounds.bounds import SearchOptions, group_bounds, identified_set
from aggbounds.core import CovariateSupport, OutcomeRange, contrast, indicator_matrix, monotone_constraints
from aggbounds.simlab import (DimensionTooLargeError, JointSpec, MicroSample, aggregate_micro,
                              brute_force_bounds, build_preset, consistency_study,
                              coverage_study, exercise_preset, generate, population_dataset,
                              reduced_preset, sample_dataset, white_gap)

from conftest import random_group

UNIT = OutcomeRange(0.0, 1.0)


def _small_spec(seed=0, G=3, L=2, binary=True, concentration=1.0):
    rng = np.random.default_rng(seed)
    s = CovariateSupport.binary(L)
    joints = rng.dirichlet(np.full(s.K, concentration), G)
    means = rng.random((G, s.K))
    return JointSpec(s, joints, means, np.full(G, 1 / G), UNIT, binary)


def test_point_mass_spec():
    s = CovariateSupport.binary(2)
    spec = JointSpec(s, np.array([[0, 0, 1.0, 0]]), np.ones((1, 4)), np.ones(1))
    smp = generate(spec, 50, seed=1)
    assert np.all(smp.y == 1) and np.all(smp.cell == 2)
    np.testing.assert_array_equal(smp.x, np.tile([1.0, 0.0], (50, 1)))


def test_generate_deterministic_and_concentrated():
    # cells well away from zero so the normal band applies
    spec = _small_spec(concentration=8.0)
    a, b = generate(spec, 1300, seed=7), generate(spec, 1300, seed=7)
    np.testing.assert_array_equal(a.y, b.y)
    np.testing.assert_array_equal(a.cell, b.cell)
    n = 1300
    for g in range(spec.G):
        freq = np.bincount(a.cell[a.group == g], minlength=4) / n
        p = spec.joints[g]
        assert np.all(np.abs(freq - p) <= 3 * np.sqrt(p * (1 - p) / n) + 1e-12)


def test_aggregate_arithmetic():
    s = CovariateSupport.binary(1)
    smp = MicroSample(np.array([0.0, 1, 1, 1]), np.array([0, 1, 1, 0]), np.zeros(4, int), s, ("g",))
    ds = aggregate_micro(smp, UNIT, finer=[(0, 1.0)])
    g = ds.groups[0]
    assert g.y_mean == 0.75 and g.count == 4 and ds.binary
    assert g.marginals[(0, 1.0)] == 0.5
    assert g.finer[(0, 1.0)].y_mean == 1.0 and g.finer[(0, 1.0)].count == 2


def test_aggregate_marginals_sum_to_one():
    spec = _small_spec(L=3)
    ds = aggregate_micro(generate(spec, 200, seed=3), UNIT)
    for g in ds.groups:
        for l in range(3):
            assert abs(g.marginals[(l, 0.0)] + g.marginals[(l, 1.0)] - 1) < 1e-12
    assert abs(sum(ds.shares) - 1) < 1e-12


def test_sample_dataset_matches_micro_path():
    spec = _small_spec(L=3)
    a = aggregate_micro(generate(spec, 300, seed=11), UNIT, finer=spec.finer)
    b = sample_dataset(spec, 300, seed=11)
    for ga, gb in zip(a.groups, b.groups):
        assert ga.y_mean == pytest.approx(gb.y_mean, abs=1e-12)
        assert ga.count == gb.count
        for k in ga.marginals:
            assert ga.marginals[k] == pytest.approx(gb.marginals[k], abs=1e-12)
        assert set(ga.finer) == set(gb.finer)


def test_population_identity():
    spec = _small_spec(L=3)
    ds = population_dataset(spec)
    A = indicator_matrix(spec.support)
    for g, rec in enumerate(ds.groups):
        np.testing.assert_allclose(rec.marginal_vector(spec.support), A @ spec.joints[g], atol=1e-15)
        assert rec.y_mean == pytest.approx(spec.joints[g] @ spec.cell_means[g], abs=1e-15)


def test_spec_round_trip(tmp_path):
    spec = _small_spec()
    path = tmp_path / "spec.json"
    spec.save(path)
    back = JointSpec.load(path)
    np.testing.assert_array_equal(back.joints, spec.joints)
    np.testing.assert_array_equal(back.cell_means, spec.cell_means)
    assert back.group_ids == spec.group_ids and back.finer == spec.finer


# --- presets --------------------------------------------------------------

@pytest.mark.parametrize("ex", [1, 2, 3])
def test_preset_shape(ex):
    spec = exercise_preset(ex)
    assert spec.G == 50 and spec.support.K == 8 and spec.binary
    assert abs(spec.shares.sum() - 1) < 1e-12
    np.testing.assert_allclose(spec.joints.sum(axis=1), 1, atol=1e-12)
    assert spec.meta["n_per_group"] == 1300
    built = build_preset(ex)
    np.testing.assert_allclose(spec.joints, built.joints, atol=1e-12)


def test_presets_share_cell_means():
    base = exercise_preset(1).cell_means
    for ex in (2, 3):
        np.testing.assert_array_equal(exercise_preset(ex).cell_means, base)
    assert np.all(base == base[0])


def test_preset_marginal_profiles():
    m = {ex: exercise_preset(ex).marginals() for ex in (1, 2, 3)}
    # distance of each covariate's "= 1" share from one half, averaged over groups
    def polar(M, l):
        return np.mean(np.abs(M[:, 2 * l + 1] - 0.5))
    for l in range(3):
        assert polar(m[2], l) > polar(m[1], l)
    white1, white3 = m[1][:, 1], m[3][:, 1]
    assert np.mean((white3 < 0.2) | (white3 > 0.8)) > 0.8
    assert np.mean(white3 < 0.2) > 0.3 and np.mean(white1 < 0.2) < 0.1
    np.testing.assert_allclose(m[3][:, 2:], m[1][:, 2:], atol=1e-9)


def test_reduced_preset():
    spec = reduced_preset(1, 10)
    assert spec.G == 10 and abs(spec.shares.sum() - 1) < 1e-12


# --- oracle ---------------------------------------------------------------

def test_oracle_d0(one_cov_group):
    s, g = one_cov_group
    o = brute_force_bounds(g, s, [-1, 1], UNIT)
    gb = group_bounds(g, s, [-1, 1], UNIT)
    assert o.interval == (gb.lower, gb.upper)


def test_oracle_two_covariates():
    rng = np.random.default_rng(31)
    s = CovariateSupport.binary(2)
    g, _, _ = random_group(s, rng)
    lam = contrast(s, [1, 0], [0, 0])
    o = brute_force_bounds(g, s, lam, UNIT, grid_step=0.005)
    gb = group_bounds(g, s, lam, UNIT)
    assert abs(o.lower - gb.lower) <= 0.01 and abs(o.upper - gb.upper) <= 0.01
    assert gb.lower <= o.lower + 1e-6 and o.upper <= gb.upper + 1e-6


def test_oracle_monotone_subset():
    rng = np.random.default_rng(4)
    s = CovariateSupport.binary(2)
    g, _, _ = random_group(s, rng)
    lam = contrast(s, [1, 1], [0, 1])
    full = brute_force_bounds(g, s, lam, UNIT)
    sh = monotone_constraints(s, "x0", "inc")
    con = brute_force_bounds(g, s, lam, UNIT, shape=sh)
    assert full.lower <= con.lower and con.upper <= full.upper


def test_oracle_dimension_limit():
    s = CovariateSupport.binary(4)
    g, _, _ = random_group(s, np.random.default_rng(0))
    with pytest.raises(DimensionTooLargeError):
        brute_force_bounds(g, s, np.ones(16), UNIT)


# --- studies --------------------------------------------------------------

def test_small_studies_are_deterministic():
    spec = reduced_preset(1, 4)
    lam = white_gap(spec.support)
    opts = SearchOptions(n_random_starts=4)
    pop = identified_set(population_dataset(spec), lam, opts=opts)
    a = coverage_study(spec, 300, 2, 0.05, lam, opts, seed=5, population=pop)
    b = coverage_study(spec, 300, 2, 0.05, lam, opts, seed=5, population=pop)
    assert a.reps == b.reps and a.coverage_rate == b.coverage_rate
    assert 0.0 <= a.coverage_rate <= 1.0
    c = consistency_study(spec, [100, 1000], 2, lam, opts, seed=1, population=pop)
    assert set(c) == {100, 1000} and len(c[100]["errors"]) == 2
