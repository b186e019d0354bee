"""Confidence sets for the identified interval.

Every aggregate observation (group share, covariate marginal, group mean
and any finer conditional mean) gets a marginal confidence interval at
level ``1 - alpha / M``.  By Bonferroni the intervals hold jointly with
probability at least ``1 - alpha``, and the bounds recomputed over the
relaxed constraint sets then cover the population identified set.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy import stats

from .bounds import FinerConstraint, SearchOptions, _bounds_for, _GroupProblem
from .core import AggregateDataset, BoundResult, ShapeConstraintSet, weight_vector
from .feasible import relaxed_chart, sample_starts


class MissingDataError(ValueError):
    """Counts or standard errors needed for an interval are unavailable."""


def clopper_pearson(successes: int, n: int, level: float) -> tuple[float, float]:
    """Exact binomial interval from beta quantiles."""
    if n < 1 or not 0 <= successes <= n or not 0.0 < level < 1.0:
        raise ValueError(f"invalid arguments successes={successes}, n={n}, level={level}")
    a = 1.0 - level
    lo = 0.0 if successes == 0 else float(stats.beta.ppf(a / 2, successes, n - successes + 1))
    hi = 1.0 if successes == n else float(stats.beta.ppf(1 - a / 2, successes + 1, n - successes))
    return lo, hi


def normal_mean_ci(mean: float, se: float, level: float,
                   y_lo: float = -np.inf, y_hi: float = np.inf) -> tuple[float, float]:
    """CLT interval ``mean +/- z * se`` clipped to the outcome range."""
    if se is None:
        raise MissingDataError(
            "a standard error is required for a non-binary outcome mean")
    if se < 0 or not 0.0 < level < 1.0:
        raise ValueError("se must be nonnegative and level in (0, 1)")
    z = float(stats.norm.ppf(0.5 + level / 2))
    return max(mean - z * se, y_lo), min(mean + z * se, y_hi)


def bonferroni_level(alpha: float, M: int) -> float:
    if M < 1:
        raise ValueError("M must be at least 1")
    return 1.0 - alpha / M


@dataclass(frozen=True)
class MarginalInterval:
    kind: str               # group_share | marginal | y_mean | finer_y_mean
    group: str
    covariate: int | None
    value: float | None
    estimate: float
    lo: float
    hi: float
    method: str             # clopper_pearson | normal | known


@dataclass
class ConfidenceReport:
    alpha: float
    M: int
    level: float
    intervals: list
    per_group: dict
    d_ci: tuple[float, float]
    point: BoundResult | None = None
    extra: dict = field(default_factory=dict)

    def to_dict(self) -> dict:
        out = {
            "alpha": self.alpha, "M": self.M, "level": self.level,
            "per_interval_alpha": self.alpha / self.M,
            "d_ci": list(self.d_ci),
            "per_group": {g: {"L_ci": v[0], "U_ci": v[1]} for g, v in self.per_group.items()},
            "intervals": [vars(iv).copy() for iv in self.intervals],
        }
        if self.point is not None:
            out["d_hat"] = list(self.point.interval)
        return out


def _count_of(prob, n):
    return int(round(prob * n))


def observation_count(dataset: AggregateDataset, use_finer: bool = False,
                      shares_known: bool = False) -> int:
    """Number of distinct aggregate observations entering the confidence set."""
    per_group = len(dataset.support.marginal_keys) + 1
    M = 0
    for g in dataset.groups:
        M += per_group + (0 if shares_known else 1)
        if use_finer:
            M += len(g.finer)
    return M


def marginal_intervals(dataset: AggregateDataset, alpha: float, use_finer: bool = False,
                       shares_known: bool = False) -> tuple[list[MarginalInterval], int, float]:
    """Level ``1 - alpha/M`` intervals on every observation."""
    if not dataset.has_counts():
        raise MissingDataError("group counts are required for confidence intervals")
    M = observation_count(dataset, use_finer, shares_known)
    level = bonferroni_level(alpha, M)
    yr = dataset.range
    n_total = sum(g.count for g in dataset.groups)
    out = []

    def mean_interval(kind, g, l, v, mean, se, n):
        if dataset.binary:
            lo, hi = clopper_pearson(_count_of(mean, n), n, level)
            method = "clopper_pearson"
        else:
            if se is None:
                raise MissingDataError(
                    f"group {g.group_id}: standard error missing for a non-binary mean; "
                    "observed sample standard errors are enough for a normal interval")
            lo, hi = normal_mean_ci(mean, se, level, yr.y_lo, yr.y_hi)
            method = "normal"
        out.append(MarginalInterval(kind, g.group_id, l, v, mean, lo, hi, method))

    for g in dataset.groups:
        if shares_known:
            out.append(MarginalInterval("group_share", g.group_id, None, None, g.share,
                                        g.share, g.share, "known"))
        else:
            lo, hi = clopper_pearson(g.count, n_total, level)
            out.append(MarginalInterval("group_share", g.group_id, None, None, g.share,
                                        lo, hi, "clopper_pearson"))
        for (l, v) in dataset.support.marginal_keys:
            m = float(g.marginals.get((l, v), 0.0))
            lo, hi = clopper_pearson(_count_of(m, g.count), g.count, level)
            out.append(MarginalInterval("marginal", g.group_id, l, v, m, lo, hi,
                                        "clopper_pearson"))
        mean_interval("y_mean", g, None, None, g.y_mean, g.y_se, g.count)
        if use_finer:
            for (l, v), fm in sorted(g.finer.items()):
                n = fm.count if fm.count else _count_of(g.marginals.get((l, v), 0.0), g.count)
                if n < 1:
                    raise MissingDataError(f"group {g.group_id}: finer moment ({l}, {v}) has no count")
                mean_interval("finer_y_mean", g, l, v, fm.y_mean, fm.y_se, n)
    return out, M, level


def ci_identified_set(dataset: AggregateDataset, lam, alpha: float = 0.05,
                      shape: ShapeConstraintSet | None = None, use_finer: bool = False,
                      opts: SearchOptions | None = None, shares_known: bool = False,
                      point: BoundResult | None = None) -> ConfidenceReport:
    """Confidence set for the identified interval.

    The relaxed per-group programs use every joint whose marginals lie in
    their bands, and replace the mean and finer-moment equalities by
    two-sided inequalities.  Bands are widened, if needed, to contain the
    point estimates, so the point-estimate witnesses stay feasible; they are
    added as extra search starts, which makes the confidence set contain the
    point-estimate interval.
    """
    from .bounds import identified_set

    opts = opts or SearchOptions()
    support = dataset.support
    lam = weight_vector(support, lam)
    yr = dataset.range
    intervals, M, level = marginal_intervals(dataset, alpha, use_finer, shares_known)
    if point is None:
        point = identified_set(dataset, lam, shape, use_finer, opts)
    keys = support.marginal_keys
    X = support.array()
    by_group: dict[str, dict] = {}
    for iv in intervals:
        by_group.setdefault(iv.group, {})[(iv.kind, iv.covariate, iv.value)] = iv

    problems, slacks = [], []
    for gi, g in enumerate(dataset.groups):
        ivs = by_group[g.group_id]
        m = g.marginal_vector(support)
        lo = np.array([ivs[("marginal", l, v)].lo for l, v in keys])
        hi = np.array([ivs[("marginal", l, v)].hi for l, v in keys])
        lo, hi = np.minimum(lo, m), np.maximum(hi, m)
        ch, slack = relaxed_chart(support, lo, hi)
        ym = ivs[("y_mean", None, None)]
        band = (min(ym.lo, g.y_mean), max(ym.hi, g.y_mean))
        finer = ()
        if use_finer:
            finer = []
            for (l, v), fm in sorted(g.finer.items()):
                f = ivs[("finer_y_mean", l, v)]
                r = keys.index((l, v))
                flo, fhi = f.lo * lo[r], f.hi * hi[r]
                mid = fm.y_mean * m[r]
                finer.append(FinerConstraint(X[:, l] == v, min(flo, mid), max(fhi, mid)))
        S = shape.for_group(g.group_id) if shape is not None else None
        seed = np.random.SeedSequence([opts.seed, gi, 1])
        starts = sample_starts(ch, opts.n_random_starts, seed)
        pg = point[g.group_id]
        for w in (pg.witness_lower, pg.witness_upper):
            if w is not None:
                starts.append(np.asarray(w.p, float))
        problems.append(_GroupProblem(ch, starts, lam, yr, band, S, finer))
        slacks.append(slack)
    groups = _bounds_for(problems, dataset.group_ids, list(dataset.shares), slacks, opts)

    lo_sum = hi_sum = 0.0
    per_group = {}
    for gb in groups:
        s = by_group[gb.group_id][("group_share", None, None)]
        lo_sum += min(s.lo * gb.lower, s.hi * gb.lower)
        hi_sum += max(s.lo * gb.upper, s.hi * gb.upper)
        per_group[gb.group_id] = (gb.lower, gb.upper)
    return ConfidenceReport(alpha, M, level, intervals, per_group, (lo_sum, hi_sum), point,
                            {"groups": groups})
