"""Simulation tools: micro-data generation, aggregation, oracles and studies.

A :class:`JointSpec` fixes, for every group, the joint distribution of the
covariates over the support and the conditional outcome mean in each cell.
Samples drawn from it are aggregated the way published tables are (group
means, per-covariate marginals, group shares and optional subgroup means),
and the resulting datasets feed the bounds and inference routines.
"""

from __future__ import annotations

import itertools
import json
from dataclasses import dataclass, field
from importlib import resources
from typing import Sequence

import numpy as np
from scipy.optimize import linprog as scipy_linprog

from .bounds import (SearchOptions, identified_set, inner_lp, InnerProblem,
                     InfeasibleInnerProblem, _greedy_min_batch, finer_constraints)
from .core import (AggregateDataset, BoundResult, CovariateSupport, FinerMoment,
                   GroupRecord, OutcomeRange, ShapeConstraintSet, indicator_matrix,
                   weight_vector)
from .feasible import chart, min_slack_joint
from .inference import ci_identified_set

SPEC_FORMAT = "aggbounds.jointspec"
SPEC_VERSION = 1
COVARIATE_NAMES = ("white", "econ", "ell")
# one subgroup mean per covariate: white students, not disadvantaged, non-ELL
DEFAULT_FINER = ((0, 1.0), (1, 0.0), (2, 0.0))


class DimensionTooLargeError(ValueError):
    pass


@dataclass
class JointSpec:
    """Population model: per-group joints, cell means and group shares."""

    support: CovariateSupport
    joints: np.ndarray          # (G, K), rows on the simplex
    cell_means: np.ndarray      # (G, K), values in the outcome range
    shares: np.ndarray          # (G,)
    range: OutcomeRange = OutcomeRange(0.0, 1.0)
    binary: bool = True
    group_ids: tuple[str, ...] = ()
    finer: tuple = DEFAULT_FINER
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.joints = np.asarray(self.joints, float)
        self.cell_means = np.asarray(self.cell_means, float)
        self.shares = np.asarray(self.shares, float)
        G, K = self.joints.shape
        if K != self.support.K or self.cell_means.shape != (G, K) or self.shares.shape != (G,):
            raise ValueError("joint, cell-mean and share shapes disagree")
        if np.any(self.joints < 0) or not np.allclose(self.joints.sum(axis=1), 1.0, atol=1e-12):
            raise ValueError("joints must lie on the simplex")
        if np.any(self.cell_means < self.range.y_lo) or np.any(self.cell_means > self.range.y_hi):
            raise ValueError("cell means outside the outcome range")
        if np.any(self.shares < 0) or abs(self.shares.sum() - 1.0) > 1e-12:
            raise ValueError("group shares must sum to 1")
        if self.binary and (self.range.y_lo, self.range.y_hi) != (0.0, 1.0):
            raise ValueError("binary outcome needs range [0, 1]")
        if not self.group_ids:
            self.group_ids = tuple(f"g{i + 1:02d}" for i in range(G))
        self.finer = tuple((int(l), float(v)) for l, v in self.finer)

    @property
    def G(self) -> int:
        return self.joints.shape[0]

    def marginals(self) -> np.ndarray:
        """(G, number of marginal keys) implied marginals."""
        return self.joints @ indicator_matrix(self.support).T

    def population_parameter(self, lam) -> float:
        """True ``sum_k lam_k E[Y | X = x_k]`` under this specification."""
        lam = weight_vector(self.support, lam)
        mass = self.shares @ self.joints
        num = self.shares @ (self.joints * self.cell_means)
        delta = np.where(mass > 0, num / np.where(mass > 0, mass, 1.0), 0.0)
        return float(lam @ delta)

    def to_dict(self) -> dict:
        return {
            "format": SPEC_FORMAT,
            "version": SPEC_VERSION,
            "covariates": list(self.support.names),
            "support": [list(pt) for pt in self.support.points],
            "range": [self.range.y_lo, self.range.y_hi],
            "binary": self.binary,
            "finer": [list(f) for f in self.finer],
            "meta": self.meta,
            "groups": [
                {"group_id": gid, "share": float(s), "joint": [float(x) for x in j],
                 "cell_means": [float(x) for x in c]}
                for gid, s, j, c in zip(self.group_ids, self.shares, self.joints, self.cell_means)
            ],
        }

    @classmethod
    def from_dict(cls, d: dict) -> "JointSpec":
        if d.get("format") != SPEC_FORMAT:
            raise ValueError("not a joint-spec document")
        if d.get("version") != SPEC_VERSION:
            raise ValueError(f"unsupported joint-spec version {d.get('version')}")
        support = CovariateSupport([tuple(pt) for pt in d["support"]], d.get("covariates", ()))
        gs = d["groups"]
        return cls(support, [g["joint"] for g in gs], [g["cell_means"] for g in gs],
                   [g["share"] for g in gs], OutcomeRange(*d["range"]), d["binary"],
                   tuple(g["group_id"] for g in gs), tuple(map(tuple, d.get("finer", ()))),
                   d.get("meta", {}))

    def save(self, path):
        with open(path, "w") as fh:
            json.dump(self.to_dict(), fh, indent=1)

    @classmethod
    def load(cls, path) -> "JointSpec":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class MicroSample:
    """Individual records: outcome, support cell and group index."""

    y: np.ndarray
    cell: np.ndarray
    group: np.ndarray
    support: CovariateSupport
    group_ids: tuple[str, ...]
    seed: object = None

    @property
    def x(self) -> np.ndarray:
        return self.support.array()[self.cell]

    def __len__(self):
        return self.y.size


def _draw_counts(spec: JointSpec, n_per_group: int, rng):
    """Cell counts and cell outcome totals, shape (G, K)."""
    counts = np.array([rng.multinomial(n_per_group, p) for p in spec.joints])
    if spec.binary:
        totals = rng.binomial(counts, spec.cell_means).astype(float)
    else:
        totals = counts * spec.cell_means
    return counts, totals


def generate(spec: JointSpec, n_per_group: int, seed=None) -> MicroSample:
    """Draw ``n_per_group`` individuals per group.

    Cells follow the group's joint; outcomes are Bernoulli with the cell mean
    for binary specs and equal to the cell mean otherwise.
    """
    rng = np.random.default_rng(seed)
    counts, totals = _draw_counts(spec, n_per_group, rng)
    ys, cells, groups = [], [], []
    for g in range(spec.G):
        cell = np.repeat(np.arange(spec.support.K), counts[g])
        if spec.binary:
            y = np.concatenate([np.r_[np.ones(int(t)), np.zeros(int(n - t))]
                                for n, t in zip(counts[g], totals[g])])
        else:
            y = spec.cell_means[g][cell]
        order = rng.permutation(cell.size)
        ys.append(y[order])
        cells.append(cell[order])
        groups.append(np.full(cell.size, g))
    return MicroSample(np.concatenate(ys), np.concatenate(cells), np.concatenate(groups),
                       spec.support, spec.group_ids, seed)


def _aggregate_stats(support, group_ids, counts, totals, sq_totals, yrange, binary, finer):
    """Sample analogues from per-cell sufficient statistics."""
    A = indicator_matrix(support)
    keys = support.marginal_keys
    n = counts.sum(axis=1)
    N = n.sum()
    groups = []
    for g, gid in enumerate(group_ids):
        ng = int(n[g])
        if ng == 0:
            raise ValueError(f"group {gid} has no observations")
        ybar = totals[g].sum() / ng
        var = max(sq_totals[g].sum() / ng - ybar ** 2, 0.0)
        se = np.sqrt(var * ng / (ng - 1) / ng) if ng > 1 else 0.0
        marg = {key: float(A[r] @ counts[g]) / ng for r, key in enumerate(keys)}
        fm = {}
        for (l, v) in finer or ():
            r = keys.index((l, v))
            cnt = float(A[r] @ counts[g])
            if cnt <= 0:
                continue
            s1 = float(A[r] @ totals[g])
            s2 = float(A[r] @ sq_totals[g])
            m = s1 / cnt
            v2 = max(s2 / cnt - m ** 2, 0.0)
            fse = np.sqrt(v2 / (cnt - 1)) if cnt > 1 else 0.0
            fm[(l, v)] = FinerMoment(float(m), float(fse), int(cnt))
        groups.append(GroupRecord(gid, float(ng / N), float(ybar), marg, ng, float(se), fm))
    return AggregateDataset(support, yrange, tuple(groups), binary)


def aggregate_micro(sample: MicroSample, yrange: OutcomeRange, binary: bool | None = None,
                    finer: Sequence[tuple[int, float]] | None = None) -> AggregateDataset:
    """Group means, marginals, shares and optional subgroup means.

    Subgroup means with an empty conditioning cell are left out.
    """
    G, K = len(sample.group_ids), sample.support.K
    idx = sample.group * K + sample.cell
    counts = np.bincount(idx, minlength=G * K).reshape(G, K)
    totals = np.bincount(idx, weights=sample.y, minlength=G * K).reshape(G, K)
    sq = np.bincount(idx, weights=sample.y ** 2, minlength=G * K).reshape(G, K)
    if binary is None:
        binary = bool(np.all((sample.y == 0) | (sample.y == 1)))
    return _aggregate_stats(sample.support, sample.group_ids, counts, totals, sq,
                            yrange, binary, finer)


def sample_dataset(spec: JointSpec, n_per_group: int, seed=None, finer=None) -> AggregateDataset:
    """Same result as ``aggregate_micro(generate(spec, n, seed))`` without records."""
    rng = np.random.default_rng(seed)
    counts, totals = _draw_counts(spec, n_per_group, rng)
    sq = totals if spec.binary else counts * spec.cell_means ** 2
    return _aggregate_stats(spec.support, spec.group_ids, counts, totals, sq,
                            spec.range, spec.binary, spec.finer if finer is None else finer)


def population_dataset(spec: JointSpec, n_per_group: int | None = None,
                       finer=None) -> AggregateDataset:
    """Exact population aggregates (the infinite-sample analogue)."""
    A = indicator_matrix(spec.support)
    keys = spec.support.marginal_keys
    finer = spec.finer if finer is None else finer
    groups = []
    for g, gid in enumerate(spec.group_ids):
        p, c = spec.joints[g], spec.cell_means[g]
        marg = {key: float(A[r] @ p) for r, key in enumerate(keys)}
        fm = {}
        for (l, v) in finer:
            r = keys.index((l, v))
            mass = A[r] @ p
            if mass > 0:
                cnt = None if n_per_group is None else int(round(mass * n_per_group))
                fm[(l, v)] = FinerMoment(float(A[r] @ (p * c) / mass), 0.0, cnt)
        groups.append(GroupRecord(gid, float(spec.shares[g]), float(p @ c), marg,
                                  n_per_group, 0.0, fm))
    return AggregateDataset(spec.support, spec.range, tuple(groups), spec.binary)


# ---------------------------------------------------------------------------
# brute-force oracle


@dataclass(frozen=True)
class OracleResult:
    lower: float
    upper: float
    lower_range: tuple[float, float]
    upper_range: tuple[float, float]
    n_points: int
    grid_step: float

    @property
    def interval(self):
        return (self.lower, self.upper)


def _vertices(ch):
    """Vertices of ``{w : base + N w >= 0}`` by enumerating active sets."""
    d, K = ch.dim, ch.base_point.size
    if d == 0:
        return np.zeros((1, 0))
    N, b = ch.null_basis, ch.base_point
    out = []
    for rows in itertools.combinations(range(K), d):
        M = N[list(rows)]
        if abs(np.linalg.det(M)) < 1e-12:
            continue
        w = np.linalg.solve(M, -b[list(rows)])
        if np.all(b + N @ w >= -1e-10):
            out.append(w)
    if not out:
        return np.zeros((1, d))
    return np.unique(np.round(np.array(out), 12), axis=0)


def _slice_axes(ch, a0, axes, pad=1e-9):
    """Lattice values of coordinates 2..d inside the slice ``w_1 = a0``."""
    d = ch.dim
    if d == 1:
        return []
    A_ub, b_ub = -ch.null_basis, ch.base_point
    bounds = [(a0, a0)] + [(None, None)] * (d - 1)
    out = []
    for j in range(1, d):
        ext = []
        for sgn in (1.0, -1.0):
            c = np.zeros(d)
            c[j] = sgn
            res = scipy_linprog(c, A_ub=A_ub, b_ub=b_ub, bounds=bounds, method="highs")
            if res.status != 0:
                return [np.empty(0)] * (d - 1)
            ext.append(res.x[j])
        ax = axes[j]
        out.append(ax[(ax >= ext[0] - pad) & (ax <= ext[1] + pad)])
    return out


class _Evaluator:
    """Inner lower/upper values at many joints, tracking the four extremes."""

    def __init__(self, lam, y_mean, yrange, shape, finer):
        self.lam = lam
        self.y = y_mean
        self.yr = yrange
        self.shape = shape
        self.finer = finer
        self.L = [np.inf, -np.inf]
        self.U = [np.inf, -np.inf]
        self.count = 0
        self.best = []

    def __call__(self, P):
        P = np.maximum(P, 0.0)
        P = P / P.sum(axis=1, keepdims=True)
        if self.shape is None and not self.finer:
            R = self.yr.width
            b = np.full(len(P), self.y - self.yr.y_lo)
            lam = np.broadcast_to(self.lam, P.shape)
            lo, _ = _greedy_min_batch(lam, P, b, b, R)
            hi, _ = _greedy_min_batch(-lam, P, b, b, R)
            shift = self.yr.y_lo * self.lam.sum()
            lo, hi = lo + shift, -hi + shift
        else:
            lo = np.full(len(P), np.nan)
            hi = np.full(len(P), np.nan)
            for i, p in enumerate(P):
                for d, arr in (("min", lo), ("max", hi)):
                    try:
                        arr[i] = inner_lp(InnerProblem(self.lam, p, self.y, self.yr, d,
                                                       self.shape, self.finer))[0]
                    except InfeasibleInnerProblem:
                        pass
        self.count += len(P)
        ok = np.isfinite(lo) & np.isfinite(hi)
        if ok.any():
            self.L = [min(self.L[0], lo[ok].min()), max(self.L[1], lo[ok].max())]
            self.U = [min(self.U[0], hi[ok].min()), max(self.U[1], hi[ok].max())]
        return lo, hi


def brute_force_bounds(group: GroupRecord, support: CovariateSupport, lam, yrange: OutcomeRange,
                       grid_step: float = 0.01, shape: ShapeConstraintSet | None = None,
                       finer: bool = False, refine: int = 2, max_points: int = 20_000_000,
                       max_lp_points: int = 40_000) -> OracleResult:
    """Grid enumeration of the outer problem.

    Every point of a regular grid (spacing ``grid_step`` in orthonormal chart
    coordinates) inside the feasible polytope is evaluated, together with all
    polytope vertices.  ``refine`` rounds then re-grid at a quarter of the
    spacing around the best points found so far.  Only the inner problem is
    solved exactly at each point, so the result approaches the sharp bounds
    from inside as the grid is refined.
    """
    if support.K > 8:
        raise DimensionTooLargeError(f"K={support.K} exceeds 8")
    lam = weight_vector(support, lam)
    p0, slack = min_slack_joint(group, support)
    ch = chart(group, support, p0, slack)
    d = ch.dim
    if d > 4:
        raise DimensionTooLargeError(f"chart dimension {d} exceeds 4")
    S = None
    if shape is not None:
        shape.check(support.K)
        S = shape.for_group(group.group_id)
    fin = finer_constraints(group, support) if finer else ()
    ev = _Evaluator(lam, group.y_mean, yrange, S, fin)
    limit = max_points if S is None and not fin else max_lp_points
    V = _vertices(ch)

    def to_p(W):
        return ch.base_point + W @ ch.null_basis.T

    def feasible(W):
        return W[np.all(to_p(W) >= -1e-12, axis=1)]

    def run(W):
        W = feasible(W)
        if len(W) == 0:
            return W, np.empty(0), np.empty(0)
        lo, hi = [], []
        for s in range(0, len(W), 200_000):
            a, b = ev(to_p(W[s:s + 200_000]))
            lo.append(a)
            hi.append(b)
        return W, np.concatenate(lo), np.concatenate(hi)

    def run_grid(a0, rest):
        # one slice of the grid at a fixed first coordinate
        if rest:
            W = np.stack(np.meshgrid(*rest, indexing="ij"), axis=-1).reshape(-1, len(rest))
        else:
            W = np.zeros((1, 0))
        return run(np.hstack([np.full((len(W), 1), a0), W]))

    Wv, lov, hiv = run(V)
    if d == 0:
        return OracleResult(ev.L[0], ev.U[1], tuple(ev.L), tuple(ev.U), ev.count, grid_step)
    lo_box, hi_box = V.min(axis=0), V.max(axis=0)
    axes = [np.arange(a, b + grid_step / 2, grid_step) for a, b in zip(lo_box, hi_box)]
    # trim the lattice to each first-coordinate slice's own bounding box
    slices = [(a0, _slice_axes(ch, a0, axes)) for a0 in axes[0]]
    total = sum(int(np.prod([len(a) for a in rest])) for _, rest in slices)
    if total > limit:
        raise DimensionTooLargeError(f"grid of {total} points exceeds the {limit} limit")
    parts = [run_grid(a0, rest) for a0, rest in slices]
    Wg = np.vstack([Wv] + [q[0] for q in parts])
    log = np.concatenate([q[1] for q in parts])
    hig = np.concatenate([q[2] for q in parts])
    Wall = Wg
    vals = [np.concatenate([lov, log]), np.concatenate([hiv, hig])]
    step = grid_step
    for _ in range(refine):
        step /= 4
        offs = np.arange(-4, 5) * step
        local = np.stack(np.meshgrid(*[offs] * d, indexing="ij"), axis=-1).reshape(-1, d)
        centers = []
        for arr in vals:
            good = np.where(np.isfinite(arr), arr, np.nan)
            if np.all(np.isnan(good)):
                continue
            centers.append(Wall[np.nanargmin(good)])
            centers.append(Wall[np.nanargmax(good)])
        if not centers:
            break
        cand = (np.array(centers)[:, None, :] + local[None, :, :]).reshape(-1, d)
        Wn, lon, hin = run(cand)
        Wall = np.vstack([Wall, Wn])
        vals = [np.concatenate([vals[0], lon]), np.concatenate([vals[1], hin])]
    if not np.isfinite(ev.L[0]):
        raise InfeasibleInnerProblem("no grid point admits a feasible inner problem")
    return OracleResult(ev.L[0], ev.U[1], tuple(ev.L), tuple(ev.U), ev.count, grid_step)


# ---------------------------------------------------------------------------
# Monte Carlo studies


@dataclass
class CoverageResult:
    coverage_rate: float
    bound_error_stats: dict
    population: tuple[float, float]
    reps: list


def _contains(outer, inner, tol=1e-9):
    return outer[0] <= inner[0] + tol and inner[1] <= outer[1] + tol


def coverage_study(spec: JointSpec, n_per_group: int, reps: int, alpha: float, lam,
                   opts: SearchOptions | None = None, seed: int = 0,
                   shares_known: bool = True, use_finer: bool = False,
                   shape: ShapeConstraintSet | None = None,
                   population: BoundResult | None = None, progress=None) -> CoverageResult:
    """Repeated generate, aggregate, estimate and infer.

    Coverage counts the reps whose confidence set contains the population
    identified set.  Group shares are treated as known by default.
    """
    opts = opts or SearchOptions()
    if population is None:
        population = identified_set(population_dataset(spec, n_per_group), lam, shape,
                                    use_finer, opts)
    pop = population.interval
    seeds = np.random.SeedSequence(seed).spawn(reps)
    rows = []
    for r, ss in enumerate(seeds):
        data = sample_dataset(spec, n_per_group, ss)
        est = identified_set(data, lam, shape, use_finer, opts)
        rep = ci_identified_set(data, lam, alpha, shape, use_finer, opts,
                                shares_known=shares_known, point=est)
        rows.append({
            "rep": r, "L_hat": est.lower, "U_hat": est.upper,
            "L_ci": rep.d_ci[0], "U_ci": rep.d_ci[1],
            "covered": _contains(rep.d_ci, pop),
            "error": max(abs(est.lower - pop[0]), abs(est.upper - pop[1])),
        })
        if progress is not None:
            progress(rows[-1])
    err = np.array([row["error"] for row in rows])
    stats = {"max": float(err.max()), "median": float(np.median(err)),
             "mean": float(err.mean())}
    rate = float(np.mean([row["covered"] for row in rows]))
    return CoverageResult(rate, stats, pop, rows)


def consistency_study(spec: JointSpec, ns: Sequence[int], reps: int, lam,
                      opts: SearchOptions | None = None, seed: int = 0,
                      population: BoundResult | None = None) -> dict:
    """Median and max aggregate bound error for each sample size."""
    opts = opts or SearchOptions()
    if population is None:
        population = identified_set(population_dataset(spec), lam, opts=opts)
    pop = population.interval
    out = {}
    for n in ns:
        errs = []
        for ss in np.random.SeedSequence([seed, int(n)]).spawn(reps):
            est = identified_set(sample_dataset(spec, n, ss), lam, opts=opts)
            errs.append(max(abs(est.lower - pop[0]), abs(est.upper - pop[1])))
        out[int(n)] = {"median": float(np.median(errs)), "max": float(np.max(errs)),
                       "errors": errs}
    return out


# ---------------------------------------------------------------------------
# presets

PRESET_SEED = 20240611
# association pattern of the covariates (log-linear two-way terms)
_ASSOC = {(0, 1): -1.2, (0, 2): -1.0, (1, 2): 0.9}
# cell pass rate: logistic(a + b*white + c*econ + d*ell), the same everywhere
_PASS = (-0.1, 0.9, -0.9, -1.1)


def preset_cell_means(support: CovariateSupport) -> np.ndarray:
    a, b, c, d = _PASS
    X = support.array()
    z = a + b * X[:, 0] + c * X[:, 1] + d * X[:, 2]
    return 1.0 / (1.0 + np.exp(-z))


def fit_joint(support: CovariateSupport, target: dict, assoc: dict | None = None,
              tol: float = 1e-14, max_iter: int = 10_000) -> np.ndarray:
    """Iterative proportional fitting of a log-linear seed table to marginals."""
    X = support.array()
    logp = np.zeros(support.K)
    for (i, j), v in (assoc or {}).items():
        logp += v * X[:, i] * X[:, j]
    p = np.exp(logp)
    p /= p.sum()
    for _ in range(max_iter):
        worst = 0.0
        for (l, v), m in target.items():
            mask = X[:, l] == v
            cur = p[mask].sum()
            worst = max(worst, abs(cur - m))
            if cur > 0:
                p[mask] *= m / cur
                p[~mask] *= (1 - m) / (1 - cur) if cur < 1 else 1.0
        if worst < tol:
            break
    return p / p.sum()


def _polarize(m, k):
    return m ** k / (m ** k + (1 - m) ** k)


def build_preset(exercise: int, G: int = 50, seed: int = PRESET_SEED) -> JointSpec:
    """Construct an exercise preset from scratch.

    Exercise 1 has mostly-white groups with moderate disadvantaged and small
    ELL fractions; exercise 2 pushes every covariate marginal toward 0 or 1;
    exercise 3 keeps exercise 1's disadvantaged and ELL marginals but makes
    the white fraction close to 0 in some groups and close to 1 in others.
    """
    if exercise not in (1, 2, 3):
        raise ValueError("exercise must be 1, 2 or 3")
    rng = np.random.default_rng(seed)
    white = rng.beta(6.0, 1.8, G)
    econ = rng.beta(2.0, 2.6, G)
    ell = rng.beta(1.2, 9.0, G)
    side = rng.permutation(np.r_[np.zeros(G // 2), np.ones(G - G // 2)])
    tails = rng.beta(1.0, 14.0, G)
    if exercise == 2:
        white, econ, ell = _polarize(white, 2.5), _polarize(econ, 2.5), _polarize(ell, 2.5)
    elif exercise == 3:
        white = np.where(side == 1, 1 - tails, tails)
    clip = lambda a: np.clip(a, 0.002, 0.998)
    white, econ, ell = clip(white), clip(econ), clip(ell)
    support = CovariateSupport.binary(3, COVARIATE_NAMES)
    gamma = preset_cell_means(support)
    joints = np.array([
        fit_joint(support, {(0, 1.0): w, (0, 0.0): 1 - w, (1, 1.0): e, (1, 0.0): 1 - e,
                            (2, 1.0): x, (2, 0.0): 1 - x}, _ASSOC)
        for w, e, x in zip(white, econ, ell)
    ])
    meta = {"exercise": exercise, "seed": seed, "n_per_group": 1300}
    return JointSpec(support, joints, np.tile(gamma, (G, 1)), np.full(G, 1.0 / G),
                     OutcomeRange(0.0, 1.0), True, (), DEFAULT_FINER, meta)


def exercise_preset(exercise: int) -> JointSpec:
    """Load a shipped exercise preset (versioned JSON data file)."""
    if exercise not in (1, 2, 3):
        raise ValueError("exercise must be 1, 2 or 3")
    text = resources.files("aggbounds.data").joinpath(f"exercise_{exercise}.json").read_text()
    return JointSpec.from_dict(json.loads(text))


def reduced_preset(exercise: int = 1, G: int = 10) -> JointSpec:
    """First ``G`` groups of a preset with shares renormalized."""
    spec = exercise_preset(exercise)
    return JointSpec(spec.support, spec.joints[:G], spec.cell_means[:G], np.full(G, 1.0 / G),
                     spec.range, spec.binary, spec.group_ids[:G], spec.finer,
                     {**spec.meta, "groups": G})


def cell_weight(support: CovariateSupport, point) -> np.ndarray:
    lam = np.zeros(support.K)
    lam[support.points.index(tuple(float(v) for v in point))] = 1.0
    return lam


def white_gap(support: CovariateSupport, econ: float = 0.0, ell: float = 0.0) -> np.ndarray:
    """Weights for E[Y | white, econ, ell] minus E[Y | non-white, econ, ell]."""
    return cell_weight(support, (1, econ, ell)) - cell_weight(support, (0, econ, ell))
