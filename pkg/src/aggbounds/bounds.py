"""Sharp bounds on a weighted sum of cell-level conditional means.

For each group the lower bound is the minimum over feasible joints ``p`` of
the inner linear program

    min  lam @ c   s.t.  p @ c = ybar,  c in [y_lo, y_hi]^K

(optionally with shape rows ``S c <= a`` and finer-aggregation moments), and
the upper bound is the corresponding maximum.  The inner problem has a
greedy closed form when no extra rows are present; the outer problem is
nonconvex and is searched with a multi-start Nelder-Mead in null-space
coordinates of the feasible set.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Sequence

import numpy as np

from .core import (AggregateDataset, BoundResult, CovariateSupport, GroupBound,
                   GroupRecord, OutcomeRange, ShapeConstraintSet, Witness,
                   weight_vector)
from .feasible import (SLACK_TOL, FeasibleSetChart, chart, min_slack_joint,
                       sample_starts)
from .linprog import LinearProgram, solve

ZERO_MASS = 1e-12
PENALTY = 1e3
INFEASIBLE_SCORE = 1e6
FEASIBLE_TOL = 1e-10


class InfeasibleInnerProblem(RuntimeError):
    """Shape or finer-moment rows cannot be met at this joint."""

    def __init__(self, msg, infeasibility=0.0):
        super().__init__(msg)
        self.infeasibility = infeasibility


@dataclass
class SearchOptions:
    n_random_starts: int = 32
    max_iters_per_start: int = 400
    initial_step: float = 0.1       # fraction of each coordinate's feasible range
    min_step: float = 1e-3
    convergence_tol: float = 1e-7
    xtol: float = 1e-4            # simplex size (chart units) below which a start stops
    restarts: int = 0
    polish: int = 3               # end points per task refined by structure LPs
    seed: int = 0
    slack_tol: float = SLACK_TOL
    strict: bool = False

    def __post_init__(self):
        if self.n_random_starts < 0 or self.max_iters_per_start < 1:
            raise ValueError("start and iteration counts must be positive")
        if min(self.initial_step, self.min_step, self.convergence_tol) <= 0:
            raise ValueError("tolerances and step sizes must be positive")


@dataclass(frozen=True)
class FinerConstraint:
    """``lo <= sum_{j in cells} c_j p_j <= hi`` (equality when lo == hi)."""

    cells: np.ndarray   # boolean mask over support points
    lo: float
    hi: float


def finer_constraints(group: GroupRecord, support: CovariateSupport) -> list[FinerConstraint]:
    """Point-identified finer moments: E[Y | X_l=v, g] * P[X_l=v | g]."""
    X = support.array()
    out = []
    for (l, v), fm in sorted(group.finer.items()):
        mass = float(group.marginals.get((l, v), 0.0))
        rhs = fm.y_mean * mass
        out.append(FinerConstraint(X[:, l] == v, rhs, rhs))
    return out


@dataclass
class InnerProblem:
    """Inner program at a fixed joint ``p``.

    ``y_mean`` is either the observed group mean or a ``(lo, hi)`` band, in
    which case the mean constraint becomes two inequalities.
    """

    lam: np.ndarray
    p: np.ndarray
    y_mean: float | tuple[float, float]
    range: OutcomeRange
    direction: str = "min"
    shape: tuple[np.ndarray, np.ndarray] | None = None
    finer: Sequence[FinerConstraint] = field(default_factory=tuple)

    @property
    def band(self) -> tuple[float, float]:
        if np.ndim(self.y_mean) == 0:
            y = float(self.y_mean)
            return y, y
        lo, hi = self.y_mean
        return float(lo), float(hi)

    @property
    def unconstrained(self) -> bool:
        return self.shape is None and not self.finer


def _ordered(lam, p):
    """Indices sorted so lam/p is non-increasing; ties by ascending index."""
    ratio = np.where(p > 0, lam / np.where(p > 0, p, 1.0), np.inf)
    return np.argsort(-ratio, kind="stable")


def inner_closed_form(lam, p, y_mean, yrange: OutcomeRange, direction: str = "min"):
    """Greedy solution of the unconstrained inner program at fixed ``p``.

    Cells are relabelled so that ``lam_k / p_k`` is non-increasing.  For the
    minimum, the leading cells sit at ``y_lo`` while the trailing cells can
    still carry the group mean at ``y_hi``, with one cell taking the
    remainder; the maximum fills from the front at ``y_hi`` instead.  Work is
    done in shifted coordinates ``c - y_lo``.

    Cells with ``p_k = 0`` do not enter the mean constraint, so they go to
    whichever endpoint is optimal for the sign of ``lam_k``.

    Returns
    -------
    value : float
    c : ndarray
        Optimal conditional means, each in ``[y_lo, y_hi]`` with
        ``p @ c == y_mean``.
    """
    lam = np.asarray(lam, dtype=float)
    p = np.asarray(p, dtype=float)
    p = np.where(p < ZERO_MASS, 0.0, p)
    if direction not in ("min", "max"):
        raise ValueError("direction must be 'min' or 'max'")
    R = yrange.width
    b = float(y_mean) - yrange.y_lo
    total = p.sum()
    ct = np.zeros(lam.size)
    pos = p > 0
    order = [k for k in _ordered(lam, p) if pos[k]]
    csum = 0.0
    for rank, k in enumerate(order):
        prev = csum
        csum += p[k]
        if direction == "min":
            # room left for y_hi on the cells after k
            after = total - csum
            if R * after >= b:
                ct[k] = 0.0
            elif R * (total - prev) >= b:
                ct[k] = (b - R * after) / p[k]
            else:
                ct[k] = R
        else:
            if R * csum <= b:
                ct[k] = R
            elif R * prev <= b:
                ct[k] = (b - R * prev) / p[k]
            else:
                ct[k] = 0.0
    empty = ~pos
    if direction == "min":
        ct[empty] = np.where(lam[empty] < 0, R, 0.0)
    else:
        ct[empty] = np.where(lam[empty] > 0, R, 0.0)
    ct = np.clip(ct, 0.0, R)
    c = ct + yrange.y_lo
    return float(lam @ c), c


def _greedy_min_batch(lam, P, b_lo, b_hi, R):
    """Vectorized unconstrained inner minimum in shifted coordinates.

    ``lam`` and ``P`` are ``(B, K)``; ``b_lo``/``b_hi`` give the (possibly
    degenerate) band for the shifted mean.  With a band, the mean is set to
    the band point closest to the unconstrained box minimizer, which is
    optimal because the LP value is convex in the right-hand side.
    """
    pos = P > ZERO_MASS
    Pp = np.where(pos, P, 0.0)
    box = np.where(lam < 0, R, 0.0)
    m0 = np.sum(Pp * box, axis=1)
    b = np.clip(m0, b_lo, b_hi)
    ratio = np.where(pos, lam / np.where(pos, P, 1.0), np.inf)
    order = np.argsort(-ratio, axis=1, kind="stable")
    Ps = np.take_along_axis(Pp, order, axis=1)
    after = np.cumsum(Ps[:, ::-1], axis=1)[:, ::-1] - Ps
    safe = np.where(Ps > 0, Ps, 1.0)
    cs = np.clip((b[:, None] - R * after) / safe, 0.0, R)
    ct = np.empty_like(cs)
    np.put_along_axis(ct, order, cs, axis=1)
    ct = np.where(pos, ct, box)
    return np.sum(lam * ct, axis=1), ct


def _constraint_rows(problem: InnerProblem):
    """``(E, e, G, g)`` with ``E c = e`` and ``G c <= g`` for the inner program."""
    p = np.asarray(problem.p, float)
    lo, hi = problem.band
    eq_rows, eq_rhs, le_rows, le_rhs = [], [], [], []

    def add(row, rlo, rhi):
        if rlo == rhi:
            eq_rows.append(row)
            eq_rhs.append(rlo)
        else:
            le_rows.append(row)
            le_rhs.append(rhi)
            le_rows.append(-row)
            le_rhs.append(-rlo)

    add(p, lo, hi)
    for f in problem.finer:
        add(np.where(f.cells, p, 0.0), f.lo, f.hi)
    if problem.shape is not None:
        S, a = problem.shape
        le_rows.extend(np.atleast_2d(S))
        le_rhs.extend(np.ravel(a))
    K = p.size
    E = np.array(eq_rows, float).reshape(-1, K)
    G = np.array(le_rows, float).reshape(-1, K)
    return E, np.array(eq_rhs, float), G, np.array(le_rhs, float)


def inner_lp(problem: InnerProblem):
    """Solve the inner program as an explicit LP (any extra rows allowed).

    Returns ``(value, c)``; raises :class:`InfeasibleInnerProblem` when the
    shape or finer rows cannot be met at this joint.
    """
    sol = _inner_solution(problem)
    return sol.objective_value, sol.x


def _inner_solution(problem: InnerProblem):
    lam = np.asarray(problem.lam, float)
    yr = problem.range
    E, e, G, g = _constraint_rows(problem)
    lp = LinearProgram(
        lam,
        E if len(E) else None,
        e if len(E) else None,
        G if len(G) else None,
        g if len(G) else None,
        np.tile([yr.y_lo, yr.y_hi], (lam.size, 1)),
        sense=problem.direction,
    )
    sol = solve(lp)
    if sol.status != "optimal":
        raise InfeasibleInnerProblem(f"inner program {sol.status}", sol.infeasibility)
    return sol


REPLAY_TOL = 1e-10
PARTITION_CACHE = 4


def _replay(problem: InnerProblem, basis):
    """Inner optimum at a new joint from an earlier optimal basis, if it still is one.

    Solves for the basic variables with the rest at their bounds, then checks
    primal feasibility of every row and the sign of every reduced cost, so a
    returned value is a certified LP optimum.  Returns ``None`` otherwise.
    """
    rows, cols, upper = basis
    rows, cols = list(rows), list(cols)
    yr = problem.range
    lam = np.asarray(problem.lam, float)
    E, e, G, g = _constraint_rows(problem)
    K, m_g = lam.size, len(G)
    A = np.zeros((len(E) + m_g, K + m_g))
    A[:len(E), :K] = E
    A[len(E):, :K] = G
    A[len(E):, K:] = np.eye(m_g)
    b = np.concatenate([e, g])
    x = np.zeros(K + m_g)
    x[:K] = np.where(upper, yr.y_hi, yr.y_lo)
    x[cols] = 0.0
    Ar = A[rows]
    B = Ar[:, cols]
    try:
        x[cols] = np.linalg.solve(B, b[rows] - Ar @ x)
    except np.linalg.LinAlgError:
        return None
    tol = REPLAY_TOL * max(1.0, yr.width)
    c = x[:K]
    if np.any(c < yr.y_lo - tol) or np.any(c > yr.y_hi + tol) or np.any(x[K:] < -tol):
        return None
    c = np.clip(c, yr.y_lo, yr.y_hi)
    # rows dropped as redundant must still hold
    if len(E) and np.max(np.abs(E @ c - e)) > tol:
        return None
    if m_g and np.max(G @ c - g) > tol:
        return None
    sigma = 1.0 if problem.direction == "min" else -1.0
    cost = np.concatenate([sigma * lam, np.zeros(m_g)])
    y = np.linalg.solve(B.T, cost[cols])
    d = cost - Ar.T @ y
    nonbasic = np.ones(K + m_g, dtype=bool)
    nonbasic[cols] = False
    at_hi = np.zeros(K + m_g, dtype=bool)
    at_hi[:K] = upper
    dtol = 1e-9 * (1.0 + np.abs(lam).max())
    if np.any(d[nonbasic & ~at_hi] < -dtol) or np.any(d[nonbasic & at_hi] > dtol):
        return None
    return float(lam @ c), c


def inner_value(problem: InnerProblem):
    """Closed form when possible, LP otherwise."""
    if problem.unconstrained:
        lo, hi = problem.band
        if lo == hi:
            return inner_closed_form(problem.lam, problem.p, lo, problem.range,
                                     problem.direction)
        s = 1.0 if problem.direction == "min" else -1.0
        R = problem.range.width
        v, ct = _greedy_min_batch(s * np.asarray(problem.lam, float)[None, :],
                                  np.asarray(problem.p, float)[None, :],
                                  np.array([lo - problem.range.y_lo]),
                                  np.array([hi - problem.range.y_lo]), R)
        c = ct[0] + problem.range.y_lo
        return float(np.dot(problem.lam, c)), c
    return inner_lp(problem)


# ---------------------------------------------------------------------------
# outer search


@dataclass
class _GroupProblem:
    """Everything the outer search needs for one group."""

    chart: FeasibleSetChart
    starts: list
    lam: np.ndarray
    range: OutcomeRange
    band: tuple[float, float]
    shape: tuple[np.ndarray, np.ndarray] | None = None
    finer: Sequence[FinerConstraint] = ()

    def inner(self, p, direction):
        return InnerProblem(self.lam, p, self.band, self.range, direction,
                            self.shape, self.finer)

    @property
    def unconstrained(self):
        return self.shape is None and not self.finer


class _Objective:
    """Batched penalized objective over (task, w) rows; tracks best feasible."""

    def __init__(self, problems, tasks):
        self.problems = problems
        self.tasks = tasks
        T = len(tasks)
        K = problems[0].lam.size
        self.base = np.array([problems[t[0]].chart.base_point for t in tasks])
        self.N = np.array([problems[t[0]].chart.null_basis for t in tasks])
        self.lam = np.array([problems[t[0]].lam for t in tasks])
        self.s_in = np.array([1.0 if t[1] == "min" else -1.0 for t in tasks])
        self.s_out = np.array([float(t[2]) for t in tasks])
        self.y_lo = np.array([problems[t[0]].range.y_lo for t in tasks])
        self.R = np.array([problems[t[0]].range.width for t in tasks])
        self.b_lo = np.array([problems[t[0]].band[0] for t in tasks]) - self.y_lo
        self.b_hi = np.array([problems[t[0]].band[1] for t in tasks]) - self.y_lo
        self.relaxed = any(problems[t[0]].chart.relaxed for t in tasks)
        if self.relaxed:
            A = problems[tasks[0][0]].chart.A
            inf = np.full(A.shape[0], np.inf)
            self.A = A
            self.band_lo = np.array([problems[t[0]].chart.band_lo if problems[t[0]].chart.relaxed
                                     else -inf for t in tasks])
            self.band_hi = np.array([problems[t[0]].chart.band_hi if problems[t[0]].chart.relaxed
                                     else inf for t in tasks])
        self.fast = all(problems[t[0]].unconstrained for t in tasks)
        self.best = np.full(T, np.inf)
        self.best_p = np.zeros((T, K))
        self.evaluations = 0
        # recent optimal partitions per task; nearby joints usually share one
        self.partitions = {}

    def _inner(self, key, prob):
        """Inner LP value, replaying a cached partition before the simplex."""
        cache = self.partitions.setdefault(key, [])
        for j, act in enumerate(cache):
            hit = _replay(prob, act)
            if hit is not None:
                if j:
                    cache.insert(0, cache.pop(j))
                return hit[0]
        sol = _inner_solution(prob)
        if sol.basis is not None:
            cache.insert(0, sol.basis)
            del cache[PARTITION_CACHE:]
        return sol.objective_value

    def points(self, idx, W):
        return self.base[idx] + np.einsum("nkd,nd->nk", self.N[idx], W)

    def violation(self, idx, P):
        v = np.maximum(-P, 0.0).sum(axis=1)
        if self.relaxed:
            AP = P @ self.A.T
            v += np.maximum(self.band_lo[idx] - AP, 0.0).sum(axis=1)
            v += np.maximum(AP - self.band_hi[idx], 0.0).sum(axis=1)
        return v

    def __call__(self, idx, W, keys=None):
        """Scores of rows ``W`` for tasks ``idx``; ``keys`` name partition caches."""
        idx = np.asarray(idx)
        self.evaluations += len(idx)
        P = self.points(idx, W)
        viol = self.violation(idx, P)
        Pc = np.maximum(P, 0.0)
        Pc /= Pc.sum(axis=1, keepdims=True)
        if self.fast:
            s_in = self.s_in[idx]
            lam = self.lam[idx]
            v, _ = _greedy_min_batch(s_in[:, None] * lam, Pc, self.b_lo[idx], self.b_hi[idx],
                                     self.R[idx][:, None])
            inner = s_in * v + self.y_lo[idx] * lam.sum(axis=1)
            score = self.s_out[idx] * inner
        else:
            score = np.empty(len(idx))
            for i, t in enumerate(idx):
                gi, d_in, s_out = self.tasks[t]
                try:
                    key = ("task", t) if keys is None else keys[i]
                    val = self._inner(key, self.problems[gi].inner(Pc[i], d_in))
                    score[i] = s_out * val
                except InfeasibleInnerProblem as exc:
                    score[i] = INFEASIBLE_SCORE * (1.0 + exc.infeasibility)
        feasible = viol <= FEASIBLE_TOL
        obj = score + PENALTY * viol
        cand = np.where(feasible & (score < INFEASIBLE_SCORE), score, np.inf)
        # per-task best (several rows may share a task)
        order = np.lexsort((cand, idx))
        first = np.ones(len(order), dtype=bool)
        first[1:] = idx[order][1:] != idx[order][:-1]
        rows = order[first]
        upd = cand[rows] < self.best[idx[rows]]
        self.best[idx[rows][upd]] = cand[rows][upd]
        self.best_p[idx[rows][upd]] = Pc[rows][upd]
        return obj


def _nelder_mead(fun, owner, X0, step, max_iter, ftol, xtol):
    """Nelder-Mead run in lockstep over many independent starts.

    ``fun(owner_rows, W)`` evaluates rows of ``W``; ``owner`` maps each start
    to its task.  Standard coefficients (1, 2, 0.5, 0.5).  Returns final
    simplices and values.
    """
    B, d = X0.shape
    S = np.repeat(X0[:, None, :], d + 1, axis=1)
    S[:, 1:, :] += step[:, None, :] * np.eye(d)[None, :, :]
    F = fun(np.repeat(owner, d + 1), S.reshape(-1, d)).reshape(B, d + 1)
    active = np.ones(B, dtype=bool)
    for _ in range(max_iter):
        a = np.flatnonzero(active)
        if a.size == 0:
            break
        order = np.argsort(F[a], axis=1, kind="stable")
        Sa = np.take_along_axis(S[a], order[:, :, None], axis=1)
        Fa = np.take_along_axis(F[a], order, axis=1)
        own = owner[a]
        worst = Sa[:, -1]
        cen = Sa[:, :-1].mean(axis=1)
        xr = 2.0 * cen - worst
        fr = fun(own, xr)
        f0, fs, fw = Fa[:, 0], Fa[:, -2], Fa[:, -1]

        new_x = xr.copy()
        new_f = fr.copy()
        accept = (fr < fs)
        expand = fr < f0
        if expand.any():
            e = np.flatnonzero(expand)
            xe = 3.0 * cen[e] - 2.0 * worst[e]
            fe = fun(own[e], xe)
            better = fe < fr[e]
            new_x[e[better]] = xe[better]
            new_f[e[better]] = fe[better]
        shrink = np.zeros(a.size, dtype=bool)
        contract = ~accept
        if contract.any():
            cidx = np.flatnonzero(contract)
            outside = fr[cidx] < fw[cidx]
            xc = np.where(outside[:, None],
                          cen[cidx] + 0.5 * (xr[cidx] - cen[cidx]),
                          cen[cidx] + 0.5 * (worst[cidx] - cen[cidx]))
            fc = fun(own[cidx], xc)
            ok = np.where(outside, fc <= fr[cidx], fc < fw[cidx])
            new_x[cidx[ok]] = xc[ok]
            new_f[cidx[ok]] = fc[ok]
            accept[cidx[ok]] = True
            shrink[cidx[~ok]] = True
        Sa[accept, -1] = new_x[accept]
        Fa[accept, -1] = new_f[accept]
        if shrink.any():
            s = np.flatnonzero(shrink)
            Ss = Sa[s]
            Ss[:, 1:] = Ss[:, :1] + 0.5 * (Ss[:, 1:] - Ss[:, :1])
            Fs = fun(np.repeat(own[s], d), Ss[:, 1:].reshape(-1, d)).reshape(len(s), d)
            Sa[s] = Ss
            Fa[s, 1:] = Fs
        S[a] = Sa
        F[a] = Fa
        spread_f = Fa.max(axis=1) - Fa.min(axis=1)
        spread_x = np.abs(Sa - Sa[:, :1]).max(axis=(1, 2))
        # stop when values agree and the simplex is small, or it has collapsed
        done = ((spread_f <= ftol) & (spread_x <= xtol)) | (spread_x <= 1e-12)
        active[a[done]] = False
    return S, F


def _structure_lp(prob: _GroupProblem, p, direction):
    """Exact optimum over joints for the greedy structure found at ``p``.

    At ``p`` the greedy solution puts a set H of cells at the top of the
    range, one cell m at a fractional value and the rest at the bottom.
    Keeping that assignment pattern, the inner value is

        y_lo * sum(lam) + R * lam(H) + lam_m * (b - R * p(H)) / p_m,

    a linear-fractional function of ``p`` (and of the mean ``b`` when it
    ranges over a band).  With ``t = 1 / p_m`` and ``y = t p`` it becomes an
    LP.  Any joint satisfying the pattern's feasibility rows gives a
    feasible ``c``, so the LP optimum is attainable by the inner problem.
    Returns the new joint, or ``None`` when there is nothing to improve.
    """
    yr = prob.range
    R = yr.width
    K = p.size
    s_in = 1.0 if direction == "min" else -1.0
    if R <= 0:
        return None
    b_lo, b_hi = prob.band[0] - yr.y_lo, prob.band[1] - yr.y_lo
    _, ct = _greedy_min_batch(s_in * prob.lam[None, :], p[None, :], np.array([b_lo]),
                              np.array([b_hi]), R)
    ct = ct[0]
    pos = p > ZERO_MASS
    frac = pos & (ct > 1e-12 * R) & (ct < R * (1 - 1e-12))
    if frac.sum() != 1:
        return None
    m = int(np.flatnonzero(frac)[0])
    lam_m = prob.lam[m]
    if lam_m == 0:
        return None
    H = (ct >= R * (1 - 1e-12)) & (np.arange(K) != m)
    n = K + 2                  # y (K), t, u = b * t
    it, iu = K, K + 1
    c = np.zeros(n)
    c[iu] = s_in * lam_m
    c[:K][H] = -s_in * lam_m * R
    eq, eq_b, le, le_b = [], [], [], []
    row = np.zeros(n); row[m] = 1.0
    eq.append(row); eq_b.append(1.0)
    ch = prob.chart
    if ch.relaxed:
        row = np.zeros(n); row[:K] = 1.0; row[it] = -1.0
        eq.append(row); eq_b.append(0.0)
        margin = np.minimum(1e-9, (ch.band_hi - ch.band_lo) / 4)
        for r in range(ch.A.shape[0]):
            row = np.zeros(n); row[:K] = ch.A[r]; row[it] = -(ch.band_hi[r] - margin[r])
            le.append(row); le_b.append(0.0)
            row = np.zeros(n); row[:K] = -ch.A[r]; row[it] = ch.band_lo[r] + margin[r]
            le.append(row); le_b.append(0.0)
    else:
        A_aug = np.vstack([ch.A, np.ones(K)])
        target = A_aug @ ch.base_point
        for r in range(A_aug.shape[0]):
            row = np.zeros(n); row[:K] = A_aug[r]; row[it] = -target[r]
            eq.append(row); eq_b.append(0.0)
    if b_lo == b_hi:
        row = np.zeros(n); row[it] = -b_lo; row[iu] = 1.0
        eq.append(row); eq_b.append(0.0)
    else:
        row = np.zeros(n); row[it] = b_lo; row[iu] = -1.0
        le.append(row); le_b.append(0.0)
        row = np.zeros(n); row[it] = -b_hi; row[iu] = 1.0
        le.append(row); le_b.append(0.0)
    # the pattern stays feasible: R y(H) <= u <= R (y(H) + y_m)
    row = np.zeros(n); row[:K][H] = R; row[iu] = -1.0
    le.append(row); le_b.append(0.0)
    row = np.zeros(n); row[:K][H] = -R; row[m] = -R; row[iu] = 1.0
    le.append(row); le_b.append(0.0)
    bounds = np.tile([0.0, np.inf], (n, 1))
    bounds[iu] = [-np.inf, np.inf]
    sol = solve(LinearProgram(c, np.array(eq), np.array(eq_b), np.array(le), np.array(le_b),
                              bounds))
    if not sol.ok or sol.x[it] <= 1e-12:
        return None
    q = np.maximum(sol.x[:K] / sol.x[it], 0.0)
    if not ch.relaxed:
        q = ch.point(ch.coords(q))
    return q


def _polish(obj: "_Objective", problems, tasks, candidates, rounds=8):
    """Improve each task's candidates by repeated structure LPs."""
    for t, pts in candidates.items():
        gi, d_in, s_out = tasks[t]
        prob = problems[gi]
        if not prob.unconstrained or (d_in == "min") != (s_out > 0):
            continue
        ch = prob.chart
        for p in pts:
            cur = p
            for _ in range(rounds):
                before = obj.best[t]
                q = _structure_lp(prob, cur, d_in)
                if q is None:
                    break
                obj(np.array([t]), ch.coords(q)[None, :])
                if not obj.best[t] < before - 1e-13:
                    break
                cur = obj.best_p[t]


def _optimize(problems: list[_GroupProblem], tasks, opts: SearchOptions):
    """Run the multi-start search for every task.

    ``tasks`` holds ``(problem index, inner direction, outer sign)`` where the
    outer sign is +1 to minimize and -1 to maximize the inner value.
    Returns arrays of best values (in the inner value's own sign) and joints.
    """
    obj = _Objective(problems, tasks)
    T = len(tasks)
    # tasks whose chart is a single point need just one evaluation
    rows, owner, steps = [], [], []
    for t, (gi, _, _) in enumerate(tasks):
        prob = problems[gi]
        ch = prob.chart
        d = ch.dim
        W = np.array([ch.coords(p) for p in prob.starts]).reshape(len(prob.starts), d)
        obj(np.full(len(W), t), W)
        if d == 0:
            continue
        W = np.unique(np.round(W, 12), axis=0)
        span = W.max(axis=0) - W.min(axis=0)
        step = np.maximum(opts.initial_step * span, opts.min_step)
        rows.append(W)
        owner.append(np.full(len(W), t))
        steps.append(np.tile(step, (len(W), 1)))
    by_dim = {}
    for W, o, s in zip(rows, owner, steps):
        by_dim.setdefault(W.shape[1], []).append((W, o, s))
    for d, parts in by_dim.items():
        X0 = np.vstack([p[0] for p in parts])
        own = np.concatenate([p[1] for p in parts])
        step = np.vstack([p[2] for p in parts])
        # one partition cache per start: consecutive simplex points are close
        fun = lambda rows, W, d=d: obj(own[rows], W, [(d, r) for r in rows])
        for r in range(opts.restarts + 1):
            S, F = _nelder_mead(fun, np.arange(len(own)), X0, step, opts.max_iters_per_start,
                                opts.convergence_tol, opts.xtol)
            best = np.argmin(F, axis=1)
            X0 = S[np.arange(len(S)), best]
            step = np.maximum(step * 0.25, opts.min_step * 0.1)
        if opts.polish:
            # best few distinct end points per task
            fbest = F.min(axis=1)
            order = np.lexsort((fbest, own))
            cand = {}
            for i in order:
                lst = cand.setdefault(int(own[i]), [])
                if len(lst) < opts.polish:
                    P = np.maximum(obj.points(own[i:i + 1], X0[i:i + 1])[0], 0.0)
                    lst.append(P / P.sum())
            for t in cand:
                cand[t].insert(0, obj.best_p[t].copy())
            _polish(obj, problems, tasks, cand)
    values = obj.best.copy()
    s_out = np.array([t[2] for t in tasks], dtype=float)
    values = s_out * values
    return values, obj.best_p.copy()


def _prepare(group: GroupRecord, support: CovariateSupport, lam, yrange: OutcomeRange,
             shape, use_finer: bool, opts: SearchOptions, seed_key) -> tuple[_GroupProblem, float]:
    p0, slack = min_slack_joint(group, support)
    ch = chart(group, support, p0, slack, opts.slack_tol, opts.strict)
    seed = np.random.SeedSequence([opts.seed, *seed_key])
    starts = sample_starts(ch, opts.n_random_starts, seed)
    S = None
    if shape is not None:
        shape.check(support.K)
        S = shape.for_group(group.group_id)
    finer = finer_constraints(group, support) if use_finer else ()
    prob = _GroupProblem(ch, starts, lam, yrange, (group.y_mean, group.y_mean), S, finer)
    return prob, slack


def _witness(prob: _GroupProblem, p, direction):
    try:
        _, c = inner_value(prob.inner(p, direction))
    except InfeasibleInnerProblem:
        return None
    return Witness(np.asarray(p), np.asarray(c))


def _bounds_for(problems, group_ids, shares, slacks, opts) -> list[GroupBound]:
    tasks = []
    for i in range(len(problems)):
        tasks.append((i, "min", 1))
        tasks.append((i, "max", -1))
    values, P = _optimize(problems, tasks, opts)
    out = []
    for i, prob in enumerate(problems):
        lo, hi = values[2 * i], values[2 * i + 1]
        if not (np.isfinite(lo) and np.isfinite(hi)):
            raise EmptyIdentifiedSet(f"group {group_ids[i]}: no feasible (p, c) found")
        wl = _witness(prob, P[2 * i], "min")
        wu = _witness(prob, P[2 * i + 1], "max")
        out.append(GroupBound(group_ids[i], shares[i], float(lo), float(hi), wl, wu, slacks[i]))
    return out


class EmptyIdentifiedSet(RuntimeError):
    pass


def group_bounds(group: GroupRecord, support: CovariateSupport, lam, yrange: OutcomeRange,
                 shape: ShapeConstraintSet | None = None, use_finer: bool = False,
                 opts: SearchOptions | None = None, seed_key=(0,)) -> GroupBound:
    """Lower and upper bound for one group, with witnesses.

    The result is exact when the feasible set is a single joint; otherwise it
    is the best value found by the multi-start search (an inner approximation
    of the sharp interval).
    """
    opts = opts or SearchOptions()
    lam = weight_vector(support, lam)
    prob, slack = _prepare(group, support, lam, yrange, shape, use_finer, opts, seed_key)
    return _bounds_for([prob], [group.group_id], [group.share], [slack], opts)[0]


def identified_set(dataset: AggregateDataset, lam, shape: ShapeConstraintSet | None = None,
                   use_finer: bool = False, opts: SearchOptions | None = None,
                   yrange: OutcomeRange | None = None) -> BoundResult:
    """Per-group bounds and the share-weighted aggregate interval.

    All groups are searched together, so the cost is dominated by the
    number of starts rather than the number of groups.
    """
    opts = opts or SearchOptions()
    lam = weight_vector(dataset.support, lam)
    yrange = yrange or dataset.range
    problems, slacks = [], []
    for gi, g in enumerate(dataset.groups):
        try:
            prob, slack = _prepare(g, dataset.support, lam, yrange, shape, use_finer, opts, (gi,))
        except Exception as exc:
            raise type(exc)(f"group {g.group_id}: {exc}") from exc
        problems.append(prob)
        slacks.append(slack)
    groups = _bounds_for(problems, dataset.group_ids, list(dataset.shares), slacks, opts)
    return BoundResult.from_groups(groups)


@dataclass(frozen=True)
class JointKnownRange:
    """How L_g and U_g move as the joint ranges over the feasible set."""

    lower_range: tuple[float, float]
    upper_range: tuple[float, float]
    witnesses: dict

    @property
    def lower_width(self) -> float:
        return self.lower_range[1] - self.lower_range[0]

    @property
    def upper_width(self) -> float:
        return self.upper_range[1] - self.upper_range[0]


def joint_known_range(group: GroupRecord, support: CovariateSupport, lam,
                      yrange: OutcomeRange, opts: SearchOptions | None = None,
                      seed_key=(0,)) -> JointKnownRange:
    """Range of the fixed-joint lower and upper bounds over feasible joints.

    If the joint were known, the bounds would be the inner values at that
    joint.  The minimum of the lower-bound range and the maximum of the
    upper-bound range are the group's sharp bounds.
    """
    opts = opts or SearchOptions()
    lam = weight_vector(support, lam)
    prob, _ = _prepare(group, support, lam, yrange, None, False, opts, seed_key)
    tasks = [(0, "min", 1), (0, "min", -1), (0, "max", 1), (0, "max", -1)]
    values, P = _optimize([prob], tasks, opts)
    wit = {name: P[i] for i, name in enumerate(["lower_min", "lower_max", "upper_min", "upper_max"])}
    return JointKnownRange((float(values[0]), float(values[1])),
                           (float(values[2]), float(values[3])), wit)
