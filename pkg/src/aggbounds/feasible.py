"""Joint covariate distributions consistent with a group's marginals.

The feasible set for one group is the polytope of points ``p`` on the
simplex over support points whose implied marginals ``A @ p`` match the
observed ones.  It is parameterized as ``p = base + N @ w`` with ``N`` an
orthonormal basis of the null space of the stacked constraint matrix.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass

import numpy as np

from .core import CovariateSupport, GroupRecord, indicator_matrix
from .linprog import LinearProgram, solve

SLACK_TOL = 1e-8
RANK_RTOL = 1e-10


class InconsistentMarginalsWarning(UserWarning):
    pass


class EmptyFeasibleSetError(RuntimeError):
    pass


@dataclass(frozen=True)
class FeasibleSetChart:
    """Affine chart ``p = base_point + null_basis @ w`` of a feasible set.

    For band-relaxed sets (confidence-interval programs) ``band_lo`` and
    ``band_hi`` bound ``A @ p`` and ``null_basis`` spans only the simplex
    direction space.
    """

    base_point: np.ndarray
    null_basis: np.ndarray
    A: np.ndarray
    band_lo: np.ndarray | None = None
    band_hi: np.ndarray | None = None

    @property
    def dim(self) -> int:
        return self.null_basis.shape[1]

    @property
    def relaxed(self) -> bool:
        return self.band_lo is not None

    def point(self, w) -> np.ndarray:
        return self.base_point + self.null_basis @ np.asarray(w, dtype=float)

    def coords(self, p) -> np.ndarray:
        return self.null_basis.T @ (np.asarray(p, dtype=float) - self.base_point)

    def violation(self, P: np.ndarray) -> np.ndarray:
        """Total constraint violation of each row of ``P`` (0 when feasible)."""
        P = np.atleast_2d(P)
        v = np.maximum(-P, 0.0).sum(axis=1)
        if self.relaxed:
            AP = P @ self.A.T
            v = v + np.maximum(self.band_lo - AP, 0.0).sum(axis=1)
            v = v + np.maximum(AP - self.band_hi, 0.0).sum(axis=1)
        return v


def _expanded_rows(support: CovariateSupport):
    """One marginal row per (covariate, support point), as in the slack LP.

    Returns the row matrix and, for each row, its position among the distinct
    (covariate, value) rows of :func:`indicator_matrix`.
    """
    A = indicator_matrix(support)
    keys = support.marginal_keys
    pos = []
    for l in range(support.num_covariates):
        for pt in support.points:
            pos.append(keys.index((l, pt[l])))
    return A[pos], np.array(pos)


def min_slack_joint(group: GroupRecord, support: CovariateSupport):
    """Joint minimizing total absolute marginal mismatch.

    Solves ``min sum(v+ + v-)`` over ``p`` on the simplex with
    ``m_r - A_r p = v+_r - v-_r`` for every (covariate, support point) row.

    Returns
    -------
    p : ndarray
        An optimal joint (a vertex of the optimal face).
    total_slack : float
        Optimal objective; zero up to solver tolerance when the marginals are
        mutually consistent on the support.
    """
    rows, pos = _expanded_rows(support)
    m = group.marginal_vector(support)[pos]
    return _slack_lp(rows, m, m, support.K)


def _slack_lp(rows, lo, hi, K):
    """Shared slack program; equality when lo == hi, bands otherwise."""
    R = rows.shape[0]
    equality = np.array_equal(lo, hi)
    if equality:
        # A p + v+ - v- = m
        n = K + 2 * R
        c = np.concatenate([np.zeros(K), np.ones(2 * R)])
        A_eq = np.zeros((R + 1, n))
        A_eq[:R, :K] = rows
        A_eq[:R, K:K + R] = np.eye(R)
        A_eq[:R, K + R:] = -np.eye(R)
        A_eq[R, :K] = 1.0
        b_eq = np.concatenate([lo, [1.0]])
        bounds = np.vstack([np.tile([0.0, 1.0], (K, 1)), np.tile([0.0, np.inf], (2 * R, 1))])
        sol = solve(LinearProgram(c, A_eq, b_eq, bounds=bounds))
    else:
        # lo - A p <= v+_L - v-_L ; hi - A p >= v+_U - v-_U
        n = K + 4 * R
        c = np.concatenate([np.zeros(K), np.ones(4 * R)])
        A_le = np.zeros((2 * R, n))
        I = np.eye(R)
        A_le[:R, :K] = -rows
        A_le[:R, K:K + R] = -I
        A_le[:R, K + R:K + 2 * R] = I
        A_le[R:, :K] = rows
        A_le[R:, K + 2 * R:K + 3 * R] = I
        A_le[R:, K + 3 * R:] = -I
        b_le = np.concatenate([-lo, hi])
        A_eq = np.concatenate([np.ones(K), np.zeros(4 * R)])[None, :]
        bounds = np.vstack([np.tile([0.0, 1.0], (K, 1)), np.tile([0.0, np.inf], (4 * R, 1))])
        sol = solve(LinearProgram(c, A_eq, [1.0], A_le, b_le, bounds))
    if not sol.ok:
        raise RuntimeError(f"slack program failed: {sol.status}")
    p = np.clip(sol.x[:K], 0.0, None)
    p /= p.sum()
    return p, float(max(sol.objective_value, 0.0))


def _null_basis(M: np.ndarray) -> np.ndarray:
    _, s, Vt = np.linalg.svd(M)
    smax = s[0] if s.size else 0.0
    rank = int(np.sum(s > RANK_RTOL * smax)) if smax > 0 else 0
    return Vt[rank:].T.copy()


def chart(group: GroupRecord, support: CovariateSupport, base: np.ndarray,
          slack: float = 0.0, slack_tol: float = SLACK_TOL,
          strict: bool = False) -> FeasibleSetChart:
    """Null-space chart of the feasible set through ``base``.

    When ``slack`` exceeds ``slack_tol`` the marginals are inconsistent on
    this support; the chart then describes joints reproducing the marginals
    implied by ``base`` (a member of the minimum-slack set) and a warning is
    issued, or :class:`EmptyFeasibleSetError` raised when ``strict``.
    """
    if slack > slack_tol:
        msg = (f"group {group.group_id}: marginals inconsistent with support "
               f"(total slack {slack:.3g}); using minimum-slack joints")
        if strict:
            raise EmptyFeasibleSetError(msg)
        warnings.warn(msg, InconsistentMarginalsWarning, stacklevel=2)
    A = indicator_matrix(support)
    A_aug = np.vstack([A, np.ones(support.K)])
    return FeasibleSetChart(np.asarray(base, float), _null_basis(A_aug), A)


def relaxed_chart(support: CovariateSupport, lo: np.ndarray, hi: np.ndarray):
    """Chart of ``{p on simplex : lo <= A p <= hi}``.

    The base point minimizes total band violation; if that minimum is not
    zero the bands are widened to contain the base point's marginals.

    Returns ``(chart, total_slack)``.
    """
    A = indicator_matrix(support)
    rows, pos = _expanded_rows(support)
    lo = np.asarray(lo, float)
    hi = np.asarray(hi, float)
    p, slack = _slack_lp(rows, lo[pos], hi[pos], support.K)
    if slack > SLACK_TOL:
        Ap = A @ p
        lo = np.minimum(lo, Ap)
        hi = np.maximum(hi, Ap)
    N = _null_basis(np.ones((1, support.K)))
    return FeasibleSetChart(p, N, A, lo, hi), slack


def _extreme_point(ch: FeasibleSetChart, direction: np.ndarray) -> np.ndarray:
    """Maximize ``direction @ w`` over the chart's polytope (an LP in p)."""
    K = ch.base_point.size
    obj = ch.null_basis @ direction
    bounds = np.tile([0.0, 1.0], (K, 1))
    if ch.relaxed:
        A_eq = np.ones((1, K))
        b_eq = [1.0]
        A_le = np.vstack([ch.A, -ch.A])
        b_le = np.concatenate([ch.band_hi, -ch.band_lo])
        lp = LinearProgram(obj, A_eq, b_eq, A_le, b_le, bounds, sense="max")
    else:
        A_eq = np.vstack([ch.A, np.ones(K)])
        b_eq = A_eq @ ch.base_point
        lp = LinearProgram(obj, A_eq, b_eq, bounds=bounds, sense="max")
    sol = solve(lp)
    if not sol.ok:
        return ch.base_point.copy()
    return _project(ch, sol.x)


def _project(ch: FeasibleSetChart, p: np.ndarray) -> np.ndarray:
    """Snap ``p`` back onto the chart's affine hull and clamp tiny negatives."""
    q = ch.point(ch.coords(p))
    q[(q < 0) & (q > -1e-10)] = 0.0
    return q


def axis_extremes(ch: FeasibleSetChart) -> list[np.ndarray]:
    out = []
    for i in range(ch.dim):
        e = np.zeros(ch.dim)
        e[i] = 1.0
        out.append(_extreme_point(ch, e))
        out.append(_extreme_point(ch, -e))
    return out


def sample_starts(ch: FeasibleSetChart, n_random: int = 0, seed=None) -> list[np.ndarray]:
    """Deterministic starting joints inside the feasible set.

    The list is the base point, then the ``2 d`` axis-extreme points (max and
    min of each chart coordinate), then ``n_random`` points drawn uniformly
    from the coordinate bounding box by rejection.  If rejection needs more
    than ``50 * n_random`` draws the remainder are random convex combinations
    of the extreme points.
    """
    starts = [ch.base_point.copy()]
    if ch.dim == 0:
        return starts
    ext = axis_extremes(ch)
    starts.extend(ext)
    if n_random <= 0:
        return starts
    rng = np.random.default_rng(seed)
    W = np.array([ch.coords(p) for p in ext])
    wlo, whi = W.min(axis=0), W.max(axis=0)
    accepted = []
    tries = 0
    cap = 50 * n_random
    while len(accepted) < n_random and tries < cap:
        batch = min(cap - tries, max(4 * (n_random - len(accepted)), 16))
        w = rng.uniform(wlo, whi, size=(batch, ch.dim))
        P = ch.base_point + w @ ch.null_basis.T
        ok = ch.violation(P) <= 0.0
        tries += batch
        accepted.extend(P[ok][: n_random - len(accepted)])
    verts = np.array(ext)
    while len(accepted) < n_random:
        lam = rng.dirichlet(np.ones(len(verts)))
        accepted.append(_project(ch, lam @ verts))
    starts.extend(np.asarray(a) for a in accepted)
    return starts
