"""Dense bounded-variable simplex for the small LPs used throughout.

Problems here have at most a few dozen variables and a few hundred rows, so
a two-phase tableau method is plenty.  Pricing is Dantzig's rule with ties
broken by lowest index; after a run of degenerate pivots the solver switches
permanently to Bland's rule, which cannot cycle.

Tolerances are fixed: feasibility 1e-8, pivot 1e-10.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

FEAS_TOL = 1e-8
PIVOT_TOL = 1e-10
OPT_TOL = 1e-11
_DEGENERATE_LIMIT = 30


class LinprogError(ValueError):
    pass


@dataclass
class LinearProgram:
    """``min`` (or ``max``) ``c @ x`` subject to equality rows, ``<=`` rows
    and per-variable bounds.

    ``bounds`` is an ``(n, 2)`` array; the default is ``[0, inf)`` for every
    variable.  Infinite entries are allowed on either side.
    """

    c: np.ndarray
    A_eq: np.ndarray | None = None
    b_eq: np.ndarray | None = None
    A_le: np.ndarray | None = None
    b_le: np.ndarray | None = None
    bounds: np.ndarray | None = None
    sense: str = "min"

    def __post_init__(self):
        self.c = np.asarray(self.c, dtype=float).ravel()
        n = self.c.size
        self.A_eq, self.b_eq = _rows(self.A_eq, self.b_eq, n, "equality")
        self.A_le, self.b_le = _rows(self.A_le, self.b_le, n, "inequality")
        if self.bounds is None:
            self.bounds = np.tile([0.0, np.inf], (n, 1))
        else:
            self.bounds = np.array(self.bounds, dtype=float).reshape(-1, 2)
            if self.bounds.shape[0] != n:
                raise LinprogError(f"bounds has {self.bounds.shape[0]} rows, expected {n}")
        if self.sense not in ("min", "max"):
            raise LinprogError("sense must be 'min' or 'max'")
        for name in ("c", "A_eq", "b_eq", "A_le", "b_le", "bounds"):
            if np.isnan(getattr(self, name)).any():
                raise LinprogError(f"NaN entry in {name}")
        for name in ("c", "A_eq", "b_eq", "A_le", "b_le"):
            if not np.isfinite(getattr(self, name)).all():
                raise LinprogError(f"non-finite entry in {name}")
        if np.any(self.bounds[:, 0] > self.bounds[:, 1]):
            raise LinprogError("a lower bound exceeds its upper bound")

    @property
    def num_vars(self) -> int:
        return self.c.size


def _rows(A, b, n, what):
    if A is None:
        if b is not None and np.size(b):
            raise LinprogError(f"{what} rhs given without matrix")
        return np.zeros((0, n)), np.zeros(0)
    A = np.asarray(A, dtype=float)
    if A.ndim == 1:
        A = A.reshape(1, -1)
    b = np.asarray(b, dtype=float).ravel()
    if A.shape[1] != n:
        raise LinprogError(f"{what} matrix has {A.shape[1]} columns, expected {n}")
    if A.shape[0] != b.size:
        raise LinprogError(f"{what} matrix has {A.shape[0]} rows but rhs has {b.size}")
    return A, b


@dataclass
class LpSolution:
    status: str
    x: np.ndarray
    objective_value: float
    residuals: float = 0.0
    iterations: int = 0
    infeasibility: float = 0.0
    # final basis when every variable has a finite lower bound:
    # (kept row indices, basic columns, variables at their upper bound), where
    # columns index the variables followed by one slack per ``<=`` row
    basis: tuple | None = None

    @property
    def ok(self) -> bool:
        return self.status == "optimal"


@dataclass
class _Standard:
    """min cost @ y, A y = b, 0 <= y <= u, with x = offset + M y."""

    A: np.ndarray
    b: np.ndarray
    cost: np.ndarray
    u: np.ndarray
    M: np.ndarray
    offset: np.ndarray
    slack_rows: list = field(default_factory=list)


def _standardize(lp: LinearProgram) -> _Standard:
    n = lp.num_vars
    lo, hi = lp.bounds[:, 0], lp.bounds[:, 1]
    cols, ups = [], []
    offset = np.zeros(n)
    for j in range(n):
        if np.isfinite(lo[j]):
            offset[j] = lo[j]
            cols.append((j, 1.0))
            ups.append(hi[j] - lo[j])
        elif np.isfinite(hi[j]):
            offset[j] = hi[j]
            cols.append((j, -1.0))
            ups.append(np.inf)
        else:
            cols.append((j, 1.0))
            ups.append(np.inf)
            cols.append((j, -1.0))
            ups.append(np.inf)
    ny = len(cols)
    M = np.zeros((n, ny))
    for i, (j, s) in enumerate(cols):
        M[j, i] = s
    sign = -1.0 if lp.sense == "max" else 1.0
    cost_y = sign * (lp.c @ M)
    m_eq, m_le = lp.A_eq.shape[0], lp.A_le.shape[0]
    A = np.zeros((m_eq + m_le, ny + m_le))
    A[:m_eq, :ny] = lp.A_eq @ M
    A[m_eq:, :ny] = lp.A_le @ M
    A[m_eq:, ny:] = np.eye(m_le)
    b = np.concatenate([lp.b_eq - lp.A_eq @ offset, lp.b_le - lp.A_le @ offset])
    cost = np.concatenate([cost_y, np.zeros(m_le)])
    u = np.concatenate([ups, np.full(m_le, np.inf)])
    Mfull = np.hstack([M, np.zeros((n, m_le))])
    return _Standard(A, b, cost, u, Mfull, offset, list(range(m_eq, m_eq + m_le)))


class _Tableau:
    """Mutable working state of one bounded simplex solve."""

    def __init__(self, A, b, u, basis, at_upper):
        self.A0 = A
        self.b0 = b
        self.u = u
        self.basis = list(basis)
        self.rows = list(range(A.shape[0]))
        self.at_upper = at_upper
        self.bland = False
        self.iterations = 0
        self.refactor()

    def nonbasic_values(self):
        y = np.where(self.at_upper, self.u, 0.0)
        y[self.basis] = 0.0
        return np.where(np.isfinite(y), y, 0.0)

    def refactor(self):
        B = self.A0[:, self.basis]
        self.T = np.linalg.solve(B, self.A0)
        rhs = self.b0 - self.A0 @ self.nonbasic_values()
        self.xB = np.linalg.solve(B, rhs)

    def values(self):
        y = self.nonbasic_values()
        y[self.basis] = self.xB
        return y

    def pivot(self, r, j):
        T = self.T
        piv = T[r, j]
        T[r] /= piv
        col = T[:, j].copy()
        col[r] = 0.0
        T -= np.outer(col, T[r])
        self.basis[r] = j

    def run(self, cost, max_iter):
        """Iterate to optimality.  Returns 'optimal' or 'unbounded'."""
        m, N = self.T.shape
        degenerate = 0
        is_basic = np.zeros(N, dtype=bool)
        while True:
            if self.iterations >= max_iter:
                raise LinprogError("simplex iteration limit reached")
            is_basic[:] = False
            is_basic[self.basis] = True
            d = cost - cost[self.basis] @ self.T
            can_up = (~is_basic) & (~self.at_upper) & (self.u > 0) & (d < -OPT_TOL)
            can_down = (~is_basic) & self.at_upper & (d > OPT_TOL)
            eligible = can_up | can_down
            if not eligible.any():
                return "optimal"
            if self.bland:
                j = int(np.flatnonzero(eligible)[0])
            else:
                score = np.where(eligible, np.abs(d), -1.0)
                j = int(np.argmax(score))
            delta = 1.0 if can_up[j] else -1.0
            alpha = delta * self.T[:, j]
            ub = self.u[self.basis]
            ratios = np.full(m, np.inf)
            dec = alpha > PIVOT_TOL
            ratios[dec] = np.maximum(self.xB[dec], 0.0) / alpha[dec]
            inc = (alpha < -PIVOT_TOL) & np.isfinite(ub)
            ratios[inc] = np.maximum(ub[inc] - self.xB[inc], 0.0) / (-alpha[inc])
            t_row = ratios.min() if m else np.inf
            t = min(t_row, self.u[j])
            if not np.isfinite(t):
                return "unbounded"
            self.iterations += 1
            if t <= 1e-12:
                degenerate += 1
                if degenerate > _DEGENERATE_LIMIT:
                    self.bland = True
            else:
                degenerate = 0
            if self.u[j] <= t_row:
                self.xB -= t * alpha
                self.at_upper[j] = not self.at_upper[j]
                continue
            ties = np.flatnonzero(ratios <= t_row + 1e-12)
            if self.bland:
                r = int(ties[np.argmin(np.asarray(self.basis)[ties])])
            else:
                r = int(ties[np.argmax(np.abs(alpha[ties]))])
            leaving = self.basis[r]
            to_upper = alpha[r] < 0
            entering_value = t if delta > 0 else self.u[j] - t
            self.xB -= t * alpha
            self.xB[r] = entering_value
            self.pivot(r, j)
            self.at_upper[j] = False
            self.at_upper[leaving] = bool(to_upper)
            if self.iterations % 50 == 0:
                self.refactor()


def solve(lp: LinearProgram, max_iter: int | None = None) -> LpSolution:
    """Solve a :class:`LinearProgram` with the two-phase bounded simplex.

    Returns an :class:`LpSolution` whose ``status`` is ``"optimal"``,
    ``"infeasible"`` (phase-1 minimum infeasibility above 1e-8) or
    ``"unbounded"``.
    """
    st = _standardize(lp)
    m, ny = st.A.shape
    n = lp.num_vars
    if max_iter is None:
        max_iter = 100 * (m + ny) + 1000

    A = st.A.copy()
    b = st.b.copy()
    # rows whose slack can start basic need no artificial
    basis = [-1] * m
    for r in st.slack_rows:
        if b[r] >= 0:
            basis[r] = ny - len(st.slack_rows) + (r - st.slack_rows[0])
    need_art = [r for r in range(m) if basis[r] < 0]
    flip = b < 0
    A[flip] *= -1.0
    b[flip] *= -1.0
    na = len(need_art)
    A_full = np.hstack([A, np.zeros((m, na))])
    for i, r in enumerate(need_art):
        A_full[r, ny + i] = 1.0
        basis[r] = ny + i
    u_full = np.concatenate([st.u, np.full(na, np.inf)])
    at_upper = np.zeros(ny + na, dtype=bool)

    if m == 0:
        return _solve_unconstrained(lp, st)

    tab = _Tableau(A_full, b, u_full, basis, at_upper)
    if na:
        cost1 = np.concatenate([np.zeros(ny), np.ones(na)])
        tab.run(cost1, max_iter)
        tab.refactor()
        infeas = float(np.sum(np.maximum(tab.values()[ny:], 0.0)))
        if infeas > FEAS_TOL:
            x = st.offset + st.M @ tab.values()[:ny]
            return LpSolution("infeasible", x, np.nan, iterations=tab.iterations,
                              infeasibility=infeas)
        _drive_out_artificials(tab, ny)
        tab.u[ny:] = 0.0
        tab.at_upper[ny:] = False
    cost2 = np.concatenate([st.cost, np.zeros(na)])
    status = tab.run(cost2, max_iter)
    if status == "unbounded":
        return LpSolution("unbounded", np.full(n, np.nan), -np.inf if lp.sense == "min"
                          else np.inf, iterations=tab.iterations)
    tab.refactor()
    y = tab.values()[:ny]
    y = np.clip(y, 0.0, st.u)
    x = st.offset + st.M @ y
    basis = None
    if np.all(np.isfinite(lp.bounds[:, 0])):
        basis = (tuple(tab.rows), tuple(tab.basis), tab.at_upper[:n].copy())
    return _finish(lp, x, tab.iterations, basis)


def _drive_out_artificials(tab: _Tableau, ny: int):
    r = 0
    while r < len(tab.basis):
        if tab.basis[r] < ny:
            r += 1
            continue
        row = tab.T[r, :ny]
        cand = np.flatnonzero(np.abs(row) > 1e-9)
        cand = [j for j in cand if j not in tab.basis]
        if cand:
            j = int(cand[np.argmax(np.abs(row[cand]))])
            leaving = tab.basis[r]
            value_j = tab.u[j] if tab.at_upper[j] else 0.0
            tab.pivot(r, j)
            tab.xB[r] = value_j
            tab.at_upper[j] = False
            tab.at_upper[leaving] = False
            r += 1
        else:
            # redundant constraint: drop the original row carrying this
            # artificial's unit entry, which keeps the reduced basis nonsingular
            src = int(np.argmax(np.abs(tab.A0[:, tab.basis[r]])))
            rows = [i for i in range(tab.A0.shape[0]) if i != src]
            keep = [i for i in range(len(tab.basis)) if i != r]
            tab.A0 = tab.A0[rows]
            tab.b0 = tab.b0[rows]
            tab.rows = [tab.rows[i] for i in rows]
            tab.basis = [tab.basis[i] for i in keep]
            tab.xB = tab.xB[keep]
            tab.refactor()
    if tab.basis:
        tab.refactor()


def _solve_unconstrained(lp, st):
    y = np.where(st.cost < 0, st.u, 0.0)
    if np.any(~np.isfinite(y)):
        return LpSolution("unbounded", np.full(lp.num_vars, np.nan),
                          -np.inf if lp.sense == "min" else np.inf)
    return _finish(lp, st.offset + st.M @ y, 0)


def _finish(lp: LinearProgram, x: np.ndarray, iterations: int, basis=None) -> LpSolution:
    lo, hi = lp.bounds[:, 0], lp.bounds[:, 1]
    x = np.minimum(np.maximum(x, lo), hi)
    res = 0.0
    if lp.A_eq.size:
        res = max(res, float(np.max(np.abs(lp.A_eq @ x - lp.b_eq))))
    if lp.A_le.size:
        res = max(res, float(np.max(lp.A_le @ x - lp.b_le, initial=0.0)))
    return LpSolution("optimal", x, float(lp.c @ x), residuals=res, iterations=iterations,
                      basis=basis)
