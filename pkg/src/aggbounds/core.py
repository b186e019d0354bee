"""Domain types shared by every other module.

Support points are stored in canonical row-major order: points are sorted
lexicographically by covariate value, so on a full product support the last
covariate varies fastest.  All indices are 0-based.
"""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Iterable, Mapping, Sequence

import numpy as np

MARGINAL_TOL = 1e-9


class UnknownPointError(KeyError):
    """Raised when a covariate vector is not a declared support point."""


@dataclass(frozen=True)
class CovariateSupport:
    """The K known support points of the covariate vector.

    Parameters
    ----------
    points : sequence of sequences
        Each entry is one support point of length L.  Order is irrelevant;
        points are stored sorted (row-major).
    names : sequence of str, optional
        Covariate names, defaulting to ``x0 .. x{L-1}``.
    """

    points: tuple[tuple[float, ...], ...]
    names: tuple[str, ...] = ()

    def __post_init__(self):
        pts = tuple(tuple(float(v) for v in pt) for pt in self.points)
        if not pts:
            raise ValueError("support needs at least one point")
        widths = {len(pt) for pt in pts}
        if len(widths) != 1 or 0 in widths:
            raise ValueError("all support points must have the same length L >= 1")
        if len(set(pts)) != len(pts):
            raise ValueError("support points must be distinct")
        object.__setattr__(self, "points", tuple(sorted(pts)))
        L = widths.pop()
        names = tuple(self.names) if self.names else tuple(f"x{i}" for i in range(L))
        if len(names) != L:
            raise ValueError(f"expected {L} covariate names, got {len(names)}")
        object.__setattr__(self, "names", names)

    @classmethod
    def product(cls, values: Sequence[Sequence[float]], names: Sequence[str] = ()):
        """Full Cartesian product of per-covariate value lists."""
        return cls(tuple(itertools.product(*values)), tuple(names))

    @classmethod
    def binary(cls, num_covariates: int, names: Sequence[str] = ()):
        return cls.product([(0, 1)] * num_covariates, names)

    @property
    def num_covariates(self) -> int:
        return len(self.points[0])

    @property
    def K(self) -> int:
        return len(self.points)

    @property
    def per_covariate_values(self) -> tuple[tuple[float, ...], ...]:
        return tuple(
            tuple(sorted({pt[l] for pt in self.points}))
            for l in range(self.num_covariates)
        )

    @property
    def marginal_keys(self) -> list[tuple[int, float]]:
        """Row labels ``(covariate, value)`` of the indicator matrix."""
        return [
            (l, v)
            for l, vals in enumerate(self.per_covariate_values)
            for v in vals
        ]

    def covariate_index(self, name_or_index) -> int:
        if isinstance(name_or_index, (int, np.integer)):
            if not 0 <= name_or_index < self.num_covariates:
                raise KeyError(f"covariate index {name_or_index} out of range")
            return int(name_or_index)
        try:
            return self.names.index(name_or_index)
        except ValueError:
            raise KeyError(f"unknown covariate {name_or_index!r}") from None

    def array(self) -> np.ndarray:
        """Support as a (K, L) float array."""
        return np.asarray(self.points, dtype=float)


def flat_index(support: CovariateSupport, values: Sequence[float]) -> int:
    """Position of ``values`` in the canonical ordering of the support."""
    key = tuple(float(v) for v in values)
    # points are sorted, so bisection would work; K is small enough for a scan
    try:
        return support.points.index(key)
    except ValueError:
        raise UnknownPointError(f"{tuple(values)} is not a support point") from None


def support_values(support: CovariateSupport, k: int) -> tuple[float, ...]:
    if not 0 <= k < support.K:
        raise UnknownPointError(f"index {k} outside 0..{support.K - 1}")
    return support.points[k]


def indicator_matrix(support: CovariateSupport) -> np.ndarray:
    """Binary matrix mapping a joint over support points to stacked marginals.

    Row ``(l, v)`` (ordered as ``support.marginal_keys``) has a one in column
    ``j`` exactly when point ``j`` has covariate ``l`` equal to ``v``.
    """
    X = support.array()
    keys = support.marginal_keys
    A = np.zeros((len(keys), support.K))
    for r, (l, v) in enumerate(keys):
        A[r] = X[:, l] == v
    return A


@dataclass(frozen=True)
class OutcomeRange:
    y_lo: float
    y_hi: float

    def __post_init__(self):
        if not (math.isfinite(self.y_lo) and math.isfinite(self.y_hi)):
            raise ValueError("outcome range must be finite")
        if self.y_lo > self.y_hi:
            raise ValueError("y_lo must not exceed y_hi")

    @property
    def width(self) -> float:
        return self.y_hi - self.y_lo

    def contains(self, y: float, tol: float = 1e-12) -> bool:
        return self.y_lo - tol <= y <= self.y_hi + tol


@dataclass(frozen=True)
class FinerMoment:
    """Observed E[Y | X_l = value, G = g], optionally with its SE and count."""

    y_mean: float
    y_se: float | None = None
    count: int | None = None


@dataclass(frozen=True)
class GroupRecord:
    group_id: str
    share: float
    y_mean: float
    marginals: Mapping[tuple[int, float], float]
    count: int | None = None
    y_se: float | None = None
    finer: Mapping[tuple[int, float], FinerMoment] = field(default_factory=dict)

    def marginal_vector(self, support: CovariateSupport) -> np.ndarray:
        """Marginals stacked in indicator-matrix row order (missing keys are 0)."""
        return np.array(
            [float(self.marginals.get(key, 0.0)) for key in support.marginal_keys]
        )


@dataclass(frozen=True)
class AggregateDataset:
    support: CovariateSupport
    range: OutcomeRange
    groups: tuple[GroupRecord, ...]
    binary: bool = False

    def __post_init__(self):
        object.__setattr__(self, "groups", tuple(self.groups))

    @property
    def shares(self) -> np.ndarray:
        return np.array([g.share for g in self.groups])

    @property
    def group_ids(self) -> list[str]:
        return [g.group_id for g in self.groups]

    def group(self, group_id: str) -> GroupRecord:
        for g in self.groups:
            if g.group_id == group_id:
                return g
        raise KeyError(group_id)

    def has_counts(self) -> bool:
        return all(g.count is not None for g in self.groups)


@dataclass(frozen=True)
class Violation:
    """One failed dataset invariant."""

    kind: str
    message: str
    group: str | None = None
    covariate: str | None = None

    def __str__(self):
        where = []
        if self.group is not None:
            where.append(f"group {self.group}")
        if self.covariate is not None:
            where.append(f"covariate {self.covariate}")
        suffix = f" ({', '.join(where)})" if where else ""
        return f"{self.message}{suffix}"


def _check_group(group: GroupRecord, support: CovariateSupport,
                 yrange: OutcomeRange) -> list[Violation]:
    out = []
    gid = group.group_id
    if not (0.0 < group.share <= 1.0):
        out.append(Violation("share", f"group share {group.share} outside (0, 1]", gid))
    if group.count is not None and group.count < 1:
        out.append(Violation("count", "group count must be positive", gid))
    if not yrange.contains(group.y_mean):
        out.append(Violation("y_mean", "outcome mean outside range", gid))
    if group.y_se is not None and not group.y_se >= 0:
        out.append(Violation("y_se", "negative standard error", gid))
    known = set(support.marginal_keys)
    for key in list(group.marginals) + list(group.finer):
        if key not in known:
            l, v = key
            name = support.names[l] if 0 <= l < support.num_covariates else str(l)
            out.append(Violation("unknown_value",
                                 f"value {v} not in declared support", gid, name))
    for l, vals in enumerate(support.per_covariate_values):
        probs = [group.marginals.get((l, v), 0.0) for v in vals]
        name = support.names[l]
        if any(not (0.0 <= p <= 1.0) for p in probs):
            out.append(Violation("marginal_range", "marginal probability outside [0, 1]",
                                 gid, name))
        if abs(sum(probs) - 1.0) > MARGINAL_TOL:
            out.append(Violation("marginal_sum", f"marginal sum ≠ 1 (sum={sum(probs):.12g})",
                                 gid, name))
    for (l, v), fm in group.finer.items():
        if (l, v) in known and not yrange.contains(fm.y_mean):
            out.append(Violation("finer_y_mean", "finer outcome mean outside range",
                                 gid, support.names[l]))
    return out


def validate_dataset(dataset: AggregateDataset, renormalize: bool = False):
    """Check dataset invariants.

    Returns ``(dataset, [])`` when every invariant holds, otherwise
    ``(dataset, violations)``.  With ``renormalize=True`` marginal blocks and
    group shares are rescaled to sum to one before checking, which repairs
    rounding in published tables.
    """
    if renormalize:
        dataset = renormalize_dataset(dataset)
    violations: list[Violation] = []
    ids = dataset.group_ids
    if len(set(ids)) != len(ids):
        violations.append(Violation("group_ids", "group ids are not unique"))
    if not dataset.groups:
        violations.append(Violation("groups", "dataset has no groups"))
    elif abs(dataset.shares.sum() - 1.0) > MARGINAL_TOL:
        violations.append(Violation("share_sum",
                                    f"group shares sum to {dataset.shares.sum():.12g}, not 1"))
    if dataset.binary and (dataset.range.y_lo, dataset.range.y_hi) != (0.0, 1.0):
        violations.append(Violation("binary_range", "binary outcome requires range [0, 1]"))
    for g in dataset.groups:
        violations.extend(_check_group(g, dataset.support, dataset.range))
    return dataset, violations


def renormalize_dataset(dataset: AggregateDataset) -> AggregateDataset:
    support = dataset.support
    groups = []
    total = sum(g.share for g in dataset.groups)
    for g in dataset.groups:
        marg = dict(g.marginals)
        for l, vals in enumerate(support.per_covariate_values):
            s = sum(marg.get((l, v), 0.0) for v in vals)
            if s > 0:
                for v in vals:
                    if (l, v) in marg:
                        marg[(l, v)] /= s
        groups.append(_replace(g, marginals=marg, share=g.share / total))
    return AggregateDataset(support, dataset.range, tuple(groups), dataset.binary)


def _replace(group: GroupRecord, **changes) -> GroupRecord:
    from dataclasses import replace
    return replace(group, **changes)


def weight_vector(support: CovariateSupport, weights) -> np.ndarray:
    """Validate λ: either a length-K array or a mapping point -> weight."""
    if isinstance(weights, Mapping):
        lam = np.zeros(support.K)
        for pt, w in weights.items():
            lam[flat_index(support, pt)] += w
    else:
        lam = np.asarray(weights, dtype=float).ravel()
    if lam.shape != (support.K,):
        raise ValueError(f"weights must have length K={support.K}")
    if not np.all(np.isfinite(lam)):
        raise ValueError("weights must be finite")
    if not np.any(lam != 0):
        raise ValueError("weights must have at least one nonzero entry")
    return lam


def contrast(support: CovariateSupport, plus: Sequence[float],
             minus: Sequence[float]) -> np.ndarray:
    """λ = e(plus) - e(minus)."""
    return weight_vector(support, {tuple(plus): 1.0, tuple(minus): -1.0})


@dataclass(frozen=True)
class ShapeConstraintSet:
    """Polyhedral restriction ``S c <= a`` on a group's conditional means.

    ``per_group`` optionally overrides the shared ``(S, a)`` for specific
    group ids.
    """

    S: np.ndarray
    a: np.ndarray
    per_group: Mapping[str, tuple[np.ndarray, np.ndarray]] = field(default_factory=dict)

    def __post_init__(self):
        S = np.atleast_2d(np.asarray(self.S, dtype=float))
        a = np.asarray(self.a, dtype=float).ravel()
        if S.shape[0] != a.shape[0]:
            raise ValueError("S and a have inconsistent row counts")
        if not (np.all(np.isfinite(S)) and np.all(np.isfinite(a))):
            raise ValueError("shape rows must be finite")
        object.__setattr__(self, "S", S)
        object.__setattr__(self, "a", a)

    @property
    def num_columns(self) -> int:
        return self.S.shape[1]

    def for_group(self, group_id: str) -> tuple[np.ndarray, np.ndarray]:
        if group_id in self.per_group:
            S, a = self.per_group[group_id]
            return np.atleast_2d(np.asarray(S, float)), np.asarray(a, float).ravel()
        return self.S, self.a

    def check(self, K: int):
        if self.num_columns != K:
            raise ValueError(f"shape matrix has {self.num_columns} columns, expected K={K}")
        for S, _ in self.per_group.values():
            if np.atleast_2d(S).shape[1] != K:
                raise ValueError("per-group shape matrix has wrong column count")

    @classmethod
    def stack(cls, *sets: "ShapeConstraintSet") -> "ShapeConstraintSet":
        return cls(np.vstack([s.S for s in sets]), np.concatenate([s.a for s in sets]))


def monotone_constraints(support: CovariateSupport, covariate,
                         direction: str) -> ShapeConstraintSet:
    """Monotonicity of E[Y | X, G] in one covariate, holding the others fixed.

    ``direction="dec"`` gives rows ``c(x with value v_next) - c(x with v) <= 0``
    for each adjacent pair of values; ``"inc"`` flips the sign.  Pairs whose
    partner point is absent from the support are skipped.
    """
    if direction not in ("inc", "dec"):
        raise ValueError("direction must be 'inc' or 'dec'")
    l = support.covariate_index(covariate)
    vals = support.per_covariate_values[l]
    sign = 1.0 if direction == "dec" else -1.0
    rows = []
    for k, pt in enumerate(support.points):
        i = vals.index(pt[l])
        if i + 1 >= len(vals):
            continue
        nxt = list(pt)
        nxt[l] = vals[i + 1]
        try:
            j = flat_index(support, nxt)
        except UnknownPointError:
            continue
        row = np.zeros(support.K)
        row[j] += sign
        row[k] -= sign
        rows.append(row)
    if not rows:
        raise ValueError("monotonicity produced no constraints on this support")
    return ShapeConstraintSet(np.array(rows), np.zeros(len(rows)))


@dataclass(frozen=True)
class Witness:
    """A (joint, conditional means) pair attaining a reported bound."""

    p: np.ndarray
    c: np.ndarray


@dataclass(frozen=True)
class GroupBound:
    group_id: str
    share: float
    lower: float
    upper: float
    witness_lower: Witness | None = None
    witness_upper: Witness | None = None
    slack: float = 0.0


@dataclass(frozen=True)
class BoundResult:
    per_group: tuple[GroupBound, ...]
    lower: float
    upper: float

    @classmethod
    def from_groups(cls, groups: Iterable[GroupBound]) -> "BoundResult":
        groups = tuple(groups)
        lo = float(sum(g.share * g.lower for g in groups))
        hi = float(sum(g.share * g.upper for g in groups))
        return cls(groups, lo, hi)

    @property
    def interval(self) -> tuple[float, float]:
        return (self.lower, self.upper)

    def __getitem__(self, group_id: str) -> GroupBound:
        for g in self.per_group:
            if g.group_id == group_id:
                return g
        raise KeyError(group_id)
