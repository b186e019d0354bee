"""Fréchet-inequality bounds for binary outcomes.

With a binary outcome the group mean is ``P[Y=1 | g]``, so every joint cell
probability ``P[Y=y, X=x_k | g]`` is bounded by the Fréchet inequalities in
terms of observed marginals.  The ratio of those bounds gives an interval
for each conditional mean ``E[Y | X=x_k, g]`` that is computed without any
optimization.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .core import AggregateDataset, CovariateSupport, GroupRecord, weight_vector


class NonBinaryOutcomeError(ValueError):
    pass


@dataclass(frozen=True)
class FrechetCell:
    """Bounds on ``P[Y=y, X=x_k | g]``."""

    lower: float
    upper: float

    def __post_init__(self):
        if not (0.0 <= self.lower <= self.upper <= 1.0):
            raise ValueError(f"invalid cell bounds [{self.lower}, {self.upper}]")


def _require_binary(dataset_or_flag):
    flag = getattr(dataset_or_flag, "binary", dataset_or_flag)
    if not flag:
        raise NonBinaryOutcomeError("Fréchet bounds need a binary outcome")


def cell_bounds(group: GroupRecord, support: CovariateSupport, y: int, k: int) -> FrechetCell:
    """Fréchet bounds on ``P[Y=y, X=x_k | g]`` from the group's marginals."""
    if y not in (0, 1):
        raise NonBinaryOutcomeError("y must be 0 or 1")
    if not 0.0 <= group.y_mean <= 1.0:
        raise NonBinaryOutcomeError("group mean is not a probability")
    py = group.y_mean if y == 1 else 1.0 - group.y_mean
    pt = support.points[k]
    probs = [float(group.marginals.get((l, v), 0.0)) for l, v in enumerate(pt)]
    L = len(probs)
    lo = max(py + sum(probs) - L, 0.0)
    hi = min([py] + probs)
    # rounding can leave lo a hair above hi when the bounds coincide
    lo = min(max(lo, 0.0), 1.0)
    hi = min(max(hi, lo), 1.0)
    return FrechetCell(lo, hi)


def conditional_mean_bounds(group: GroupRecord, support: CovariateSupport, k: int):
    """Interval for ``E[Y | X=x_k, g]`` from the ratio of cell bounds.

    A cell with no possible mass (0/0) is unrestricted, giving ``[0, 1]``.
    """
    l1 = cell_bounds(group, support, 1, k)
    l0 = cell_bounds(group, support, 0, k)
    den_lo = l1.lower + l0.upper
    den_hi = l0.lower + l1.upper
    lo = l1.lower / den_lo if den_lo > 0 else 0.0
    hi = l1.upper / den_hi if den_hi > 0 else 1.0
    return lo, hi


@dataclass(frozen=True)
class FrechetResult:
    per_group: dict
    lower: float
    upper: float

    @property
    def interval(self):
        return (self.lower, self.upper)


def group_frechet(group: GroupRecord, support: CovariateSupport, lam) -> tuple[float, float]:
    """Weighted sum of per-cell ratio bounds.

    Negative weights take the opposite endpoint, so the result is the
    interval sum of ``lam_k * [lo_k, hi_k]``.
    """
    lam = weight_vector(support, lam)
    b = np.array([conditional_mean_bounds(group, support, k) for k in range(support.K)])
    pos, neg = np.maximum(lam, 0.0), np.maximum(-lam, 0.0)
    return float(pos @ b[:, 0] - neg @ b[:, 1]), float(pos @ b[:, 1] - neg @ b[:, 0])


def frechet_identified_set(dataset: AggregateDataset, lam) -> FrechetResult:
    """Share-weighted Fréchet interval; contains the sharp identified set."""
    _require_binary(dataset)
    per = {}
    lo = hi = 0.0
    for g in dataset.groups:
        a, b = group_frechet(g, dataset.support, lam)
        per[g.group_id] = (a, b)
        lo += g.share * a
        hi += g.share * b
    return FrechetResult(per, lo, hi)
