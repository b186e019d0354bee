"""Bounds for one group with a single binary covariate.

A group reports P[X=1] = 0.7 and a mean outcome of 0.6.  With one covariate
the joint is pinned down, so the bounds are exact.  Adding a monotonicity
restriction (outcomes no lower when X=1) removes the negative part of the
gap, and the Fréchet interval shows what the binary-outcome shortcut gives.
"""

from aggbounds.bounds import group_bounds
from aggbounds.core import (AggregateDataset, CovariateSupport, GroupRecord, OutcomeRange,
                            contrast, monotone_constraints)
from aggbounds.frechet import frechet_identified_set

support = CovariateSupport.binary(1, ("x",))
unit = OutcomeRange(0.0, 1.0)
group = GroupRecord("A", 1.0, 0.6, {(0, 0.0): 0.3, (0, 1.0): 0.7}, count=100)
gap = contrast(support, [1], [0])   # E[Y | x=1] - E[Y | x=0]

plain = group_bounds(group, support, gap, unit)
print(f"gap, no restrictions: [{plain.lower:.4f}, {plain.upper:.4f}]")   # [-4/7, 6/7]

mono = monotone_constraints(support, "x", "inc")
shaped = group_bounds(group, support, gap, unit, shape=mono)
print(f"gap, monotone in x:   [{shaped.lower:.4f}, {shaped.upper:.4f}]")   # [0, 6/7]

ds = AggregateDataset(support, unit, (group,), binary=True)
fr = frechet_identified_set(ds, gap)
print(f"gap, Frechet:         [{fr.lower:.4f}, {fr.upper:.4f}]")

w = plain.witness_upper
print("upper witness: joint", w.p.round(4), "cell means", w.c.round(4))
