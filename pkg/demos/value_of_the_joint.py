"""How much would knowing the covariate joint help?

With two binary covariates and symmetric marginals the feasible joints form
a segment.  At each joint on it the bounds are a closed-form LP; sweeping
the segment shows how far the lower bound moves, and its minimum is the
sharp lower bound that uses only the marginals.
"""

import numpy as np

from aggbounds.bounds import InnerProblem, inner_value, joint_known_range
from aggbounds.core import CovariateSupport, GroupRecord, OutcomeRange
from aggbounds.feasible import chart, min_slack_joint

support = CovariateSupport.binary(2)
unit = OutcomeRange(0.0, 1.0)
half = {(0, 0.0): .5, (0, 1.0): .5, (1, 0.0): .5, (1, 1.0): .5}
group = GroupRecord("g", 1.0, 0.9, half)
lam = np.array([-1.0, 0, 1, 0])   # cell (1,0) minus cell (0,0)

p0, slack = min_slack_joint(group, support)
ch = chart(group, support, p0, slack)
for t in np.linspace(-1.0, 1.0, 21):
    p = ch.point(np.array([t]))
    if np.any(p < -1e-12):
        continue
    p = np.clip(p, 0.0, None)
    lo, _ = inner_value(InnerProblem(lam, p, 0.9, unit, "min"))
    print(f"joint {np.round(p, 3)}  lower bound {lo:+.3f}")

jk = joint_known_range(group, support, lam, unit)
print(f"lower bound ranges over {jk.lower_range}, upper over {jk.upper_range}")
