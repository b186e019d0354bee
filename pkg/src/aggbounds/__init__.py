"""Sharp bounds on individual-level conditional means from aggregate data."""

from .core import (AggregateDataset, BoundResult, CovariateSupport, FinerMoment, GroupBound,
                   GroupRecord, OutcomeRange, ShapeConstraintSet, Violation, Witness, contrast,
                   flat_index, indicator_matrix, monotone_constraints, support_values,
                   validate_dataset, weight_vector)
from .linprog import LinearProgram, LpSolution, solve
from .feasible import (EmptyFeasibleSetError, FeasibleSetChart, InconsistentMarginalsWarning,
                       chart, min_slack_joint, relaxed_chart, sample_starts)
from .bounds import (InnerProblem, SearchOptions, group_bounds, identified_set,
                     inner_closed_form, inner_lp, joint_known_range)
from .frechet import FrechetCell, cell_bounds, frechet_identified_set
from .inference import (ConfidenceReport, MarginalInterval, bonferroni_level, ci_identified_set,
                        clopper_pearson, normal_mean_ci)
from .simlab import (JointSpec, MicroSample, aggregate_micro, brute_force_bounds,
                     coverage_study, exercise_preset, generate)

__version__ = "0.1.0"
