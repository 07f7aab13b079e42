"""Exact method-of-types computations: type probabilities, constrained type
enumeration, I-/mu-/tau-projections and conditional limit experiments."""
from .constraints import (EXACT, Exact, FullSimplex, Frequency, GeneralizedFrequency, Line, Moment,
                          PairConstraintSet, PointSet, Tolerance, Union, contains, enumerate_pair_types,
                          enumerate_types, residual)
from .core import (Alphabet, NType, Pmf, Weight, all_types, i_divergence, maxprob_lhs_bounds, multiplicity,
                   probability_ratio_bound, sanov_bounds, type_probability)
from .errors import *  # noqa: F401,F403
from .laws import (Ball, ExperimentRecord, RationalConcentration, TypeDistribution, conditional_ball_probability,
                   cwlln_experiment, egcp_experiment, egcp_prefix_probability, icet_experiment,
                   rational_concentration, rcwlln_experiment, sanov_rate, type_distribution)
from .projections import (ProjectionResult, gme_pair_projection, i_projection_line, i_projection_moment,
                          i_projections, i_projections_frequency, is_proper, mu_projection, tau_projection)

__version__ = "0.1.0"
