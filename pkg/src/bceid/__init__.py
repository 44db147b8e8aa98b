"""Exact tests of whether a prior and an action distribution are BCE-consistent."""

from .consistency import (
    BeliefSystem,
    DualCertificate,
    JointDistribution,
    Verdict,
    check_bce,
    extreme_marginal_bounds,
    recover_belief_system,
    support_value,
)
from .errors import CapExceededError, DominatedActionError, InputError, StructureError
from .geometry import contains, facets, refinement_rays, vertices, weighted_minkowski
from .model import DecisionProblem, Distribution, classify, optimal_belief_set, parse_distribution, parse_problem
from .rationalizer import (
    PosteriorDistribution,
    core_check,
    experiment_kernel,
    implement_tau,
    menu_choice,
    menu_measure,
    optimal_actions,
    tau_from_bce,
)

__version__ = "0.1.0"
