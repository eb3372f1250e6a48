"""ulln-lab: simulation and numerical audit of translated empirical sums
whose summand function may blow up at the origin."""

from .distributions import (DistributionSpec, binomial_upper_median_tail, cdf,
                            draw_sample, median_tail_bound_holds, pdf, quantile)
from .engine import (L1Curve, SimulationPlan, conditional_tail_probability,
                     convergence_study, empirical_h_mean, l1_error_at,
                     pinned_sample, sup_l1_curve, target_expectation,
                     taylor_residual)
from .estimators import (EstimatorSpec, check_bracketing, estimate,
                         get_estimator, interpolate, leave_first_out,
                         m_estimate, median, permutation_symmetry_check)
from .auditor import AuditSettings, ConditionReport, audit_conditions, quad_expectation
from .hfuncs import (EnvelopeParams, HSpec, envelope_m, eval_antideriv, eval_h,
                     eval_h_prime, flagship_envelope, get_h)

__version__ = "0.1.0"

__all__ = [
    "AuditSettings", "ConditionReport", "DistributionSpec", "EnvelopeParams",
    "EstimatorSpec", "HSpec", "L1Curve", "SimulationPlan", "__version__",
    "audit_conditions", "binomial_upper_median_tail", "cdf",
    "check_bracketing", "conditional_tail_probability", "convergence_study",
    "draw_sample", "empirical_h_mean", "envelope_m", "estimate",
    "eval_antideriv", "eval_h", "eval_h_prime", "flagship_envelope",
    "get_estimator", "get_h", "interpolate", "l1_error_at", "leave_first_out",
    "m_estimate", "median", "median_tail_bound_holds",
    "permutation_symmetry_check", "pdf", "pinned_sample", "quad_expectation",
    "quantile", "sup_l1_curve", "target_expectation", "taylor_residual",
]
