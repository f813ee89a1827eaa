"""Exact 1-D optimal partial transport, sliced partial transport and
applications to registration and color adaptation."""

from .core import (NONE, CostSpec, DualPair, PartialPlan, Solution, SolveStats,
                   ValidationError, eval_plan_cost, gen_gaussian_mixture,
                   gen_uniform, symmetric_shift)
from .oracle import (oracle_dp, oracle_dp_full, oracle_enumerate,
                     oracle_extended_balanced)
from .registration import (RegistrationConfig, Transform, register,
                           transform_error, umeyama_fit)
from .sliced import (DirectionSet, sample_directions, sopt_estimate,
                     sopt_slice_displacement)
from .solver import (InvariantViolation, OptimalityReport, SolverConfig, solve,
                     solve_pot, verify_optimality)

__version__ = "0.1.0"

__all__ = [
    "NONE", "CostSpec", "DualPair", "PartialPlan", "Solution", "SolveStats",
    "ValidationError", "eval_plan_cost", "gen_gaussian_mixture", "gen_uniform",
    "symmetric_shift", "oracle_dp", "oracle_dp_full", "oracle_enumerate",
    "oracle_extended_balanced", "RegistrationConfig", "Transform", "register",
    "transform_error", "umeyama_fit", "DirectionSet", "sample_directions",
    "sopt_estimate", "sopt_slice_displacement", "InvariantViolation",
    "OptimalityReport", "SolverConfig", "solve", "solve_pot", "verify_optimality",
]
