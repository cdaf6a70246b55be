"""Numerical laboratory for inertial dynamics with vanishing damping and
Tikhonov regularization."""

from .dynamics import DynamicsSpec, PhaseState, Variant, make_spec, rhs
from .integrator import BACKEND, IntegrationError, IntegratorConfig, Trajectory, integrate, sample_at
from .problems import Problem, builtin_problem, check_convexity, quadratic_problem
from .schedules import EpsilonSchedule, builtin_schedule, classify_numerically, parse_schedule

__version__ = "0.1.0"

__all__ = [
    "DynamicsSpec",
    "PhaseState",
    "Variant",
    "make_spec",
    "rhs",
    "BACKEND",
    "IntegrationError",
    "IntegratorConfig",
    "Trajectory",
    "integrate",
    "sample_at",
    "Problem",
    "builtin_problem",
    "check_convexity",
    "quadratic_problem",
    "EpsilonSchedule",
    "builtin_schedule",
    "classify_numerically",
    "parse_schedule",
]
