"""Right-hand sides of the damped inertial systems in phase space (x, v).

Three variants share one first-order field::

    AVD_alpha_eps   x'' + (alpha/t) x' + grad Phi(x) + eps(t) x = 0
    AVD_alpha       the same with eps = 0
    HBF_eps         x'' + gamma x'     + grad Phi(x) + eps(t) x = 0
"""

from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .problems import Problem
from .schedules import EpsilonSchedule, builtin_schedule

__all__ = ["Variant", "DynamicsSpec", "PhaseState", "DynamicsError", "rhs", "make_spec"]


class DynamicsError(ValueError):
    pass


class Variant(str, enum.Enum):
    AVD_alpha_eps = "AVD_alpha_eps"
    AVD_alpha = "AVD_alpha"
    HBF_eps = "HBF_eps"

    @property
    def is_avd(self) -> bool:
        return self is not Variant.HBF_eps


@dataclass(frozen=True)
class DynamicsSpec:
    variant: Variant
    problem: Problem
    schedule: EpsilonSchedule
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    t0: float = 1.0

    def __post_init__(self):
        variant = Variant(self.variant)
        object.__setattr__(self, "variant", variant)
        if variant.is_avd:
            if self.alpha is None or not self.alpha > 0:
                raise DynamicsError(f"{variant.value} needs alpha > 0, got {self.alpha}")
            if not self.t0 > 0:
                raise DynamicsError(f"{variant.value} needs t0 > 0 (damping alpha/t is singular at 0)")
        else:
            if self.gamma is None or not self.gamma > 0:
                raise DynamicsError(f"HBF_eps needs gamma > 0, got {self.gamma}")
        if variant is Variant.AVD_alpha and self.schedule.kind != "zero":
            object.__setattr__(self, "schedule", builtin_schedule("zero"))
        self.schedule.check_start(self.t0)

    def damping(self, t):
        """Viscous damping coefficient a(t)."""
        if self.variant.is_avd:
            return self.alpha / t
        return self.gamma

    def epsilon(self, t):
        if self.variant is Variant.AVD_alpha:
            return 0.0
        return self.schedule.eval(t)

    def describe(self) -> dict:
        return {
            "variant": self.variant.value,
            "alpha": self.alpha,
            "gamma": self.gamma,
            "schedule": self.schedule.label,
            "problem": self.problem.describe(),
            "t0": self.t0,
        }


def make_spec(variant, problem: Problem, schedule: Optional[EpsilonSchedule] = None, *,
              alpha=None, gamma=None, t0: float = 1.0) -> DynamicsSpec:
    if schedule is None:
        schedule = builtin_schedule("zero")
    return DynamicsSpec(Variant(variant), problem, schedule, alpha=alpha, gamma=gamma, t0=t0)


@dataclass(frozen=True)
class PhaseState:
    t: float
    x: np.ndarray
    v: np.ndarray

    def __post_init__(self):
        x = np.atleast_1d(np.asarray(self.x, dtype=float))
        v = np.atleast_1d(np.asarray(self.v, dtype=float))
        if x.shape != v.shape:
            raise DynamicsError(f"x and v shapes differ: {x.shape} vs {v.shape}")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(v)) and np.isfinite(self.t)):
            raise DynamicsError("phase state must be finite")
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "v", v)


def rhs(spec: DynamicsSpec, state: PhaseState) -> tuple[np.ndarray, np.ndarray]:
    """Return (dx, dv) = (v, -a(t) v - grad Phi(x) - eps(t) x)."""
    t = state.t
    if t < spec.t0:
        raise DynamicsError(f"time {t} precedes t0={spec.t0}")
    if state.x.shape != (spec.problem.dim,):
        raise DynamicsError(f"state dimension {state.x.shape} does not match problem dim {spec.problem.dim}")
    grad = np.asarray(spec.problem.gradient(state.x), dtype=float)
    if not np.all(np.isfinite(grad)):
        raise DynamicsError(f"non-finite gradient at t={t}")
    dv = -spec.damping(t) * state.v - grad - spec.epsilon(t) * state.x
    return state.v.copy(), dv
