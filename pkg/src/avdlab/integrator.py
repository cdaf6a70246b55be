"""Adaptive Dormand-Prince 5(4) integration of the phase-space field.

Two interchangeable loops implement the same algorithm:

* ``_dopri_c`` (Cython) -- used when the problem has a linear gradient
  ``H x - g`` and the schedule is a builtin, i.e. every case the experiments
  touch;
* ``_dopri_py`` -- pure Python, any problem and schedule.

The compiled module is optional; if it cannot be imported, or the environment
variable ``AVDLAB_PURE_PYTHON`` is set, every integration runs in Python.
"""

from __future__ import annotations

import math
import os
from dataclasses import dataclass
from typing import Optional

import numpy as np

from . import _dopri_py
from .dynamics import DynamicsSpec, PhaseState, Variant, rhs
from .schedules import SCHEDULE_KINDS

try:
    from . import _dopri_c
except ImportError:  # pragma: no cover - depends on the build
    _dopri_c = None

__all__ = [
    "IntegratorConfig",
    "StepStats",
    "Trajectory",
    "IntegrationError",
    "integrate",
    "sample_at",
    "time_grid",
    "BACKEND",
    "compiled_available",
]


def compiled_available() -> bool:
    return _dopri_c is not None


BACKEND = "compiled" if compiled_available() and not os.environ.get("AVDLAB_PURE_PYTHON") else "python"


@dataclass(frozen=True)
class IntegratorConfig:
    """Tolerances and output sampling.

    ``sample_times`` overrides ``samples_per_decade``; either way the start
    and end times are always part of the grid.
    """

    rel_tol: float = 1e-10
    abs_tol: float = 1e-12
    max_steps: int = 10_000_000
    initial_step: Optional[float] = None
    samples_per_decade: int = 64
    sample_times: Optional[tuple] = None

    def __post_init__(self):
        if not (self.rel_tol > 0 and self.abs_tol > 0):
            raise ValueError("rel_tol and abs_tol must be positive")
        if self.max_steps < 1:
            raise ValueError("max_steps must be >= 1")
        if self.initial_step is not None and not self.initial_step > 0:
            raise ValueError("initial_step must be positive")
        if self.samples_per_decade < 1:
            raise ValueError("samples_per_decade must be >= 1")
        if self.sample_times is not None:
            object.__setattr__(self, "sample_times", tuple(float(t) for t in self.sample_times))


@dataclass(frozen=True)
class StepStats:
    accepted: int
    rejected: int
    min_step: float
    max_step: float

    def as_dict(self) -> dict:
        return {"accepted": self.accepted, "rejected": self.rejected,
                "min_step": self.min_step, "max_step": self.max_step}


@dataclass(frozen=True)
class Trajectory:
    """Sampled solution; ``xs[k]`` and ``vs[k]`` are x and x' at ``times[k]``."""

    spec: DynamicsSpec
    times: np.ndarray
    xs: np.ndarray
    vs: np.ndarray
    step_stats: StepStats
    tolerance_used: tuple[float, float]
    backend: str = "python"

    def __post_init__(self):
        for arr in (self.times, self.xs, self.vs):
            arr.setflags(write=False)

    @property
    def states(self) -> list[tuple[np.ndarray, np.ndarray]]:
        return list(zip(self.xs, self.vs))

    @property
    def t0(self) -> float:
        return float(self.times[0])

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def __len__(self) -> int:
        return self.times.size

    def sample_at(self, t: float):
        return sample_at(self, t)


class IntegrationError(RuntimeError):
    """Integration stopped early; ``partial`` holds the samples reached."""

    def __init__(self, message: str, partial: Trajectory, t_stop: float):
        super().__init__(message)
        self.partial = partial
        self.t_stop = t_stop


def time_grid(t_start: float, t_end: float, config: IntegratorConfig) -> np.ndarray:
    if config.sample_times is not None:
        pts = np.array(sorted(set(config.sample_times)), dtype=float)
        if pts.size and (pts[0] < t_start or pts[-1] > t_end):
            raise ValueError(f"sample times must lie in [{t_start}, {t_end}]")
        pts = pts[(pts > t_start) & (pts < t_end)]
        return np.concatenate(([t_start], pts, [t_end]))
    decades = math.log10(t_end / t_start)
    n = max(int(math.ceil(config.samples_per_decade * decades - 1e-9)), 1) + 1
    grid = np.geomspace(t_start, t_end, n)
    grid[0], grid[-1] = t_start, t_end
    return grid


def _python_field(spec: DynamicsSpec):
    n = spec.problem.dim
    grad = spec.problem.gradient
    is_avd = spec.variant.is_avd
    alpha, gamma = spec.alpha, spec.gamma
    eps = spec.schedule.eval
    no_eps = spec.variant is Variant.AVD_alpha or spec.schedule.kind == "zero"

    def f(t, y):
        x = y[:n]
        v = y[n:]
        a = alpha / t if is_avd else gamma
        dv = -a * v - grad(x)
        if not no_eps:
            dv = dv - eps(t) * x
        return np.concatenate((v, dv))

    return f


def _use_compiled(spec: DynamicsSpec, backend: Optional[str]) -> bool:
    choice = backend or BACKEND
    if choice not in ("compiled", "python"):
        raise ValueError(f"unknown backend {choice!r}")
    if choice == "python":
        return False
    if _dopri_c is None:
        if backend == "compiled":
            raise RuntimeError("compiled backend requested but avdlab._dopri_c is not built")
        return False
    return spec.problem.linear_gradient is not None and spec.schedule.kind in SCHEDULE_KINDS


def integrate(
    spec: DynamicsSpec,
    x0,
    v0,
    t_end: float,
    config: Optional[IntegratorConfig] = None,
    *,
    t_start: Optional[float] = None,
    backend: Optional[str] = None,
) -> Trajectory:
    """Integrate from (x0, v0) at ``t_start`` (default ``spec.t0``) to ``t_end``.

    Raises
    ------
    IntegrationError
        When ``max_steps`` is exhausted or the step size underflows
        (h < 1e-14 t); the exception carries the partial trajectory.
    """
    config = config or IntegratorConfig()
    t_start = spec.t0 if t_start is None else float(t_start)
    if t_start < spec.t0:
        raise ValueError(f"t_start={t_start} precedes t0={spec.t0}")
    if not t_end > t_start:
        raise ValueError(f"t_end={t_end} must exceed start time {t_start}")
    n = spec.problem.dim
    x0 = np.atleast_1d(np.asarray(x0, dtype=float))
    v0 = np.atleast_1d(np.asarray(v0, dtype=float))
    if x0.shape != (n,) or v0.shape != (n,):
        raise ValueError(f"initial data must have shape ({n},)")
    # validates finiteness and the t >= t0 precondition once
    rhs(spec, PhaseState(t_start, x0, v0))

    grid = time_grid(t_start, t_end, config)
    y0 = np.concatenate((x0, v0))
    h0 = config.initial_step or 0.0
    if _use_compiled(spec, backend):
        H, g = spec.problem.linear_gradient
        eps_kind = 0 if spec.variant is Variant.AVD_alpha else SCHEDULE_KINDS[spec.schedule.kind]
        damp_kind, damp_param = (0, spec.alpha) if spec.variant.is_avd else (1, spec.gamma)
        result = _dopri_c.run_linear(
            t_start, y0, grid, damp_kind, float(damp_param), eps_kind, float(spec.schedule.param),
            np.asarray(H, dtype=float), np.asarray(g, dtype=float),
            config.rel_tol, config.abs_tol, config.max_steps, h0,
        )
        used = "compiled"
    else:
        result = _dopri_py.run(
            _python_field(spec), t_start, y0, grid, config.rel_tol, config.abs_tol, config.max_steps, h0
        )
        used = "python"
    out, n_done, status, t_stop, acc, rej, hmin, hmax = result
    traj = Trajectory(
        spec=spec,
        times=grid[:n_done].copy(),
        xs=np.ascontiguousarray(out[:n_done, :n]),
        vs=np.ascontiguousarray(out[:n_done, n:]),
        step_stats=StepStats(int(acc), int(rej), float(hmin), float(hmax)),
        tolerance_used=(config.rel_tol, config.abs_tol),
        backend=used,
    )
    if status == 1:
        raise IntegrationError(
            f"max_steps={config.max_steps} exceeded at t={t_stop:.6g}", traj, t_stop)
    if status == 2:
        raise IntegrationError(f"step size underflow: integration stalled at t={t_stop:.6g}", traj, t_stop)
    if not (np.all(np.isfinite(traj.xs)) and np.all(np.isfinite(traj.vs))):
        raise IntegrationError("non-finite state in trajectory", traj, t_stop)
    return traj


def _accel(spec: DynamicsSpec, t: float, x, v) -> np.ndarray:
    return rhs(spec, PhaseState(t, x, v))[1]


def sample_at(traj: Trajectory, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Cubic Hermite interpolation of (x, v) between stored samples.

    x uses the stored velocities as slopes; v uses accelerations from the
    field at the two bracketing samples.
    """
    times = traj.times
    if not times[0] <= t <= times[-1]:
        raise ValueError(f"t={t} outside trajectory range [{times[0]}, {times[-1]}]")
    k = int(np.searchsorted(times, t, side="left"))
    if k < times.size and times[k] == t:
        return traj.xs[k].copy(), traj.vs[k].copy()
    k -= 1
    t_a, t_b = times[k], times[k + 1]
    h = t_b - t_a
    s = (t - t_a) / h
    h00 = 2 * s**3 - 3 * s**2 + 1
    h10 = s**3 - 2 * s**2 + s
    h01 = -2 * s**3 + 3 * s**2
    h11 = s**3 - s**2
    xa, xb, va, vb = traj.xs[k], traj.xs[k + 1], traj.vs[k], traj.vs[k + 1]
    aa = _accel(traj.spec, t_a, xa, va)
    ab = _accel(traj.spec, t_b, xb, vb)
    x = h00 * xa + h10 * h * va + h01 * xb + h11 * h * vb
    v = h00 * va + h10 * h * aa + h01 * vb + h11 * h * ab
    return x, v
