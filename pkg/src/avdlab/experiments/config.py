"""Declarative experiment description, loaded from YAML or built in code."""

from __future__ import annotations

import copy
import math
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Any, Optional

import numpy as np
import yaml

from ..dynamics import DynamicsSpec, Variant, make_spec
from ..integrator import IntegratorConfig
from ..problems import Problem, ProblemError, builtin_problem
from ..schedules import ScheduleError, parse_schedule

__all__ = ["ConfigError", "ExperimentConfig", "OUTPUT_KINDS", "load_config"]

# Recognised entries of ``outputs``. Each is either a bare name or a
# one-key mapping ``{kind: options}``.
OUTPUT_KINDS = (
    "table_at",
    "rate_window",
    "ergodic",
    "invariants",
    "oracle_compare",
    "fast_rate",
    "energy_estimates",
    "minimizing",
    "tikhonov",
)

_INTEGRATOR_KEYS = {"rel_tol", "abs_tol", "max_steps", "initial_step", "samples_per_decade", "uniform_step"}


class ConfigError(ValueError):
    """Invalid experiment description (CLI exit code 2)."""


@dataclass(frozen=True)
class ExperimentConfig:
    """One integration plus the reports requested on it.

    ``integrator`` holds overrides of ``IntegratorConfig`` fields and the
    extra key ``uniform_step``, which replaces the log-uniform output grid
    by a uniform one (needed to resolve oscillations at large t).
    """

    name: str
    variant: str = "AVD_alpha_eps"
    alpha: Optional[float] = None
    gamma: Optional[float] = None
    schedule: str = "zero"
    problem: str = "zero"
    problem_params: tuple = ()
    t0: float = 1.0
    x0: tuple = (1.0,)
    v0: tuple = (0.0,)
    horizon: float = 1e3
    outputs: tuple = ()
    integrator: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "problem_params", tuple(float(v) for v in self.problem_params))
        object.__setattr__(self, "x0", tuple(float(v) for v in np.atleast_1d(self.x0)))
        object.__setattr__(self, "v0", tuple(float(v) for v in np.atleast_1d(self.v0)))
        object.__setattr__(self, "outputs", tuple(_normalize_output(o) for o in self.outputs))
        self.validate()

    # -- validation --------------------------------------------------------

    def validate(self) -> None:
        if not self.name or not isinstance(self.name, str):
            raise ConfigError("config needs a non-empty name")
        try:
            Variant(self.variant)
        except ValueError:
            raise ConfigError(f"unknown variant {self.variant!r}") from None
        if not (math.isfinite(self.horizon) and self.horizon > self.t0):
            raise ConfigError(f"horizon {self.horizon} must exceed t0 {self.t0}")
        unknown = set(self.integrator) - _INTEGRATOR_KEYS
        if unknown:
            raise ConfigError(f"unknown integrator keys {sorted(unknown)}")
        # builds problem, schedule and spec, surfacing their errors as config errors
        spec = self.build_spec()
        if len(self.x0) != spec.problem.dim or len(self.v0) != spec.problem.dim:
            raise ConfigError(f"x0 and v0 must have dimension {spec.problem.dim}")

    def build_problem(self) -> Problem:
        try:
            return builtin_problem(self.problem, self.problem_params)
        except ProblemError as exc:
            raise ConfigError(str(exc)) from exc

    def build_spec(self) -> DynamicsSpec:
        problem = self.build_problem()
        try:
            schedule = parse_schedule(self.schedule)
            kw = {"t0": self.t0}
            if self.alpha is not None:
                kw["alpha"] = self.alpha
            if self.gamma is not None:
                kw["gamma"] = self.gamma
            return make_spec(self.variant, problem, schedule, **kw)
        except (ScheduleError, ValueError, TypeError) as exc:
            raise ConfigError(f"{self.name}: {exc}") from exc

    def output(self, kind: str):
        """Options of the first output of ``kind``; None if not requested."""
        for k, opts in self.outputs:
            if k == kind:
                return opts
        return None

    def build_integrator(self, extra_times=()) -> IntegratorConfig:
        opts = {k: v for k, v in self.integrator.items() if k != "uniform_step"}
        step = self.integrator.get("uniform_step")
        times = [float(t) for t in extra_times if self.t0 < t < self.horizon]
        if step is not None:
            if not step > 0:
                raise ConfigError("uniform_step must be positive")
            n = int(math.ceil((self.horizon - self.t0) / step))
            times.extend(np.linspace(self.t0, self.horizon, n + 1)[1:-1].tolist())
        elif times:
            base = IntegratorConfig(**opts)
            decades = math.log10(self.horizon / self.t0)
            n = max(int(math.ceil(base.samples_per_decade * decades - 1e-9)), 1) + 1
            times.extend(np.geomspace(self.t0, self.horizon, n)[1:-1].tolist())
        if times:
            opts["sample_times"] = tuple(sorted(set(times)))
        try:
            return IntegratorConfig(**opts)
        except (TypeError, ValueError) as exc:
            raise ConfigError(f"{self.name}: {exc}") from exc

    # -- (de)serialization ------------------------------------------------

    def to_dict(self) -> dict:
        d = {
            "name": self.name,
            "variant": self.variant,
            "schedule": self.schedule,
            "problem": self.problem,
            "problem_params": list(self.problem_params),
            "t0": self.t0,
            "x0": list(self.x0),
            "v0": list(self.v0),
            "horizon": self.horizon,
            "outputs": [k if opts == {} else {k: copy.deepcopy(opts)} for k, opts in self.outputs],
            "integrator": dict(self.integrator),
        }
        if self.alpha is not None:
            d["alpha"] = self.alpha
        if self.gamma is not None:
            d["gamma"] = self.gamma
        return d

    @classmethod
    def from_dict(cls, data: dict) -> "ExperimentConfig":
        if not isinstance(data, dict):
            raise ConfigError("config must be a mapping")
        known = {"name", "variant", "alpha", "gamma", "schedule", "problem", "problem_params",
                 "t0", "x0", "v0", "initial", "horizon", "outputs", "integrator"}
        unknown = set(data) - known
        if unknown:
            raise ConfigError(f"unknown config keys {sorted(unknown)}")
        d = dict(data)
        if "initial" in d:
            init = d.pop("initial")
            if not isinstance(init, dict) or set(init) - {"x0", "v0"}:
                raise ConfigError("initial must be a mapping with x0 and v0")
            d.update(init)
        d["outputs"] = tuple(d.get("outputs") or ())
        d["integrator"] = dict(d.get("integrator") or {})
        try:
            return cls(**d)
        except ConfigError:
            raise
        except (TypeError, ValueError) as exc:
            raise ConfigError(str(exc)) from exc

    def with_overrides(self, rel_tol: Optional[float] = None, horizon: Optional[float] = None) -> "ExperimentConfig":
        cfg = self
        if rel_tol is not None:
            cfg = replace(cfg, integrator={**cfg.integrator, "rel_tol": float(rel_tol)})
        if horizon is not None:
            cfg = replace(cfg, horizon=float(horizon))
        return cfg


def _normalize_output(entry) -> tuple[str, Any]:
    if isinstance(entry, tuple) and len(entry) == 2 and isinstance(entry[0], str):
        kind, opts = entry
    elif isinstance(entry, str):
        kind, opts = entry, {}
    elif isinstance(entry, dict) and len(entry) == 1:
        (kind, opts), = entry.items()
    else:
        raise ConfigError(f"cannot read output entry {entry!r}")
    if kind not in OUTPUT_KINDS:
        raise ConfigError(f"unknown output {kind!r}; expected one of {list(OUTPUT_KINDS)}")
    if opts is None:
        opts = {}
    if kind == "table_at":
        opts = {"times": [float(t) for t in (opts if isinstance(opts, (list, tuple)) else opts.get("times", []))]}
    elif kind == "rate_window" and isinstance(opts, (list, tuple)):
        opts = {"window": [float(v) for v in opts]}
    if not isinstance(opts, dict):
        raise ConfigError(f"options of output {kind!r} must be a mapping")
    return kind, opts


def load_config(path) -> ExperimentConfig:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from exc
    try:
        data = yaml.safe_load(text)
    except yaml.YAMLError as exc:
        raise ConfigError(f"{path}: {exc}") from exc
    return ExperimentConfig.from_dict(data)
