"""Built-in experiment batches: one per published table, one per theorem check."""

from __future__ import annotations

from dataclasses import dataclass, field
from functools import lru_cache
from typing import Callable, Optional

import numpy as np

from .config import ExperimentConfig
from .runner import Check, Comparison, RunResult, TableReport, compare_with_paper, run

__all__ = ["Preset", "PresetResult", "PRESETS", "get_preset", "run_preset", "preset_names"]


@dataclass(frozen=True)
class Preset:
    name: str
    description: str
    runs: tuple  # ((key, ExperimentConfig), ...)
    reference: Optional[str] = None
    cross_checks: Optional[Callable[[dict], list]] = None


@dataclass
class PresetResult:
    preset: Preset
    results: dict
    table: TableReport
    comparison: Optional[Comparison]
    cross: list = field(default_factory=list)

    def checks(self) -> list[Check]:
        out = []
        for key, r in self.results.items():
            out += [Check(f"{key}/{c.name}", c.passed, c.value, c.threshold, c.detail) for c in r.checks]
        if self.comparison is not None:
            out += self.comparison.checks()
        return out + list(self.cross)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks()) and all(r.error is None for r in self.results.values())

    def rate_fits(self) -> dict:
        return {k: r.rate_fit for k, r in self.results.items() if r.rate_fit is not None}


def _scalar(name, alpha, schedule, horizon, outputs, integrator=None, variant="AVD_alpha_eps", gamma=None):
    return ExperimentConfig(
        name=name, variant=variant, alpha=alpha, gamma=gamma, schedule=schedule, problem="zero",
        x0=(1.0,), v0=(0.0,), horizon=horizon, outputs=tuple(outputs), integrator=integrator or {},
    )


# Phi(x) = 1/2 (x_1 - 1)^2 on R^2: argmin is the line x_1 = 1, p = (1, 0).
_QUAD = ("quadratic", (1, 2, 1, 0, 1))


def _quad(name, alpha, schedule, outputs, horizon=1e4, step=0.05):
    return ExperimentConfig(
        name=name, alpha=alpha, schedule=schedule, problem=_QUAD[0], problem_params=_QUAD[1],
        x0=(0.0, 1.0), v0=(0.0, 0.0), horizon=horizon, outputs=tuple(outputs),
        integrator={"uniform_step": step},
    )


def _case1() -> Preset:
    runs = []
    for a in (1, 2, 3, 4):
        runs.append((f"alpha={a}", _scalar(
            f"case1_alpha{a}", a, "log_inv", 1e4,
            [{"table_at": [10.0, 100.0, 1000.0]},
             {"ergodic": {"at": [1e2, 1e4], "max_ratio": 0.5, "inf_at": 1e4, "max_inf": 0.05}},
             "invariants"],
            {"uniform_step": 0.5},
        )))
    return Preset("paper_case1", "eps = 1/(1 + ln t), alpha = 1..4, integrated only", tuple(runs), "case1")


def _case2() -> Preset:
    runs = []
    for a in (1, 2, 3, 4):
        outs = [{"table_at": [10.0, 100.0, 1000.0, 10000.0]},
                {"rate_window": {"window": [1e2, 1e5], "expect": -(2 * a - 1) / 4, "tol": 0.1}},
                "invariants"]
        if a <= 3:
            outs.append("oracle_compare")
        runs.append((f"alpha={a}", _scalar(f"case2_alpha{a}", a, "power:1", 1e5, outs,
                                           {"samples_per_decade": 4000})))
    runs.append(("alpha=4,eps=t^-0.5", _scalar(
        "case2_sqrt_alpha4", 4, "power:0.5", 1e5,
        [{"rate_window": {"window": [1e2, 1e5], "expect": -15 / 8, "tol": 0.1}}, "invariants"],
        {"samples_per_decade": 40000},
    )))
    return Preset("paper_case2", "eps = 1/t, alpha = 1..4, and eps = 1/sqrt(t), alpha = 4: decay rates",
                  tuple(runs), "case2")


def _case3() -> Preset:
    runs = []
    for a in (1, 2, 3, 4):
        outs = [{"table_at": [10.0, 100.0, 1000.0, 10000.0]}, "oracle_compare", "invariants"]
        if a == 4:
            outs.append({"rate_window": {"window": [1e2, 1e4], "expect": -(3 - np.sqrt(5)) / 2, "tol": 0.05}})
        runs.append((f"alpha={a}", _scalar(f"case3_alpha{a}", a, "power:2", 1e4, outs)))
    return Preset("paper_case3", "eps = 1/t^2, alpha = 1..4, explicit solutions", tuple(runs), "case3")


def _case4() -> Preset:
    cfg = _scalar("case4_alpha4", 4, "power:3", 1e4,
                  [{"table_at": [10.0, 100.0, 1000.0, 10000.0]}, "oracle_compare", "invariants"])
    return Preset("paper_case4", "eps = 1/t^3, alpha = 4", (("alpha=4", cfg),), "case4")


def _dominance(results: dict) -> list[Check]:
    """Vanishing damping beats constant damping: max|x| < max|y| for t >= 20."""
    x, y = results["x"].trajectory, results["y"].trajectory
    if x is None or y is None:
        return [Check("dominance", False, float("nan"), float("nan"), "missing trajectory")]
    mx = float(np.abs(x.xs[x.times >= 20.0, 0]).max())
    my = float(np.abs(y.xs[y.times >= 20.0, 0]).max())
    return [Check("dominance[max|x| < max|y|, t>=20]", mx < my, mx, my)]


def _compare() -> Preset:
    outs = [{"table_at": [10.0, 20.0, 50.0, 100.0]}, "invariants"]
    runs = (
        ("x", _scalar("compare_avd", 3, "power:1", 100.0, outs, {"uniform_step": 0.01})),
        ("y", _scalar("compare_hbf", None, "power:1", 100.0, outs, {"uniform_step": 0.01},
                      variant="HBF_eps", gamma=3.0)),
    )
    return Preset("paper_compare", "vanishing damping 3/t vs constant damping 3, eps = 1/t",
                  runs, "compare", _dominance)


def _weak_conv2() -> Preset:
    cfg = _quad("weak_conv2", 2, "power:1", ["invariants", {"minimizing": {"max_fraction": 1e-3}}])
    return Preset("weak_conv2", "fast vanishing eps = 1/t, alpha = 2: minimizing property", (("alpha=2", cfg),))


def _tikh_fast() -> Preset:
    runs = []
    for a in (3, 4):
        outs = [{"fast_rate": {"window": [10.0, 1e4], "max_growth": 0.05}}, "invariants"]
        if a > 3:
            outs.append({"energy_estimates": {"max_growth": 0.05}})
        runs.append((f"alpha={a}", _quad(f"tikh_fast_alpha{a}", a, "power:3", outs)))
    return Preset("tikh_fast", "superfast eps = 1/t^3: O(1/t^2) values and energy estimates", tuple(runs))


def _strong_conv() -> Preset:
    cfg = _quad("strong_conv_tikhonov", 3, "log_inv",
                [{"ergodic": {"at": [1e2, 1e4]}}, "tikhonov", "invariants"], step=0.25)
    return Preset("strong_conv_tikhonov", "slow vanishing eps = 1/(1 + ln t): ergodic convergence to p",
                  (("alpha=3", cfg),))


_BUILDERS = {
    "paper_case1": _case1,
    "paper_case2": _case2,
    "paper_case3": _case3,
    "paper_case4": _case4,
    "paper_compare": _compare,
    "weak_conv2": _weak_conv2,
    "tikh_fast": _tikh_fast,
    "strong_conv_tikhonov": _strong_conv,
}

PRESETS = tuple(_BUILDERS)


def preset_names() -> list[str]:
    return list(PRESETS)


def get_preset(name: str) -> Preset:
    try:
        return _BUILDERS[name]()
    except KeyError:
        raise KeyError(f"unknown preset {name!r}; expected one of {list(PRESETS)}") from None


def run_preset(preset, rel_tol: Optional[float] = None, horizon: Optional[float] = None) -> PresetResult:
    if isinstance(preset, str):
        preset = get_preset(preset)
    results: dict[str, RunResult] = {}
    table = TableReport()
    for key, cfg in preset.runs:
        r = run(cfg.with_overrides(rel_tol=rel_tol, horizon=horizon), key=key)
        results[key] = r
        table.extend(r.table)
    comparison = None
    cross = []
    if preset.reference is not None:
        try:
            comparison = compare_with_paper(table, preset.reference)
        except ValueError as exc:
            cross.append(Check(f"compare[{preset.reference}]", False, float("nan"), float("nan"), str(exc)))
    if preset.cross_checks is not None:
        cross += preset.cross_checks(results)
    return PresetResult(preset, results, table, comparison, cross)


@lru_cache(maxsize=None)
def cached_preset(name: str) -> PresetResult:
    """Memoized default run, shared by tests and the CLI ``verify all``."""
    return run_preset(name)
