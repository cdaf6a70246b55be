"""Run one experiment config: integrate, then evaluate the requested reports."""

from __future__ import annotations

import io
import json
import math
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from .. import diagnostics as dg
from ..dynamics import Variant
from ..integrator import IntegrationError, Trajectory, integrate
from ..series import Series, write_csv
from ..special import Family, make_case
from ..tikhonov import TikhonovError, delta_curve, min_norm_point, tikhonov_point
from .config import ConfigError, ExperimentConfig
from .reference import reference_table

__all__ = [
    "Check",
    "TableRow",
    "TableReport",
    "CellResult",
    "Comparison",
    "RunResult",
    "run",
    "compare_with_paper",
    "closed_form_for",
]


@dataclass(frozen=True)
class Check:
    name: str
    passed: bool
    value: float
    threshold: float
    detail: str = ""

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))
        object.__setattr__(self, "value", float(self.value))
        object.__setattr__(self, "threshold", float(self.threshold))

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"{status}  {self.name}: value={self.value:.6g} threshold={self.threshold:.6g} {self.detail}".rstrip()

    def as_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": _jsonable(self.value),
                "threshold": _jsonable(self.threshold), "detail": self.detail}


def _jsonable(v):
    v = float(v)
    return v if math.isfinite(v) else str(v)


@dataclass(frozen=True)
class TableRow:
    key: str
    t: float
    component: int
    value: float
    provenance: str  # integrated | closed_form | failed


@dataclass
class TableReport:
    rows: list = field(default_factory=list)

    def value(self, key: str, t: float, provenance: str = "integrated", component: int = 0) -> float:
        for r in self.rows:
            if r.key == key and r.t == t and r.provenance == provenance and r.component == component:
                return r.value
        raise KeyError((key, t, provenance))

    def extend(self, other: "TableReport") -> None:
        self.rows.extend(other.rows)

    def to_csv(self, handle=None) -> Optional[str]:
        buf = handle if handle is not None else io.StringIO()
        write_csv(buf, ["key", "t", "component", "value", "provenance"],
                  ((r.key, r.t, r.component, r.value, r.provenance) for r in self.rows))
        return buf.getvalue() if handle is None else None

    def to_dict(self) -> list:
        return [{"key": r.key, "t": r.t, "component": r.component,
                 "value": _jsonable(r.value), "provenance": r.provenance} for r in self.rows]


@dataclass(frozen=True)
class CellResult:
    key: str
    t: float
    computed: float
    reference: float
    deviation: float
    tolerance: float
    passed: bool

    def __post_init__(self):
        object.__setattr__(self, "passed", bool(self.passed))

    def check(self, table_id: str) -> Check:
        return Check(f"{table_id}[{self.key},t={self.t:g}]", self.passed, self.deviation, self.tolerance,
                     f"computed={self.computed:.6g} reference={self.reference:.6g}")


@dataclass(frozen=True)
class Comparison:
    table_id: str
    cells: tuple
    oracle_backed: bool

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.cells)

    def failed_cells(self) -> list[str]:
        return [f"({c.key}, t={c.t:g})" for c in self.cells if not c.passed]

    def checks(self) -> list[Check]:
        return [c.check(self.table_id) for c in self.cells]

    def to_csv(self, handle=None) -> Optional[str]:
        buf = handle if handle is not None else io.StringIO()
        write_csv(buf, ["key", "t", "computed", "reference", "deviation", "tolerance", "passed"],
                  ((c.key, c.t, c.computed, c.reference, c.deviation, c.tolerance, str(c.passed).lower())
                   for c in self.cells))
        return buf.getvalue() if handle is None else None


def compare_with_paper(report: TableReport, reference: str) -> Comparison:
    """Per-cell |computed - reference| against the table's tolerance policy.

    Raises ValueError when the report lacks a reference cell.
    """
    ref = reference_table(reference)
    cells = []
    for (key, t), ref_val in sorted(ref.cells.items(), key=lambda kv: (kv[0][0], kv[0][1])):
        try:
            val = report.value(key, t)
        except KeyError:
            raise ValueError(f"report has no integrated value for cell ({key}, t={t:g}) of table {reference}") from None
        dev = abs(val - ref_val) if math.isfinite(val) else math.inf
        tol = ref.tolerance(key, t, ref_val)
        cells.append(CellResult(key, t, val, ref_val, dev, tol, dev <= tol))
    return Comparison(reference, tuple(cells), ref.oracle_backed)


@dataclass
class RunResult:
    key: str
    config: ExperimentConfig
    trajectory: Optional[Trajectory]
    table: TableReport
    checks: list
    series: dict
    rate_fit: Optional[dg.RateFit] = None
    error: Optional[str] = None

    @property
    def passed(self) -> bool:
        return self.error is None and all(c.passed for c in self.checks)

    def summary(self) -> dict:
        d = {
            "key": self.key,
            "config": self.config.to_dict(),
            "passed": self.passed,
            "checks": [c.as_dict() for c in self.checks],
            "table": self.table.to_dict(),
        }
        if self.rate_fit is not None:
            d["rate_fit"] = self.rate_fit.as_dict()
        if self.trajectory is not None:
            d["backend"] = self.trajectory.backend
            d["step_stats"] = self.trajectory.step_stats.as_dict()
        if self.error is not None:
            d["error"] = self.error
        return d

    def write(self, out_dir, trajectory: bool = True) -> Path:
        """Write the bundle: report.json, table.csv, checks.csv and series CSVs."""
        out = Path(out_dir) / self.key.replace("=", "").replace(",", "_").replace("/", "_")
        out.mkdir(parents=True, exist_ok=True)
        (out / "report.json").write_text(json.dumps(self.summary(), indent=2, sort_keys=True) + "\n")
        with open(out / "table.csv", "w", newline="") as fh:
            self.table.to_csv(fh)
        with open(out / "checks.csv", "w", newline="") as fh:
            write_csv(fh, ["name", "passed", "value", "threshold"],
                      ((c.name, str(c.passed).lower(), c.value, c.threshold) for c in self.checks))
        for name, s in sorted(self.series.items()):
            with open(out / f"{name}.csv", "w", newline="") as fh:
                s.to_csv(fh)
        if trajectory and self.trajectory is not None:
            tr = self.trajectory
            n = tr.xs.shape[1]
            header = ["t"] + [f"x{i + 1}" for i in range(n)] + [f"v{i + 1}" for i in range(n)]
            with open(out / "trajectory.csv", "w", newline="") as fh:
                write_csv(fh, header, (np.concatenate(([t], x, v)) for t, x, v in zip(tr.times, tr.xs, tr.vs)))
        return out


# --- helpers -----------------------------------------------------------------


_POWER_FAMILY = {1.0: Family.eps_inv_t, 2.0: Family.eps_inv_t2, 3.0: Family.eps_inv_t3}


def closed_form_for(config: ExperimentConfig):
    """The explicit solution matching ``config``, or None.

    Applies to the scalar zero objective, vanishing damping, eps = t^-k with
    k in {1, 2, 3} and the data x(1) = 1, x'(1) = 0.
    """
    spec = config.build_spec()
    if spec.variant is not Variant.AVD_alpha_eps or spec.schedule.kind != "power":
        return None
    if config.problem != "zero" or spec.problem.dim != 1:
        return None
    if config.t0 != 1.0 or config.x0 != (1.0,) or config.v0 != (0.0,):
        return None
    fam = _POWER_FAMILY.get(float(spec.schedule.param))
    if fam is None or float(spec.alpha) != int(spec.alpha):
        return None
    try:
        return make_case(fam, int(spec.alpha))
    except ValueError:
        return None


def _extra_times(config: ExperimentConfig) -> list[float]:
    times = []
    for kind, opts in config.outputs:
        if kind == "table_at":
            times += opts["times"]
        elif kind == "ergodic":
            times += list(opts.get("at", ())) + ([opts["inf_at"]] if "inf_at" in opts else [])
        elif kind in ("rate_window", "fast_rate"):
            times += list(opts.get("window", ()))
    return times


def _anchor(config: ExperimentConfig, traj: Trajectory, opts: dict):
    if "z" in opts:
        return np.atleast_1d(np.asarray(opts["z"], dtype=float))
    return min_norm_point(traj.spec.problem).point


def _tracked(traj: Trajectory, p) -> Series:
    """Scalar signal used for rates: x itself in 1-D, else |x - p|."""
    if traj.xs.shape[1] == 1:
        return Series(traj.times, traj.xs[:, 0] - p[0], "x")
    return Series(traj.times, np.linalg.norm(traj.xs - p, axis=1), "distance")


# --- output handlers -----------------------------------------------------------


def _table(config, traj, res: RunResult, opts):
    cf = closed_form_for(config)
    for t in opts["times"]:
        if not traj.times[0] <= t <= traj.times[-1]:
            for c in range(traj.xs.shape[1]):
                res.table.rows.append(TableRow(res.key, t, c, math.nan, "failed"))
            res.checks.append(Check(f"table[t={t:g}]", False, t, traj.t_end, "beyond horizon"))
            continue
        x, _ = traj.sample_at(t)
        for c, xv in enumerate(x):
            res.table.rows.append(TableRow(res.key, t, c, float(xv), "integrated"))
        if cf is not None:
            res.table.rows.append(TableRow(res.key, t, 0, float(cf.eval(t)), "closed_form"))


def _rate(config, traj, res: RunResult, opts):
    window = opts.get("window", (1e2, traj.t_end))
    p = _anchor(config, traj, opts)
    fit = dg.rate_fit(_tracked(traj, p), window, method=opts.get("method", "auto"))
    res.rate_fit = fit
    if "expect" in opts:
        tol = float(opts.get("tol", 0.1))
        dev = abs(fit.exponent - float(opts["expect"]))
        res.checks.append(Check("rate_exponent", dev <= tol, fit.exponent, float(opts["expect"]),
                                f"|dev|={dev:.4f} tol={tol:g} r2={fit.r_squared:.4f} method={fit.method}"))


def _ergodic(config, traj, res: RunResult, opts):
    p = _anchor(config, traj, opts)
    A = dg.ergodic_average(traj, traj.spec.schedule, p)
    res.series["ergodic_average"] = A
    dist = Series(traj.times, np.linalg.norm(traj.xs - p, axis=1), "distance")
    inf = dg.running_infimum(dist)
    res.series["running_inf_distance"] = inf
    t_a, t_b = opts.get("at", (1e2, traj.t_end))
    a, b = A.at(t_a), A.at(t_b)
    res.checks.append(Check("ergodic_decrease", b < a, b, a, f"A({t_b:g}) < A({t_a:g})"))
    if "max_ratio" in opts:
        ratio = b / a if a > 0 else math.inf
        res.checks.append(Check("ergodic_ratio", ratio <= float(opts["max_ratio"]), ratio, float(opts["max_ratio"]),
                                f"A({t_b:g})/A({t_a:g})"))
    if "max_inf" in opts:
        t_i = float(opts.get("inf_at", traj.t_end))
        v = inf.at(t_i)
        res.checks.append(Check("running_inf_distance", v <= float(opts["max_inf"]), v, float(opts["max_inf"]),
                                f"inf |x - p| up to t={t_i:g}"))
    else:
        res.checks.append(Check("running_inf_decreases", inf.values[-1] < inf.values[0],
                                inf.values[-1], inf.values[0], "inf |x - p| below its start value"))


def _invariants(config, traj, res: RunResult, opts):
    spec = traj.spec
    W = dg.global_energy(traj)
    res.series["W"] = W
    tol = 1e-8 * (1.0 + abs(W.values[0]))
    inc = dg.check_energy_decay(W)
    res.checks.append(Check("energy_decay", inc <= tol, inc, tol, "max W increment"))
    if not spec.variant.is_avd or spec.problem.inf_value is None:
        return
    gap = dg.lw_integral_gap(traj)
    res.checks.append(Check("lw_integral_bound", gap <= 1e-6, gap, 1e-6, "int |x'|^2/t - (W0 - inf)/alpha"))
    if spec.alpha >= 3 and spec.schedule.regime_flags.superfast:
        z = _anchor(config, traj, opts)
        E = dg.lyapunov_E(traj, z)
        res.series["E"] = E
        viol = dg.check_E_inequality(E, spec.schedule, z, alpha=spec.alpha)
        res.checks.append(Check("E_derivative_bound", viol <= 1e-6, viol, 1e-6, "max slope(E) - t eps |z|^2"))


def _oracle(config, traj, res: RunResult, opts):
    cf = closed_form_for(config)
    if cf is None:
        raise ConfigError(f"{config.name}: no closed form for this configuration")
    t_max = float(opts.get("max_t", min(traj.t_end, 1e4)))
    mask = traj.times <= t_max
    t = traj.times[mask]
    x = traj.xs[mask, 0]
    ref = cf(t)
    rel = np.abs(x - ref) / (1.0 + np.abs(ref))
    k = int(np.argmax(rel))
    res.checks.append(Check("oracle_agreement", rel[k] <= 1e-6, float(rel[k]), 1e-6,
                            f"{cf.case_id} worst at t={t[k]:.6g}"))


def _fast_rate(config, traj, res: RunResult, opts):
    lo, hi = opts.get("window", (10.0, min(traj.t_end, 1e4)))
    s = dg.fast_rate_series(traj).window(lo, hi)
    sup = dg.running_supremum(s)
    res.series["sup_t2_gap"] = sup
    growth = dg.last_decade_growth(sup, hi)
    mx = float(opts.get("max_growth", 0.05))
    finite = bool(np.all(np.isfinite(sup.values)))
    res.checks.append(Check("fast_rate_saturation", finite and growth <= mx, growth, mx,
                            f"sup t^2 gap = {sup.values[-1]:.6g}"))


def _energy_estimates(config, traj, res: RunResult, opts):
    mx = float(opts.get("max_growth", 0.05))
    T = float(opts.get("at", min(traj.t_end, 1e4)))
    for name, s in dg.energy_estimates(traj).items():
        res.series[name] = s
        g = dg.last_decade_growth(s, T)
        res.checks.append(Check(f"saturation[{name}]", g <= mx, g, mx, f"last-decade growth up to t={T:g}"))


def _minimizing(config, traj, res: RunResult, opts):
    inf_phi = traj.spec.problem.inf_value
    if inf_phi is None:
        raise ConfigError(f"{config.name}: minimizing check needs a known inf Phi")
    gaps = np.array([traj.spec.problem.value(x) for x in traj.xs]) - inf_phi
    T = traj.t_end
    last = gaps[traj.times >= T / 10.0].max()
    frac = float(opts.get("max_fraction", 1e-3))
    ref = max(gaps[0], 1e-300)
    res.checks.append(Check("minimizing", last <= frac * ref, last / ref, frac,
                            "max gap over the last decade relative to the start gap"))


def _tikhonov(config, traj, res: RunResult, opts):
    spec = traj.spec
    p = min_norm_point(spec.problem).point
    times = np.geomspace(traj.t0 * 10.0 if spec.schedule.eval(traj.t0) == 0 else traj.t0, traj.t_end,
                         int(opts.get("points", 25)))
    delta = delta_curve(spec.problem, spec.schedule, times, p)
    res.series["delta"] = delta
    res.checks.append(Check("delta_nonnegative", delta.values.min() >= -1e-10, float(delta.values.min()), -1e-10))
    dec = math.log10(traj.t_end / traj.t0)
    first = delta.window(traj.t0, traj.t0 * 10 ** min(1.0, dec / 2)).values.mean()
    last = delta.window(traj.t_end / 10 ** min(1.0, dec / 2), traj.t_end).values.mean()
    res.checks.append(Check("delta_decreases", last < first or first == 0.0, last, first,
                            "last-decade mean below first-decade mean"))
    pn = float(np.linalg.norm(p))
    worst = max(tikhonov_point(spec.problem, float(spec.schedule.eval(t))).norm for t in times) - pn
    res.checks.append(Check("tikhonov_norm_bound", worst <= 1e-10, worst, 1e-10, "max |x_eps(t)| - |p|"))


_HANDLERS = {
    "table_at": _table,
    "rate_window": _rate,
    "ergodic": _ergodic,
    "invariants": _invariants,
    "oracle_compare": _oracle,
    "fast_rate": _fast_rate,
    "energy_estimates": _energy_estimates,
    "minimizing": _minimizing,
    "tikhonov": _tikhonov,
}


def run(config: ExperimentConfig, key: Optional[str] = None) -> RunResult:
    """Integrate ``config`` and evaluate every requested output.

    Integration failures and errors raised by a report become failed checks
    named after the report, so a batch keeps going.
    """
    key = key or config.name
    spec = config.build_spec()
    res = RunResult(key, config, None, TableReport(), [], {})
    if not config.outputs:
        return res
    icfg = config.build_integrator(_extra_times(config))
    try:
        traj = integrate(spec, config.x0, config.v0, config.horizon, icfg)
    except IntegrationError as exc:
        res.error = f"integration: {exc}"
        res.checks.append(Check("integration", False, exc.t_stop, config.horizon, str(exc)))
        return res
    res.trajectory = traj
    for kind, opts in config.outputs:
        try:
            _HANDLERS[kind](config, traj, res, opts)
        except ConfigError:
            raise
        except (dg.DiagnosticsError, TikhonovError, ValueError, KeyError) as exc:
            res.checks.append(Check(kind, False, math.nan, math.nan, f"error: {exc}"))
    return res
