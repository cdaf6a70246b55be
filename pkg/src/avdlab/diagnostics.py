"""Lyapunov quantities and convergence functionals along a trajectory.

Everything here is a pure function of a sampled ``Trajectory``; integrals are
trapezoid rules on the sample grid, so oscillatory solutions need a grid
that resolves the oscillation (the experiment presets take care of that).
Limits are never claimed: the checks report finite-horizon values, maximal
violations and last-decade growth.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence, Union

import numpy as np

from .integrator import Trajectory
from .schedules import EpsilonSchedule
from .series import Series

__all__ = [
    "DiagnosticsError",
    "RateFit",
    "RateFitError",
    "DiagnosticsReport",
    "global_energy",
    "check_energy_decay",
    "lyapunov_E",
    "check_E_inequality",
    "anchored_distance",
    "rate_fit",
    "envelope",
    "ergodic_average",
    "running_infimum",
    "running_supremum",
    "kronecker_check",
    "cumulative_trapezoid",
    "lw_integral_gap",
    "fast_rate_series",
    "energy_estimates",
    "last_decade_growth",
    "build_report",
]


class DiagnosticsError(ValueError):
    pass


class RateFitError(DiagnosticsError):
    pass


def cumulative_trapezoid(t: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Running integral of y over t, starting at 0."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    out = np.zeros_like(y)
    out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


def _values(traj: Trajectory) -> np.ndarray:
    return np.array([traj.spec.problem.value(x) for x in traj.xs])


def _eps(traj: Trajectory) -> np.ndarray:
    return np.broadcast_to(np.asarray(traj.spec.epsilon(traj.times), dtype=float), traj.times.shape)


def _sq(a: np.ndarray) -> np.ndarray:
    return np.einsum("ij,ij->i", a, a)


def _anchor(traj: Trajectory, z) -> np.ndarray:
    if z is None:
        p = traj.spec.problem.min_norm_point
        if p is None:
            raise DiagnosticsError("no anchor given and the problem has no known minimum-norm point")
        return np.asarray(p, dtype=float)
    z = np.atleast_1d(np.asarray(z, dtype=float))
    if z.shape != (traj.spec.problem.dim,):
        raise DiagnosticsError(f"anchor has shape {z.shape}, expected ({traj.spec.problem.dim},)")
    return z


# --- energies -----------------------------------------------------------------


def global_energy(traj: Trajectory) -> Series:
    """W(t) = |x'|^2/2 + Phi(x) + eps(t) |x|^2 / 2 on the sample grid."""
    w = 0.5 * _sq(traj.vs) + _values(traj) + 0.5 * _eps(traj) * _sq(traj.xs)
    return Series(traj.times, w, "W")


def check_energy_decay(W: Series) -> float:
    """Largest increment W(t_{k+1}) - W(t_k); nonpositive for a dissipative run."""
    if len(W) < 2:
        raise DiagnosticsError("need at least two samples")
    return float(np.max(np.diff(W.values)))


def lyapunov_E(traj: Trajectory, z=None) -> Series:
    """E(t) = 2/(a-1) t^2 [f_t(x) - inf Phi] + (a-1) |x - z + t x'/(a-1)|^2,

    with f_t = Phi + eps(t)/2 |.|^2 and a = alpha. ``z`` defaults to the
    problem's minimum-norm point.
    """
    spec = traj.spec
    if not spec.variant.is_avd:
        raise DiagnosticsError("E is defined for the vanishing-damping variants only")
    if spec.alpha <= 1:
        raise DiagnosticsError(f"E needs alpha > 1, got {spec.alpha}")
    inf_phi = spec.problem.inf_value
    if inf_phi is None:
        raise DiagnosticsError("E needs a known inf Phi")
    z = _anchor(traj, z)
    am1 = spec.alpha - 1.0
    t = traj.times
    f_t = _values(traj) + 0.5 * _eps(traj) * _sq(traj.xs)
    w = traj.xs - z + (t / am1)[:, None] * traj.vs
    e = 2.0 / am1 * t**2 * (f_t - inf_phi) + am1 * _sq(w)
    return Series(t, e, "E")


def check_E_inequality(E: Series, schedule: EpsilonSchedule, z, alpha: Optional[float] = None) -> float:
    """Max over sample intervals of slope(E) - mean of t eps(t) |z|^2.

    The slope is the difference quotient of consecutive samples; the bound is
    averaged over the same interval with Simpson's rule (centred on the
    midpoint), so a convex bound does not produce spurious violations.
    """
    if alpha is not None and alpha < 3:
        raise DiagnosticsError(f"the derivative bound on E needs alpha >= 3, got {alpha}")
    z = np.atleast_1d(np.asarray(z, dtype=float))
    zz = float(z @ z)
    t = E.t
    ta, tb = t[:-1], t[1:]
    tm = 0.5 * (ta + tb)

    def bound(s):
        return s * np.asarray(schedule.eval(s), dtype=float) * zz

    mean_bound = (bound(ta) + 4.0 * bound(tm) + bound(tb)) / 6.0
    slope = np.diff(E.values) / (tb - ta)
    return float(np.max(slope - mean_bound))


def anchored_distance(traj: Trajectory, z) -> Series:
    """h_z(t) = |x(t) - z|^2 / 2."""
    z = _anchor(traj, z)
    return Series(traj.times, 0.5 * _sq(traj.xs - z), "h")


# --- rates --------------------------------------------------------------------


@dataclass(frozen=True)
class RateFit:
    exponent: float
    r_squared: float
    window: tuple[float, float]
    n_points: int
    method: str

    def as_dict(self) -> dict:
        return {"exponent": self.exponent, "r_squared": self.r_squared,
                "window": list(self.window), "n_points": self.n_points, "method": self.method}


def envelope(t: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Upper envelope of |y| for a series that oscillates through zero.

    Returns the largest |y| sample of every complete run between consecutive
    sign changes (one point per half-oscillation); the partial runs at both
    ends are dropped.
    """
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float)
    sign = np.sign(y)
    nz = np.flatnonzero(sign != 0)
    if nz.size == 0:
        return t[:0], y[:0]
    # indices where the sign flips between consecutive nonzero samples
    flips = nz[1:][sign[nz[1:]] != sign[nz[:-1]]]
    tt, yy = [], []
    for a, b in zip(flips[:-1], flips[1:]):
        seg = np.abs(y[a:b])
        k = int(np.argmax(seg))
        tt.append(t[a + k])
        yy.append(seg[k])
    return np.array(tt), np.array(yy)


def rate_fit(series: Series, window: Sequence[float], method: str = "auto", min_points: int = 10) -> RateFit:
    """Least-squares slope of log y against log t on ``window``.

    ``method`` is ``"direct"`` (fit |y| samples), ``"envelope"`` (fit the
    per-half-oscillation maxima of |y|) or ``"auto"``, which picks the
    envelope when y changes sign inside the window.
    """
    t_lo, t_hi = float(window[0]), float(window[1])
    w = series.window(t_lo, t_hi)
    if w.values.size and np.all(w.values == 0):
        raise RateFitError("series is identically zero on the window")
    if method == "auto":
        s = np.sign(w.values[w.values != 0])
        method = "envelope" if s.size and np.any(s != s[0]) else "direct"
    if method == "envelope":
        t, y = envelope(w.t, w.values)
    elif method == "direct":
        mask = w.values != 0
        t, y = w.t[mask], np.abs(w.values[mask])
    else:
        raise ValueError(f"unknown rate_fit method {method!r}")
    if t.size < min_points:
        raise RateFitError(f"only {t.size} usable points in window [{t_lo:g}, {t_hi:g}] (need {min_points})")
    lx, ly = np.log(t), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    pred = slope * lx + intercept
    ss_res = float(np.sum((ly - pred) ** 2))
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 if ss_tot == 0 else 1.0 - ss_res / ss_tot
    return RateFit(float(slope), r2, (t_lo, t_hi), int(t.size), method)


# --- slow-regime functionals --------------------------------------------------


def ergodic_average(traj: Trajectory, schedule: EpsilonSchedule, p) -> Series:
    """A(t) = int eps(s)/s |x(s) - p| ds / int eps(s)/s ds, trapezoid on the grid.

    A(t0) is the 0/0 limit |x(t0) - p|.
    """
    p = _anchor(traj, p)
    t = traj.times
    w = np.asarray(schedule.eval(t), dtype=float) / t
    if np.any(w <= 0):
        raise DiagnosticsError("ergodic average needs eps > 0 on the horizon")
    d = np.sqrt(_sq(traj.xs - p))
    num = cumulative_trapezoid(t, w * d)
    den = cumulative_trapezoid(t, w)
    a = np.empty_like(d)
    a[0] = d[0]
    if np.any(den[1:] < 1e-300):
        raise DiagnosticsError("ergodic weight integral underflows")
    a[1:] = num[1:] / den[1:]
    return Series(t, a, "ergodic_average")


def running_infimum(series: Series) -> Series:
    if len(series) == 0:
        raise DiagnosticsError("empty series")
    return Series(series.t, np.minimum.accumulate(series.values), f"inf_{series.name}")


def running_supremum(series: Series) -> Series:
    if len(series) == 0:
        raise DiagnosticsError("empty series")
    return Series(series.t, np.maximum.accumulate(series.values), f"sup_{series.name}")


def kronecker_check(t, f, psi: Union[Callable, np.ndarray]) -> Series:
    """(1 / psi(t)) int_{t0}^t psi(s) f(s) ds for integrable f >= 0.

    Tends to 0 whenever psi is nondecreasing and unbounded.
    """
    t = np.asarray(t, dtype=float)
    f = np.asarray(f, dtype=float)
    ps = np.asarray(psi(t) if callable(psi) else psi, dtype=float)
    if np.any(f < 0):
        raise DiagnosticsError("f must be nonnegative")
    if np.any(np.diff(ps) < 0) or np.any(ps <= 0):
        raise DiagnosticsError("psi must be positive and nondecreasing")
    return Series(t, cumulative_trapezoid(t, ps * f) / ps, "kronecker")


# --- theorem-level surrogates ------------------------------------------------


def lw_integral_gap(traj: Trajectory) -> float:
    """int (1/t)|x'|^2 dt - (W(t0) - inf Phi)/alpha; nonpositive when the
    dissipation estimate holds."""
    spec = traj.spec
    if not spec.variant.is_avd:
        raise DiagnosticsError("integral estimate applies to the vanishing-damping variants")
    if spec.problem.inf_value is None:
        raise DiagnosticsError("integral estimate needs a known inf Phi")
    t = traj.times
    lhs = cumulative_trapezoid(t, _sq(traj.vs) / t)[-1]
    w0 = global_energy(traj).values[0]
    return float(lhs - (w0 - spec.problem.inf_value) / spec.alpha)


def fast_rate_series(traj: Trajectory) -> Series:
    """t^2 (Phi(x(t)) - inf Phi)."""
    inf_phi = traj.spec.problem.inf_value
    if inf_phi is None:
        raise DiagnosticsError("needs a known inf Phi")
    t = traj.times
    return Series(t, t**2 * (_values(traj) - inf_phi), "t2_gap")


def last_decade_growth(series: Series, t_end: Optional[float] = None) -> float:
    """Relative growth of a nondecreasing series over its last decade,
    (S(T) - S(T/10)) / |S(T/10)|."""
    T = float(series.t[-1] if t_end is None else t_end)
    if T / 10.0 < series.t[0]:
        raise DiagnosticsError("series spans less than a decade")
    a, b = series.at(T / 10.0), series.at(T)
    if a == 0:
        return 0.0 if b == 0 else math.inf
    return (b - a) / abs(a)


def energy_estimates(traj: Trajectory) -> dict[str, Series]:
    """Partial integrals int t(Phi - inf Phi), int t|x'|^2 and the running
    sup of t|x'|, all bounded for alpha > 3 and superfast schedules."""
    inf_phi = traj.spec.problem.inf_value
    if inf_phi is None:
        raise DiagnosticsError("needs a known inf Phi")
    t = traj.times
    speed2 = _sq(traj.vs)
    return {
        "int_t_gap": Series(t, cumulative_trapezoid(t, t * (_values(traj) - inf_phi)), "int_t_gap"),
        "int_t_speed2": Series(t, cumulative_trapezoid(t, t * speed2), "int_t_speed2"),
        "sup_t_speed": Series(t, np.maximum.accumulate(t * np.sqrt(speed2)), "sup_t_speed"),
    }


# --- report -------------------------------------------------------------------


@dataclass
class DiagnosticsReport:
    W_series: Series
    h_series: Optional[Series] = None
    E_series: Optional[Series] = None
    rate_fit: Optional[RateFit] = None
    ergodic_series: Optional[Series] = None
    violations: dict = field(default_factory=dict)
    extras: dict = field(default_factory=dict)

    def series(self) -> dict[str, Series]:
        out = {"W": self.W_series}
        for name in ("h_series", "E_series", "ergodic_series"):
            s = getattr(self, name)
            if s is not None:
                out[s.name] = s
        return out

    def summary(self) -> dict:
        d = {"violations": {k: float(v) for k, v in self.violations.items()}}
        if self.rate_fit is not None:
            d["rate_fit"] = self.rate_fit.as_dict()
        d.update({k: (float(v) if isinstance(v, (int, float, np.floating)) else v)
                  for k, v in self.extras.items()})
        return d

    def to_json(self) -> str:
        return json.dumps(self.summary(), indent=2, sort_keys=True)

    def to_text(self) -> str:
        rows = [(k, v) for k, v in self.summary()["violations"].items()]
        if self.rate_fit is not None:
            rows.append(("rate exponent", self.rate_fit.exponent))
            rows.append(("rate r^2", self.rate_fit.r_squared))
        rows += [(k, v) for k, v in self.extras.items() if isinstance(v, (int, float))]
        width = max((len(k) for k, _ in rows), default=0)
        return "\n".join(f"{k:<{width}}  {v: .6e}" for k, v in rows)


def build_report(
    traj: Trajectory,
    z=None,
    rate_window: Optional[Sequence[float]] = None,
    ergodic: bool = False,
) -> DiagnosticsReport:
    """Collect every applicable check for one trajectory."""
    spec = traj.spec
    W = global_energy(traj)
    rep = DiagnosticsReport(W_series=W)
    rep.violations["energy_increase"] = check_energy_decay(W)
    rep.extras["W(t0)"] = float(W.values[0])
    try:
        z_arr = _anchor(traj, z)
    except DiagnosticsError:
        z_arr = None
    if z_arr is not None:
        rep.h_series = anchored_distance(traj, z_arr)
    avd = spec.variant.is_avd
    known_inf = spec.problem.inf_value is not None
    if avd and known_inf:
        rep.violations["lw_integral"] = lw_integral_gap(traj)
    if avd and known_inf and spec.alpha > 1 and z_arr is not None:
        rep.E_series = lyapunov_E(traj, z_arr)
        if spec.alpha >= 3:
            rep.violations["E_derivative_bound"] = check_E_inequality(
                rep.E_series, spec.schedule, z_arr, alpha=spec.alpha)
    if known_inf:
        rep.extras["sup_t2_gap"] = float(np.max(fast_rate_series(traj).values))
    if rate_window is not None and z_arr is not None:
        d = Series(traj.times, np.sqrt(2.0 * rep.h_series.values), "distance")
        if spec.problem.dim == 1:
            d = Series(traj.times, traj.xs[:, 0] - z_arr[0], "x_minus_z")
        rep.rate_fit = rate_fit(d, rate_window)
    if ergodic and z_arr is not None:
        rep.ergodic_series = ergodic_average(traj, spec.schedule, z_arr)
        dist = Series(traj.times, np.sqrt(2.0 * rep.h_series.values))
        rep.extras["running_inf_distance"] = float(running_infimum(dist).values[-1])
    return rep
