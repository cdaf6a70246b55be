"""Tikhonov parametrizations t -> eps(t) and their integrability regimes.

Two integrals decide which convergence results apply:

* ``int eps(t)/t dt``  finite -> *fast* vanishing (minimizing property),
  infinite -> *slow* vanishing (ergodic convergence to the minimum-norm point);
* ``int t eps(t) dt``  finite -> *superfast* (O(1/t^2) values, trajectory
  convergence when alpha > 3).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np
from scipy import integrate

__all__ = [
    "EpsilonSchedule",
    "RegimeFlags",
    "ScheduleError",
    "QuadratureError",
    "NumericClassification",
    "builtin_schedule",
    "parse_schedule",
    "classify_numerically",
    "SCHEDULE_KINDS",
]

# Integer codes shared with the compiled kernel.
SCHEDULE_KINDS = {"zero": 0, "power": 1, "log_inv": 2, "log_power": 3}


class ScheduleError(ValueError):
    pass


class QuadratureError(RuntimeError):
    pass


@dataclass(frozen=True)
class RegimeFlags:
    fast: bool
    superfast: bool
    slow: bool

    def as_dict(self) -> dict:
        return {"fast": self.fast, "superfast": self.superfast, "slow": self.slow}


@dataclass(frozen=True)
class EpsilonSchedule:
    """Nonincreasing C^1 map eps >= 0 with its derivative.

    ``domain_start`` is an exclusive lower bound on admissible start times
    (1 for ``log_power``, whose value blows up at t = 1; 0 otherwise).
    """

    label: str
    eval: Callable[[float], float]
    deriv: Callable[[float], float]
    regime_flags: RegimeFlags
    kind: str
    param: float = 0.0
    domain_start: float = 0.0
    params: tuple = field(default=())

    def __call__(self, t):
        return self.eval(t)

    def check_start(self, t0: float) -> None:
        if not t0 > self.domain_start:
            raise ScheduleError(
                f"schedule {self.label} is defined only for t > {self.domain_start}, got t0={t0}"
            )

    def describe(self) -> str:
        return self.label


def _zero() -> EpsilonSchedule:
    return EpsilonSchedule(
        label="zero",
        eval=lambda t: 0.0 * t,
        deriv=lambda t: 0.0 * t,
        regime_flags=RegimeFlags(fast=True, superfast=True, slow=False),
        kind="zero",
    )


def _power(gamma: float) -> EpsilonSchedule:
    if not np.isfinite(gamma) or gamma <= 0:
        raise ScheduleError(f"power schedule needs gamma > 0, got {gamma}")
    return EpsilonSchedule(
        label=f"power:{gamma:g}",
        eval=lambda t: t ** (-gamma),
        deriv=lambda t: -gamma * t ** (-gamma - 1.0),
        regime_flags=RegimeFlags(fast=True, superfast=gamma > 2.0, slow=False),
        kind="power",
        param=gamma,
        params=(gamma,),
    )


def _log_inv() -> EpsilonSchedule:
    # 1/(1 + ln t) is finite at t = 1, so t0 = 1 is admissible.
    return EpsilonSchedule(
        label="log_inv",
        eval=lambda t: 1.0 / (1.0 + np.log(t)),
        deriv=lambda t: -1.0 / (t * (1.0 + np.log(t)) ** 2),
        regime_flags=RegimeFlags(fast=False, superfast=False, slow=True),
        kind="log_inv",
        domain_start=math.exp(-1.0),
    )


def _log_power(gamma: float) -> EpsilonSchedule:
    if not np.isfinite(gamma) or gamma <= 0:
        raise ScheduleError(f"log_power schedule needs gamma > 0, got {gamma}")
    fast = gamma > 1.0
    return EpsilonSchedule(
        label=f"log_power:{gamma:g}",
        eval=lambda t: np.log(t) ** (-gamma),
        deriv=lambda t: -gamma * np.log(t) ** (-gamma - 1.0) / t,
        regime_flags=RegimeFlags(fast=fast, superfast=False, slow=not fast),
        kind="log_power",
        param=gamma,
        domain_start=1.0,
        params=(gamma,),
    )


def builtin_schedule(name: str, params: Sequence[float] = ()) -> EpsilonSchedule:
    """Return a named schedule: ``zero``, ``power(g)`` = t^-g, ``log_inv`` =
    1/(1 + ln t), ``log_power(g)`` = (ln t)^-g."""
    params = [float(v) for v in params]
    nargs = {"zero": 0, "log_inv": 0, "power": 1, "log_power": 1}
    if name not in nargs:
        raise ScheduleError(f"unknown schedule {name!r}; expected one of {sorted(nargs)}")
    if len(params) != nargs[name]:
        raise ScheduleError(f"schedule {name} takes {nargs[name]} parameter(s), got {len(params)}")
    if name == "zero":
        return _zero()
    if name == "log_inv":
        return _log_inv()
    if name == "power":
        return _power(params[0])
    return _log_power(params[0])


def parse_schedule(text: str) -> EpsilonSchedule:
    """Parse config notation such as ``power:3``, ``log_inv`` or ``log_power:0.5``."""
    name, _, rest = text.strip().partition(":")
    try:
        params = [float(v) for v in rest.split(",") if v.strip()]
    except ValueError as exc:
        raise ScheduleError(f"bad schedule parameters in {text!r}") from exc
    return builtin_schedule(name.strip(), params)


@dataclass(frozen=True)
class NumericClassification:
    """Partial integrals at T = t0 * 10^k and the flags they suggest."""

    horizons: np.ndarray
    inv_t_integrals: np.ndarray
    t_weighted_integrals: np.ndarray
    inv_t_growth: float
    t_weighted_growth: float
    flags: RegimeFlags
    threshold: float

    def agrees_with(self, flags: RegimeFlags) -> bool:
        return self.flags == flags


def _log_quad(fn, s_lo: float, s_hi: float) -> float:
    # integrate fn(s) over [s_lo, s_hi] one unit of s at a time.
    edges = np.arange(s_lo, s_hi, 1.0)
    edges = np.append(edges, s_hi)
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        if b <= a:
            continue
        val, err = integrate.quad(fn, a, b, epsabs=0.0, epsrel=1e-11, limit=200)
        if not np.isfinite(val) or err > 1e-8 * max(abs(val), 1e-300) + 1e-300:
            raise QuadratureError(f"quadrature failed on s in [{a:g}, {b:g}]: value {val}, error {err}")
        total += val
    return total


def classify_numerically(
    schedule: EpsilonSchedule,
    t0: float = 1.0,
    horizon: float = 1e8,
    threshold: float = 0.05,
) -> NumericClassification:
    """Cross-check the analytic regime flags by quadrature.

    Both integrals are evaluated after the substitution t = e^s. An integral is
    flagged divergent when doubling the logarithmic span ln(T/t0) -- going from
    T_mid = t0 * sqrt(T/t0) to T -- still grows it by more than ``threshold``.
    """
    schedule.check_start(t0)
    if horizon < 1e3 * t0:
        raise ScheduleError("classify_numerically needs horizon >= 1e3 * t0")
    s0 = math.log(t0)
    f_inv = lambda s: float(schedule.eval(math.exp(s)))  # noqa: E731
    f_tw = lambda s: float(math.exp(2.0 * s) * schedule.eval(math.exp(s)))  # noqa: E731

    n_dec = int(math.floor(math.log10(horizon / t0) + 1e-12))
    horizons = [t0 * 10.0**k for k in range(2, n_dec + 1)]
    if not horizons or not math.isclose(horizons[-1], horizon):
        horizons.append(horizon)
    inv_vals, tw_vals = [], []
    for T in horizons:
        s1 = math.log(T)
        inv_vals.append(_log_quad(f_inv, s0, s1))
        tw_vals.append(_log_quad(f_tw, s0, s1))

    s_mid = 0.5 * (s0 + math.log(horizon))

    def growth(fn, full):
        half = _log_quad(fn, s0, s_mid)
        if full == 0.0:
            return 0.0
        if half == 0.0:
            return math.inf
        return (full - half) / abs(half)

    g_inv = growth(f_inv, inv_vals[-1])
    g_tw = growth(f_tw, tw_vals[-1])
    fast = g_inv <= threshold
    flags = RegimeFlags(fast=fast, superfast=g_tw <= threshold, slow=not fast)
    return NumericClassification(
        horizons=np.array(horizons),
        inv_t_integrals=np.array(inv_vals),
        t_weighted_integrals=np.array(tw_vals),
        inv_t_growth=g_inv,
        t_weighted_growth=g_tw,
        flags=flags,
        threshold=threshold,
    )
