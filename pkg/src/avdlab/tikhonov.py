"""Tikhonov approximation curve eps -> x_eps and the minimum-norm minimizer.

x_eps is the unique minimizer of Phi + (eps/2)||x||^2, i.e. the root of
grad Phi(x) + eps x = 0; as eps -> 0 it converges to the minimum-norm
element p of argmin Phi, and ||x_eps|| <= ||p|| for every eps > 0.
"""

from __future__ import annotations

import io
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np

from .problems import Problem
from .schedules import EpsilonSchedule
from .series import Series, write_csv

__all__ = [
    "TikhonovPoint",
    "TikhonovError",
    "MinNormResult",
    "tikhonov_point",
    "tikhonov_path",
    "path_to_csv",
    "min_norm_point",
    "delta_curve",
    "PATH_EPSILONS",
]

PATH_EPSILONS = (1e-2, 1e-4, 1e-6, 1e-8, 1e-10)


class TikhonovError(RuntimeError):
    def __init__(self, message, last_residual=None, sequence=None):
        super().__init__(message)
        self.last_residual = last_residual
        self.sequence = sequence


@dataclass(frozen=True)
class TikhonovPoint:
    epsilon: float
    point: np.ndarray
    residual: float
    iterations: int = 0

    @property
    def norm(self) -> float:
        return float(np.linalg.norm(self.point))


def _residual(problem, eps, x):
    return float(np.linalg.norm(problem.gradient(x) + eps * x))


def _objective(problem, eps, x):
    return problem.value(x) + 0.5 * eps * float(x @ x)


def _damped_step(problem, eps, x, step, slope, res):
    # Backtrack from the full Newton step. A trial is acceptable on Armijo
    # decrease or, when objective differences drown in rounding, on residual
    # decrease. After the first acceptable trial keep halving while the
    # objective still drops: with a singular Hessian of Phi (flat Huber
    # tails) the first acceptable point can overshoot across the kink.
    f0 = _objective(problem, eps, x)
    lam = 1.0
    best = None
    while lam > 1e-14:
        x_try = x - lam * step
        f_try = _objective(problem, eps, x_try)
        ok = f_try <= f0 - 1e-4 * lam * slope or _residual(problem, eps, x_try) < res
        if best is None:
            if ok:
                best = (f_try, x_try)
        elif f_try < best[0]:
            best = (f_try, x_try)
        else:
            break
        lam *= 0.5
    return x if best is None else best[1]


def _spectral_point(H, g, eps):
    # Eigen-solve of (H + eps I) x = g. Eigenvalues at rounding level are
    # treated as exact zeros; g has no component there because the linear
    # system grad Phi = H x - g = 0 is consistent, and keeping the rounding
    # residue would inflate the null-space part of x by 1/eps.
    lam, Q = np.linalg.eigh(H)
    keep = lam > H.shape[0] * np.finfo(float).eps * max(abs(lam).max(), 1.0)
    c = Q[:, keep].T @ g
    return Q[:, keep] @ (c / (lam[keep] + eps))


def tikhonov_point(
    problem: Problem,
    epsilon: float,
    tol: float = 1e-10,
    max_iter: int = 10_000,
    x_init: Optional[np.ndarray] = None,
) -> TikhonovPoint:
    """Solve grad Phi(x) + eps x = 0.

    Quadratics with a linear gradient are solved spectrally; otherwise damped
    Newton on the Hessian of Phi + eps/2 ||x||^2 when the problem provides
    one, else gradient descent with step 1/(L + eps). Converged
    when the residual drops to ``tol * (1 + eps ||x||)``.
    """
    if not epsilon > 0:
        raise ValueError(f"epsilon must be positive, got {epsilon}")
    n = problem.dim
    x = np.zeros(n) if x_init is None else np.array(x_init, dtype=float)
    eye = np.eye(n)
    if problem.linear_gradient is not None:
        H, g = (np.asarray(a, dtype=float) for a in problem.linear_gradient)
        x = _spectral_point(H, g, epsilon)
    res = _residual(problem, epsilon, x)
    for it in range(max_iter + 1):
        if res <= tol * (1.0 + epsilon * np.linalg.norm(x)):
            return TikhonovPoint(epsilon, x, res, it)
        if it == max_iter:
            break
        g = problem.gradient(x) + epsilon * x
        if problem.hessian is not None:
            step = np.linalg.solve(problem.hessian(x) + epsilon * eye, g)
            x = _damped_step(problem, epsilon, x, step, float(g @ step), res)
        else:
            lip = problem.lipschitz_hint
            if lip is None:
                raise TikhonovError("gradient-descent fallback needs lipschitz_hint", res)
            x = x - g / (lip + epsilon)
        res = _residual(problem, epsilon, x)
    raise TikhonovError(
        f"tikhonov_point did not converge in {max_iter} iterations (residual {res:.3e})", res)


def tikhonov_path(problem: Problem, epsilons: Sequence[float] = (1.0, *PATH_EPSILONS)) -> list[TikhonovPoint]:
    return [tikhonov_point(problem, e) for e in epsilons]


def path_to_csv(points: Sequence[TikhonovPoint], handle=None) -> str | None:
    buf = handle if handle is not None else io.StringIO()
    write_csv(buf, ["epsilon", "norm", "residual"], ((p.epsilon, p.norm, p.residual) for p in points))
    return buf.getvalue() if handle is None else None


@dataclass(frozen=True)
class MinNormResult:
    """Minimum-norm minimizer with how it was obtained.

    For ``source == "path"``, ``certificate`` lists the successive
    distances ||x_{eps_k} - x_{eps_{k+1}}|| along ``PATH_EPSILONS``.
    """

    point: np.ndarray
    source: str
    certificate: tuple[float, ...] = ()
    sequence: tuple[TikhonovPoint, ...] = ()


def min_norm_point(problem: Problem, use_analytic: bool = True, cauchy_tol: float = 1e-6) -> MinNormResult:
    if use_analytic and problem.min_norm_point is not None:
        return MinNormResult(np.array(problem.min_norm_point), "analytic")
    seq = []
    x_prev = None
    for e in PATH_EPSILONS:
        seq.append(tikhonov_point(problem, e, x_init=x_prev))
        x_prev = seq[-1].point
    diffs = tuple(float(np.linalg.norm(a.point - b.point)) for a, b in zip(seq[:-1], seq[1:]))
    if diffs[-1] >= cauchy_tol:
        raise TikhonovError(
            f"Tikhonov path not Cauchy: last step {diffs[-1]:.3e} >= {cauchy_tol:g}",
            sequence=[(p.epsilon, p.point.tolist()) for p in seq],
        )
    return MinNormResult(seq[-1].point.copy(), "path", diffs, tuple(seq))


def delta_curve(problem: Problem, schedule: EpsilonSchedule, times, p=None) -> Series:
    """delta(t) = (||p||^2 - ||x_{eps(t)}||^2) / 2 on the given times."""
    if p is None:
        p = min_norm_point(problem).point
    p = np.asarray(p, dtype=float)
    times = np.asarray(times, dtype=float)
    pn2 = float(p @ p)
    vals = np.empty_like(times)
    x_prev = None
    for i, t in enumerate(times):
        e = float(schedule.eval(t))
        if not e > 0:
            raise ValueError(f"delta_curve needs eps(t) > 0, got eps({t}) = {e}")
        pt = tikhonov_point(problem, e, x_init=x_prev)
        x_prev = pt.point
        vals[i] = 0.5 * (pn2 - pt.norm**2)
    return Series(times, vals, "delta")
