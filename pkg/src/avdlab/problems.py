"""Convex objectives on R^n with gradients, infima and minimum-norm minimizers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

__all__ = [
    "Problem",
    "ProblemError",
    "ConvexityReport",
    "builtin_problem",
    "quadratic_problem",
    "check_convexity",
    "BUILTIN_PROBLEMS",
]

BUILTIN_PROBLEMS = ("zero", "quadratic", "scaled_norm_sq", "huber_like")


class ProblemError(ValueError):
    """Raised for unknown problem names or invalid parameterizations."""


@dataclass(frozen=True)
class Problem:
    """A convex, continuously differentiable objective on R^n.

    Parameters
    ----------
    name : str
        Identifier, echoed into reports.
    dim : int
        Ambient dimension n.
    value, gradient : callable
        Phi and grad Phi, both taking a length-n array.
    inf_value : float, optional
        inf Phi when known.
    min_norm_point : ndarray, optional
        The minimum-norm element p of argmin Phi when known.
    lipschitz_hint : float, optional
        Lipschitz constant of the gradient (global for the builtins).
    hessian : callable, optional
        Returns the (n, n) Hessian; used by the Tikhonov Newton solver.
    linear_gradient : (H, g), optional
        Set when grad Phi(x) = H x - g exactly; this is what lets the
        compiled integration kernel run without calling back into Python.
    argmin_sampler : callable, optional
        ``argmin_sampler(rng, k)`` returns k points of argmin Phi; used by
        tests to check minimality of ``min_norm_point``.
    params : tuple of float
        Constructor parameters, kept for config echo.
    """

    name: str
    dim: int
    value: Callable[[np.ndarray], float]
    gradient: Callable[[np.ndarray], np.ndarray]
    inf_value: Optional[float] = None
    min_norm_point: Optional[np.ndarray] = None
    lipschitz_hint: Optional[float] = None
    hessian: Optional[Callable[[np.ndarray], np.ndarray]] = None
    linear_gradient: Optional[tuple[np.ndarray, np.ndarray]] = None
    argmin_sampler: Optional[Callable[[np.random.Generator, int], np.ndarray]] = None
    params: tuple = field(default=())

    def __post_init__(self):
        if self.dim < 1:
            raise ProblemError(f"dimension must be positive, got {self.dim}")
        if self.min_norm_point is not None:
            p = np.array(self.min_norm_point, dtype=float)
            p.setflags(write=False)
            object.__setattr__(self, "min_norm_point", p)

    def describe(self) -> dict:
        return {"name": self.name, "params": list(self.params), "dim": self.dim}


def _zero(dim: int) -> Problem:
    zeros = np.zeros(dim)
    zeros.setflags(write=False)

    def sample(rng, k):
        return rng.uniform(-10.0, 10.0, size=(k, dim))

    return Problem(
        name="zero",
        dim=dim,
        value=lambda x: 0.0,
        gradient=lambda x: np.zeros_like(np.asarray(x, dtype=float)),
        inf_value=0.0,
        min_norm_point=np.zeros(dim),
        lipschitz_hint=0.0,
        hessian=lambda x: np.zeros((dim, dim)),
        linear_gradient=(np.zeros((dim, dim)), zeros),
        argmin_sampler=sample,
        params=(float(dim),),
    )


def _scaled_norm_sq(c: float, dim: int) -> Problem:
    if not np.isfinite(c) or c < 0:
        raise ProblemError(f"scaled_norm_sq needs c >= 0 for convexity, got {c}")
    H = c * np.eye(dim)

    def sample(rng, k):
        if c == 0:
            return rng.uniform(-10.0, 10.0, size=(k, dim))
        return np.zeros((k, dim))

    return Problem(
        name="scaled_norm_sq",
        dim=dim,
        value=lambda x: 0.5 * c * float(np.dot(x, x)),
        gradient=lambda x: c * np.asarray(x, dtype=float),
        inf_value=0.0,
        min_norm_point=np.zeros(dim),
        lipschitz_hint=c,
        hessian=lambda x: H.copy(),
        linear_gradient=(H, np.zeros(dim)),
        argmin_sampler=sample,
        params=(c, float(dim)),
    )


def quadratic_problem(A, b) -> Problem:
    """Least-squares objective 0.5 * ||A x - b||^2.

    The minimum-norm minimizer is the pseudo-inverse solution; the argmin
    is the affine set p + null(A).
    """
    A = np.atleast_2d(np.asarray(A, dtype=float))
    b = np.atleast_1d(np.asarray(b, dtype=float))
    m, n = A.shape
    if b.shape != (m,):
        raise ProblemError(f"b has shape {b.shape}, expected ({m},)")
    if not (np.all(np.isfinite(A)) and np.all(np.isfinite(b))):
        raise ProblemError("quadratic parameters must be finite")
    AtA = A.T @ A
    Atb = A.T @ b
    p = np.linalg.lstsq(A, b, rcond=None)[0]
    r = A @ p - b
    inf_value = 0.5 * float(r @ r)
    _, s, vt = np.linalg.svd(A)
    rank = int(np.sum(s > max(m, n) * np.finfo(float).eps * (s[0] if s.size else 0.0)))
    null_basis = vt[rank:].T
    lip = float(s[0] ** 2) if s.size else 0.0

    def value(x):
        res = A @ x - b
        return 0.5 * float(res @ res)

    def gradient(x):
        return AtA @ np.asarray(x, dtype=float) - Atb

    def sample(rng, k):
        if null_basis.shape[1] == 0:
            return np.tile(p, (k, 1))
        coef = rng.uniform(-10.0, 10.0, size=(k, null_basis.shape[1]))
        return p + coef @ null_basis.T

    AtA.setflags(write=False)
    Atb.setflags(write=False)
    return Problem(
        name="quadratic",
        dim=n,
        value=value,
        gradient=gradient,
        inf_value=inf_value,
        min_norm_point=p,
        lipschitz_hint=lip,
        hessian=lambda x: AtA.copy(),
        linear_gradient=(AtA, Atb),
        argmin_sampler=sample,
        params=(float(m), float(n), *A.ravel().tolist(), *b.tolist()),
    )


def _huber_like(delta: float, dim: int) -> Problem:
    # Componentwise Huber loss of (x - 1): quadratic near the minimizer,
    # linear growth outside a band of half-width delta. Not a linear gradient.
    if not np.isfinite(delta) or delta <= 0:
        raise ProblemError(f"huber_like needs delta > 0, got {delta}")
    ones = np.ones(dim)

    def value(x):
        r = np.abs(np.asarray(x, dtype=float) - 1.0)
        return float(np.sum(np.where(r <= delta, 0.5 * r * r, delta * (r - 0.5 * delta))))

    def gradient(x):
        r = np.asarray(x, dtype=float) - 1.0
        return np.clip(r, -delta, delta)

    def hessian(x):
        r = np.abs(np.asarray(x, dtype=float) - 1.0)
        return np.diag((r <= delta).astype(float))

    return Problem(
        name="huber_like",
        dim=dim,
        value=value,
        gradient=gradient,
        inf_value=0.0,
        min_norm_point=ones,
        lipschitz_hint=1.0,
        hessian=hessian,
        argmin_sampler=lambda rng, k: np.tile(ones, (k, 1)),
        params=(delta, float(dim)),
    )


def _dim_param(params, idx, name) -> int:
    if len(params) <= idx:
        return 1
    d = params[idx]
    if d != int(d) or d < 1:
        raise ProblemError(f"{name}: dimension must be a positive integer, got {d}")
    return int(d)


def builtin_problem(name: str, params: Sequence[float] = ()) -> Problem:
    """Build one of the named test objectives.

    ``zero [n]``
        Phi = 0 on R^n (default n = 1).
    ``scaled_norm_sq c [n]``
        Phi = c/2 ||x||^2, c >= 0.
    ``quadratic m n A(row-major, m*n) b(m)``
        Phi = 1/2 ||A x - b||^2.
    ``huber_like delta [n]``
        Componentwise Huber loss around the all-ones vector.
    """
    params = [float(v) for v in params]
    if name == "zero":
        if len(params) > 1:
            raise ProblemError("zero takes at most one parameter (dimension)")
        return _zero(_dim_param(params, 0, name))
    if name == "scaled_norm_sq":
        if not 1 <= len(params) <= 2:
            raise ProblemError("scaled_norm_sq takes c and an optional dimension")
        return _scaled_norm_sq(params[0], _dim_param(params, 1, name))
    if name == "huber_like":
        if not 1 <= len(params) <= 2:
            raise ProblemError("huber_like takes delta and an optional dimension")
        return _huber_like(params[0], _dim_param(params, 1, name))
    if name == "quadratic":
        if len(params) < 2:
            raise ProblemError("quadratic needs m, n, A (m*n entries), b (m entries)")
        m, n = params[0], params[1]
        if m != int(m) or n != int(n) or m < 1 or n < 1:
            raise ProblemError("quadratic: m and n must be positive integers")
        m, n = int(m), int(n)
        if len(params) != 2 + m * n + m:
            raise ProblemError(
                f"quadratic with m={m}, n={n} needs {2 + m * n + m} parameters, got {len(params)}"
            )
        A = np.array(params[2 : 2 + m * n]).reshape(m, n)
        b = np.array(params[2 + m * n :])
        return quadratic_problem(A, b)
    raise ProblemError(f"unknown problem {name!r}; expected one of {BUILTIN_PROBLEMS}")


@dataclass(frozen=True)
class ConvexityReport:
    """Largest violation of the first-order convexity inequality.

    ``max_gap`` is max over pairs of Phi(x) + <grad Phi(x), y - x> - Phi(y);
    convexity means it is <= 0. ``max_relative_gap`` divides each gap by
    1 + |Phi(x)| before taking the max.
    """

    max_gap: float
    max_relative_gap: float
    worst_pair: tuple[np.ndarray, np.ndarray]
    samples: int

    def passes(self, tol: float = 1e-10) -> bool:
        return self.max_relative_gap <= tol


def check_convexity(problem: Problem, samples: int = 100, seed: int = 0) -> ConvexityReport:
    if samples < 2:
        raise ProblemError("check_convexity needs at least 2 samples")
    rng = np.random.default_rng(seed)
    pts = rng.uniform(-10.0, 10.0, size=(samples, problem.dim))
    vals = np.array([problem.value(x) for x in pts])
    grads = np.array([problem.gradient(x) for x in pts])
    # gap[i, j] = Phi(x_i) + <g_i, x_j - x_i> - Phi(x_j)
    lin = grads @ pts.T - np.sum(grads * pts, axis=1)[:, None]
    gap = vals[:, None] + lin - vals[None, :]
    np.fill_diagonal(gap, -np.inf)
    rel = gap / (1.0 + np.abs(vals))[:, None]
    i, j = np.unravel_index(np.argmax(gap), gap.shape)
    return ConvexityReport(
        max_gap=float(gap[i, j]),
        max_relative_gap=float(np.max(rel)),
        worst_pair=(pts[i].copy(), pts[j].copy()),
        samples=samples,
    )
