import numpy as np
import pytest
from hypothesis import given, strategies as st

from avdlab.problems import (
    BUILTIN_PROBLEMS,
    Problem,
    ProblemError,
    builtin_problem,
    check_convexity,
    quadratic_problem,
)

BUILTINS = [
    ("zero", ()),
    ("zero", (3,)),
    ("scaled_norm_sq", (1.0,)),
    ("scaled_norm_sq", (2.5, 4)),
    ("quadratic", (1, 2, 1, 0, 1)),
    ("quadratic", (2, 2, 2, 1, 1, 3, 1, -1)),
    ("quadratic", (2, 3, 1, 0, 1, 0, 1, 0, 2, -1)),
    ("huber_like", (0.5,)),
    ("huber_like", (0.3, 3)),
]


def test_zero_problem():
    P = builtin_problem("zero")
    assert P.dim == 1
    assert P.value(np.array([5.0])) == 0.0
    assert P.inf_value == 0.0
    np.testing.assert_array_equal(P.min_norm_point, [0.0])


def test_scaled_norm_sq_at_origin():
    P = builtin_problem("scaled_norm_sq", [1.0])
    assert P.value(np.zeros(1)) == 0.0
    np.testing.assert_array_equal(P.gradient(np.zeros(1)), [0.0])


def test_quadratic_min_norm_matches_grid_search():
    # argmin of 1/2 (x1 - 1)^2 is the line {(1, s)}; brute-force the shortest point on it
    P = builtin_problem("quadratic", [1, 2, 1, 0, 1])
    s = np.linspace(-2.0, 2.0, 40001)
    line = np.stack([np.ones_like(s), s], axis=1)
    vals = np.array([P.value(q) for q in line[::1000]])
    assert np.all(vals == 0.0)
    best = line[np.argmin(np.linalg.norm(line, axis=1))]
    np.testing.assert_allclose(P.min_norm_point, best, atol=1e-12)
    np.testing.assert_allclose(P.min_norm_point, [1.0, 0.0], atol=1e-14)


def test_unknown_and_invalid_parameters():
    with pytest.raises(ProblemError):
        builtin_problem("rosenbrock")
    with pytest.raises(ProblemError):
        builtin_problem("scaled_norm_sq", [-1.0])
    with pytest.raises(ProblemError):
        builtin_problem("quadratic", [1, 2, 1.0])
    with pytest.raises(ProblemError):
        builtin_problem("huber_like", [0.0])


@pytest.mark.parametrize("name,params", BUILTINS)
def test_min_norm_point_is_stationary_and_minimal(name, params):
    P = builtin_problem(name, params)
    p = P.min_norm_point
    assert np.linalg.norm(P.gradient(p)) <= 1e-10
    assert abs(P.value(p) - P.inf_value) <= 1e-12
    q = P.argmin_sampler(np.random.default_rng(1), 1000)
    assert np.all(np.linalg.norm(p) <= np.linalg.norm(q, axis=1) + 1e-12)


@pytest.mark.parametrize("name,params", BUILTINS)
def test_builtins_are_convex(name, params):
    rep = check_convexity(builtin_problem(name, params), samples=100, seed=3)
    assert rep.passes(1e-10)


def test_convexity_report_is_deterministic():
    P = builtin_problem("huber_like", [0.5, 2])
    a, b = check_convexity(P, 50, seed=7), check_convexity(P, 50, seed=7)
    assert a.max_gap == b.max_gap


def test_negated_quadratic_is_flagged():
    neg = Problem("neg", 1, value=lambda x: -0.5 * float(x @ x), gradient=lambda x: -np.asarray(x))
    # hand oracle: x = 0, y = 1 gives gap 0 + 0 - (-1/2) = 1/2
    gap = neg.value(np.zeros(1)) + neg.gradient(np.zeros(1)) @ np.ones(1) - neg.value(np.ones(1))
    assert gap == 0.5
    assert check_convexity(neg, 20).max_gap > 0


def test_linear_gradient_matches_gradient():
    P = quadratic_problem([[2.0, 1.0], [1.0, 3.0]], [1.0, -1.0])
    H, g = P.linear_gradient
    x = np.array([0.3, -0.7])
    np.testing.assert_allclose(H @ x - g, P.gradient(x), rtol=1e-15)


def test_problem_is_immutable():
    P = builtin_problem("zero", [2])
    with pytest.raises(ValueError):
        P.min_norm_point[0] = 1.0


@given(
    idx=st.integers(0, len(BUILTINS) - 1),
    seed=st.integers(0, 2**31 - 1),
)
def test_gradient_matches_central_difference(idx, seed):
    name, params = BUILTINS[idx]
    P = builtin_problem(name, params)
    x = np.random.default_rng(seed).uniform(-10, 10, P.dim)
    h = 1e-6
    fd = np.array([(P.value(x + h * e) - P.value(x - h * e)) / (2 * h) for e in np.eye(P.dim)])
    g = P.gradient(x)
    # the Huber kink is not differentiable to second order; keep away from it
    if name == "huber_like" and np.any(np.abs(np.abs(x - 1) - params[0]) < 1e-4):
        return
    np.testing.assert_allclose(fd, g, rtol=1e-6, atol=1e-6 * (1 + np.abs(g).max()))


def test_builtin_names_listed():
    assert set(BUILTIN_PROBLEMS) == {n for n, _ in BUILTINS}
