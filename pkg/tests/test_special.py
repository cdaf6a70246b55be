import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, strategies as st
from scipy import integrate

from avdlab.diagnostics import rate_fit
from avdlab.series import Series
from avdlab.special import (
    BesselDomainError,
    Family,
    bessel_j,
    bessel_y,
    case_schedule,
    closed_form,
    closed_form_cases,
    make_case,
    oracle_report,
)

GRID = np.concatenate([np.linspace(0.05, 30.0, 301), np.geomspace(30.0, 1e5, 120)])


def scale(x, exact):
    # absolute error measured against the local envelope, so zeros do not blow up relative error
    return max(abs(exact), min(1.0, math.sqrt(2.0 / (math.pi * x))))


@pytest.mark.parametrize("n", range(0, 9))
def test_against_mpmath(n):
    worst_small, worst_large = 0.0, 0.0
    for x in GRID:
        for ours, ref in ((bessel_j(n, x), mpmath.besselj(n, x)), (bessel_y(n, x), mpmath.bessely(n, x))):
            ref = float(ref)
            err = abs(ours - ref) / scale(x, ref)
            if x <= 20:
                worst_small = max(worst_small, err)
            else:
                worst_large = max(worst_large, err)
    assert worst_small <= 1e-10
    assert worst_large <= 1e-8


@pytest.mark.parametrize("n,x", [(0, 0.7), (1, 3.3), (2, 9.1), (3, 17.0), (5, 26.0), (8, 60.0)])
def test_against_integral_representation(n, x):
    # J_n(x) = (1/pi) int_0^pi cos(n tau - x sin tau) d tau
    val, _ = integrate.quad(lambda s: math.cos(n * s - x * math.sin(s)), 0.0, math.pi,
                            epsabs=1e-13, epsrel=0.0, limit=400)
    assert bessel_j(n, x) == pytest.approx(val / math.pi, abs=1e-12)


def test_small_argument_limits():
    assert bessel_j(0, 1e-12) == pytest.approx(1.0, abs=1e-15)
    assert abs(bessel_j(1, 1e-12)) < 1e-12
    assert bessel_y(0, 0.1) < 0


def independent_j0(x, terms=30):
    return sum((-1) ** k * (x / 2) ** (2 * k) / math.factorial(k) ** 2 for k in range(terms))


def test_first_zero_of_j0():
    lo, hi = 2.0, 3.0
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if independent_j0(lo) * independent_j0(mid) <= 0:
            hi = mid
        else:
            lo = mid
    root = 0.5 * (lo + hi)
    assert root == pytest.approx(2.404825557695773, abs=1e-12)
    assert abs(bessel_j(0, 2.404825557695773)) <= 1e-9


def test_recurrence_at_two():
    assert abs(bessel_j(1, 2.0) + bessel_j(3, 2.0) - (4 / 2.0) * bessel_j(2, 2.0)) <= 1e-12


def test_wronskian_at_two():
    w = bessel_j(1, 2.0) * bessel_y(0, 2.0) - bessel_j(0, 2.0) * bessel_y(1, 2.0)
    assert abs(w - 2 / (math.pi * 2.0)) <= 1e-11


def test_y0_decay_bound():
    x = np.geomspace(10, 1e4, 500)
    assert np.max(np.abs(bessel_y(0, x)) * np.sqrt(x)) < 1.0


def test_domain_errors():
    for bad in ((0, 0.0), (0, -1.0), (9, 1.0), (1.5, 1.0), (0, 2e5)):
        with pytest.raises(BesselDomainError):
            bessel_j(*bad)
    with pytest.raises(BesselDomainError):
        bessel_y(0, 1e-9)


def test_array_input():
    x = np.array([[1.0, 2.0], [3.0, 40.0]])
    out = bessel_j(2, x)
    assert out.shape == (2, 2)
    assert out[1, 1] == bessel_j(2, 40.0)


@given(n=st.integers(1, 7), x=st.floats(0.5, 1e3))
def test_recurrence_property(n, x):
    for f in (bessel_j, bessel_y):
        lhs = f(n - 1, x) + f(n + 1, x)
        rhs = 2 * n / x * f(n, x)
        mag = max(abs(f(n - 1, x)), abs(f(n + 1, x)), abs(rhs), 1e-300)
        assert abs(lhs - rhs) <= 1e-11 * max(1.0, mag)


# --- closed forms ---------------------------------------------------------


def test_initial_values_and_report():
    for row in oracle_report():
        assert row["x(1)"] == pytest.approx(1.0, abs=1e-14)
        assert abs(row["fd_velocity(1)"]) <= 1e-6
    flagged = [r["case"] for r in oracle_report() if r["renormalized"]]
    assert flagged == ["eps_inv_t2/alpha=2"]
    assert make_case("eps_inv_t2", 2).normalization == pytest.approx(3.0)


def test_published_values():
    assert closed_form(make_case("eps_inv_t2", 3), 1.0) == 1.0
    assert closed_form(make_case("eps_inv_t2", 1), 1.0) == 1.0
    assert closed_form(make_case("eps_inv_t", 1), 1.0) == pytest.approx(1.0, abs=1e-15)
    assert closed_form(make_case("eps_inv_t3", 4), 1e4) == pytest.approx(0.705703, abs=1e-5)


def test_case_errors():
    with pytest.raises(ValueError):
        make_case("eps_inv_t", 4)
    with pytest.raises(ValueError):
        closed_form(make_case("eps_inv_t2", 3), 0.5)


@pytest.mark.parametrize("case", closed_form_cases(), ids=lambda c: c.case_id)
def test_ode_residual(case):
    # x'' + (alpha/t) x' + t^-k x with numerical derivatives, step 1e-4 t
    k = case.schedule_power
    worst = 0.0
    for t in np.geomspace(2.0, 1e3, 60):
        h = 1e-4 * t
        xm, x0, xp = case.eval(t - h), case.eval(t), case.eval(t + h)
        d1 = (xp - xm) / (2 * h)
        d2 = (xp - 2 * x0 + xm) / h**2
        terms = (abs(d2), abs(case.alpha / t * d1), abs(t**-k * x0))
        res = d2 + case.alpha / t * d1 + t**-k * x0
        worst = max(worst, abs(res) / max(terms))
    assert worst <= 1e-4


def test_case_schedule_label():
    assert case_schedule(make_case(Family.eps_inv_t3, 4)) == "power:3"


@pytest.mark.parametrize("alpha", [1, 2, 3])
def test_decay_rule_on_closed_form(alpha):
    case = make_case("eps_inv_t", alpha)
    t = np.geomspace(1e2, 1e5, 12001)
    fit = rate_fit(Series(t, closed_form(case, t)), (1e2, 1e5))
    assert fit.method == "envelope"
    assert fit.exponent == pytest.approx(-(2 * alpha - 1) / 4, abs=0.05)
