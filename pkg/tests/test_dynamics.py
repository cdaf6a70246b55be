import numpy as np
import pytest
from hypothesis import given, strategies as st

from avdlab.dynamics import DynamicsError, PhaseState, Variant, make_spec, rhs
from avdlab.problems import builtin_problem
from avdlab.schedules import parse_schedule

ZERO = builtin_problem("zero")


def test_avd_eps_at_start():
    spec = make_spec("AVD_alpha_eps", ZERO, parse_schedule("power:1"), alpha=3)
    dx, dv = rhs(spec, PhaseState(1.0, [1.0], [0.0]))
    np.testing.assert_array_equal(dx, [0.0])
    np.testing.assert_array_equal(dv, [-1.0])


def test_avd_alpha_equilibrium():
    P = builtin_problem("scaled_norm_sq", [2.0, 3])
    spec = make_spec("AVD_alpha", P, alpha=2)
    _, dv = rhs(spec, PhaseState(5.0, np.zeros(3), np.zeros(3)))
    np.testing.assert_array_equal(dv, np.zeros(3))


def test_hbf_comparison_system():
    spec = make_spec("HBF_eps", ZERO, parse_schedule("power:1"), gamma=3)
    _, dv = rhs(spec, PhaseState(1.0, [1.0], [0.0]))
    np.testing.assert_array_equal(dv, [-1.0])
    _, dv = rhs(spec, PhaseState(2.0, [1.0], [1.0]))
    assert dv[0] == pytest.approx(-3.0 - 0.5)


def test_avd_alpha_ignores_schedule():
    spec = make_spec("AVD_alpha", ZERO, parse_schedule("power:1"), alpha=3)
    assert spec.schedule.kind == "zero"
    assert spec.epsilon(2.0) == 0.0


@pytest.mark.parametrize("kwargs", [
    dict(variant="AVD_alpha_eps", alpha=0.0),
    dict(variant="AVD_alpha_eps", alpha=-1.0),
    dict(variant="AVD_alpha_eps", alpha=3.0, t0=0.0),
    dict(variant="HBF_eps", gamma=0.0),
    dict(variant="HBF_eps"),
])
def test_invalid_specs(kwargs):
    variant = kwargs.pop("variant")
    with pytest.raises(DynamicsError):
        make_spec(variant, ZERO, parse_schedule("power:1"), **kwargs)


def test_rhs_errors():
    spec = make_spec("AVD_alpha_eps", ZERO, parse_schedule("power:1"), alpha=3)
    with pytest.raises(DynamicsError):
        rhs(spec, PhaseState(0.5, [1.0], [0.0]))
    with pytest.raises(DynamicsError):
        rhs(spec, PhaseState(1.0, [1.0, 2.0], [0.0, 0.0]))
    with pytest.raises(DynamicsError):
        PhaseState(1.0, [np.nan], [0.0])
    bad = builtin_problem("zero")
    bad = type(bad)("bad", 1, value=lambda x: 0.0, gradient=lambda x: np.array([np.inf]))
    with pytest.raises(DynamicsError):
        rhs(make_spec("AVD_alpha", bad, alpha=1), PhaseState(1.0, [0.0], [0.0]))


def test_variant_enum():
    assert Variant("HBF_eps").is_avd is False
    assert Variant.AVD_alpha.is_avd


@given(
    t=st.floats(1.0, 1e6),
    x=st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=2),
    v=st.lists(st.floats(-1e3, 1e3), min_size=2, max_size=2),
    variant=st.sampled_from(["AVD_alpha_eps", "HBF_eps"]),
)
def test_rhs_pure_and_linear(t, x, v, variant):
    P = builtin_problem("scaled_norm_sq", [1.5, 2])
    spec = make_spec(variant, P, parse_schedule("power:1"), alpha=3.0, gamma=2.0)
    s = PhaseState(t, x, v)
    a = rhs(spec, s)
    b = rhs(spec, s)
    np.testing.assert_array_equal(a[1], b[1])
    d = rhs(spec, PhaseState(t, 2 * np.array(x), 2 * np.array(v)))
    np.testing.assert_allclose(d[1], 2 * a[1], rtol=1e-12, atol=1e-9)
