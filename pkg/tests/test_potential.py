import warnings

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from kinklab.errors import InvalidArgument
from kinklab.potential import (PotentialModel, build_perturbed, ginzburg_landau, perturbation_constant,
                               smoothstep, tabulated, verify_U1)

MODELS = [ginzburg_landau(), build_perturbed(0.1), build_perturbed(0.05)]


def test_gl_point_values():
    U = ginzburg_landau()
    assert U.eval(0.0, 0) == 0.25
    assert U.eval(1.0, 2) == 2.0
    assert U.eval(1.0, 0) == 0.0 and U.eval(-1.0, 0) == 0.0


def test_perturbed_is_quadratic_near_vacuum():
    U = build_perturbed(0.1)
    assert U.eval(1.02, 0) == pytest.approx(4.0e-4, rel=1e-12)
    assert U.eval(-0.97, 0) == pytest.approx(9.0e-4, rel=1e-12)


def test_perturbed_equals_gl_outside_window():
    U, U0 = build_perturbed(0.1), ginzburg_landau()
    psi = np.concatenate((np.linspace(-2, -1.1001, 50), np.linspace(-0.8999, 0.8999, 50), np.linspace(1.1001, 2, 50)))
    for n in range(4):
        np.testing.assert_array_equal(U.eval(psi, n), U0.eval(psi, n))


def test_perturbation_bounded_by_delta():
    # sup |U'' - U0''| <= C delta with a delta-independent C on the sweep
    cs = [perturbation_constant(build_perturbed(d)) for d in (0.2, 0.1, 0.05, 0.025)]
    assert max(cs) / min(cs) < 1.1
    d0 = [perturbation_constant(build_perturbed(d), order=0) * d for d in (0.2, 0.1, 0.05, 0.025)]
    assert all(a > b for a, b in zip(d0, d0[1:]))  # U -> U0 monotonically


def test_smoothstep_plateau_and_flatness():
    p = smoothstep(6)
    assert p(0.0) == 0.0 and p(1.0) == pytest.approx(1.0, abs=1e-12)
    for k in range(1, 7):
        assert abs(p.deriv(k)(0.0)) < 1e-9 and abs(p.deriv(k)(1.0)) < 1e-9


@pytest.mark.parametrize("U", MODELS, ids=lambda m: f"{m.kind}{m.delta or ''}")
@settings(max_examples=60, deadline=None)
@given(psi=st.floats(-2, 2, allow_nan=False))
def test_even_potential_has_odd_force(U, psi):
    assert U.eval(-psi, 0) == pytest.approx(U.eval(psi, 0), abs=1e-14)
    assert U.F(-psi, 0) == pytest.approx(-U.F(psi, 0), abs=1e-12)


@pytest.mark.parametrize("U", MODELS, ids=lambda m: f"{m.kind}{m.delta or ''}")
@pytest.mark.parametrize("n", [0, 1, 2])
def test_finite_difference_derivatives_converge_at_second_order(U, n):
    psi = np.array([0.3, 0.7, 0.93, 1.06, 1.4])
    errs = []
    for h in (1e-3, 5e-4):
        fd = (U.eval(psi + h, n) - U.eval(psi - h, n)) / (2 * h)
        errs.append(np.max(np.abs(fd - U.eval(psi, n + 1))))
    assert errs[1] < errs[0] / 3.5 or errs[1] < 1e-9


def test_derivative_order_limits():
    with pytest.raises(InvalidArgument):
        ginzburg_landau().eval(0.5, 5)


def test_verify_U1_gl_fails_flatness():
    r = verify_U1(ginzburg_landau())
    assert r.positivity and r.evenness
    assert r.flatness_order == pytest.approx(3.0, abs=0.05)
    assert not r.flatness_ok and not r.passes


def test_verify_U1_perturbed_is_exactly_flat():
    r = verify_U1(build_perturbed(0.1))
    assert r.flatness_order == float("inf") and r.passes


def test_verify_U1_detects_negative_potential():
    xs = np.linspace(0, 2, 41)
    us = 0.25 * (1 - xs**2) ** 2 - 0.5 * np.exp(-20 * xs**2)
    r = verify_U1(tabulated(xs, us, 1.0))
    assert not r.positivity and not r.passes


def test_tabulated_clamps_with_warning():
    xs = np.linspace(0, 1.5, 31)
    U = tabulated(xs, 0.25 * (1 - xs**2) ** 2, 1.0)
    assert U.m2 == pytest.approx(2.0, rel=1e-2)
    with pytest.warns(RuntimeWarning):
        U.eval(3.0, 0)
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        assert U.eval(-0.5, 0) == pytest.approx(U.eval(0.5, 0))


@pytest.mark.parametrize("delta", [0.0, 0.5, -0.1, float("nan")])
def test_perturbed_rejects_bad_width(delta):
    with pytest.raises(InvalidArgument):
        build_perturbed(delta)


@pytest.mark.parametrize("U", MODELS + [tabulated(np.linspace(0, 2, 21), np.linspace(0, 2, 21) ** 2, 1.0, 2.0)],
                         ids=lambda m: m.kind)
def test_serialization_round_trip(U):
    V = PotentialModel.from_json(U.to_json())
    psi = np.linspace(-1.5, 1.5, 31)
    np.testing.assert_array_equal(V.eval(psi, 1), U.eval(psi, 1))
    assert V.to_dict() == U.to_dict()
