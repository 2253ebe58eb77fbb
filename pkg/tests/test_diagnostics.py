import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.integrate import quad
from scipy.special import exp1

from kinklab.diagnostics import (ExpTailTable, ModulationTrace, compute_majorants, decompose_f, default_window,
                                 extract_modulation, fit_decay, modulation_residual, quadratic_part,
                                 scattering_state, tail_J, upper_envelope, z_longtime_fit)
from kinklab.errors import InvalidArgument, WindowError
from kinklab.evolve import EvolutionConfig, evolve_free, evolve_linearized, evolve_nonlinear
from kinklab.fields import FieldPair, make_grid
from kinklab.normalform import ProjectorData
from kinklab.spectral import free_operator


@pytest.fixture(scope="module")
def table():
    return ExpTailTable()


def _linear_run(setup, X, T=5.0, stride=10):
    return evolve_linearized(X, setup.op, EvolutionConfig(0.4 * setup.grid.dx, T, stride))


def test_mode_coefficient_of_pure_states(gl_small):
    proj = ProjectorData.from_spectral(gl_small.spectral)
    x = gl_small.grid.x
    bump = FieldPair(x * np.exp(-((x - 3) ** 2)), np.zeros_like(x), gl_small.grid)
    for X, z0 in ((proj.w(0.3), 0.3), (proj.Pc(bump).real, 0.0)):
        tr = extract_modulation(_linear_run(gl_small, X, T=1.0), proj)
        assert tr.z[0] == pytest.approx(z0, abs=1e-12)
        assert tr.eps == pytest.approx(z0**2, abs=1e-12)
        assert tr.reconstruction_error() < 1e-10


def test_modulation_residual_is_second_order_in_the_stride(gl_small):
    proj = ProjectorData.from_spectral(gl_small.spectral)
    dt = 0.4 * gl_small.grid.dx
    res = []
    for stride in (8, 4):
        tr = extract_modulation(_linear_run(gl_small, proj.w(0.1), T=4.0, stride=stride), proj)
        res.append(modulation_residual(tr)["max_abs"])
    # the O(dt^2) leapfrog phase shift adds a stride-independent part
    assert res[0] / res[1] == pytest.approx(4.0, rel=0.05)
    assert res[0] < 0.1 * proj.mu**3 * (8 * dt) ** 2


def test_coarse_stride_warns(gl_small):
    proj = ProjectorData.from_spectral(gl_small.spectral)
    tr = extract_modulation(_linear_run(gl_small, proj.w(0.1), T=10.0, stride=30), proj)
    with pytest.warns(RuntimeWarning):
        modulation_residual(tr)


@settings(max_examples=25, deadline=None)
@given(st.floats(0.2, 3.0), st.floats(0.1, 10.0))
def test_fit_decay_recovers_exact_power_laws(p, c):
    t = np.linspace(0, 200, 801)
    fit = fit_decay(t, c * (1 + t) ** -p, (10, 200))
    assert fit.exponent == pytest.approx(-p, abs=1e-10)
    assert fit.prefactor == pytest.approx(c, rel=1e-9)
    assert fit.r_squared == pytest.approx(1.0, abs=1e-12) and fit.accepted


def test_envelope_fit_through_oscillations():
    t = np.linspace(0, 300, 6001)
    period = 2 * np.pi / np.sqrt(2)
    v = (1 + t) ** -1.0 * (1.05 + np.cos(np.sqrt(2) * t))
    raw = fit_decay(t, v, (10, 300))
    env = fit_decay(t, v, (10, 300), envelope_period=period)
    # the envelope is a staircase (each peak held for up to one period): O(P/t) bias
    assert env.exponent == pytest.approx(-1.0, abs=0.03)
    assert env.r_squared > 0.999 > raw.r_squared
    assert np.all(upper_envelope(t, v, period) >= v)


def test_fit_decay_rejects_bad_series():
    t = np.linspace(0, 10, 11)
    with pytest.raises(WindowError):
        fit_decay(t, np.cos(t), (0, 10))
    with pytest.raises(WindowError):
        fit_decay(t, np.ones_like(t), (20, 30))
    with pytest.raises(WindowError):
        default_window(100.0, 25.0)
    assert default_window(150.0, 160.0) == (10.0, 140.0)


def test_majorants_of_the_model_law():
    t = np.linspace(0, 500, 2001)
    eps = 0.01
    r = eps / (1 + eps * t)
    m = compute_majorants(t, np.sqrt(r), np.sqrt(r) * np.log(2 + eps * t), r**1.5, eps)
    assert m["M1"][-1] == pytest.approx(1.0, rel=1e-12)
    assert m["bounded"]
    grow = compute_majorants(t, np.sqrt(r) * (1 + t) ** 0.2, np.sqrt(r), r**1.5, eps)
    assert not grow["verdict"]["M1"]["flat"] and not grow["bounded"]


@pytest.mark.parametrize("mu,k,rho", [(1.2247, 0.2, -0.3), (0.8, 1.0, 0.1)])
def test_long_time_law_round_trip(mu, k, rho):
    eps = 0.5
    t = np.linspace(0, 400, 8001)
    z = 0.7 * np.exp(1j * mu * t) * (1 + k * eps * t) ** (-0.5 + 1j * rho)
    fit = z_longtime_fit(t, z, eps)
    assert fit["mu_method"] == "joint"
    assert fit["mu_fit"] == pytest.approx(mu, rel=1e-6)
    assert fit["k_fit"] == pytest.approx(k, rel=1e-6)
    assert fit["rho_fit"] == pytest.approx(rho, abs=1e-6)
    assert fit["z_inf"] == pytest.approx(0.7, rel=1e-6)


def test_long_time_law_needs_visible_decay():
    t = np.linspace(0, 100, 2001)
    z = 0.1 * np.exp(1.2j * t) * (1 + 1e-3 * t) ** -0.5
    with pytest.raises(WindowError):
        z_longtime_fit(t, z, 0.01)
    fit = z_longtime_fit(t, z, 0.01, require_decay=None)
    assert fit["mu_fit"] == pytest.approx(1.2, rel=1e-6)


def test_quadratic_profile_and_decomposition(gl_small):
    proj, co = gl_small.normal_form
    kq_psi, kq_pi = quadratic_part(co, np.zeros(3, dtype=complex))
    assert not np.any(kq_psi) and not np.any(kq_pi)
    kq_psi, _ = quadratic_part(co, np.array([0.1, 0.1j]))
    # kq is quadratic: z -> i z flips the a20 part, keeps the a11 part
    np.testing.assert_allclose(kq_psi[0] + kq_psi[1], 4 * 0.01 * co.a11.psi.real, atol=1e-15)
    g = gl_small.grid
    tr = evolve_nonlinear(proj.w(0.1), gl_small.potential, gl_small.kink, EvolutionConfig(0.4 * g.dx, 3.0, 20))
    trace = extract_modulation(tr, proj)
    dec = decompose_f(trace, co, gl_small.op)
    assert dec["h0_equals_f0"] < 1e-15
    assert dec["h_norm"].shape == trace.times.shape


def test_decomposition_without_mode_is_trivial(gl_small):
    proj, co = gl_small.normal_form
    x = gl_small.grid.x
    X = proj.Pc(FieldPair(x * np.exp(-((x - 3) ** 2)), np.zeros_like(x), gl_small.grid)).real
    trace = extract_modulation(_linear_run(gl_small, X, T=2.0), proj)
    trace.z[:] = 0.0
    dec = decompose_f(trace, co, gl_small.op)
    assert np.max(np.abs(dec["g"].psi)) == 0.0
    np.testing.assert_array_equal(dec["h_psi"], trace.f_psi)


def test_scattering_state_of_a_free_wave():
    g = make_grid(40.0, 800)
    x = g.x
    X = FieldPair(x * np.exp(-((x - 5) ** 2)), np.zeros_like(x), g)
    tr = evolve_free(X, 2.0, EvolutionConfig(0.02, 10.0, 10), dispersion="lattice")
    n = len(tr.times)
    trace = ModulationTrace(tr.times, np.zeros(n, complex), tr.psi, tr.pi, None, tr, 0.0)
    out = scattering_state(tr, trace, free_operator(g, 2.0))
    assert np.max(out["remainder"]) < 1e-12
    np.testing.assert_allclose(out["Phi_plus"].psi, X.psi, atol=1e-13)
    with pytest.raises(InvalidArgument):
        scattering_state(tr, trace, free_operator(g, 2.0), dispersion="leapfrog")


def test_exponential_integral_table(table):
    v = np.concatenate((np.geomspace(1e-12, 1, 40), np.linspace(1.01, 399, 200), [500.0, 2e3]))
    ref = exp1(-1j * v)
    assert np.max(np.abs(table(v) - ref)) < 1e-7
    assert table.error < 1e-7


@pytest.mark.parametrize("Omega,t", [(0.7, 0.0), (-1.3, 5.0), (2.5, 40.0)])
def test_tail_integral_against_direct_quadrature(table, Omega, t):
    # int_t^inf e^{i Omega tau}/(1+tau) dtau, via quad's Fourier weight
    re = quad(lambda s: 1 / (1 + s), t, np.inf, weight="cos", wvar=Omega)[0]
    im = quad(lambda s: 1 / (1 + s), t, np.inf, weight="sin", wvar=Omega)[0]
    assert tail_J(table, np.array([Omega]), t)[0] == pytest.approx(re + 1j * im, abs=1e-7)
