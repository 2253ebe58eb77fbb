import numpy as np
import pytest

from kinklab.errors import DegeneratePotential
from kinklab.fields import make_grid
from kinklab.kink import (from_samples, kink_closed_form, kink_quadrature, kink_residual, lattice_kink,
                          tail_decay_fit)
from kinklab.potential import build_perturbed, ginzburg_landau, tabulated

from oracles import kink_by_ode

GRID = make_grid(80.0, 4096)


@pytest.fixture(scope="module")
def gl_quad():
    return kink_quadrature(ginzburg_landau(), GRID)


@pytest.fixture(scope="module")
def pert_quad():
    return kink_quadrature(build_perturbed(0.1), GRID)


def test_closed_form_values():
    k = kink_closed_form(make_grid(64.0, 4096))  # x = 1 is node 64
    assert k.s[63] == pytest.approx(np.tanh(1 / np.sqrt(2)), abs=1e-15)
    assert k.s[63] == pytest.approx(0.6088594, abs=1e-7)
    k = kink_closed_form(GRID)
    i20 = int(round(20.0 / GRID.dx)) - 1
    e = np.exp(-20 * np.sqrt(2))
    assert k.gap[i20] == pytest.approx(2 * e / (1 + e), rel=1e-13)  # 1.04e-12
    assert 1 - k.s[-1] < 1e-6
    assert k.is_monotone()


def test_quadrature_matches_closed_form(gl_quad):
    ref = kink_closed_form(GRID)
    sel = GRID.x <= 20
    assert np.max(np.abs(gl_quad.s[sel] - ref.s[sel])) < 1e-8
    # the tail keeps relative precision through the stored gap
    far = GRID.x > 20
    np.testing.assert_allclose(gl_quad.gap[far], ref.gap[far], rtol=1e-8)


def test_first_integral_holds(gl_quad, pert_quad):
    for k in (gl_quad, pert_quad):
        np.testing.assert_allclose(k.s_prime, np.sqrt(2 * k.potential.eval(k.s, 0)), atol=1e-10)


def test_perturbed_kink_against_ode_oracle(pert_quad):
    sel = GRID.x <= 20
    ref = kink_by_ode(pert_quad.potential, GRID.x[sel])
    assert np.max(np.abs(pert_quad.s[sel] - ref)) < 1e-8


def test_perturbed_kink_equals_tanh_below_the_window(pert_quad):
    t = np.tanh(GRID.x / np.sqrt(2))
    inside = t < 1 - 0.1 - 1e-3
    assert np.max(np.abs(pert_quad.s[inside] - t[inside])) < 1e-10
    diff = np.max(np.abs(pert_quad.s - t))
    assert 0 < diff < 0.1


def test_perturbed_tail_bound(pert_quad):
    assert np.all(pert_quad.gap <= np.exp(-GRID.x / np.sqrt(2)))


def test_residual_small_and_converging():
    r = {}
    for N in (2048, 4096, 8192):
        k = kink_closed_form(make_grid(80.0, N))
        r[N] = (kink_residual(k), kink_residual(k, order=2))
    assert r[4096][0] < 1e-6
    # three-point stencil: second order; five-point: at least second order
    assert r[4096][1] / r[8192][1] == pytest.approx(4.0, rel=0.05)
    assert r[2048][0] / r[4096][0] > 3.9


def test_residual_detects_bump():
    k = kink_closed_form(GRID)
    bumped = from_samples(GRID, k.s + 1e-3 * np.exp(-((GRID.x - 5) ** 2)), k.potential)
    assert kink_residual(bumped) > 1e-3


def test_zero_profile_has_zero_residual_but_is_not_monotone():
    z = from_samples(GRID, np.zeros(GRID.N), ginzburg_landau(), s_edge=0.0)
    assert kink_residual(z) == 0.0
    assert not z.is_monotone()


def test_tail_fits():
    assert tail_decay_fit(kink_closed_form(GRID))["m_fit"] == pytest.approx(np.sqrt(2), rel=1e-2)
    assert tail_decay_fit(kink_quadrature(build_perturbed(0.1), GRID))["m_fit"] == pytest.approx(np.sqrt(2), rel=2e-2)
    g = make_grid(8.0, 800)
    synth = from_samples(g, 1 - np.exp(-3 * g.x), ginzburg_landau())
    assert tail_decay_fit(synth)["m_fit"] == pytest.approx(3.0, abs=1e-6)


def test_lattice_kink_is_a_discrete_fixed_point():
    g = make_grid(40.0, 2048)
    base = kink_closed_form(g)
    k = lattice_kink(base)
    ext = np.concatenate(([0.0], k.s, [k.s_edge]))
    res = (ext[2:] - 2 * ext[1:-1] + ext[:-2]) / g.dx**2 - k.potential.eval(k.s, 1)
    assert np.max(np.abs(res)) < 1e-8
    assert k.is_monotone() and k.method == "lattice:closed_form"
    # O(dx^2) away from the continuum kink
    err = np.max(np.abs(k.s - base.s))
    err2 = np.max(np.abs(lattice_kink(kink_closed_form(g.refined())).s[1::2] - base.s))
    assert err / err2 == pytest.approx(4.0, rel=0.05)


def test_rebuild_keeps_method():
    k = lattice_kink(kink_closed_form(make_grid(20.0, 256)))
    k2 = k.rebuild(make_grid(20.0, 512))
    assert k2.method == k.method and k2.grid.N == 512


def test_no_kink_for_negative_well():
    xs = np.linspace(0, 2, 41)
    bad = tabulated(xs, 0.25 * (1 - xs**2) ** 2 - 0.5 * np.exp(-20 * xs**2), 1.0)
    with pytest.raises(DegeneratePotential):
        kink_quadrature(bad, make_grid(20.0, 256))
