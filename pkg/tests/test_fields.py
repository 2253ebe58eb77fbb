import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from kinklab.errors import InvalidArgument
from kinklab.fields import (FieldPair, NormSpec, energy, energy_density, inner, integrate, make_grid, norm, read_csv,
                            write_csv)
from kinklab.kink import kink_closed_form
from kinklab.potential import ginzburg_landau

from oracles import KINK_ENERGY

SMALL = make_grid(4.0, 32)
finite = st.floats(-10, 10, allow_nan=False, allow_infinity=False)
vec = arrays(np.float64, SMALL.N, elements=finite)
SPECS = [NormSpec("E_sigma", 0.0), NormSpec("E_sigma", 3.0), NormSpec("E_minus_sigma", 3.0),
         NormSpec("W"), NormSpec("Linf_first_component"), NormSpec("L2_weighted", 2.6, 0.1)]


def test_grid_spacing_and_nodes():
    assert make_grid(80, 4096).dx == 0.01953125
    g = make_grid(1, 16)
    np.testing.assert_allclose(g.x, np.arange(1, 17) / 16)
    assert g.wall == pytest.approx(17 / 16)


@pytest.mark.parametrize("L,N", [(0, 16), (-1, 16), (1, 8), (np.nan, 32)])
def test_grid_rejects_bad_input(L, N):
    with pytest.raises(InvalidArgument):
        make_grid(L, N)


def test_components_must_share_grid():
    with pytest.raises(InvalidArgument):
        FieldPair(np.zeros(32), np.zeros(31), SMALL)
    with pytest.raises(InvalidArgument):
        FieldPair.zeros(SMALL) + FieldPair.zeros(make_grid(4.0, 64))


def test_unknown_norm_kind():
    with pytest.raises(InvalidArgument):
        NormSpec("H1")


@pytest.mark.parametrize("spec", SPECS, ids=lambda s: s.label)
def test_zero_state_has_zero_norm(spec):
    assert norm(FieldPair.zeros(SMALL), spec) == 0.0


def test_weight_increases_norm_for_state_away_from_origin():
    g = make_grid(10.0, 400)
    bump = np.where(g.x > 1, np.exp(-(g.x - 3) ** 2), 0.0)
    X = FieldPair(bump, bump, g)
    assert norm(X, NormSpec("E_sigma", 3.0)) > norm(X, NormSpec("E_sigma", 0.0))


def test_sine_mode_energy_norm_closed_form():
    # psi = sin(pi x / W) on (-W, W), W the wall: ||psi||^2 = W, ||psi'||^2 (centered
    # difference) = W (sin(pi h/W)/h)^2, both exact for the trapezoid on the sine basis
    g = make_grid(10.0, 500)
    W, h = g.wall, g.dx
    X = FieldPair(np.sin(np.pi * g.x / W), np.zeros(g.N), g)
    expected = np.sqrt(W) + np.sqrt(W) * np.sin(np.pi * h / W) / h
    assert norm(X, NormSpec("E_sigma", 0.0)) == pytest.approx(expected, rel=1e-10)


def test_sine_basis_is_orthogonal_under_the_quadrature():
    g = make_grid(5.0, 64)
    a = np.sin(3 * np.pi * g.x / g.wall)
    b = np.sin(7 * np.pi * g.x / g.wall)
    assert abs(integrate(g, a * b)) < 1e-13
    assert integrate(g, a * a) == pytest.approx(g.wall, rel=1e-13)


@settings(max_examples=40, deadline=None)
@given(vec, vec, vec, vec)
def test_triangle_inequality(a, b, c, d):
    X, Y = FieldPair(a, b, SMALL), FieldPair(c, d, SMALL)
    for spec in SPECS:
        assert norm(X + Y, spec) <= norm(X, spec) + norm(Y, spec) + 1e-9 * (1 + norm(X, spec) + norm(Y, spec))


@settings(max_examples=40, deadline=None)
@given(vec, vec, st.floats(0, 2), st.floats(0, 2))
def test_energy_norm_monotone_in_sigma(a, b, s1, s2):
    X = FieldPair(a, b, SMALL)
    lo, hi = sorted((s1, s2))
    assert norm(X, NormSpec("E_sigma", lo)) <= norm(X, NormSpec("E_sigma", hi)) * (1 + 1e-12) + 1e-300


@settings(max_examples=40, deadline=None)
@given(vec, vec, vec, vec)
def test_inner_product_hermitian_and_j_skew(a, b, c, d):
    X = FieldPair(a + 1j * b, c, SMALL)
    Y = FieldPair(d, b - 1j * a, SMALL)
    assert inner(X, Y) == pytest.approx(np.conj(inner(Y, X)), abs=1e-9)
    # <jX, Y> = -<X, jY>
    assert inner(X.j(), Y) == pytest.approx(-inner(X, Y.j()), abs=1e-9)


def test_kink_energy(gl_continuum):
    E = energy(gl_continuum.continuum_kink.as_field(), gl_continuum.potential)
    assert E == pytest.approx(KINK_ENERGY, rel=1e-5)


def test_vacuum_energy_lives_only_in_the_odd_jump():
    # psi = a on every node is the odd step: only the jump 0 -> a at the
    # origin costs energy, (a/h)^2/2 * 2h + U(0) h
    g = make_grid(10.0, 200)
    E = energy(FieldPair(np.ones(g.N), np.zeros(g.N), g, 1.0), ginzburg_landau())
    assert E == pytest.approx(1.0 / g.dx + 0.25 * g.dx, rel=1e-13)
    dens = energy_density(FieldPair(np.ones(g.N), np.zeros(g.N), g, 1.0), ginzburg_landau())
    assert np.all(dens[3:] == 0.0)


def test_momentum_adds_half_its_squared_norm(rng):
    g = make_grid(10.0, 200)
    kink = kink_closed_form(g)
    pi = rng.standard_normal(g.N)
    pi *= np.sqrt(2.0 / integrate(g, pi * pi))
    base = energy(kink.as_field(), ginzburg_landau())
    moved = energy(FieldPair(kink.s, pi, g, kink.s_edge), ginzburg_landau())
    assert moved - base == pytest.approx(1.0, rel=1e-12)


def test_kink_energy_is_stationary(gl_small, rng):
    # lattice kink is an exact critical point of the discrete energy
    k, P = gl_small.kink, gl_small.potential
    g = k.grid
    bump = g.x * np.exp(-((g.x - 2) ** 2)) * rng.uniform(0.5, 1.5)
    e0 = energy(k.as_field(), P)
    d = [energy(FieldPair(k.s + eps * bump, np.zeros(g.N), g, k.s_edge), P) - e0 for eps in (1e-3, 2e-3)]
    # quadratic: doubling eps multiplies the change by 4
    assert d[1] / d[0] == pytest.approx(4.0, rel=1e-3)


def test_csv_round_trip(tmp_path, rng):
    g = make_grid(3.0, 40)
    X = FieldPair(rng.standard_normal(g.N), rng.standard_normal(g.N), g, 0.25)
    write_csv(tmp_path / "s.csv", X, 1.5)
    Y, t = read_csv(tmp_path / "s.csv")
    assert t == 1.5 and Y.grid == g and Y.edge == 0.25
    np.testing.assert_array_equal(Y.psi, X.psi)
    np.testing.assert_array_equal(Y.pi, X.pi)
