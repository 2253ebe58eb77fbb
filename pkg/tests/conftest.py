import numpy as np
import pytest

from kinklab.fields import make_grid
from kinklab.kink import kink_closed_form, kink_quadrature, lattice_kink
from kinklab.normalform import normal_form
from kinklab.potential import build_perturbed, ginzburg_landau
from kinklab.spectral import assemble, discrete_spectrum_odd


class Setup:
    def __init__(self, potential, L, N, lattice=True):
        self.potential = potential
        self.grid = make_grid(L, N)
        if potential.kind == "ginzburg_landau":
            base = kink_closed_form(self.grid, potential)
        else:
            base = kink_quadrature(potential, self.grid)
        self.continuum_kink = base
        self.kink = lattice_kink(base) if lattice else base
        self.op = assemble(potential, self.kink)
        self.spectral = discrete_spectrum_odd(self.op)
        self._nf = None

    @property
    def normal_form(self):
        if self._nf is None:
            self._nf = normal_form(self.potential, self.kink, self.op, self.spectral)
        return self._nf


@pytest.fixture(scope="session")
def gl_small():
    """Quartic well on a short coarse grid (fast unit tests)."""
    return Setup(ginzburg_landau(), 40.0, 1024)


@pytest.fixture(scope="session")
def gl_std():
    """Quartic well at the standard resolution L=80, N=4096."""
    return Setup(ginzburg_landau(), 80.0, 4096)


@pytest.fixture(scope="session")
def gl_continuum():
    """Standard grid with the continuum (closed-form) kink, no lattice polish."""
    return Setup(ginzburg_landau(), 80.0, 4096, lattice=False)


@pytest.fixture(scope="session")
def pert_std():
    return Setup(build_perturbed(0.05), 80.0, 4096)


@pytest.fixture
def rng():
    return np.random.default_rng(12345)
