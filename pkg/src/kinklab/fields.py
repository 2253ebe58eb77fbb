"""Odd states on a half-line grid: storage, quadrature, norms and energy.

Only x > 0 is stored.  The value at x = 0 is zero by oddness, and a
Dirichlet wall sits one spacing past the last node, at x_{N+1} = L + dx.
Full-line integrals are twice the half-line trapezoid over the nodes
0, 1, ..., N+1; with that wall position the discrete sine transform
diagonalizes the three-point Laplacian exactly.
"""

from dataclasses import dataclass

import numpy as np

from .errors import InvalidArgument

NORM_KINDS = ("E_sigma", "E_minus_sigma", "W", "Linf_first_component", "L2_weighted")


@dataclass(frozen=True)
class OddGrid:
    L: float
    N: int

    def __post_init__(self):
        if not (np.isfinite(self.L) and self.L > 0):
            raise InvalidArgument(f"grid length must be positive, got {self.L}")
        if int(self.N) != self.N or self.N < 16:
            raise InvalidArgument(f"grid needs N >= 16 nodes, got {self.N}")

    @property
    def dx(self) -> float:
        return self.L / self.N

    @property
    def x(self) -> np.ndarray:
        return np.arange(1, self.N + 1) * self.dx

    @property
    def wall(self) -> float:
        """Position of the Dirichlet wall (ghost node N+1)."""
        return (self.N + 1) * self.dx

    def refined(self, factor: int = 2) -> "OddGrid":
        return OddGrid(self.L, self.N * factor)


def make_grid(L, N) -> OddGrid:
    """Uniform half-line grid with nodes x_j = j*L/N, j = 1..N."""
    return OddGrid(float(L), int(N))


@dataclass(frozen=True, eq=False)
class FieldPair:
    """Pair (psi, pi) sampled on the nodes 1..N of ``grid``.

    ``edge`` is the value of psi at the wall node.  It is zero for
    perturbations and equals the kink value there for full fields.
    """

    psi: np.ndarray
    pi: np.ndarray
    grid: OddGrid
    edge: float = 0.0

    def __post_init__(self):
        psi = np.asarray(self.psi)
        pi = np.asarray(self.pi)
        if psi.shape != (self.grid.N,) or pi.shape != (self.grid.N,):
            raise InvalidArgument("field components must have shape (N,)")
        object.__setattr__(self, "psi", psi)
        object.__setattr__(self, "pi", pi)

    @classmethod
    def zeros(cls, grid, dtype=float):
        return cls(np.zeros(grid.N, dtype), np.zeros(grid.N, dtype), grid)

    def _check(self, other):
        if other.grid != self.grid:
            raise InvalidArgument("field pairs live on different grids")

    def __add__(self, other):
        self._check(other)
        return FieldPair(self.psi + other.psi, self.pi + other.pi, self.grid, self.edge + other.edge)

    def __sub__(self, other):
        self._check(other)
        return FieldPair(self.psi - other.psi, self.pi - other.pi, self.grid, self.edge - other.edge)

    def __mul__(self, c):
        return FieldPair(c * self.psi, c * self.pi, self.grid, c * self.edge)

    __rmul__ = __mul__

    def __neg__(self):
        return self * -1.0

    def conj(self):
        return FieldPair(np.conj(self.psi), np.conj(self.pi), self.grid, np.conj(self.edge))

    @property
    def real(self):
        return FieldPair(np.real(self.psi), np.real(self.pi), self.grid, float(np.real(self.edge)))

    @property
    def imag(self):
        return FieldPair(np.imag(self.psi), np.imag(self.pi), self.grid, float(np.imag(self.edge)))

    def j(self):
        """Symplectic rotation j(psi, pi) = (-pi, psi)."""
        return FieldPair(-self.pi, self.psi, self.grid)


@dataclass(frozen=True)
class NormSpec:
    kind: str
    sigma: float = 0.0
    nu: float = 0.0

    def __post_init__(self):
        if self.kind not in NORM_KINDS:
            raise InvalidArgument(f"unknown norm kind {self.kind!r}")
        if self.sigma < 0 or self.nu < 0:
            raise InvalidArgument("sigma and nu must be nonnegative")

    @property
    def label(self) -> str:
        if self.kind == "E_sigma":
            return f"E_{self.sigma:g}"
        if self.kind == "E_minus_sigma":
            return f"E_-{self.sigma:g}"
        if self.kind == "L2_weighted":
            return f"L2_{self.sigma:g}"
        return self.kind


# -- quadrature ---------------------------------------------------------------

def integrate(grid: OddGrid, values, at_zero=0.0, at_wall=0.0):
    """Full-line trapezoid of an even integrand given on nodes 1..N.

    ``at_zero`` and ``at_wall`` are the integrand values at x=0 and at the
    wall node; each carries half weight on the half-line.
    """
    return grid.dx * (at_zero + 2.0 * np.sum(values, axis=-1) + at_wall)


def inner(X: FieldPair, Y: FieldPair):
    """Hermitian full-line pairing, conjugate-linear in the second slot."""
    X._check(Y)
    return integrate(X.grid, X.psi * np.conj(Y.psi) + X.pi * np.conj(Y.pi))


def derivative(grid: OddGrid, u, edge=0.0):
    """Centered first derivative on nodes 0..N+1.

    Oddness supplies u_{-1} = -u_1; beyond the wall the field is reflected
    oddly about the wall value, u_{N+2} = 2*edge - u_N.
    """
    h = grid.dx
    ext = np.concatenate(([-u[0], 0.0], u, [edge, 2 * edge - u[-1]]))
    return (ext[2:] - ext[:-2]) / (2 * h)


def second_derivative(grid: OddGrid, u, edge=0.0):
    """Three-point second derivative on nodes 0..N+1 (same reflections)."""
    h = grid.dx
    ext = np.concatenate(([-u[0], 0.0], u, [edge, 2 * edge - u[-1]]))
    return (ext[2:] - 2 * ext[1:-1] + ext[:-2]) / h**2


def laplacian(u, h, edge=0.0):
    """Three-point Laplacian on nodes 1..N with u_0 = 0 and u_{N+1} = edge."""
    out = np.empty_like(u)
    out[1:-1] = u[2:] - 2 * u[1:-1] + u[:-2]
    out[0] = u[1] - 2 * u[0]
    out[-1] = edge - 2 * u[-1] + u[-2]
    return out / h**2


def weight(grid: OddGrid, power: float, include_ends=False):
    x = grid.x
    if include_ends:
        x = np.concatenate(([0.0], x, [grid.wall]))
    return (1.0 + x) ** power


def _l2(grid, values_ends):
    """L2 norm of a sample vector on nodes 0..N+1 (full line)."""
    a2 = np.abs(values_ends) ** 2
    return np.sqrt(integrate(grid, a2[1:-1], a2[0], a2[-1]))


def _l1(grid, values_ends):
    a = np.abs(values_ends)
    return integrate(grid, a[1:-1], a[0], a[-1])


def _with_ends(u, edge=0.0):
    return np.concatenate(([0.0], u, [edge]))


def norm(state: FieldPair, spec: NormSpec) -> float:
    """Discrete norm of a perturbation ``state`` according to ``spec``.

    E_sigma:  ||w psi|| + ||w psi'|| + ||w pi||  with w = (1+|x|)^sigma,
    E_minus_sigma uses w = (1+|x|)^-sigma.  W sums the L1 norms of psi,
    psi', psi'', pi and pi'.  L2_weighted is ||(1+|x|)^sigma psi||.
    """
    g = state.grid
    psi, pi = state.psi, state.pi
    if spec.kind == "Linf_first_component":
        return float(np.max(np.abs(psi))) if psi.size else 0.0
    if spec.kind in ("E_sigma", "E_minus_sigma"):
        p = spec.sigma if spec.kind == "E_sigma" else -spec.sigma
        w = weight(g, p, include_ends=True)
        dpsi = derivative(g, psi, state.edge)
        return float(
            _l2(g, w * _with_ends(psi, state.edge))
            + _l2(g, w * dpsi)
            + _l2(g, w * _with_ends(pi))
        )
    if spec.kind == "L2_weighted":
        w = weight(g, spec.sigma, include_ends=True)
        return float(_l2(g, w * _with_ends(psi, state.edge)))
    # W: L1 with two derivatives on psi and one on pi
    return float(
        _l1(g, _with_ends(psi, state.edge))
        + _l1(g, derivative(g, psi, state.edge))
        + _l1(g, second_derivative(g, psi, state.edge))
        + _l1(g, _with_ends(pi))
        + _l1(g, derivative(g, pi))
    )


def energy_density(state_full: FieldPair, potential):
    """Energy density on nodes 0..N+1 of a full field (centered gradient)."""
    g = state_full.grid
    psi_e = _with_ends(np.real(state_full.psi), state_full.edge)
    pi_e = _with_ends(np.real(state_full.pi))
    dpsi = derivative(g, np.real(state_full.psi), state_full.edge)
    return 0.5 * pi_e**2 + 0.5 * dpsi**2 + potential.eval(psi_e, 0)


def energy(state_full: FieldPair, potential) -> float:
    """Hamiltonian of a full field psi = s + Psi on the whole line.

    The gradient term uses forward differences on the staggered midpoints,
    which makes this exactly the Hamiltonian whose gradient is the
    three-point force used by the time stepper.
    """
    g = state_full.grid
    h = g.dx
    psi = np.real(state_full.psi)
    pi = np.real(state_full.pi)
    kinetic = integrate(g, 0.5 * pi**2)
    ext = np.concatenate(([0.0], psi, [state_full.edge]))
    grad = 2.0 * h * np.sum(0.5 * (np.diff(ext) / h) ** 2)
    pot = integrate(
        g,
        potential.eval(psi, 0),
        potential.eval(0.0, 0),
        potential.eval(state_full.edge, 0),
    )
    return float(kinetic + grad + pot)


# -- serialization ------------------------------------------------------------

def write_csv(path, state: FieldPair, time="static"):
    """Write a snapshot as CSV with columns x, psi, pi and a grid header."""
    g = state.grid
    data = np.column_stack([g.x, np.real(state.psi), np.real(state.pi)])
    header = f"L={g.L!r},N={g.N},time={time},edge={float(np.real(state.edge))!r}\nx,psi,pi"
    np.savetxt(path, data, delimiter=",", header=header, comments="# ", fmt="%.17g")


def read_csv(path):
    """Inverse of :func:`write_csv`; returns (FieldPair, time)."""
    with open(path) as fh:
        first = fh.readline().lstrip("#").strip()
    meta = dict(item.split("=", 1) for item in first.split(","))
    grid = make_grid(float(meta["L"]), int(meta["N"]))
    data = np.loadtxt(path, delimiter=",", comments="#")
    t = meta.get("time", "static")
    time = t if t == "static" else float(t)
    return FieldPair(data[:, 1], data[:, 2], grid, float(meta.get("edge", 0.0))), time
