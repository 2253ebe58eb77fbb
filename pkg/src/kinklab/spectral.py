"""Linearized operator H = -d^2/dx^2 + m^2 + V on odd functions.

Eigenvalues come from the tridiagonal matrix.  Continuum waves and the
edge test use Numerov shooting on the same samples of V.  Resolvents use
discrete variation of parameters: the regular solution from x = 0 and a
Jost solution from the right end, joined by their Casoratian, which solves
the three-point equation exactly with a lattice radiation condition at
the wall.
"""

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np
from scipy.linalg import eigh_tridiagonal

from .errors import InvalidArgument, NearSingular, SpectralConditionViolated, WindowError
from .fields import FieldPair, OddGrid, integrate


@dataclass(frozen=True, eq=False)
class LinearizedOperator:
    grid: OddGrid
    V: np.ndarray
    m2: float
    V0: float = 0.0  # V at x = 0, used by the shooting integrators
    builder: Optional[Callable[[OddGrid], "LinearizedOperator"]] = field(default=None, repr=False)
    potential: object = field(default=None, repr=False)
    kink: object = field(default=None, repr=False)

    @property
    def diagonal(self):
        return 2.0 / self.grid.dx**2 + self.m2 + self.V

    @property
    def offdiagonal(self):
        return np.full(self.grid.N - 1, -1.0 / self.grid.dx**2)

    @property
    def banded_matrix(self):
        """(upper, diagonal) rows in LAPACK symmetric banded layout."""
        upper = np.concatenate(([0.0], self.offdiagonal))
        return np.vstack([upper, self.diagonal])

    def apply(self, w, edge=0.0):
        """(H w)_j with w_0 = 0 and w_{N+1} = edge."""
        h = self.grid.dx
        ext = np.concatenate(([0.0], w, [edge]))
        return -(ext[2:] - 2 * ext[1:-1] + ext[:-2]) / h**2 + (self.m2 + self.V) * w

    def refined(self, factor=2):
        if self.builder is None:
            raise InvalidArgument("operator has no builder; cannot refine")
        return self.builder(self.grid.refined(factor))

    def decay_rate(self, floor=1e-13):
        """Measured c in |V| <= C exp(-c x) from the tail of |V|."""
        a = np.abs(self.V)
        sel = (a > floor) & (a < 1e-3)
        if np.count_nonzero(sel) < 8:
            return float("inf") if np.all(a <= floor) or not np.any(a) else float("nan")
        return float(-np.polyfit(self.grid.x[sel], np.log(a[sel]), 1)[0])


def assemble(potential, kink_profile, grid: Optional[OddGrid] = None) -> LinearizedOperator:
    """Sample V = U''(s) - m^2 on the kink's grid."""
    grid = grid or kink_profile.grid
    if grid != kink_profile.grid:
        raise InvalidArgument("kink profile lives on a different grid")
    V = potential.eval(kink_profile.s, 2) - potential.m2
    V0 = potential.eval(0.0, 2) - potential.m2

    def builder(g):
        return assemble(potential, kink_profile.rebuild(g), g)

    return LinearizedOperator(grid, V, potential.m2, V0, builder, potential, kink_profile)


def operator_from_function(grid: OddGrid, V_of_x: Callable, m2: float) -> LinearizedOperator:
    """Operator with an explicitly given potential V(x) (free or model wells)."""

    def builder(g):
        return operator_from_function(g, V_of_x, m2)

    return LinearizedOperator(grid, np.asarray(V_of_x(grid.x), float), float(m2),
                              float(V_of_x(np.array([0.0]))[0]), builder)


def free_operator(grid: OddGrid, m2: float) -> LinearizedOperator:
    return operator_from_function(grid, lambda x: np.zeros_like(x), m2)


# -- discrete spectrum --------------------------------------------------------

def _normalize(grid, phi):
    phi = phi / np.sqrt(integrate(grid, phi**2))
    k = max(1, int(round(0.5 / grid.dx)))  # sign fixed by samples near x = 0
    return phi if np.sum(phi[:k]) > 0 else -phi


def odd_eigenpairs_below_edge(op: LinearizedOperator):
    vals, vecs = eigh_tridiagonal(op.diagonal, op.offdiagonal, select="v",
                                  select_range=(-np.inf, op.m2))
    return vals, vecs


def theta(lam, m2):
    """Spectral density per unit lambda for flux-normalized odd waves.

    With waves normalized to amplitude 1 at infinity and full-line pairings,
    q = sum_d <q,phi_d> phi_d + int_{m2}^inf theta(lam) <q,phi_lam> phi_lam dlam,
    theta(lam) = 1 / (2 pi sqrt(lam - m2)).
    """
    lam = np.asarray(lam, dtype=float)
    return 1.0 / (2.0 * np.pi * np.sqrt(lam - m2))


@dataclass(frozen=True, eq=False)
class SpectralData:
    lambda1: float             # Richardson-extrapolated eigenvalue
    phi1: np.ndarray           # unit eigenvector of the grid matrix
    lambda1_grid: float        # eigenvalue of the grid matrix (pairs with phi1)
    lambda1_fine: float
    phi1_extrapolated: np.ndarray
    edge_resonance: bool
    edge_slope: float
    grid: OddGrid
    m2: float

    @property
    def mu(self):
        return float(np.sqrt(self.lambda1))

    @property
    def mu_grid(self):
        return float(np.sqrt(self.lambda1_grid))

    def theta(self, lam):
        return theta(lam, self.m2)

    @property
    def conditions(self):
        return {"lambda1_below_edge": bool(self.lambda1 < self.m2),
                "four_lambda1_in_continuum": bool(4 * self.lambda1 > self.m2),
                "no_edge_resonance": not self.edge_resonance}

    def to_dict(self, op=None):
        d = {"lambda1": self.lambda1, "lambda1_grid": self.lambda1_grid, "mu": self.mu,
             "edge_resonance": self.edge_resonance, "edge_slope": self.edge_slope,
             "conditions": self.conditions, "grid": {"L": self.grid.L, "N": self.grid.N}}
        if op is not None:
            d["V_decay_rate"] = op.decay_rate()
        return d


def discrete_spectrum_odd(op: LinearizedOperator, refine: bool = True) -> SpectralData:
    """The odd eigenvalue below m^2, refined by Richardson extrapolation N -> 2N."""
    vals, vecs = odd_eigenpairs_below_edge(op)
    if vals.size != 1:
        raise SpectralConditionViolated(
            f"expected exactly one odd eigenvalue below m^2 = {op.m2}, found {vals.size}")
    lam, phi = float(vals[0]), _normalize(op.grid, vecs[:, 0])
    lam_x, phi_x, lam_f = lam, phi, lam
    if refine and op.builder is not None:
        fine = op.refined(2)
        fv, fvec = odd_eigenpairs_below_edge(fine)
        if fv.size != 1:
            raise SpectralConditionViolated("refined grid changes the odd eigenvalue count")
        lam_f = float(fv[0])
        lam_x = (4.0 * lam_f - lam) / 3.0
        phi_f = _normalize(fine.grid, fvec[:, 0])[1::2]
        phi_x = _normalize(op.grid, (4.0 * phi_f - phi) / 3.0)
    edge = edge_resonance_test(op)
    return SpectralData(lam_x, phi, lam, lam_f, phi_x, edge["is_resonance"],
                        edge["growth_slope"], op.grid, op.m2)


# -- shooting -----------------------------------------------------------------

def numerov(op: LinearizedOperator, lam: float):
    """Solution of -phi'' + (m^2 + V - lam) phi = 0, phi(0)=0, phi'(0)=1, on nodes 0..N."""
    h = op.grid.dx
    q = np.concatenate(([op.V0], op.V)) + op.m2 - lam
    c = h * h / 12.0
    y = np.empty(op.grid.N + 1)
    y[0] = 0.0
    y[1] = h + q[0] * h**3 / 6.0
    a = 1.0 - c * q
    b = 2.0 * (1.0 + 5.0 * c * q)
    for j in range(1, op.grid.N):
        y[j + 1] = (b[j] * y[j] - a[j - 1] * y[j - 1]) / a[j + 1]
    return y


def _tail_start(op, vtol):
    big = np.nonzero(np.abs(op.V) > vtol)[0]
    return 0 if big.size == 0 else int(big[-1]) + 1


@dataclass(frozen=True, eq=False)
class ContinuumWave:
    lam: float
    k: float
    k_numerov: float
    samples: np.ndarray  # flux-normalized: amplitude 1 at infinity
    amplitude: float     # raw amplitude for phi'(0) = 1
    phase: float
    residual: float
    window: tuple


def continuum_wave(op: LinearizedOperator, lam: float, margin: float = 1e-3,
                   tail_start: Optional[float] = None, vtol: float = 1e-13,
                   tol: float = 1e-8) -> ContinuumWave:
    """Odd generalized eigenfunction at lam > m^2, matched to A sin(kx + theta) on the tail."""
    if lam <= op.m2 + margin:
        raise InvalidArgument(f"lambda must exceed m^2 + margin = {op.m2 + margin}")
    h, N = op.grid.dx, op.grid.N
    k = float(np.sqrt(lam - op.m2))
    kk = k * k * h * h / 12.0
    k_num = float(np.arccos((1.0 - 5.0 * kk) / (1.0 + kk)) / h)
    y = numerov(op, lam)
    x = np.arange(N + 1) * h
    i0 = _tail_start(op, vtol) + 1 if tail_start is None else int(np.ceil(tail_start / h))
    if N - i0 < 8 or (x[-1] - x[i0]) < 2 * (2 * np.pi / k):
        raise WindowError("tail window shorter than two wavelengths; lambda too close to the edge or V not decayed")
    xs = x[i0:]
    basis = np.column_stack([np.sin(k_num * xs), np.cos(k_num * xs)])
    coef, *_ = np.linalg.lstsq(basis, y[i0:], rcond=None)
    A = float(np.hypot(*coef))
    phase = float(np.arctan2(coef[1], coef[0]))
    resid = float(np.sqrt(np.mean((basis @ coef - y[i0:]) ** 2)) / A)
    if resid > tol:
        raise WindowError(f"tail is not sinusoidal (relative residual {resid:.2e})")
    return ContinuumWave(float(lam), k, k_num, y[1:] / A, A, phase, resid, (float(xs[0]), float(xs[-1])))


def edge_resonance_test(op: LinearizedOperator, tol: float = 1e-3, vtol: float = 1e-10) -> dict:
    """Zero-momentum solution at lam = m^2: bounded (resonance) or linearly growing."""
    y = numerov(op, op.m2)
    x = np.arange(op.grid.N + 1) * op.grid.dx
    i0 = min(_tail_start(op, vtol) + 1, op.grid.N - 8)
    beta, alpha = np.polyfit(x[i0:], y[i0:], 1)
    is_res = bool(abs(beta) < tol * abs(alpha) / op.grid.L)
    return {"is_resonance": is_res, "growth_slope": float(beta), "offset": float(alpha)}


# -- resolvents ---------------------------------------------------------------

def _exterior_ratio(op, lam, direction):
    """zeta = w_{j+1}/w_j for the admissible exterior solution where V = 0."""
    h = op.grid.dx
    b = 2.0 + h * h * (op.m2 - lam)
    if lam > op.m2:
        c = 0.5 * b
        if c < -1.0:
            raise InvalidArgument("lambda lies above the lattice band")
        return np.exp(1j * direction * np.arccos(c))
    return (b - np.sqrt(b * b - 4.0)) / 2.0


def resolvent_H(op: LinearizedOperator, lam: float, rhs, direction: int = +1, wtol: float = 1e-10):
    """Solve (H - lam) w = rhs on the grid.

    For lam > m^2 the exterior solution is exp(+i k x) (direction=+1) or
    exp(-i k x) (direction=-1); below m^2 it is the decaying one.  The
    returned samples satisfy the three-point equation exactly, with the
    condition w_{N+1} = zeta w_N replacing the Dirichlet wall.
    """
    h, N = op.grid.dx, op.grid.N
    rhs = np.asarray(rhs)
    zeta = _exterior_ratio(op, lam, direction)
    coeff = 2.0 + h * h * (op.m2 + op.V - lam)
    dtype = complex if np.iscomplexobj(zeta) or np.iscomplexobj(rhs) else float
    r = np.empty(N + 2, dtype=float)
    r[0], r[1] = 0.0, 1.0
    for j in range(1, N + 1):
        r[j + 1] = coeff[j - 1] * r[j] - r[j - 1]
    f = np.empty(N + 2, dtype=dtype)
    f[N + 1], f[N] = zeta, 1.0
    for j in range(N, 0, -1):
        f[j - 1] = coeff[j - 1] * f[j] - f[j + 1]
    W = f[0]  # Casoratian r_{k+1} f_k - r_k f_{k+1} evaluated at k = 0
    if abs(W) < wtol * np.max(np.abs(f)):
        raise NearSingular("Jost function vanishes: lambda is an eigenvalue of the truncated problem")
    rr, ff = r[1:N + 1], f[1:N + 1]
    S = np.cumsum(rr * rhs)
    tail = ff * rhs
    T = np.concatenate((np.cumsum(tail[::-1])[::-1][1:], [0.0]))
    return (h * h / W) * (ff * S + rr * T)


def resolvent_H_outgoing(op: LinearizedOperator, lam: float, rhs, direction: int = +1):
    """(H - lam - i0)^{-1} rhs, i.e. the solution with an exp(+ikx) tail.

    ``direction=-1`` gives the exp(-ikx) boundary value instead.
    """
    if lam <= op.m2:
        raise InvalidArgument("outgoing resolvent needs lambda above the continuum edge")
    return resolvent_H(op, lam, rhs, direction)


def exterior_ratio(op, lam, direction=+1):
    return _exterior_ratio(op, lam, direction)


def resolvent_A(op: LinearizedOperator, Lambda: complex, rhs: FieldPair) -> FieldPair:
    """Solve (A - Lambda) a = rhs for A = [[0, 1], [-H, 0]].

    Lambda is 0 or purely imaginary; an imaginary Lambda = i omega is taken
    as the limit Lambda + 0 from the right half-plane.  Then
    H + Lambda^2 = H - (omega^2 - i0 sign(omega)), whose boundary value has
    the tail exp(-i sign(omega) k x).
    """
    Lambda = complex(Lambda)
    if abs(Lambda.real) > 1e-14 * max(1.0, abs(Lambda)):
        raise InvalidArgument("Lambda must be zero or purely imaginary")
    omega = Lambda.imag
    source = -(rhs.pi + Lambda * rhs.psi)
    if omega == 0.0:
        a1 = resolvent_H(op, 0.0, source)
        if np.iscomplexobj(a1) and not np.iscomplexobj(rhs.psi) and not np.iscomplexobj(rhs.pi):
            a1 = a1.real
    else:
        lam = omega * omega
        direction = -1 if omega > 0 else +1
        if lam > op.m2:
            a1 = resolvent_H(op, lam, source, direction)
        else:
            a1 = resolvent_H(op, lam, source)
    a2 = Lambda * a1 + rhs.psi if omega != 0.0 else np.array(rhs.psi, copy=True)
    return FieldPair(a1, a2, op.grid)


def apply_A(op: LinearizedOperator, X: FieldPair, edge=0.0) -> FieldPair:
    return FieldPair(X.pi, -op.apply(X.psi, edge), op.grid)
