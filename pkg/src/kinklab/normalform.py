"""Symplectic projector onto the internal mode and the normal-form constants.

Conventions: <X, Y> = int (X1 conj(Y1) + X2 conj(Y2)) dx over the full line,
j(psi, pi) = (-pi, psi), u = (phi1, i mu phi1), so <u, ju> = i delta with
delta = 2 mu ||phi1||^2.
"""

from dataclasses import dataclass, field, replace
from typing import Optional

import numpy as np

from .errors import FGRConditionViolated, WindowError
from .fields import FieldPair, OddGrid, inner, integrate
from .spectral import (ContinuumWave, LinearizedOperator, SpectralData, continuum_wave,
                       resolvent_A, theta)


@dataclass(frozen=True, eq=False)
class ProjectorData:
    phi1: np.ndarray
    mu: float
    grid: OddGrid

    @classmethod
    def from_spectral(cls, sd: SpectralData, scale: float = 1.0):
        """Projector built on the grid eigenpair (consistent with the discrete flow)."""
        return cls(scale * sd.phi1, sd.mu_grid, sd.grid)

    @property
    def u(self) -> FieldPair:
        return FieldPair(self.phi1.astype(complex), 1j * self.mu * self.phi1, self.grid)

    @property
    def u_bar(self) -> FieldPair:
        return self.u.conj()

    @property
    def delta(self) -> float:
        return float(np.imag(inner(self.u, self.u.j())))

    @property
    def norm_uju(self) -> complex:
        return 1j * self.delta

    def z(self, X: FieldPair) -> complex:
        """Coefficient z = <X, ju>/<u, ju>."""
        return complex(inner(X, self.u.j()) / self.norm_uju)

    def z_many(self, psi, pi):
        """z for stacked snapshots psi[t, :], pi[t, :] (real arrays)."""
        # <X, ju> = int (-X1 conj(u2) + X2 conj(u1)) = int (i mu X1 + X2) phi1
        w = self.phi1
        num = integrate(self.grid, (1j * self.mu * psi + pi) * w)
        return num / self.norm_uju

    def Pd(self, X: FieldPair) -> FieldPair:
        u, ub = self.u, self.u_bar
        c1 = inner(X, u.j()) / inner(u, u.j())
        c2 = inner(X, ub.j()) / inner(ub, ub.j())
        return c1 * u + c2 * ub

    def Pc(self, X: FieldPair) -> FieldPair:
        return X - self.Pd(X)

    def w(self, z: complex) -> FieldPair:
        """Discrete component z u + conj(z) conj(u) (real)."""
        return (z * self.u + np.conj(z) * self.u_bar).real


def fgr_integral(spectral: SpectralData, wave: ContinuumWave, potential, kink,
                 phi1: Optional[np.ndarray] = None, tail_tol: float = 1e-12) -> float:
    """Half-line integral of phi_w F''(s) phi1^2, phi1 of unit full-line norm.

    The integrand is even and vanishes at 0, so the trapezoid rule is of
    spectral accuracy.
    """
    phi = spectral.phi1_extrapolated if phi1 is None else phi1
    integrand = wave.samples * potential.F(kink.s, 2) * phi**2
    if abs(integrand[-1]) > tail_tol * np.max(np.abs(integrand)):
        raise WindowError("resonance integrand has not decayed at the end of the grid")
    return float(kink.grid.dx * np.sum(integrand))


@dataclass(frozen=True, eq=False)
class NormalFormCoefficients:
    mu: float
    delta: float
    F2: FieldPair
    a11: FieldPair
    a20: FieldPair
    a02: FieldPair
    Z1_prime: Optional[FieldPair] = None
    fgr_integral: Optional[float] = None
    Z2: complex = 0j
    Z3: complex = 0j
    Z21_prime: complex = 0j
    Z30_prime: complex = 0j
    Z12_prime: complex = 0j
    Z03_prime: complex = 0j
    c20: complex = 0j
    c11: complex = 0j
    c02: complex = 0j
    K: complex = 0j
    Z21_prime_fgr: Optional[float] = None
    extras: dict = field(default_factory=dict)

    @property
    def iK(self) -> complex:
        return 1j * self.K

    @property
    def rho(self) -> float:
        return float(self.K.real / self.K.imag)

    def to_dict(self):
        c = lambda z: [float(np.real(z)), float(np.imag(z))]
        return {"fgr": self.fgr_integral, "Z2": c(self.Z2), "Z3": c(self.Z3),
                "Z21_prime": c(self.Z21_prime), "Z30_prime": c(self.Z30_prime),
                "Z12_prime": c(self.Z12_prime), "Z03_prime": c(self.Z03_prime),
                "K": c(self.K), "iK": c(self.iK), "rho": self.rho, "delta": self.delta,
                "mu": self.mu, "c20": c(self.c20), "c11": c(self.c11), "c02": c(self.c02),
                "Z21_prime_fgr_route": self.Z21_prime_fgr}


def build_F2_and_aij(projector: ProjectorData, op: LinearizedOperator, potential, kink,
                     spectral: Optional[SpectralData] = None) -> NormalFormCoefficients:
    """F2 = P^c N2[u,u] and the profiles a11 = -A^{-1} F2, a20 = -(A - 2i mu - 0)^{-1} F2."""
    phi, mu = projector.phi1, projector.mu
    g = potential.F(kink.s, 2) * phi**2
    N2 = FieldPair(np.zeros_like(phi), 0.5 * g, projector.grid)
    F2 = projector.Pc(N2).real
    minus = -F2
    a11 = resolvent_A(op, 0.0, minus).real
    a20 = resolvent_A(op, 2j * mu, minus)
    a02 = a20.conj()
    return NormalFormCoefficients(mu=mu, delta=projector.delta, F2=F2, a11=a11, a20=a20, a02=a02)


def _pair_with_jZ1(a: FieldPair, Z1: FieldPair) -> complex:
    return complex(inner(a, Z1.j()))


def compute_coefficients(projector: ProjectorData, partial: NormalFormCoefficients, potential, kink,
                         op: Optional[LinearizedOperator] = None,
                         spectral: Optional[SpectralData] = None,
                         fgr_threshold: float = 0.0) -> NormalFormCoefficients:
    """Z2, Z3, Z1', the Z'_{ij}, c_ij, K; optionally the resonance-route check.

    iK = 3 Z3 + Z'21 + (4 c20 - c11 - 2 c02) Z2, with Z'21 = <2 a11 + a20, j Z1'>.
    """
    grid, phi, mu = projector.grid, projector.phi1, projector.mu
    u = projector.u
    uju = projector.norm_uju
    Fpp = potential.F(kink.s, 2)
    Fppp = potential.F(kink.s, 3)
    zeros = np.zeros_like(phi)
    N2uu = FieldPair(zeros, 0.5 * Fpp * phi**2, grid)
    N3uuu = FieldPair(zeros, Fppp / 6.0 * phi**3, grid)
    Z2 = complex(inner(N2uu, u.j()) / uju)
    Z3 = complex(inner(N3uuu, u.j()) / uju)
    Z1p = N2uu * (2.0 / uju)
    a11, a20, a02 = partial.a11, partial.a20, partial.a02
    Z30 = _pair_with_jZ1(a20, Z1p)
    Z21 = _pair_with_jZ1(2.0 * a11 + a20, Z1p)
    Z12 = _pair_with_jZ1(a02 + 2.0 * a11, Z1p)
    Z03 = _pair_with_jZ1(a02, Z1p)
    c20 = 1j * Z2 / mu
    c11 = -2j * Z2 / mu
    c02 = -1j * Z2 / (3.0 * mu)
    iK = 3.0 * Z3 + Z21 + (4.0 * c20 - c11 - 2.0 * c02) * Z2
    K = -1j * iK

    fgr = None
    z21_fgr = None
    extras = {}
    if op is not None and spectral is not None:
        lam = 4.0 * mu * mu
        wave = continuum_wave(op, lam)
        fgr = fgr_integral(spectral, wave, potential, kink, phi1=phi / np.sqrt(integrate(grid, phi**2)))
        # resonance route: -(2 pi / delta) theta(4 lambda1) |<u(2i mu), j F2>|^2
        u_w = FieldPair(wave.samples.astype(complex), 2j * mu * wave.samples, grid)
        coupling = complex(inner(partial.F2, u_w.j()))
        z21_fgr = float(-(2.0 * np.pi / projector.delta) * theta(lam, op.m2) * abs(coupling) ** 2)
        extras = {"coupling": coupling, "wave_k": wave.k, "wave_residual": wave.residual}
        if abs(fgr) <= fgr_threshold:
            raise FGRConditionViolated(f"resonance coupling {fgr:.3e} below threshold {fgr_threshold:.3e}")

    return replace(partial, Z1_prime=Z1p, fgr_integral=fgr, Z2=Z2, Z3=Z3, Z21_prime=Z21,
                   Z30_prime=Z30, Z12_prime=Z12, Z03_prime=Z03, c20=c20, c11=c11, c02=c02,
                   K=K, Z21_prime_fgr=z21_fgr, extras=extras)


def normal_form(potential, kink, op, spectral, scale: float = 1.0, fgr_threshold: float = 0.0):
    """Full pipeline: projector, a_ij profiles and all coefficients."""
    proj = ProjectorData.from_spectral(spectral, scale)
    partial = build_F2_and_aij(proj, op, potential, kink, spectral)
    return proj, compute_coefficients(proj, partial, potential, kink, op, spectral, fgr_threshold)
