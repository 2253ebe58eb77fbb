"""Even double-well potentials: the quartic Ginzburg-Landau well, a family
that is exactly quadratic near the vacua, and user tables."""

import json
import warnings
from dataclasses import dataclass
from math import comb
from typing import Optional, Tuple

import numpy as np
from numpy.polynomial import Polynomial
from scipy.interpolate import CubicSpline

from .errors import InvalidArgument

MAX_ORDER = 4
SMOOTHSTEP_ORDER = 6  # cutoff is C^6; derivatives up to order 4 are needed


def smoothstep(n: int) -> Polynomial:
    """Generalized smoothstep S_n: S(0)=0, S(1)=1, first n derivatives vanish at both ends."""
    t = Polynomial([0, 1])
    acc = Polynomial([0])
    for k in range(n + 1):
        acc = acc + comb(n + k, k) * comb(2 * n + 1, n - k) * (-t) ** k
    return t ** (n + 1) * acc


_S = smoothstep(SMOOTHSTEP_ORDER)
_S_DERIVS = [_S.deriv(k) for k in range(MAX_ORDER + 1)]
# p(q) = q^4/4 + q^3 is the part removed near the vacua
_P = Polynomial([0, 0, 0, 1, 0.25])
_P_DERIVS = [_P.deriv(k) for k in range(MAX_ORDER + 1)]


def cutoff(z, order=0):
    """chi(z) and its derivatives: 1 for |z| < 1/2, 0 for |z| > 1."""
    z = np.asarray(z, dtype=float)
    t = np.clip(2.0 * (np.abs(z) - 0.5), 0.0, 1.0)
    inside = (t > 0) & (t < 1)
    if order == 0:
        return 1.0 - _S_DERIVS[0](t)
    # d/dz = 2 sign(z) d/dt on the transition band
    val = -(2.0 * np.sign(z)) ** order * _S_DERIVS[order](t)
    return np.where(inside, val, 0.0)


def _gl(psi, order):
    if order == 0:
        return 0.25 * (1.0 - psi**2) ** 2
    if order == 1:
        return psi**3 - psi
    if order == 2:
        return 3.0 * psi**2 - 1.0
    if order == 3:
        return 6.0 * psi
    return np.full_like(psi, 6.0)


@dataclass(frozen=True, eq=False)
class PotentialModel:
    """Even potential with vacua at +-a and curvature m2 there.

    kind is 'ginzburg_landau', 'perturbed' (with ``delta``) or
    'tabulated' (with ``table`` = (psi_nodes, U_values), psi_nodes >= 0;
    evenness is imposed by evaluating at |psi|).
    """

    kind: str
    a: float = 1.0
    m2: float = 2.0
    flatness_k: int = 7
    delta: Optional[float] = None
    table: Optional[Tuple[tuple, tuple]] = None

    def __post_init__(self):
        if self.kind not in ("ginzburg_landau", "perturbed", "tabulated"):
            raise InvalidArgument(f"unknown potential kind {self.kind!r}")
        if self.kind == "perturbed" and not (self.delta is not None and 0 < self.delta < 0.5):
            raise InvalidArgument(f"perturbation width must lie in (0, 0.5), got {self.delta}")
        if self.kind == "tabulated":
            if self.table is None:
                raise InvalidArgument("tabulated potential needs a table")
            xs, us = (np.asarray(c, dtype=float) for c in self.table)
            if xs.ndim != 1 or xs.shape != us.shape or xs.size < 4 or np.any(np.diff(xs) <= 0):
                raise InvalidArgument("table must hold >= 4 increasing nodes")
            if xs[0] < 0:
                raise InvalidArgument("table nodes must be nonnegative (evenness is imposed)")
            object.__setattr__(self, "_spline", CubicSpline(xs, us))
            object.__setattr__(self, "_range", (xs[0], xs[-1]))

    @property
    def m(self) -> float:
        return float(np.sqrt(self.m2))

    def eval(self, psi, order: int = 0):
        """U and its derivatives up to ``MAX_ORDER`` at psi."""
        if not 0 <= order <= MAX_ORDER:
            raise InvalidArgument(f"derivative order must be in 0..{MAX_ORDER}")
        scalar = np.ndim(psi) == 0
        psi = np.asarray(psi, dtype=float)
        if self.kind == "ginzburg_landau":
            out = _gl(psi, order)
        elif self.kind == "perturbed":
            out = _gl(psi, order) - np.sign(psi) ** order * self._bump(np.abs(psi) - 1.0, order)
        else:
            out = self._tab(psi, order)
        return float(out) if scalar else out

    def F(self, psi, order: int = 0):
        """Force F = -U' and its derivatives."""
        return -self.eval(psi, order + 1)

    def _bump(self, q, order):
        # d^n/dq^n of p(q) chi(q/delta), Leibniz rule
        d = self.delta
        acc = np.zeros_like(q)
        for j in range(order + 1):
            acc = acc + comb(order, j) * _P_DERIVS[order - j](q) * cutoff(q / d, j) / d**j
        return acc

    def _tab(self, psi, order):
        lo, hi = self._range
        ap = np.abs(psi)
        if np.any((ap < lo) | (ap > hi)):
            warnings.warn("tabulated potential queried out of range; clamped", RuntimeWarning)
        ap = np.clip(ap, lo, hi)
        out = self._spline(ap, order) if order <= 3 else np.zeros_like(ap)
        return np.sign(psi) ** order * out if order % 2 else out

    # serialization
    def to_dict(self):
        d = {"kind": self.kind, "a": self.a, "m2": self.m2, "flatness_k": self.flatness_k}
        if self.delta is not None:
            d["delta"] = self.delta
        if self.table is not None:
            d["table"] = [list(map(float, self.table[0])), list(map(float, self.table[1]))]
        if self.kind == "perturbed":
            d["cutoff"] = f"smoothstep order {SMOOTHSTEP_ORDER}"
        return d

    def to_json(self):
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d):
        table = d.get("table")
        if table is not None:
            table = (tuple(table[0]), tuple(table[1]))
        return cls(
            kind=d["kind"],
            a=float(d.get("a", 1.0)),
            m2=float(d.get("m2", 2.0)),
            flatness_k=int(d.get("flatness_k", 7)),
            delta=d.get("delta"),
            table=table,
        )

    @classmethod
    def from_json(cls, text):
        return cls.from_dict(json.loads(text))


def ginzburg_landau() -> PotentialModel:
    """U(psi) = (1 - psi^2)^2 / 4; a = 1, m^2 = 2."""
    return PotentialModel("ginzburg_landau")


def build_perturbed(delta) -> PotentialModel:
    """Ginzburg-Landau well made exactly quadratic, (|psi|-1)^2, within delta/2 of the vacua."""
    if not (np.isfinite(delta) and 0 < delta < 0.5):
        raise InvalidArgument(f"perturbation width must lie in (0, 0.5), got {delta}")
    return PotentialModel("perturbed", delta=float(delta))


def tabulated(psi_nodes, values, a, m2=None, flatness_k=7) -> PotentialModel:
    """Spline potential from samples on psi >= 0; m2 defaults to U''(a) of the spline."""
    table = (tuple(map(float, psi_nodes)), tuple(map(float, values)))
    if m2 is None:
        m2 = float(CubicSpline(table[0], table[1])(a, 2))
    return PotentialModel("tabulated", a=float(a), m2=float(m2), flatness_k=flatness_k, table=table)


def evaluate(potential: PotentialModel, psi, order: int = 0):
    return potential.eval(psi, order)


@dataclass(frozen=True)
class U1Report:
    positivity: bool
    evenness: bool
    flatness_order: float  # inf when the remainder vanishes on the window
    remainder_max: float
    flatness_k: int

    @property
    def flatness_ok(self) -> bool:
        return self.flatness_order >= 2 * self.flatness_k

    @property
    def passes(self) -> bool:
        return self.positivity and self.evenness and self.flatness_ok

    def to_dict(self):
        return {
            "positivity": self.positivity,
            "evenness": self.evenness,
            "flatness_order": None if np.isinf(self.flatness_order) else self.flatness_order,
            "flatness_exact": bool(np.isinf(self.flatness_order)),
            "remainder_max": self.remainder_max,
            "flatness_k": self.flatness_k,
            "flatness_ok": self.flatness_ok,
        }


def verify_U1(potential: PotentialModel, n_sweep: int = 4001, q_min=1e-4, q_max=None) -> U1Report:
    """Check positivity, evenness and the local remainder exponent near the vacua."""
    a = potential.a
    psi = np.linspace(-2 * a, 2 * a, n_sweep)
    away = np.abs(np.abs(psi) - a) > 1e-9
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        U = potential.eval(psi, 0)
        U_neg = potential.eval(-psi, 0)
    positivity = bool(np.all(U[away] > 0))
    scale = max(1.0, float(np.max(np.abs(U))))
    evenness = bool(np.max(np.abs(U - U_neg)) <= 1e-12 * scale)

    if q_max is None:
        q_max = 0.03 if potential.delta is None else min(0.03, 0.4 * potential.delta)
    q = np.geomspace(q_min, q_max, 200)
    rem = []
    for side in (+1.0, -1.0):
        for sgn in (+1.0, -1.0):
            p = side * (a + sgn * q)
            rem.append(np.abs(potential.eval(p, 0) - 0.5 * potential.m2 * q**2))
    rem = np.max(rem, axis=0)
    rmax = float(np.max(rem))
    if rmax <= 1e-15 * max(1.0, 0.5 * potential.m2 * q_max**2):
        order = float("inf")
    else:
        ok = rem > 0
        order = float(np.polyfit(np.log(q[ok]), np.log(rem[ok]), 1)[0])
    return U1Report(positivity, evenness, order, rmax, potential.flatness_k)


def perturbation_constant(potential: PotentialModel, n_sweep: int = 4001, order: int = 2) -> float:
    """Measured C in sup|U^(order) - U0^(order)| <= C * delta on [-2, 2]."""
    if potential.kind != "perturbed":
        raise InvalidArgument("perturbation constant is defined for the perturbed family")
    psi = np.linspace(-2.0, 2.0, n_sweep)
    diff = potential.eval(psi, order) - _gl(psi, order)
    return float(np.max(np.abs(diff)) / potential.delta)
