"""Time evolution of odd perturbations of the kink.

Nonlinear and linearized flows use Stormer-Verlet (kick-drift-kick) with
the three-point Laplacian.  The free Klein-Gordon group is applied exactly
in the discrete sine basis.  All trajectories are stored in the
perturbation frame (Psi, Pi).
"""

import hashlib
import json
import os
from dataclasses import asdict, dataclass, field, replace
from typing import Optional

import numpy as np
from scipy.fft import dst, idst

from .errors import BlowupError, InvalidArgument
from .fields import FieldPair, NormSpec, OddGrid, energy, energy_density, integrate, laplacian, norm, read_csv, write_csv

FLAVORS = ("nonlinear", "linearized", "free")


@dataclass(frozen=True)
class EvolutionConfig:
    dt: float
    T: float
    snapshot_stride: int = 1
    flavor: str = "nonlinear"
    diag_radius: float = 20.0

    def __post_init__(self):
        if self.flavor not in FLAVORS:
            raise InvalidArgument(f"unknown flavor {self.flavor!r}")
        if not (self.dt > 0 and self.T >= 0):
            raise InvalidArgument("dt must be positive and T nonnegative")
        if int(self.snapshot_stride) != self.snapshot_stride or self.snapshot_stride < 1:
            raise InvalidArgument("snapshot_stride must be a positive integer")

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def check(self, grid: OddGrid, require_no_reflection: bool = False):
        """CFL and (optionally) the no-reflection rule T < L - diag_radius."""
        if self.dt > 0.5 * grid.dx * (1 + 1e-12):
            raise InvalidArgument(f"CFL violated: dt={self.dt} > dx/2={0.5 * grid.dx}")
        if require_no_reflection and self.T >= grid.L - self.diag_radius:
            raise InvalidArgument("T must stay below L - diag_radius for decay fits")


@dataclass(eq=False)
class TrajectoryRecord:
    times: np.ndarray
    psi: np.ndarray  # (n_snapshots, N)
    pi: np.ndarray
    energy_trace: np.ndarray
    grid: OddGrid
    config: EvolutionConfig
    weighted_norm_traces: dict = field(default_factory=dict)
    provenance: dict = field(default_factory=dict)
    potential: object = None
    kink: object = None
    operator: object = None
    m2: Optional[float] = None

    def snapshot(self, i) -> FieldPair:
        return FieldPair(self.psi[i], self.pi[i], self.grid)

    @property
    def snapshots(self):
        return [self.snapshot(i) for i in range(len(self.times))]

    def full_field(self, i) -> FieldPair:
        if self.kink is None:
            raise InvalidArgument("trajectory carries no kink")
        return FieldPair(self.kink.s + self.psi[i], self.pi[i], self.grid, self.kink.s_edge)

    def norm_trace(self, spec: NormSpec) -> np.ndarray:
        key = spec.label
        if key not in self.weighted_norm_traces:
            self.weighted_norm_traces[key] = np.array([norm(self.snapshot(i), spec) for i in range(len(self.times))])
        return self.weighted_norm_traces[key]


# -- forces -------------------------------------------------------------------

def _nonlinear_force(potential, kink):
    s = kink.s
    if potential.kind == "ginzburg_landau":
        c1 = 1.0 - 3.0 * s * s
        c2 = -3.0 * s

        def nl(psi):
            return psi * (c1 + psi * (c2 - psi))
    else:
        Fs = potential.F(s, 0)

        def nl(psi):
            return potential.F(s + psi, 0) - Fs
    return nl


def _force(flavor, grid, potential=None, kink=None, op=None, m2=None):
    h = grid.dx
    if flavor == "nonlinear":
        nl = _nonlinear_force(potential, kink)
        return lambda psi: laplacian(psi, h) + nl(psi)
    if flavor == "linearized":
        k = op.m2 + op.V
        return lambda psi: laplacian(psi, h) - k * psi
    return lambda psi: laplacian(psi, h) - m2 * psi


def step_nonlinear(state: FieldPair, potential, kink, dt: float) -> FieldPair:
    """One kick-drift-kick step of Psi'' = Psi_xx + F(s + Psi) - F(s)."""
    acc = _force("nonlinear", state.grid, potential, kink)
    pi = state.pi + 0.5 * dt * acc(state.psi)
    psi = state.psi + dt * pi
    pi = pi + 0.5 * dt * acc(psi)
    if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(pi))):
        raise BlowupError("non-finite field after one step", snapshot=state)
    return FieldPair(psi, pi, state.grid)


def _quadratic_energy(grid, psi, pi, k_pot):
    """Energy of the linear flow: 1/2 int pi^2 + (D+ psi)^2 + k psi^2."""
    h = grid.dx
    ext = np.concatenate(([0.0], psi, [0.0]))
    return float(integrate(grid, 0.5 * pi**2 + 0.5 * k_pot * psi**2) + h * np.sum((np.diff(ext) / h) ** 2))


def _leapfrog(state, config, force, energy_fn):
    n_steps = config.n_steps
    stride = config.snapshot_stride
    dt = config.dt
    n_snap = n_steps // stride + 1
    N = state.grid.N
    times = np.empty(n_snap)
    P = np.empty((n_snap, N))
    Q = np.empty((n_snap, N))
    E = np.empty(n_snap)
    psi = np.array(state.psi, dtype=float)
    pi = np.array(state.pi, dtype=float)
    acc = force(psi)
    k = 0
    times[0], P[0], Q[0], E[0] = 0.0, psi, pi, energy_fn(psi, pi)
    for n in range(1, n_steps + 1):
        pi += 0.5 * dt * acc
        psi += dt * pi
        acc = force(psi)
        pi += 0.5 * dt * acc
        if n % stride == 0:
            k += 1
            if not (np.all(np.isfinite(psi)) and np.all(np.isfinite(pi))):
                raise BlowupError(f"non-finite field at t={n * dt:g}",
                                  snapshot=FieldPair(P[k - 1], Q[k - 1], state.grid), time=times[k - 1])
            times[k], P[k], Q[k], E[k] = n * dt, psi, pi, energy_fn(psi, pi)
    return times[:k + 1], P[:k + 1], Q[:k + 1], E[:k + 1]


def _provenance(config, grid, potential=None, extra=None):
    d = {"config": asdict(config), "grid": {"L": grid.L, "N": grid.N}}
    if potential is not None:
        d["potential"] = potential.to_dict()
    if extra:
        d.update(extra)
    d["hash"] = hashlib.sha256(json.dumps(d, sort_keys=True, default=str).encode()).hexdigest()[:16]
    return d


def evolve_nonlinear(state: FieldPair, potential, kink, config: EvolutionConfig) -> TrajectoryRecord:
    """Full dynamics of the perturbation Psi = psi - s."""
    grid = state.grid
    config = replace(config, flavor="nonlinear")
    config.check(grid)
    force = _force("nonlinear", grid, potential, kink)

    def en(psi, pi):
        return energy(FieldPair(kink.s + psi, pi, grid, kink.s_edge), potential)

    t, P, Q, E = _leapfrog(state, config, force, en)
    return TrajectoryRecord(t, P, Q, E, grid, config, provenance=_provenance(config, grid, potential),
                            potential=potential, kink=kink, m2=potential.m2)


def evolve_linearized(state: FieldPair, operator, config: EvolutionConfig) -> TrajectoryRecord:
    """Leapfrog for Psi'' = Psi_xx - (m^2 + V) Psi."""
    grid = state.grid
    config = replace(config, flavor="linearized")
    config.check(grid)
    force = _force("linearized", grid, op=operator)
    kpot = operator.m2 + operator.V
    t, P, Q, E = _leapfrog(state, config, force, lambda p, q: _quadratic_energy(grid, p, q, kpot))
    return TrajectoryRecord(t, P, Q, E, grid, config, provenance=_provenance(config, grid),
                            potential=operator.potential, kink=operator.kink, operator=operator,
                            m2=operator.m2)


# -- free group ---------------------------------------------------------------

def free_frequencies(grid: OddGrid, m2: float, dispersion: str = "continuum"):
    """Mode frequencies of the sine basis sin(pi j x / wall), j = 1..N."""
    j = np.arange(1, grid.N + 1)
    k = np.pi * j / grid.wall
    if dispersion == "continuum":
        return np.sqrt(k * k + m2)
    if dispersion in ("lattice", "leapfrog"):
        return np.sqrt((2.0 / grid.dx * np.sin(0.5 * k * grid.dx)) ** 2 + m2)
    raise InvalidArgument(f"unknown dispersion {dispersion!r}")


def _modal(u):
    return dst(u, type=1, norm="ortho", axis=-1)


def _unmodal(u):
    return idst(u, type=1, norm="ortho", axis=-1)


def free_propagate(state: FieldPair, m2: float, t: float, dispersion: str = "continuum",
                   dt: Optional[float] = None) -> FieldPair:
    """Apply W0(t).

    dispersion='continuum' uses omega = sqrt(k^2 + m^2) (exact free flow on
    the box), 'lattice' the three-point symbol, and 'leapfrog' reproduces
    n = t/dt kick-drift-kick steps of the lattice flow exactly.
    """
    omega = free_frequencies(state.grid, m2, dispersion)
    ph, qh = _modal(state.psi), _modal(state.pi)
    if dispersion == "leapfrog":
        if dt is None:
            raise InvalidArgument("leapfrog dispersion needs dt")
        n = int(round(t / dt))
        if abs(n * dt - t) > 1e-9 * max(1.0, abs(t)):
            raise InvalidArgument("t must be a multiple of dt for leapfrog dispersion")
        a = (omega * dt) ** 2
        c = 1.0 - 0.5 * a
        theta = np.arccos(c)
        s = np.sin(theta)
        un1 = np.sin(n * theta) / s       # U_{n-1}(c)
        un2 = np.sin((n - 1) * theta) / s  # U_{n-2}(c)
        m11 = un1 * c - un2
        m12 = un1 * dt
        m21 = un1 * (-omega**2 * dt * (1.0 - 0.25 * a))
        p_new, q_new = m11 * ph + m12 * qh, m21 * ph + m11 * qh
    else:
        cs, sn = np.cos(omega * t), np.sin(omega * t)
        p_new = cs * ph + sn / omega * qh
        q_new = -omega * sn * ph + cs * qh
    return FieldPair(_unmodal(p_new), _unmodal(q_new), state.grid)


def free_energy(state: FieldPair, m2: float, dispersion: str = "continuum") -> float:
    """Modal energy, conserved exactly by the free group."""
    omega = free_frequencies(state.grid, m2, dispersion)
    ph, qh = _modal(np.real(state.psi)), _modal(np.real(state.pi))
    return float(state.grid.dx * np.sum(qh**2 + (omega * ph) ** 2))


def evolve_free(state: FieldPair, m2: float, config: EvolutionConfig,
                dispersion: str = "continuum") -> TrajectoryRecord:
    """Free Klein-Gordon flow sampled at the configured snapshot times."""
    grid = state.grid
    n_snap = config.n_steps // config.snapshot_stride + 1
    times = np.arange(n_snap) * config.snapshot_stride * config.dt
    free_frequencies(grid, m2, dispersion)  # rejects unknown dispersions before any work
    P = np.empty((n_snap, grid.N))
    Q = np.empty((n_snap, grid.N))
    E = np.empty(n_snap)
    for i, t in enumerate(times):
        st = free_propagate(state, m2, t, dispersion, config.dt)
        P[i], Q[i] = st.psi, st.pi
        E[i] = free_energy(st, m2, dispersion)
    cfg = replace(config, flavor="free")
    return TrajectoryRecord(times, P, Q, E, grid, cfg,
                            provenance=_provenance(cfg, grid, extra={"dispersion": dispersion}), m2=m2)


# -- structure checks ---------------------------------------------------------

def _cumulative_density(grid, dens):
    """Cumulative integral of an even density over [-wall, wall] with node positions."""
    x_half = np.arange(grid.N + 2) * grid.dx
    x = np.concatenate((-x_half[:0:-1], x_half))
    d = np.concatenate((dens[:0:-1], dens))
    cum = np.concatenate(([0.0], np.cumsum(0.5 * (d[1:] + d[:-1]) * np.diff(x))))
    return x, cum


def _window_integral(x, cum, a, b):
    return float(np.interp(b, x, cum) - np.interp(a, x, cum))


def local_energy_check(trajectory: TrajectoryRecord, a: float, b: float, rtol: float = 1e-9,
                       energy_injection: Optional[dict] = None) -> dict:
    """Check int_a^b e(x,t) <= int_{a-t}^{b+t} e(x,0) at every admissible snapshot.

    ``energy_injection`` maps snapshot indices to momentum increments (test hook
    for constructed violations).
    """
    if trajectory.kink is None or trajectory.potential is None:
        raise InvalidArgument("local energy needs the kink and potential of the run")
    grid = trajectory.grid
    wall = grid.wall
    dens0 = energy_density(trajectory.full_field(0), trajectory.potential)
    x, cum0 = _cumulative_density(grid, dens0)
    checked, violations, margins = [], [], []
    for i, t in enumerate(trajectory.times):
        if a - t < -wall or b + t > wall:
            continue
        st = trajectory.full_field(i)
        if energy_injection and i in energy_injection:
            st = FieldPair(st.psi, st.pi + energy_injection[i], grid, st.edge)
        dens = energy_density(st, trajectory.potential)
        _, cum = _cumulative_density(grid, dens)
        lhs = _window_integral(x, cum, a, b)
        rhs = _window_integral(x, cum0, a - t, b + t)
        checked.append(i)
        margins.append(rhs - lhs)
        if lhs > rhs + rtol * abs(rhs):
            violations.append(i)
    return {"checked": checked, "violations": violations, "holds": not violations,
            "min_margin": float(min(margins)) if margins else None}


def virial_trace(trajectory: TrajectoryRecord, sigma: Optional[float] = None, nu: float = 0.1,
                 t_min: float = 1.0, edge_tol: float = 1e-10) -> dict:
    """Growth exponent of ||Psi(t)||_{L2_sigma}, sigma = 5/2 + nu by default."""
    sigma = 2.5 + nu if sigma is None else sigma
    spec = NormSpec("L2_weighted", sigma, nu)
    vals = trajectory.norm_trace(spec)
    t = trajectory.times
    # truncate once the field is felt near the wall
    edge = np.max(np.abs(trajectory.psi[:, -max(8, trajectory.grid.N // 20):]), axis=1)
    scale = np.max(np.abs(trajectory.psi), axis=1) + 1e-300
    reached = np.nonzero(edge > edge_tol * scale)[0]
    t_stop = t[reached[0]] if reached.size else t[-1]
    sel = (t >= t_min) & (t <= t_stop) & (vals > 0)
    if np.count_nonzero(sel) < 3:
        exponent = 0.0 if np.allclose(vals, vals[0]) else float("nan")
    else:
        exponent = float(np.polyfit(np.log(t[sel]), np.log(vals[sel]), 1)[0])
    bound = 4.0 + nu
    return {"growth_exponent": exponent, "window": (float(t_min), float(t_stop)),
            "bound": bound, "passes": bool(exponent <= bound + 0.2), "sigma": sigma}


# -- persistence --------------------------------------------------------------

def save_run(trajectory: TrajectoryRecord, directory, manifest_extra: Optional[dict] = None,
             norm_specs=(), csv_every: int = 1):
    """Write manifest.json, fields.npz (all snapshots), snapshots/*.csv and traces.csv.

    CSV snapshots are written for every ``csv_every``-th sample only; the
    binary store always holds the full trajectory.
    """
    os.makedirs(os.path.join(directory, "snapshots"), exist_ok=True)
    manifest = dict(trajectory.provenance)
    if trajectory.kink is not None:
        manifest["kink_method"] = trajectory.kink.method
    manifest["n_snapshots"] = int(len(trajectory.times))
    manifest["csv_every"] = int(csv_every)
    if manifest_extra:
        manifest.update(manifest_extra)
    with open(os.path.join(directory, "manifest.json"), "w") as fh:
        json.dump(manifest, fh, indent=2, sort_keys=True, default=str)
    np.savez(os.path.join(directory, "fields.npz"), times=trajectory.times, psi=trajectory.psi,
             pi=trajectory.pi, energy=trajectory.energy_trace, L=trajectory.grid.L, N=trajectory.grid.N)
    width = max(5, len(str(len(trajectory.times))))
    for i in range(0, len(trajectory.times), max(1, int(csv_every))):
        t = trajectory.times[i]
        write_csv(os.path.join(directory, "snapshots", f"snap_{i:0{width}d}.csv"), trajectory.snapshot(i), repr(float(t)))
    cols = [trajectory.times, trajectory.energy_trace]
    names = ["time", "energy"]
    for spec in norm_specs:
        cols.append(trajectory.norm_trace(spec))
        names.append(spec.label)
    np.savetxt(os.path.join(directory, "traces.csv"), np.column_stack(cols), delimiter=",",
               header=",".join(names), comments="", fmt="%.17g")
    return directory


def load_snapshots(directory):
    """Read a run back; returns (times, psi, pi, grid).  Prefers fields.npz."""
    store = os.path.join(directory, "fields.npz")
    if os.path.exists(store):
        with np.load(store) as d:
            grid = OddGrid(float(d["L"]), int(d["N"]))
            return d["times"].copy(), d["psi"].copy(), d["pi"].copy(), grid
    snap_dir = os.path.join(directory, "snapshots")
    files = sorted(f for f in os.listdir(snap_dir) if f.endswith(".csv"))
    times, P, Q, grid = [], [], [], None
    for f in files:
        st, t = read_csv(os.path.join(snap_dir, f))
        grid = st.grid
        times.append(t)
        P.append(st.psi)
        Q.append(st.pi)
    return np.array(times), np.array(P), np.array(Q), grid
