"""kinklab command line.

  kinklab kink --potential gl
  kinklab spectrum --potential perturbed --delta 0.05
  kinklab normalform --refine
  kinklab evolve --eps 0.01 --T 150 --L 160 --N 8192 --out runs/gl
  kinklab fit runs/gl
  kinklab sweep --eps 0.02,0.01,0.005 --deltas 0,0.05 --threads 3
  kinklab oscillatory

Exit codes: 0 ok, 1 runtime error, 2 invalid argument, 3 spectral
condition failure, 4 resonance-coupling failure.  Failures also write
error.json into the output directory.
"""

import argparse
import copy
import csv
import itertools
import json
import os
import sys
import warnings
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from . import __version__
from .errors import (FGRConditionViolated, InvalidArgument, KinklabError, SpectralConditionViolated,
                     WindowError)

EXIT_OK, EXIT_RUNTIME, EXIT_INVALID, EXIT_U2, EXIT_U3 = 0, 1, 2, 3, 4

DEFAULTS = {
    "potential": {"kind": "gl", "delta": 0.05, "table": None},
    "grid": {"L": 80.0, "N": 4096},
    "evolution": {"dt_factor": 0.4, "T": 100.0, "snapshot_dt": 0.1},
    "init": {"mode": "eigenmode_kick", "eps": 0.01, "seed": 0, "width": 1.0, "file": None},
    "diagnostics": {"sigma": 3.0, "nu": 0.1, "diag_radius": 20.0, "window": None, "envelope": True},
    "output": {"csv_every": 10},
}


def _merge(base, extra):
    out = copy.deepcopy(base)
    for k, v in (extra or {}).items():
        if isinstance(v, dict) and isinstance(out.get(k), dict):
            out[k] = _merge(out[k], v)
        else:
            out[k] = v
    return out


@dataclass
class RunConfig:
    potential: dict = field(default_factory=lambda: dict(DEFAULTS["potential"]))
    grid: dict = field(default_factory=lambda: dict(DEFAULTS["grid"]))
    evolution: dict = field(default_factory=lambda: dict(DEFAULTS["evolution"]))
    init: dict = field(default_factory=lambda: dict(DEFAULTS["init"]))
    diagnostics: dict = field(default_factory=lambda: dict(DEFAULTS["diagnostics"]))
    output: dict = field(default_factory=lambda: dict(DEFAULTS["output"]))

    @classmethod
    def from_dict(cls, d):
        unknown = set(d) - set(DEFAULTS)
        if unknown:
            raise InvalidArgument(f"unknown config sections: {sorted(unknown)}")
        merged = _merge(DEFAULTS, d)
        return cls(**merged)

    @classmethod
    def from_toml(cls, path):
        import tomli
        with open(path, "rb") as fh:
            return cls.from_dict(tomli.load(fh))

    def to_dict(self):
        return asdict(self)

    @property
    def dt(self):
        return self.evolution["dt_factor"] * self.grid["L"] / self.grid["N"]

    @property
    def stride(self):
        return max(1, int(round(self.evolution["snapshot_dt"] / self.dt)))

    def validate(self):
        """Cross-module preconditions, checked before anything runs."""
        if self.potential["kind"] not in ("gl", "perturbed", "table"):
            raise InvalidArgument(f"unknown potential kind {self.potential['kind']!r}")
        if self.potential["kind"] == "perturbed" and not 0 < self.potential["delta"] < 0.5:
            raise InvalidArgument("perturbation width delta must lie in (0, 0.5)")
        if self.potential["kind"] == "table" and not self.potential.get("table"):
            raise InvalidArgument("table potential needs a table path")
        if self.grid["L"] <= 0 or self.grid["N"] < 16:
            raise InvalidArgument("grid needs L > 0 and N >= 16")
        if not 0 < self.evolution["dt_factor"] <= 0.5:
            raise InvalidArgument("dt_factor must lie in (0, 0.5] (CFL)")
        if self.evolution["T"] <= 0:
            raise InvalidArgument("T must be positive")
        d = self.diagnostics
        if d["sigma"] <= 2.5:
            raise InvalidArgument("weighted norms need sigma > 5/2")
        if self.init["mode"] not in ("eigenmode_kick", "gaussian_odd", "file"):
            raise InvalidArgument(f"unknown initial-data mode {self.init['mode']!r}")
        if self.init["mode"] == "file" and not self.init.get("file"):
            raise InvalidArgument("file initial data needs init.file")
        if self.init["eps"] < 0:
            raise InvalidArgument("eps must be nonnegative")
        return self


# -- shared construction ------------------------------------------------------

def build_potential(spec):
    from .potential import build_perturbed, ginzburg_landau, tabulated
    kind = spec["kind"]
    if kind == "gl":
        return ginzburg_landau()
    if kind == "perturbed":
        return build_perturbed(spec["delta"])
    if kind == "table":
        data = np.loadtxt(spec["table"], delimiter=",", comments="#")
        if data.ndim != 2 or data.shape[1] != 2:
            raise InvalidArgument("potential table needs two columns: psi, U")
        return tabulated(data[:, 0], data[:, 1], spec.get("a", 1.0), spec.get("m2"))
    raise InvalidArgument(f"unknown potential kind {kind!r}")


def build_kink(potential, grid, method="auto"):
    from .kink import kink_closed_form, kink_quadrature
    if method == "auto":
        method = "closed_form" if potential.kind == "ginzburg_landau" else "quadrature"
    if method == "closed_form":
        return kink_closed_form(grid, potential)
    if method == "quadrature":
        return kink_quadrature(potential, grid)
    raise InvalidArgument(f"unknown kink method {method!r}")


def build_setup(cfg: RunConfig, refine=False):
    """Potential, lattice kink, operator and spectral data for a config."""
    from .fields import make_grid
    from .kink import lattice_kink
    from .spectral import assemble, discrete_spectrum_odd
    pot = build_potential(cfg.potential)
    N = cfg.grid["N"] * (2 if refine else 1)
    grid = make_grid(cfg.grid["L"], N)
    kink = lattice_kink(build_kink(pot, grid))
    op = assemble(pot, kink)
    sd = discrete_spectrum_odd(op)
    return pot, grid, kink, op, sd


def initial_data(cfg: RunConfig, proj, grid):
    from .fields import FieldPair, read_csv
    init = cfg.init
    amp = np.sqrt(init["eps"])
    if init["mode"] == "eigenmode_kick":
        return proj.w(amp)
    if init["mode"] == "gaussian_odd":
        rng = np.random.default_rng(init["seed"])
        c1, c2 = rng.standard_normal(2)
        x, w = grid.x, init["width"]
        bump = x / w * np.exp(-0.5 * (x / w) ** 2)
        X = FieldPair(c1 * bump, c2 * bump, grid)
        z = proj.z(X)
        scale = amp / abs(z) if abs(z) > 0 else amp
        return X * scale
    st, _ = read_csv(init["file"])
    if st.grid != grid:
        raise InvalidArgument("initial-data file grid differs from the configured grid")
    return st


# -- output helpers -----------------------------------------------------------

def _out_dir(args, default_name):
    root = args.out or os.environ.get("KINKLAB_OUT") or os.path.join(os.getcwd(), "kinklab_out")
    path = root if args.out else os.path.join(root, default_name)
    os.makedirs(path, exist_ok=True)
    return path


def _dump(path, obj):
    with open(path, "w") as fh:
        json.dump(obj, fh, indent=2, sort_keys=True, default=_json_default)


def _json_default(o):
    if isinstance(o, (np.floating, np.integer)):
        return o.item()
    if isinstance(o, np.bool_):
        return bool(o)
    if isinstance(o, complex):
        return [o.real, o.imag]
    if isinstance(o, np.ndarray):
        return o.tolist()
    return str(o)


def _config_from_args(args) -> RunConfig:
    base = RunConfig.from_toml(args.config).to_dict() if args.config else {}
    cfg = RunConfig.from_dict(base)
    pot = cfg.potential
    if getattr(args, "potential", None):
        pot["kind"] = args.potential
    if getattr(args, "delta", None) is not None:
        pot["delta"] = args.delta
        if not getattr(args, "potential", None) and args.cmd not in ("sweep",):
            pot["kind"] = "perturbed"
    if getattr(args, "table", None):
        pot["kind"], pot["table"] = "table", args.table
    for key in ("L", "N"):
        if getattr(args, key, None) is not None:
            cfg.grid[key] = args.__dict__[key]
    if getattr(args, "T", None) is not None:
        cfg.evolution["T"] = args.T
    if getattr(args, "dt_factor", None) is not None:
        cfg.evolution["dt_factor"] = args.dt_factor
    if getattr(args, "snapshot_dt", None) is not None:
        cfg.evolution["snapshot_dt"] = args.snapshot_dt
    if getattr(args, "eps", None) is not None and not isinstance(args.eps, str):
        cfg.init["eps"] = args.eps
    if getattr(args, "init", None):
        cfg.init["mode"] = args.init
    if getattr(args, "seed", None) is not None:
        cfg.init["seed"] = args.seed
    if getattr(args, "init_file", None):
        cfg.init["file"] = args.init_file
    return cfg.validate()


# -- subcommands --------------------------------------------------------------

def cmd_kink(args):
    from .fields import make_grid
    from .kink import kink_closed_form, kink_residual, tail_decay_fit
    from .potential import verify_U1
    cfg = _config_from_args(args)
    out = _out_dir(args, "kink")
    pot = build_potential(cfg.potential)
    grid = make_grid(cfg.grid["L"], cfg.grid["N"])
    kink = build_kink(pot, grid, args.method)
    u1 = verify_U1(pot)
    report = {"potential": pot.to_dict(), "method": kink.method, "U1": u1.to_dict(),
              "residual": kink_residual(kink), "residual_3pt": kink_residual(kink, order=2),
              "m_fit": tail_decay_fit(kink)["m_fit"], "m": pot.m, "monotone": kink.is_monotone()}
    if pot.kind == "ginzburg_landau" and kink.method != "closed_form":
        ref = kink_closed_form(grid, pot)
        sel = grid.x <= 20.0
        report["sup_diff_tanh_0_20"] = float(np.max(np.abs(kink.s[sel] - ref.s[sel])))
    np.savetxt(os.path.join(out, "kink.csv"), np.column_stack((grid.x, kink.s, kink.s_prime)),
               delimiter=",", header="x,s,s_prime", comments="", fmt="%.17g")
    _dump(os.path.join(out, "report.json"), report)
    print(json.dumps({k: report[k] for k in ("method", "residual", "m_fit")}, default=_json_default))
    return EXIT_OK


def cmd_spectrum(args):
    from .spectral import discrete_spectrum_odd, free_operator
    cfg = _config_from_args(args)
    out = _out_dir(args, "spectrum")
    if args.free:
        from .fields import make_grid
        pot = build_potential(cfg.potential)
        op = free_operator(make_grid(cfg.grid["L"], cfg.grid["N"]), pot.m2)
        sd = discrete_spectrum_odd(op)
    else:
        _, _, _, op, sd = build_setup(cfg)
    report = sd.to_dict(op)
    _dump(os.path.join(out, "spectrum.json"), report)
    print(json.dumps({"lambda1": sd.lambda1, "conditions": sd.conditions}))
    if not all(sd.conditions.values()):
        raise SpectralConditionViolated(f"spectral conditions fail: {sd.conditions}")
    return EXIT_OK


def _coefficients(cfg, threshold, refine=False):
    from .normalform import normal_form
    pot, grid, kink, op, sd = build_setup(cfg, refine)
    proj, co = normal_form(pot, kink, op, sd, fgr_threshold=threshold)
    return sd, proj, co


def cmd_normalform(args):
    cfg = _config_from_args(args)
    out = _out_dir(args, "normalform" if args.cmd == "normalform" else "fgr")
    sd, proj, co = _coefficients(cfg, args.fgr_threshold)
    report = co.to_dict()
    report["lambda1"] = sd.lambda1
    if args.refine:
        _, _, cf = _coefficients(cfg, args.fgr_threshold, refine=True)
        report["refined"] = {"N": 2 * cfg.grid["N"], "fgr": cf.fgr_integral,
                             "Z21_prime": [cf.Z21_prime.real, cf.Z21_prime.imag],
                             "fgr_rel_change": abs(cf.fgr_integral / co.fgr_integral - 1)}
    report["damping_negative"] = bool(co.Z21_prime.real < 0)
    name = "coefficients.json" if args.cmd == "normalform" else "fgr.json"
    _dump(os.path.join(out, name), report)
    print(json.dumps({"fgr": co.fgr_integral, "Re_Z21_prime": co.Z21_prime.real, "K": [co.K.real, co.K.imag]}))
    if co.Z21_prime.real >= 0:
        raise FGRConditionViolated(f"Re Z'21 = {co.Z21_prime.real:.3e} is not negative")
    return EXIT_OK


def run_evolve(cfg: RunConfig, out: str):
    from .evolve import EvolutionConfig, evolve_nonlinear, save_run
    from .diagnostics import E_MINUS_3, LINF
    from .normalform import ProjectorData
    if cfg.evolution["T"] > cfg.grid["L"] - cfg.diagnostics["diag_radius"]:
        warnings.warn("T exceeds L - diag_radius: fit windows are cut at the reflection time",
                      RuntimeWarning)
    pot, grid, kink, op, sd = build_setup(cfg)
    proj = ProjectorData.from_spectral(sd)
    X0 = initial_data(cfg, proj, grid)
    ecfg = EvolutionConfig(cfg.dt, cfg.evolution["T"], cfg.stride, "nonlinear", cfg.diagnostics["diag_radius"])
    traj = evolve_nonlinear(X0, pot, kink, ecfg)
    extra = {"run_config": cfg.to_dict(), "eps": float(abs(proj.z(X0)) ** 2), "version": __version__}
    save_run(traj, out, extra, (E_MINUS_3, LINF), cfg.output["csv_every"])
    return traj


def cmd_evolve(args):
    cfg = _config_from_args(args)
    out = _out_dir(args, "run")
    traj = run_evolve(cfg, out)
    E = traj.energy_trace
    print(json.dumps({"run": out, "snapshots": len(traj.times),
                      "energy_drift": float(np.max(np.abs(E - E[0])) / abs(E[0]))}))
    return EXIT_OK


def run_fit(run_dir: str):
    from .diagnostics import E_MINUS_3, fit_suite
    from .evolve import EvolutionConfig, TrajectoryRecord, load_snapshots
    from .normalform import normal_form
    with open(os.path.join(run_dir, "manifest.json")) as fh:
        manifest = json.load(fh)
    cfg = RunConfig.from_dict(manifest["run_config"])
    notes = []
    times, P, Q, grid = load_snapshots(run_dir)
    expected = manifest.get("n_snapshots", len(times))
    if len(times) < expected:
        msg = f"run directory truncated: {len(times)} of {expected} snapshots"
        warnings.warn(msg, RuntimeWarning)
        notes.append(msg)
    pot, grid2, kink, op, sd = build_setup(cfg)
    if grid2 != grid:
        raise InvalidArgument("stored snapshots do not match the manifest grid")
    proj, co = normal_form(pot, kink, op, sd)
    c = manifest["config"]
    ecfg = EvolutionConfig(c["dt"], float(times[-1]), c["snapshot_stride"], "nonlinear", c["diag_radius"])
    energy = np.zeros(len(times))
    traj = TrajectoryRecord(times, P, Q, energy, grid, ecfg, provenance=manifest, potential=pot,
                            kink=kink, operator=op, m2=pot.m2)
    d = cfg.diagnostics
    window = tuple(d["window"]) if d.get("window") else None
    res = fit_suite(traj, proj, co, op, window, d["diag_radius"], d["envelope"])
    res["notes"] = notes + res["notes"]
    plot = os.path.join(run_dir, "plotdata")
    os.makedirs(plot, exist_ok=True)
    tr = res["trace"]
    series = {"z_abs": np.abs(tr.z), "f_E_minus_3": tr.f_norm(E_MINUS_3),
              "h_E_minus_2.6": res["decomposition"]["h_norm"], "g_E_minus_3": res["decomposition"]["g_norm"],
              "remainder_E": res["scattering"]["remainder"]}
    for name, vals in series.items():
        n = min(len(vals), len(tr.times))
        sel = tr.times[:n] > 0
        np.savetxt(os.path.join(plot, f"{name}.csv"), np.column_stack((tr.times[:n][sel], vals[:n][sel])),
                   delimiter=",", header="t,value", comments="", fmt="%.17g")
    fits = {"entries": res["entries"], "window": res["window"], "eps": res["eps"], "notes": res["notes"],
            "coefficients": co.to_dict()}
    _dump(os.path.join(run_dir, "fits.json"), fits)
    return fits


def cmd_fit(args):
    fits = run_fit(args.run_dir)
    for e in fits["entries"]:
        val = e.get("exponent", e.get("value"))
        print(f"{e['quantity']:22s} {'PASS' if e['pass'] else 'FAIL'}  {val}")
    for n in fits["notes"]:
        print("note:", n, file=sys.stderr)
    return EXIT_OK


def _sweep_one(job):
    idx, cfg_dict, out = job
    row = {"run": idx, "eps": cfg_dict["init"]["eps"], "potential": cfg_dict["potential"]["kind"],
           "delta": cfg_dict["potential"]["delta"] if cfg_dict["potential"]["kind"] == "perturbed" else 0.0}
    try:
        cfg = RunConfig.from_dict(cfg_dict).validate()
        run_evolve(cfg, out)
        fits = run_fit(out)
        for e in fits["entries"]:
            if e.get("exponent") is not None:
                row[e["quantity"] + "_exp"] = e["exponent"]
            elif e.get("value") is not None:
                row[e["quantity"]] = e["value"]
        row["all_pass"] = all(e["pass"] for e in fits["entries"])
        row["status"] = "ok"
    except Exception as exc:  # keep sweeping; the row records the failure
        row["status"] = "failed"
        row["error"] = f"{type(exc).__name__}: {exc}"
    return row


def cmd_sweep(args):
    base = _config_from_args(args)
    out = _out_dir(args, "sweep")
    eps_vals = [float(v) for v in args.eps.split(",")] if args.eps else [base.init["eps"]]
    delta_vals = [float(v) for v in args.deltas.split(",")] if args.deltas else [None]
    jobs = []
    for i, (e, dlt) in enumerate(itertools.product(eps_vals, delta_vals)):
        d = base.to_dict()
        d["init"]["eps"] = e
        if dlt is not None:
            d["potential"]["kind"] = "gl" if dlt == 0 else "perturbed"
            d["potential"]["delta"] = dlt
        jobs.append((i, d, os.path.join(out, f"run_{i:03d}")))
    with ProcessPoolExecutor(max_workers=args.threads or 1) as ex:
        rows = list(ex.map(_sweep_one, jobs))
    keys = []
    for r in rows:
        keys += [k for k in r if k not in keys]
    with open(os.path.join(out, "summary.csv"), "w", newline="") as fh:
        w = csv.DictWriter(fh, fieldnames=keys)
        w.writeheader()
        w.writerows(rows)
    print(f"wrote {os.path.join(out, 'summary.csv')} ({len(rows)} runs, "
          f"{sum(r['status'] == 'failed' for r in rows)} failed)")
    return EXIT_OK


def gaussian_profile(xi):
    return np.exp(-0.25 * xi * xi)


def notched_profile(xi, center=2.0, inner=0.3, width=0.4):
    """Gaussian with a smooth notch that vanishes for ||xi| - center| < inner."""
    d = np.abs(np.abs(xi) - center)
    w = np.clip((d - inner) / width, 0.0, 1.0)
    return gaussian_profile(xi) * w**3 * (10.0 - 15.0 * w + 6.0 * w * w)


def cmd_oscillatory(args):
    from .diagnostics import oscillatory_models
    out = _out_dir(args, "oscillatory")
    mu, m2 = args.mu, args.m2
    if 4 * mu * mu <= m2:
        raise InvalidArgument("need 2 mu above the continuum threshold m")
    t = np.geomspace(args.t_min, args.t_max, args.n)
    xi_star = np.sqrt(4 * mu * mu - m2)
    res = oscillatory_models(gaussian_profile, mu, m2, t)
    nonres = oscillatory_models(lambda xi: notched_profile(xi, xi_star), mu, m2, t)
    report = {
        "I_l1": {**res["fit_l1"].to_dict(), "target": "-1.0 +/- 0.05",
                 "pass": abs(res["fit_l1"].exponent + 1.0) <= 0.05},
        "I_l2": {**res["fit_l2"].to_dict(), "target": "<= -0.283", "pass": res["fit_l2"].exponent <= -1 / 3 + 0.05},
        "I_l2_nonresonant": {**nonres["fit_l2"].to_dict(), "target": "<= -0.9",
                             "pass": nonres["fit_l2"].exponent <= -0.9},
        "table_error": res["table_error"],
    }
    _dump(os.path.join(out, "oscillatory.json"), report)
    for k in ("I_l1", "I_l2", "I_l2_nonresonant"):
        print(f"{k:18s} exponent {report[k]['exponent']:+.4f}  {'PASS' if report[k]['pass'] else 'FAIL'}")
    return EXIT_OK


# -- entry point --------------------------------------------------------------

def _add_physics(p):
    p.add_argument("--potential", choices=("gl", "perturbed", "table"))
    p.add_argument("--delta", type=float, help="perturbation width (implies --potential perturbed)")
    p.add_argument("--table", help="CSV table psi,U for a tabulated potential")
    p.add_argument("--L", type=float)
    p.add_argument("--N", type=int)


def build_parser():
    ap = argparse.ArgumentParser(prog="kinklab", description="Kink internal-mode radiation toolkit")
    ap.add_argument("--version", action="version", version=__version__)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--config", help="TOML run configuration")
    common.add_argument("--out", help="output directory (default $KINKLAB_OUT/<command>)")
    common.add_argument("--threads", type=int, default=None, help="worker processes for sweeps")
    sub = ap.add_subparsers(dest="cmd", required=True)

    p = sub.add_parser("kink", parents=[common], help="build and check the kink")
    _add_physics(p)
    p.add_argument("--method", default="auto", choices=("auto", "closed_form", "quadrature"))
    p.set_defaults(func=cmd_kink)

    p = sub.add_parser("spectrum", parents=[common], help="odd eigenvalue and spectral conditions")
    _add_physics(p)
    p.add_argument("--free", action="store_true", help="replace the linearization by V = 0")
    p.set_defaults(func=cmd_spectrum)

    for name in ("fgr", "normalform"):
        p = sub.add_parser(name, parents=[common], help="resonance coupling and normal-form constants")
        _add_physics(p)
        p.add_argument("--refine", action="store_true", help="repeat with N doubled")
        p.add_argument("--fgr-threshold", type=float, default=0.0)
        p.set_defaults(func=cmd_normalform)

    p = sub.add_parser("evolve", parents=[common], help="nonlinear run persisted to a directory")
    _add_physics(p)
    p.add_argument("--T", type=float)
    p.add_argument("--eps", type=float, help="|z(0)|^2")
    p.add_argument("--dt-factor", type=float)
    p.add_argument("--snapshot-dt", type=float)
    p.add_argument("--init", choices=("eigenmode_kick", "gaussian_odd", "file"))
    p.add_argument("--init-file")
    p.add_argument("--seed", type=int)
    p.set_defaults(func=cmd_evolve)

    p = sub.add_parser("fit", parents=[common], help="all diagnostics on a run directory")
    p.add_argument("run_dir")
    p.set_defaults(func=cmd_fit)

    p = sub.add_parser("sweep", parents=[common], help="evolve + fit over a parameter grid")
    _add_physics(p)
    p.add_argument("--T", type=float)
    p.add_argument("--eps", help="comma-separated eps values")
    p.add_argument("--deltas", help="comma-separated delta values (0 = quartic well)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("oscillatory", parents=[common], help="model oscillatory tail integrals")
    p.add_argument("--mu", type=float, default=float(np.sqrt(1.5)))
    p.add_argument("--m2", type=float, default=2.0)
    p.add_argument("--t-min", type=float, default=10.0)
    p.add_argument("--t-max", type=float, default=1000.0)
    p.add_argument("--n", type=int, default=15)
    p.set_defaults(func=cmd_oscillatory)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    codes = ((InvalidArgument, EXIT_INVALID), (SpectralConditionViolated, EXIT_U2),
             (FGRConditionViolated, EXIT_U3),
             ((KinklabError, WindowError, OSError, ValueError, RuntimeError), EXIT_RUNTIME))
    try:
        return args.func(args)
    except (KinklabError, OSError, ValueError, RuntimeError) as err:
        exc = err
        code = next(c for cls, c in codes if isinstance(err, cls))
    report = {"command": args.cmd, "error": type(exc).__name__, "message": str(exc), "exit_code": code}
    try:
        out = args.out or os.environ.get("KINKLAB_OUT")
        if out:
            os.makedirs(out, exist_ok=True)
            _dump(os.path.join(out, "error.json"), report)
    except OSError:
        pass
    print(json.dumps(report), file=sys.stderr)
    return code


if __name__ == "__main__":
    raise SystemExit(main())
