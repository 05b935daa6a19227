"""Command-line experiment runner.

Every subcommand reads an optional TOML file (``--config``) whose keys are
the long flag names (dashes or underscores); explicit flags win over the
file.  Results go to ``--out-dir`` together with ``manifest.ndjson``.
"""
from __future__ import annotations

import argparse
import datetime as _dt
import json
import math
import sys
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path

import numpy as np

from . import __version__, io

EXIT_OK, EXIT_USAGE, EXIT_NUMERICAL, EXIT_ACCEPTANCE = 0, 1, 2, 3


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


# flag name -> (type, help); defaults live per subcommand in DEFAULTS
COMMON = {
    "lambda": (int, "Fourier cutoff"),
    "sigma": (float, "noise scale"),
    "seed": (int, "Philox seed"),
    "dt": (float, "time step"),
    "t-final": (float, "final time"),
    "scale": (float, "soliton scale (speed)"),
    "displacement": (float, "soliton separation"),
    "k0": (int, "subspace wavenumber"),
    "out-dir": (str, "output directory"),
    "format": (str, "diagnostics format: ndjson or csv"),
    "sample-every": (float, "time between samples"),
}

BASE = {"sigma": 0.0, "seed": 0, "scale": 1.0, "displacement": math.pi, "k0": 2, "format": "ndjson",
        "sample-every": 0.1, "dt": 1e-3, "t-final": 10.0, "out-dir": None}

DEFAULTS = {
    "soliton-solve": {"lambda": 50, "tol": 1e-12, "max-iter": 100_000},
    "soliton-fit": {"lambda": [50, 100, 200]},
    "evolve": {"lambda": 50, "init": "noise", "sigma": 0.01, "field-file": None},
    "diffusion": {"lambda": 50, "sigma": 0.01, "t-final": 100.0, "sample-every": 0.5},
    "collide": {"lambda": 50, "dt": 1e-4, "t-final": math.pi, "sample-every": 0.1, "no-reverse": False},
    "attract": {"lambda": 50, "t-final": 40.0},
    "subspace": {"lambda": 5, "k0": 2, "mean": 0.3},
    "basis": {"lambda": 50},
    "threed-verify": {"lambda": 8, "t-final": 0.5, "dt": 2.5e-3},
    "relativistic-verify": {},
    "madelung-verify": {"state": None, "kappa": 2 * math.pi},
    "reynolds": {"temperature-mev": 200.0, "length": 900.0, "length-unit": "m", "eta-s": 1 / (8 * math.pi),
                 "ref-length": 6.0, "ref-unit": "fm"},
    "verify": {"mode": "quick", "only": None},
}

EXTRA = {
    "soliton-solve": {"tol": (float, "convergence tolerance"), "max-iter": (int, "iteration cap")},
    "evolve": {"init": (str, "noise | cos | soliton | traveling | file"),
               "field-file": (str, "NDJSON field for --init file")},
    "collide": {"no-reverse": ("flag", "skip the time-reversed rerun")},
    "subspace": {"mean": (float, "mean flow u_0 of the initial field")},
    "madelung-verify": {"state": (str, "MadelungState NDJSON file"), "kappa": (float, "flux quantum")},
    "reynolds": {"temperature-mev": (float, "temperature [MeV]"), "length": (float, "system length"),
                 "length-unit": (str, "fm | cm | m | km"), "eta-s": (float, "shear viscosity over entropy"),
                 "ref-length": (float, "reference length"), "ref-unit": (str, "unit of --ref-length")},
    "verify": {"mode": (str, "quick | full"), "only": (str, "comma-separated criterion numbers")},
}

HELP = {
    "soliton-solve": "solve for the static soliton",
    "soliton-fit": "fit the empirical soliton formula (CSV rows)",
    "evolve": "integrate a field and emit diagnostics",
    "diffusion": "soliton in noise with peak tracking",
    "collide": "head-on soliton collision and reversal",
    "attract": "two co-moving solitons",
    "subspace": "invariant subspace leakage",
    "basis": "circulant completeness of soliton translates",
    "threed-verify": "3D factorized soliton and passive invariants",
    "relativistic-verify": "dust / Burgers identities",
    "madelung-verify": "Madelung, radiation and shock checks",
    "reynolds": "Reynolds-number estimate",
    "verify": "run the acceptance suite",
}


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="burgerslab", description="Spectral lab for the truncated inviscid Burgers equation.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = p.add_subparsers(dest="command", metavar="COMMAND", parser_class=_Parser)
    sub.required = True
    for cmd, helptext in HELP.items():
        sp = sub.add_parser(cmd, help=helptext, description=helptext)
        sp.add_argument("--config", type=str, default=None, help="TOML configuration file")
        for name, (typ, h) in COMMON.items():
            if cmd == "soliton-fit" and name == "lambda":
                sp.add_argument("--lambda", dest="lambda_", type=int, nargs="+", default=None, help=h)
                continue
            sp.add_argument(f"--{name}", dest=name.replace("-", "_") + ("_" if name == "lambda" else ""),
                            type=typ, default=None, help=h)
        for name, (typ, h) in EXTRA.get(cmd, {}).items():
            if typ == "flag":
                sp.add_argument(f"--{name}", dest=name.replace("-", "_"), action="store_const", const=True,
                                default=None, help=h)
            else:
                sp.add_argument(f"--{name}", dest=name.replace("-", "_"), type=typ, default=None, help=h)
    return p


def _load_toml(path: str) -> dict:
    try:
        import tomllib  # type: ignore[import-not-found]
    except ModuleNotFoundError:
        import tomli as tomllib
    try:
        with open(path, "rb") as fh:
            return tomllib.load(fh)
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc}") from exc
    except tomllib.TOMLDecodeError as exc:
        raise UsageError(f"malformed config {path}: {exc}") from exc


def resolve_config(cmd: str, args: argparse.Namespace) -> dict:
    """Defaults, then the TOML file, then explicit flags."""
    cfg = dict(BASE)
    cfg.update(DEFAULTS[cmd])
    known = set(COMMON) | set(EXTRA.get(cmd, {}))
    if args.config:
        for k, v in _load_toml(args.config).items():
            key = k.replace("_", "-")
            if key not in known:
                raise UsageError(f"unknown config key {k!r} for {cmd}")
            cfg[key] = v
    for key in known:
        dest = key.replace("-", "_") + ("_" if key == "lambda" else "")
        v = getattr(args, dest, None)
        if v is not None:
            cfg[key] = v
    if cfg["format"] not in ("ndjson", "csv"):
        raise UsageError(f"--format must be ndjson or csv, got {cfg['format']!r}")
    if cfg.get("out-dir") is None:
        cfg["out-dir"] = str(Path("runs") / cmd)
    return cfg


@dataclass
class RunManifest:
    version: str
    command: str
    config: dict
    seed: int
    started: str
    finished: str = ""
    outputs: list = dc_field(default_factory=list)
    status: int = 0

    def finish(self, paths, status: int):
        self.finished = _now()
        self.status = status
        self.outputs = [{"path": Path(p).name, "sha256": io.sha256_file(p)} for p in paths]

    def write(self, out_dir: Path) -> Path:
        return io.write_ndjson(out_dir / "manifest.ndjson", [asdict(self)])


def _now() -> str:
    return _dt.datetime.now(_dt.timezone.utc).isoformat(timespec="seconds")


def _emit(obj) -> None:
    sys.stdout.write(io.dumps(obj) + "\n")


def _write_diagnostics(traj, out: Path, fmt: str) -> Path:
    if fmt == "csv":
        header = ["t", "u0", "E", "E_total", "H"]
        return io.write_csv(out / "diagnostics.csv", header,
                            ((r.t, r.u0, r.E, r.E_total, r.H) for r in traj.records))
    return io.write_ndjson(out / "diagnostics.ndjson", (r.to_dict() for r in traj.records))


def _experiment(cmd: str, cfg: dict):
    from .lab import ExperimentConfig

    return ExperimentConfig(cmd, cfg["lambda"], sigma=cfg["sigma"], seed=cfg["seed"], scale=cfg["scale"],
                            displacement=cfg["displacement"], dt=cfg["dt"], t_final=cfg["t-final"],
                            sample_every=cfg["sample-every"], out_dir=cfg["out-dir"])


def _integrator(cfg: dict):
    from .dynamics import IntegratorConfig

    every = max(1, int(round(cfg["sample-every"] / cfg["dt"])))
    return IntegratorConfig(dt=cfg["dt"], t_final=cfg["t-final"], sample_interval=every)


# handlers: (cfg, out_dir) -> (exit code, [paths], summary) -----------------

def cmd_soliton_solve(cfg, out):
    from .soliton import solve_static

    sol = solve_static(cfg["lambda"], tol=cfg["tol"], max_iter=cfg["max-iter"])
    p = io.write_ndjson(out / "soliton.ndjson", [sol.to_dict()])
    summary = {"lambda": sol.cutoff, "iterations": sol.iterations, "residual": sol.residual, "E": sol.E,
               "E_total": sol.E_total, "H": sol.H, "lambda_multiplier": sol.lam}
    return EXIT_OK, [p], summary


def cmd_soliton_fit(cfg, out):
    from .soliton import FitParams, fit_empirical, solve_static

    lams = cfg["lambda"] if isinstance(cfg["lambda"], list) else [cfg["lambda"]]
    rows = [fit_empirical(solve_static(int(L))).csv_row() for L in lams]
    p = io.write_csv(out / "fit.csv", FitParams.csv_header(), rows)
    sys.stdout.write(p.read_text())
    return EXIT_OK, [p], None


def _initial_field(cfg):
    from .lab import make_rng, noise_field
    from .soliton import make_traveling, solve_static
    from .spectral import SpectralField1D

    L, init = cfg["lambda"], cfg["init"]
    if init == "noise":
        return noise_field(L, cfg["sigma"], make_rng(cfg["seed"]))
    if init == "cos":
        return SpectralField1D.from_modes(L, {1: cfg["scale"]})
    if init == "soliton":
        return solve_static(L).field.scale(cfg["scale"])
    if init == "traveling":
        return make_traveling(solve_static(L), cfg["scale"])
    if init == "file":
        if not cfg.get("field-file"):
            raise UsageError("--init file needs --field-file")
        rows = io.read_ndjson(cfg["field-file"])
        if not rows:
            raise UsageError(f"{cfg['field-file']} holds no field")
        row = rows[-1]
        return SpectralField1D.from_dict(row.get("field", row))
    raise UsageError(f"unknown --init {init!r}")


def cmd_evolve(cfg, out):
    from .dynamics import integrate

    u = _initial_field(cfg)
    traj = integrate(u, _integrator(cfg))
    paths = [_write_diagnostics(traj, out, cfg["format"])]
    if cfg["format"] == "ndjson":
        paths.append(io.write_ndjson(out / "trajectory.ndjson", traj.ndjson_rows()))
    paths.append(io.write_ndjson(out / "final_field.ndjson", [traj.final.to_dict()]))
    r0, r1 = traj.records[0], traj.records[-1]
    summary = {"t_final": float(traj.times[-1]), "u0_drift": r1.u0 - r0.u0,
               "E_rel_drift": (r1.E - r0.E) / r0.E if r0.E else 0.0, "H_drift": r1.H - r0.H,
               "max_change": float(np.abs(traj.final.coeffs - u.coeffs).max())}
    return EXIT_OK, paths, summary


def _listing(out: Path):
    return sorted(p for p in out.iterdir() if p.is_file() and p.name != "manifest.ndjson")


def cmd_diffusion(cfg, out):
    from .lab import run_diffusion

    res = run_diffusion(_experiment("diffusion", cfg))
    if cfg["format"] == "csv":
        _write_diagnostics(res.trajectory, out, "csv")
    summary = {"speed": res.track.speed, "min_correlation": float(res.track.correlation.min()),
               "residual_std": float(res.track.residual.std()), "background_flatness": res.background_flatness()}
    return EXIT_OK, _listing(out), summary


def cmd_collide(cfg, out):
    from .lab import run_collision

    res = run_collision(_experiment("collide", cfg), reverse=not cfg["no-reverse"])
    if cfg["format"] == "csv":
        _write_diagnostics(res.trajectory, out, "csv")
    summary = {"damage": res.damage, **res.fit,
               "reversal_error": res.reversal.relative_error if res.reversal else None}
    return EXIT_OK, _listing(out), summary


def cmd_attract(cfg, out):
    from .lab import run_attraction

    res = run_attraction(_experiment("attract", cfg))
    if cfg["format"] == "csv":
        _write_diagnostics(res.trajectory, out, "csv")
    summary = {"merger_time": res.merger_time, "fwhm": res.width, **res.fit}
    return EXIT_OK, _listing(out), summary


def cmd_subspace(cfg, out):
    from .dynamics import subspace_run
    from .lab import make_rng, noise_field
    from .spectral import SpectralField1D

    L, k0 = cfg["lambda"], cfg["k0"]
    if not 1 <= k0 <= L:
        raise UsageError("--k0 must lie in 1..lambda")
    c = noise_field(L, cfg["sigma"] or 0.3, make_rng(cfg["seed"])).coeffs.copy()
    c[np.arange(L + 1) % k0 != 0] = 0
    c[0] = cfg["mean"]
    rep = subspace_run(SpectralField1D(c), k0, _integrator(cfg))
    rows = [(float(t), float(l), float(rep.linear_error[i]) if rep.linear_error is not None else float("nan"))
            for i, (t, l) in enumerate(zip(rep.t, rep.leakage))]
    p = io.write_csv(out / "leakage.csv", ["t", "leakage", "linear_error"], rows)
    summary = {"max_leakage": rep.max_leakage,
               "max_linear_error": float(rep.linear_error.max()) if rep.linear_error is not None else None}
    return EXIT_OK, [p], summary


def cmd_basis(cfg, out):
    from .lab import make_rng, noise_field
    from .soliton import basis_matrix, solve_static
    from .spectral import evaluate

    L = cfg["lambda"]
    b = basis_matrix(solve_static(L))
    u = noise_field(L, 1.0, make_rng(cfg["seed"]))
    a = b.expand(u)
    err = float(np.abs(b.dense() @ a - evaluate(u, b.nodes)).max())
    p = io.write_csv(out / "eigenvalues.csv", ["j", "re", "im", "abs"],
                     ((j, float(e.real), float(e.imag), float(abs(e))) for j, e in enumerate(b.eigenvalues)))
    return EXIT_OK, [p], {"lambda": L, "min_eigenvalue": b.min_eigenvalue, "round_trip_error": err}


def cmd_threed_verify(cfg, out):
    from .acceptance import c14_threed

    res = c14_threed("quick")
    p = io.write_ndjson(out / "threed.ndjson", [res.to_dict()])
    return (EXIT_OK if res.passed else EXIT_NUMERICAL), [p], {"passed": res.passed}


def cmd_relativistic_verify(cfg, out):
    from .relativistic import burgers_equivalence, dust_residual, rarefaction, stationary_shear, vorticity_checks

    t = np.linspace(0.2, 2.0, 7)[:, None]
    x = np.linspace(-2.0, 2.0, 9)[None, :]
    y = np.linspace(0.0, 3.0, 9)[None, :]
    rows = []
    for h in (2e-2, 1e-2, 5e-3, 2.5e-3):
        rows.append((h, dust_residual(rarefaction(), t, x, h=h),
                     burgers_equivalence(rarefaction(), t, x, h=h)["residual"],
                     vorticity_checks(stationary_shear(), t, 0.1, y, h=h).transversality))
    p = io.write_csv(out / "residuals.csv", ["h", "dust_rarefaction", "burgers_rarefaction",
                                              "transversality_shear"], rows)
    orders = [math.log(rows[i][1] / rows[i + 1][1], 2) for i in range(len(rows) - 1)]
    return EXIT_OK, [p], {"dust_orders": orders}


def cmd_madelung_verify(cfg, out):
    from .acceptance import c17_madelung
    from .madelung import MadelungState, circulation, quantum_potential, radiation_integrals, seam_mismatch

    rows = []
    if cfg.get("state"):
        for d in io.read_ndjson(cfg["state"]):
            st = MadelungState.from_dict(d)
            circ = circulation(st, st.kappa)
            rad = radiation_integrals(st.rho, st.kappa)
            rows.append({"circulation": circ.value, "N": circ.quantum, "deviation": circ.deviation,
                         "seam_mismatch": seam_mismatch(st),
                         "max_abs_potential": float(np.abs(quantum_potential(st.rho, st.kappa)).max()),
                         "radiation_classical": rad.classical, "radiation_quantum": rad.quantum})
        status = EXIT_OK
    else:
        res = c17_madelung("quick")
        rows.append(res.to_dict())
        status = EXIT_OK if res.passed else EXIT_NUMERICAL
    p = io.write_ndjson(out / "madelung.ndjson", rows)
    for r in rows:
        _emit(r)
    return status, [p], None


def cmd_reynolds(cfg, out):
    from .relativistic import HBARC_MEV_FM, reynolds_estimate, to_fm

    L = to_fm(cfg["length"], cfg["length-unit"])
    Lr = to_fm(cfg["ref-length"], cfg["ref-unit"])
    local, scaled = reynolds_estimate(cfg["temperature-mev"], L, cfg["eta-s"], Lr)
    obj = {"T_MeV": cfg["temperature-mev"], "L_fm": L, "L_ref_fm": Lr, "eta_over_s": cfg["eta-s"],
           "hbarc_MeV_fm": HBARC_MEV_FM, "Re_local": local, "Re_scaled": scaled}
    p = io.write_ndjson(out / "reynolds.ndjson", [obj])
    return EXIT_OK, [p], obj


def cmd_verify(cfg, out):
    from .acceptance import run_all

    only = None
    if cfg.get("only"):
        try:
            only = {int(s) for s in str(cfg["only"]).split(",") if s.strip()}
        except ValueError:
            raise UsageError("--only takes comma-separated integers") from None
    if cfg["mode"] not in ("quick", "full"):
        raise UsageError("--mode must be quick or full")
    results = run_all(cfg["mode"], only=only, log=lambda s: print(s, file=sys.stderr))
    p = io.write_ndjson(out / "acceptance.ndjson", (r.to_dict() for r in results))
    failed = [r.number for r in results if not r.passed]
    code = EXIT_ACCEPTANCE if failed else EXIT_OK
    return code, [p], {"passed": len(results) - len(failed), "failed": failed}


HANDLERS = {
    "soliton-solve": cmd_soliton_solve,
    "soliton-fit": cmd_soliton_fit,
    "evolve": cmd_evolve,
    "diffusion": cmd_diffusion,
    "collide": cmd_collide,
    "attract": cmd_attract,
    "subspace": cmd_subspace,
    "basis": cmd_basis,
    "threed-verify": cmd_threed_verify,
    "relativistic-verify": cmd_relativistic_verify,
    "madelung-verify": cmd_madelung_verify,
    "reynolds": cmd_reynolds,
    "verify": cmd_verify,
}


def _numerical_errors():
    from .dynamics import BlowUpError
    from .lab import ConfigurationError, SolitonDestroyedError
    from .madelung import MultivaluedWavefunctionError
    from .peaks import NoPeakError
    from .soliton import CompletenessError, DegenerateSeedError, FitError, NonConvergenceError

    usage = (ConfigurationError,)
    numerical = (BlowUpError, SolitonDestroyedError, MultivaluedWavefunctionError, NoPeakError,
                 CompletenessError, DegenerateSeedError, FitError, NonConvergenceError,
                 FloatingPointError, ArithmeticError)
    return usage, numerical


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    cmd = args.command
    usage_errs, num_errs = _numerical_errors()
    try:
        cfg = resolve_config(cmd, args)
        out = Path(cfg["out-dir"])
        try:
            out.mkdir(parents=True, exist_ok=True)
            probe = out / ".write-test"
            probe.write_text("")
            probe.unlink()
        except OSError as exc:
            raise UsageError(f"cannot write to {out}: {exc}") from exc
        manifest = RunManifest(__version__, cmd, cfg, int(cfg.get("seed") or 0), _now())
        code, paths, summary = HANDLERS[cmd](cfg, out)
        manifest.finish(paths, code)
        manifest.write(out)
        if summary is not None:
            _emit(summary)
        return code
    except (UsageError, *usage_errs) as exc:
        print(f"burgerslab {cmd}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except num_errs as exc:
        print(f"burgerslab {cmd}: numerical failure: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except (OSError, ValueError, KeyError, TypeError, json.JSONDecodeError) as exc:
        print(f"burgerslab {cmd}: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
