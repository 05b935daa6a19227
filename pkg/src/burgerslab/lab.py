"""Scripted experiments: noise, soliton diffusion, collisions and attraction."""
from __future__ import annotations

import math
from dataclasses import asdict, dataclass, field as dc_field
from pathlib import Path
from typing import Optional

import numpy as np
from scipy.optimize import least_squares

from . import io
from .dynamics import IntegratorConfig, ReversalReport, Trajectory, integrate, time_reverse_run
from .peaks import NoPeakError, peak_position, polarity, unwrap_positions
from .soliton import SolitonSolution, fwhm, make_traveling, solve_static
from .spectral import SpectralField1D, evaluate, translate

__all__ = [
    "ExperimentConfig",
    "ConfigurationError",
    "SolitonDestroyedError",
    "NoPeakError",
    "PeakTrack",
    "make_rng",
    "noise_field",
    "peak_position",
    "template_correlation",
    "run_diffusion",
    "run_collision",
    "run_attraction",
    "piecewise_fit",
]

TWO_PI = 2 * np.pi


class ConfigurationError(ValueError):
    pass


class SolitonDestroyedError(RuntimeError):
    def __init__(self, t: float, correlation: float):
        super().__init__(f"soliton lost at t={t:.6g}: template correlation {correlation:.3f} < 0.5")
        self.t = t
        self.correlation = correlation


def make_rng(seed: int) -> np.random.Generator:
    """Counter-based Philox stream; the same seed reproduces the same draws."""
    return np.random.Generator(np.random.Philox(seed))


def noise_field(L: int, sigma: float, rng) -> SpectralField1D:
    """``u_k = (sigma/sqrt 2) X_k`` with ``X_k`` standard complex normal, ``u_0 = 0``."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if not isinstance(rng, np.random.Generator):
        rng = make_rng(int(rng))
    z = rng.standard_normal((L, 2))
    c = np.zeros(L + 1, dtype=np.complex128)
    c[1:] = (sigma / math.sqrt(2)) * (z[:, 0] + 1j * z[:, 1])
    return SpectralField1D(c)


@dataclass
class ExperimentConfig:
    experiment: str
    cutoff: int = 50
    sigma: float = 0.0  # noise scale
    seed: int = 0
    scale: float = 1.0  # soliton scale sigma_s
    displacement: float = math.pi
    dt: float = 1e-3
    t_final: float = 10.0
    sample_every: float = 0.1  # time between emitted samples
    out_dir: Optional[str] = None

    def __post_init__(self):
        if self.sigma < 0:
            raise ConfigurationError("sigma must be nonnegative")
        if self.cutoff < 1:
            raise ConfigurationError("cutoff must be >= 1")

    def integrator(self, t_final: Optional[float] = None) -> IntegratorConfig:
        every = max(1, int(round(self.sample_every / self.dt)))
        T = self.t_final if t_final is None else t_final
        return IntegratorConfig(dt=self.dt, t_final=T, sample_interval=every)

    def to_dict(self) -> dict:
        return asdict(self)


# peak tracking -------------------------------------------------------------

def _window_grid(center: float, half_width: float, n: int = 256) -> np.ndarray:
    return center + np.linspace(-half_width, half_width, n)


def template_correlation(field: SpectralField1D, template: SpectralField1D, position: float,
                         half_width: float) -> float:
    """Pearson correlation of ``field`` with ``template`` moved to ``position``.

    The template is assumed to have its peak at 0; only a window of
    ``+-half_width`` around the peak enters.
    """
    xs = _window_grid(position, half_width)
    a = evaluate(field, xs)
    b = evaluate(template, xs - position)
    a = a - a.mean()
    b = b - b.mean()
    den = math.sqrt(float(a @ a) * float(b @ b))
    return float(a @ b / den) if den > 0 else 0.0


def _local_extremum(field: SpectralField1D, guess: float, half_width: float, sign: int) -> float:
    xs = _window_grid(guess, half_width, 512)
    v = sign * evaluate(field, xs)
    i = int(np.argmax(v))
    # polish with a parabola through the three neighbouring samples
    if 0 < i < len(xs) - 1:
        y0, y1, y2 = v[i - 1], v[i], v[i + 1]
        d = y0 - 2 * y1 + y2
        if d < 0:
            return float(xs[i] + 0.5 * (y0 - y2) / d * (xs[1] - xs[0]))
    return float(xs[i])


@dataclass
class PeakTrack:
    times: np.ndarray
    positions: np.ndarray  # unwrapped
    correlation: np.ndarray
    speed: float
    residual: np.ndarray  # positions minus the linear drift fit
    frequencies: np.ndarray
    power: np.ndarray

    def csv_rows(self):
        for t, p, r, c in zip(self.times, self.positions, self.residual, self.correlation):
            yield (float(t), float(p), float(r), float(c))


def track_peak(traj: Trajectory, template: SpectralField1D, *, threshold: float = 0.5,
               expected_speed: float = 0.0) -> PeakTrack:
    """Follow the soliton through a trajectory.

    At each sample the better-correlated of the global extremum and the
    extremum near the predicted position is taken.  The global candidate is
    thus used only when the template confirms it.
    """
    sign = polarity(template)
    w = fwhm(template)
    half = 2.0 * w
    times = traj.times
    pos = np.empty(len(times))
    corr = np.empty(len(times))
    prev = None
    for i in range(len(times)):
        f = traj.field(i)
        cands = []
        try:
            cands.append(peak_position(f, sign=sign))
        except NoPeakError:
            pass
        if prev is not None:
            guess = prev + expected_speed * (times[i] - times[i - 1])
            cands.append(_local_extremum(f, guess, w, sign) % TWO_PI)
        if not cands:
            raise SolitonDestroyedError(float(times[i]), 0.0)
        scored = [(template_correlation(f, template, p, half), p) for p in cands]
        c, p = max(scored)
        if c < threshold:
            raise SolitonDestroyedError(float(times[i]), c)
        pos[i], corr[i] = p, c
        prev = p
    up = unwrap_positions(pos)
    if len(times) > 1:
        speed, icpt = np.polyfit(times, up, 1)
    else:
        speed, icpt = 0.0, up[0]
    resid = up - (speed * times + icpt)
    dt_s = float(times[1] - times[0]) if len(times) > 1 else 1.0
    power = np.abs(np.fft.rfft(resid)) ** 2
    freqs = np.fft.rfftfreq(len(resid), d=dt_s)
    return PeakTrack(times, up, corr, float(speed), resid, freqs, power)


# diffusion -----------------------------------------------------------------

@dataclass
class DiffusionResult:
    track: PeakTrack
    trajectory: Trajectory
    background_spectrum: np.ndarray  # time average of |b_k|^2, k = 0..L
    config: ExperimentConfig

    def background_flatness(self, k_lo: Optional[int] = None, k_hi: Optional[int] = None) -> float:
        """max/min of the time-averaged background spectrum over ``[k_lo, k_hi]``."""
        L = self.trajectory.cutoff
        k_lo = max(1, L // 4) if k_lo is None else k_lo
        k_hi = L if k_hi is None else k_hi
        s = self.background_spectrum[k_lo : k_hi + 1]
        return float(s.max() / s.min())


def _fit_scale(c: np.ndarray, t: np.ndarray) -> float:
    return float((np.vdot(t[1:], c[1:])).real / np.vdot(t[1:], t[1:]).real)


def run_diffusion(config: ExperimentConfig, sol: Optional[SolitonSolution] = None) -> DiffusionResult:
    """Traveling unit soliton plus Gaussian noise; track the peak and the background."""
    L = config.cutoff
    sol = sol or solve_static(L)
    template = make_traveling(sol, config.scale)
    u0 = template + noise_field(L, config.sigma, make_rng(config.seed))
    traj = integrate(u0, config.integrator())
    track = track_peak(traj, template, expected_speed=-config.scale)
    # background: field minus the best-scaled template at the tracked position
    spec = np.zeros(L + 1)
    for i in range(len(traj)):
        t = translate(template, track.positions[i]).coeffs
        b = traj.coeffs[i] - _fit_scale(traj.coeffs[i], t) * t
        spec += np.abs(b) ** 2
    spec /= len(traj)
    res = DiffusionResult(track, traj, spec, config)
    if config.out_dir:
        write_experiment(config, traj, Path(config.out_dir), csv_name="peak_track.csv",
                         csv_header=["t", "position", "residual", "correlation"],
                         csv_rows=track.csv_rows())
        io.write_csv(Path(config.out_dir) / "power_spectrum.csv", ["frequency", "power"],
                     zip(track.frequencies.tolist(), track.power.tolist()))
        io.write_csv(Path(config.out_dir) / "background_spectrum.csv", ["k", "mean_abs2"],
                     zip(range(L + 1), spec.tolist()))
    return res


# collisions ----------------------------------------------------------------

@dataclass
class CollisionResult:
    trajectory: Trajectory
    damage: float  # L2 misfit of the best two-soliton model over the soliton norm
    fit: dict
    reversal: Optional[ReversalReport]
    config: ExperimentConfig


def collision_initial(sol: SolitonSolution, scale: float) -> tuple[SpectralField1D, SpectralField1D]:
    """Initial field of two equal and opposite solitons and the unit template."""
    tr = make_traveling(sol, scale)
    left = translate(tr, -math.pi / 2)
    right = translate(make_traveling(sol, -scale), math.pi / 2)
    return left + right, tr


def two_soliton_damage(field: SpectralField1D, template: SpectralField1D) -> tuple[float, dict]:
    """Best fit of ``a1 T(x-p1) - a2 T(x-p2)`` to ``field``; relative L2 misfit.

    Positions start from the field's lowest and highest points; a blind
    search tends to collapse both solitons onto one place.
    """
    sgn = polarity(template)
    n = max(16 * field.cutoff, 512)
    xs = TWO_PI * np.arange(n) / n
    v = field.grid_values(n)
    p1 = xs[np.argmax(sgn * v)]
    p2 = xs[np.argmax(-sgn * v)]
    c = field.coeffs[1:]
    t = template.coeffs[1:]
    k = np.arange(1, field.cutoff + 1)

    def resid(p):
        m = p[0] * t * np.exp(-1j * k * p[2]) - p[1] * t * np.exp(-1j * k * p[3])
        d = c - m
        return np.concatenate([d.real, d.imag])

    res = least_squares(resid, [1.0, 1.0, p1, p2])
    damage = float(np.linalg.norm(res.fun) / np.linalg.norm(t))
    a1, a2, q1, q2 = (float(v) for v in res.x)
    return damage, {"a1": a1, "a2": a2, "p1": q1 % TWO_PI, "p2": q2 % TWO_PI}


def run_collision(config: ExperimentConfig, sol: Optional[SolitonSolution] = None,
                  reverse: bool = True) -> CollisionResult:
    """Collide solitons of speeds -+scale started at -+pi/2 and optionally rerun backward."""
    L = config.cutoff
    sol = sol or solve_static(L)
    u0, tr = collision_initial(sol, config.scale)
    ic = config.integrator()
    traj = integrate(u0, ic)
    damage, fit = two_soliton_damage(traj.final, tr)
    rev = time_reverse_run(u0, ic) if reverse else None
    if config.out_dir:
        rows = [(float(traj.times[-1]), damage, rev.relative_error if rev else float("nan"))]
        write_experiment(config, traj, Path(config.out_dir), csv_name="collision.csv",
                         csv_header=["t_final", "damage", "reversal_error"], csv_rows=rows)
    return CollisionResult(traj, damage, fit, rev, config)


# attraction ----------------------------------------------------------------

@dataclass
class AttractionResult:
    times: np.ndarray
    separation: np.ndarray
    merger_time: Optional[float]
    fit: dict
    width: float
    trajectory: Trajectory
    config: ExperimentConfig


def _two_extrema(field: SpectralField1D, sign: int, n: int) -> Optional[tuple[float, float]]:
    """Positions of the two strongest excursions of sign ``sign`` about the mean."""
    xs = TWO_PI * np.arange(n) / n
    v = sign * (field.grid_values(n) - field.mean)
    mx = (v > np.roll(v, 1)) & (v >= np.roll(v, -1))
    idx = np.nonzero(mx)[0]
    if idx.size < 2:
        return None
    best = idx[np.argsort(v[idx])[::-1][:2]]
    # a second extremum shallower than half the first is a ripple, not a soliton
    if v[best[1]] < 0.5 * v[best[0]]:
        return None
    h = TWO_PI / n
    out = []
    for i in best:
        y0, y1, y2 = v[i - 1], v[i], v[(i + 1) % n]
        d = y0 - 2 * y1 + y2
        out.append(float(xs[i] + (0.5 * (y0 - y2) / d * h if d < 0 else 0.0)))
    return out[0], out[1]


def piecewise_fit(t: np.ndarray, s: np.ndarray, min_points: int = 5) -> dict:
    """Plateau then constant acceleration: ``s0`` for ``t < tb``, else
    ``s0 + v (t-tb) + a (t-tb)^2 / 2``.  ``tb`` is found by scanning the
    samples; ``r2`` is the fit quality on the accelerating segment."""
    t = np.asarray(t, dtype=np.float64)
    s = np.asarray(s, dtype=np.float64)
    if t.size < 2 * min_points:
        raise ValueError("too few samples for a piecewise fit")
    best = None
    for j in range(min_points, t.size - min_points):
        tb = t[j]
        dtp = np.clip(t - tb, 0.0, None)
        A = np.column_stack([np.ones_like(t), dtp, 0.5 * dtp**2])
        coef, *_ = np.linalg.lstsq(A, s, rcond=None)
        sse = float(np.sum((A @ coef - s) ** 2))
        if best is None or sse < best[0]:
            best = (sse, j, coef)
    _, j, (s0, v, a) = best
    tb = float(t[j])
    seg = t >= tb
    pred = s0 + v * (t[seg] - tb) + 0.5 * a * (t[seg] - tb) ** 2
    ss_tot = float(np.sum((s[seg] - s[seg].mean()) ** 2))
    r2 = 1.0 - float(np.sum((s[seg] - pred) ** 2)) / ss_tot if ss_tot > 0 else 0.0
    trend = float(np.polyfit(t[seg], s[seg], 1)[0])
    return {"plateau_end": tb, "s0": float(s0), "v": float(v), "acceleration": float(a),
            "r2": r2, "trend": trend}


def run_attraction(config: ExperimentConfig, sol: Optional[SolitonSolution] = None) -> AttractionResult:
    """Two identical traveling solitons a distance ``d`` apart, run until they merge."""
    d = config.displacement
    if config.scale == 0:
        raise ConfigurationError("zero soliton scale: there are no peaks to separate")
    if not 0 < d < TWO_PI:
        raise ConfigurationError("displacement must lie in (0, 2 pi)")
    L = config.cutoff
    sol = sol or solve_static(L)
    tr = make_traveling(sol, config.scale)
    width = fwhm(tr)
    if min(d, TWO_PI - d) < width:
        raise ConfigurationError(f"solitons {d:.3g} apart overlap (FWHM {width:.3g})")
    u0 = tr + translate(tr, d)
    traj = integrate(u0, config.integrator())
    sign = polarity(tr)
    n = max(32 * L, 1024)
    seps, ts = [], []
    merger = None
    pair_prev = (0.0, d)
    for i in range(len(traj)):
        pair = _two_extrema(traj.field(i), sign, n)
        if pair is None:
            merger = float(traj.times[i])
            break
        # keep the labelling continuous between samples
        a, b = pair
        if _circ(a - pair_prev[0]) + _circ(b - pair_prev[1]) > _circ(b - pair_prev[0]) + _circ(a - pair_prev[1]):
            a, b = b, a
        sep = abs(_wrap(b - a))
        pair_prev = (a, b)
        ts.append(float(traj.times[i]))
        seps.append(sep)
        if sep < width:
            merger = float(traj.times[i])
            break
    ts, seps = np.array(ts), np.array(seps)
    fit = piecewise_fit(ts, seps) if ts.size >= 10 else {}
    res = AttractionResult(ts, seps, merger, fit, width, traj, config)
    if config.out_dir:
        write_experiment(config, traj, Path(config.out_dir), csv_name="separation.csv",
                         csv_header=["t", "separation"], csv_rows=zip(ts.tolist(), seps.tolist()))
    return res


def _wrap(a: float) -> float:
    return (a + math.pi) % TWO_PI - math.pi


def _circ(a: float) -> float:
    return abs(_wrap(a))


# output --------------------------------------------------------------------

def write_experiment(config: ExperimentConfig, traj: Trajectory, out_dir: Path, *,
                     csv_name: str, csv_header: list, csv_rows) -> list[Path]:
    """Header, diagnostics, snapshots and a plot-ready CSV for one experiment."""
    out_dir.mkdir(parents=True, exist_ok=True)
    header = {"experiment": config.experiment, "config": config.to_dict(),
              "integrator": traj.config.to_dict()}
    paths = [
        io.write_ndjson(out_dir / "header.ndjson", [header]),
        io.write_ndjson(out_dir / "diagnostics.ndjson", (r.to_dict() for r in traj.records)),
    ]
    if traj.meta.get("fields") == "all":
        paths.append(io.write_ndjson(
            out_dir / "snapshots.ndjson",
            ({"t": float(t), "field": traj.field(i).to_dict()} for i, t in enumerate(traj.times)),
        ))
    paths.append(io.write_csv(out_dir / csv_name, csv_header, csv_rows))
    return paths
