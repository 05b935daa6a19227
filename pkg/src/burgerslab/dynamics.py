"""Time integration of the truncated Burgers-Hopf equation.

The baseline scheme is fixed-step classical RK4.  Unforced runs go through
the compiled kernel when it is built (direct convolution, used up to
``DIRECT_MAX``) and otherwise through the padded-FFT numpy path.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from typing import Callable, Optional

import numpy as np
from scipy.fft import irfft, rfft

from . import backend
from .invariants import DiagnosticRecord, diagnostics
from .spectral import SpectralField1D, evaluate, padded_size, quadratic_product

__all__ = [
    "IntegratorConfig",
    "Trajectory",
    "BlowUpError",
    "rhs",
    "default_dt",
    "integrate",
    "time_reverse_run",
    "characteristic",
    "truncation_force",
    "subspace_run",
    "in_subspace",
    "restrict_subspace",
    "lift_subspace",
]

BLOWUP = 1e12
# compiled direct convolution beats the padded FFT below roughly this cutoff
DIRECT_MAX = 128

Force = Callable[[float], SpectralField1D]


class BlowUpError(FloatingPointError):
    def __init__(self, t: float, max_modulus: float):
        super().__init__(f"integration blew up at t={t:.6g} (max |u_k| = {max_modulus:.3e})")
        self.t = t
        self.max_modulus = max_modulus


@dataclass(frozen=True)
class IntegratorConfig:
    dt: float
    t_final: float
    sample_interval: int = 1
    scheme: str = "rk4"
    direction: int = 1

    def __post_init__(self):
        if not self.dt > 0:
            raise ValueError("dt must be positive; use direction=-1 to run backward")
        if self.t_final < 0:
            raise ValueError("t_final must be nonnegative")
        if self.sample_interval < 1:
            raise ValueError("sample_interval must be >= 1")
        if self.direction not in (1, -1):
            raise ValueError("direction must be +1 or -1")
        if self.scheme != "rk4":
            raise ValueError(f"unsupported scheme {self.scheme!r}")

    @property
    def nsteps(self) -> int:
        return int(round(self.t_final / self.dt))

    @property
    def signed_dt(self) -> float:
        return self.direction * self.dt

    def reversed(self) -> "IntegratorConfig":
        return IntegratorConfig(self.dt, self.t_final, self.sample_interval, self.scheme, -self.direction)

    def to_dict(self) -> dict:
        return {
            "dt": self.dt,
            "t_final": self.t_final,
            "sample_interval": self.sample_interval,
            "scheme": self.scheme,
            "direction": self.direction,
        }


def default_dt(field: SpectralField1D) -> float:
    """``min(1e-3, 0.5 / (L max|u|))``."""
    umax = float(np.max(np.abs(field.grid_values())))
    if umax == 0.0:
        return 1e-3
    return min(1e-3, 0.5 / (field.cutoff * umax))


@dataclass
class Trajectory:
    times: np.ndarray
    coeffs: np.ndarray  # shape (n_samples, L + 1)
    records: list[DiagnosticRecord]
    config: IntegratorConfig
    meta: dict = dc_field(default_factory=dict)

    @property
    def cutoff(self) -> int:
        return self.coeffs.shape[1] - 1

    def field(self, i: int) -> SpectralField1D:
        return SpectralField1D(self.coeffs[i])

    @property
    def final(self) -> SpectralField1D:
        return self.field(-1)

    def __len__(self) -> int:
        return len(self.times)

    def field_at(self, t: float) -> SpectralField1D:
        """Coefficients linearly interpolated between stored samples."""
        ts = self.times
        if self.config.direction < 0:
            ts = -ts
            t = -t
        if t < ts[0] - 1e-12 or t > ts[-1] + 1e-12:
            raise ValueError(f"t={t} outside the stored range")
        i = int(np.clip(np.searchsorted(ts, t) - 1, 0, len(ts) - 2))
        w = (t - ts[i]) / (ts[i + 1] - ts[i])
        return SpectralField1D((1 - w) * self.coeffs[i] + w * self.coeffs[i + 1])

    def ndjson_rows(self, with_fields: bool = True):
        for i, rec in enumerate(self.records):
            row = {"t": rec.t}
            if with_fields:
                row["field"] = self.field(i).to_dict()
            row["diagnostics"] = rec.to_dict()
            yield row


def rhs(field: SpectralField1D) -> SpectralField1D:
    """Right side ``-(ik/2) [P_L u^2]_k``; the mean mode is exactly zero."""
    k = np.arange(field.cutoff + 1)
    out = -0.5j * k * quadratic_product(field).coeffs
    out[0] = 0.0
    return SpectralField1D(out)


def _kernels_for(L: int, name: Optional[str]):
    if name is not None:
        return backend.get(name)
    if backend.compiled is not None and L <= DIRECT_MAX:
        return backend.compiled
    return backend.get("python")


def _forced_step(c: np.ndarray, t: float, dt: float, force: Force, krn) -> np.ndarray:
    def f(c, t):
        return krn.rhs_half(c) + force(t).coeffs

    k1 = f(c, t)
    k2 = f(c + 0.5 * dt * k1, t + 0.5 * dt)
    k3 = f(c + 0.5 * dt * k2, t + 0.5 * dt)
    k4 = f(c + dt * k3, t + dt)
    return c + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate(
    field: SpectralField1D,
    config: IntegratorConfig,
    force: Optional[Force] = None,
    *,
    backend_name: Optional[str] = None,
    t0: float = 0.0,
    store_fields: bool = True,
) -> Trajectory:
    """Integrate from ``t0`` over ``config.t_final`` (signed by ``direction``).

    Samples are taken every ``config.sample_interval`` steps plus the final
    step.  Raises :class:`BlowUpError` if a coefficient turns non-finite or
    exceeds ``1e12`` in modulus.
    """
    L = field.cutoff
    krn = _kernels_for(L, backend_name)
    dt = config.signed_dt
    nsteps = config.nsteps
    c = np.array(field.coeffs, dtype=np.complex128)

    times = [t0]
    coeffs = [c.copy()]
    records = [diagnostics(field, t0)]
    done = 0
    while done < nsteps:
        chunk = min(config.sample_interval - done % config.sample_interval, nsteps - done)
        if force is None:
            ok = krn.rk4_advance(c, dt, chunk, BLOWUP)
            if ok < chunk:
                t_bad = t0 + (done + ok + 1) * dt
                raise BlowUpError(t_bad, float(np.nanmax(np.abs(c))))
        else:
            for j in range(chunk):
                c = _forced_step(c, t0 + (done + j) * dt, dt, force, krn)
                m = np.abs(c).max()
                if not np.isfinite(m) or m > BLOWUP:
                    raise BlowUpError(t0 + (done + j + 1) * dt, float(m))
        done += chunk
        t = t0 + done * dt
        times.append(t)
        if store_fields or done == nsteps:
            coeffs.append(c.copy())
        records.append(diagnostics(SpectralField1D(c), t))
    meta = {"backend": krn.__name__, "fields": "all" if store_fields else "endpoints"}
    return Trajectory(np.array(times), np.array(coeffs), records, config, meta)


@dataclass
class ReversalReport:
    forward_final: SpectralField1D
    recovered: SpectralField1D
    error: float
    relative_error: float


def time_reverse_run(field: SpectralField1D, config: IntegratorConfig, **kw) -> ReversalReport:
    """Run forward to ``t_final`` and back with negated step; compare to the start."""
    fwd = integrate(field, config, store_fields=False, **kw)
    back = integrate(fwd.final, config.reversed(), store_fields=False, t0=fwd.times[-1], **kw)
    err = float(np.abs(back.final.coeffs - field.coeffs).max())
    scale = field.max_modulus()
    return ReversalReport(fwd.final, back.final, err, err / scale if scale > 0 else err)


@dataclass
class CharacteristicPaths:
    t: np.ndarray
    x: np.ndarray  # shape (n_times, n_paths), unwrapped


def characteristic(source, x0, t_final: Optional[float] = None, dt: Optional[float] = None) -> CharacteristicPaths:
    """Integrate ``dx/dt = u(x, t)`` by RK4 with exact spectral evaluation.

    ``source`` is a :class:`Trajectory` (coefficients interpolated linearly
    in time between samples) or a single field, taken as time independent.
    """
    x = np.atleast_1d(np.asarray(x0, dtype=np.float64)).copy()
    if isinstance(source, SpectralField1D):
        if t_final is None:
            raise ValueError("t_final is required for a static field")
        h = 0.01 if dt is None else dt

        def vel(x, t):
            return evaluate(source, x)

        t_start = 0.0
    else:
        ts = source.times
        t_start = float(ts[0])
        t_final = float(ts[-1] - ts[0]) if t_final is None else t_final
        h = float(abs(ts[1] - ts[0])) if dt is None else dt

        def vel(x, t):
            return evaluate(source.field_at(t), x)

    n = max(1, int(math.ceil(abs(t_final) / h - 1e-9)))
    h = math.copysign(abs(t_final) / n, t_final) if t_final != 0 else 0.0
    out = np.empty((n + 1, x.shape[0]))
    out[0] = x
    t = t_start
    for i in range(n):
        k1 = vel(x, t)
        k2 = vel(x + 0.5 * h * k1, t + 0.5 * h)
        k3 = vel(x + 0.5 * h * k2, t + 0.5 * h)
        k4 = vel(x + h * k3, t + h)
        x = x + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        t += h
        out[i + 1] = x
    return CharacteristicPaths(t_start + h * np.arange(n + 1), out)


def truncation_force(field: SpectralField1D, x):
    """``(1/2) d/dx (1 - P_L)(u^2)`` at ``x``: the sub-grid part of the flux."""
    L = field.cutoff
    n = 4 * L + 2  # resolves every mode of u^2 (|k| <= 2L) without aliasing
    sq = rfft(field.grid_values(n) ** 2) / n
    hi = np.zeros(2 * L + 1, dtype=np.complex128)
    hi[L + 1 :] = sq[L + 1 : 2 * L + 1]
    k = np.arange(2 * L + 1)
    return evaluate(SpectralField1D(0.5j * k * hi), x)


def in_subspace(field: SpectralField1D, k0: int, tol: float = 0.0) -> bool:
    k = np.arange(field.cutoff + 1)
    off = np.abs(field.coeffs[k % k0 != 0])
    return bool(off.size == 0 or off.max() <= tol)


def restrict_subspace(field: SpectralField1D, k0: int) -> SpectralField1D:
    """Relabel modes ``m k0 -> m``: a cutoff ``floor(L/k0)`` field."""
    Lr = field.cutoff // k0
    if Lr < 1:
        raise ValueError("k0 exceeds the cutoff")
    return SpectralField1D(field.coeffs[: Lr * k0 + 1 : k0])


def lift_subspace(field: SpectralField1D, k0: int, L: int) -> SpectralField1D:
    c = np.zeros(L + 1, dtype=np.complex128)
    c[: field.cutoff * k0 + 1 : k0] = field.coeffs
    return SpectralField1D(c)


@dataclass
class SubspaceReport:
    t: np.ndarray
    leakage: np.ndarray
    linear_error: Optional[np.ndarray]
    trajectory: Trajectory

    @property
    def max_leakage(self) -> float:
        return float(self.leakage.max())


def subspace_run(field: SpectralField1D, k0: int, config: IntegratorConfig, **kw) -> SubspaceReport:
    """Integrate data supported on multiples of ``k0`` and measure leakage.

    For ``k0 > L/2`` the dynamics are linear, ``u_k(t) = u_k(0) exp(-ik u_0 t)``,
    and the deviation from that closed form is reported as well.
    """
    if k0 < 1:
        raise ValueError("k0 must be a positive integer")
    if not in_subspace(field, k0):
        raise ValueError(f"initial field has modes outside multiples of {k0}")
    traj = integrate(field, config, **kw)
    L = field.cutoff
    k = np.arange(L + 1)
    off = k % k0 != 0
    leak = np.abs(traj.coeffs[:, off]).max(axis=1) if off.any() else np.zeros(len(traj))
    lin = None
    if 2 * k0 > L:
        exact = field.coeffs[None, :] * np.exp(-1j * np.outer(traj.times, k) * field.mean)
        lin = np.abs(traj.coeffs - exact).max(axis=1)
    return SubspaceReport(traj.times, leak, lin, traj)
