"""Conserved quantities of the truncated Burgers-Hopf system."""
from __future__ import annotations

from dataclasses import asdict, dataclass, field as dc_field

import numpy as np

from . import backend
from .spectral import SpectralField1D, padded_size, quadratic_product

__all__ = [
    "DiagnosticRecord",
    "energy",
    "energy_total",
    "hamiltonian",
    "hamiltonian_triads",
    "hamiltonian_collocation",
    "lagrange_multiplier",
    "diagnostics",
    "passive_invariants",
    "PassiveSeries",
]

# above this cutoff the O(L^2) triad enumeration gives way to the
# quadratic-product identity
TRIAD_FAST_ABOVE = 64


def energy(field: SpectralField1D) -> float:
    """Mean energy density ``|u_0|^2/2 + sum_{k>=1} |u_k|^2``."""
    c = field.coeffs
    return float(0.5 * abs(c[0]) ** 2 + np.sum(np.abs(c[1:]) ** 2))


def energy_total(field: SpectralField1D) -> float:
    """Rest-frame total ``2 pi sum_{k>=1} |u_k|^2`` (mean mode excluded)."""
    return float(2 * np.pi * np.sum(np.abs(field.coeffs[1:]) ** 2))


def _real_checked(z: complex, scale: float) -> float:
    if abs(z.imag) > 1e-12 * max(1.0, scale):
        raise ArithmeticError(f"triad sum has imaginary part {z.imag:.3e}")
    return float(z.real)


def hamiltonian_triads(field: SpectralField1D) -> float:
    """``(1/6) sum_{k1+k2+k3=0} u_k1 u_k2 u_k3`` by explicit enumeration."""
    s = complex(backend.kernels.triad_sum(field.coeffs)) / 6.0
    return _real_checked(s, abs(s))


def hamiltonian_collocation(field: SpectralField1D) -> float:
    """``(1/12 pi) int P_L(u^3) dx``: the grid mean of ``u^3`` on >= 3L+1 points."""
    u = field.grid_values(padded_size(field.cutoff))
    return float(np.mean(u**3) / 6.0)


def hamiltonian(field: SpectralField1D, method: str = "auto") -> float:
    """Non-canonical Hamiltonian of the truncated system.

    ``method`` is ``"triads"`` (enumeration), ``"spectral"``
    (``sum_k u_{-k} [P_L u^2]_k``) or ``"auto"``.
    """
    if method == "auto":
        method = "spectral" if field.cutoff > TRIAD_FAST_ABOVE else "triads"
    if method == "triads":
        return hamiltonian_triads(field)
    if method == "spectral":
        c = field.coeffs
        q = quadratic_product(field).coeffs
        s = c[0].real * q[0].real + 2.0 * np.sum((np.conj(c[1:]) * q[1:]).real)
        return float(s / 6.0)
    raise ValueError(f"unknown method {method!r}")


def lagrange_multiplier(E: float, H: float) -> float:
    """``-3H/(2E)``; minus the soliton speed in the zero-mean-flow frame."""
    if not E > 0:
        raise ValueError(f"energy must be positive, got {E}")
    return -1.5 * H / E


@dataclass
class DiagnosticRecord:
    t: float
    u0: float
    E: float
    E_total: float
    H: float
    passive: dict = dc_field(default_factory=dict)

    def to_dict(self) -> dict:
        d = asdict(self)
        if not d["passive"]:
            d.pop("passive")
        return d


def diagnostics(field: SpectralField1D, t: float = 0.0) -> DiagnosticRecord:
    return DiagnosticRecord(
        t=float(t),
        u0=field.mean,
        E=energy(field),
        E_total=energy_total(field),
        H=hamiltonian(field),
    )


@dataclass
class PassiveSeries:
    """Integrals of a passively transported density ``f`` along a run."""

    t: np.ndarray
    mass: np.ndarray  # int f dx
    momentum: np.ndarray  # int f u dx
    f_u2: np.ndarray  # int f u^2 dx, diagnostic only

    def drift(self) -> tuple[float, float]:
        def rel(a):
            return float(np.max(np.abs(a - a[0])) / max(abs(a[0]), 1e-300))

        return rel(self.mass), rel(self.momentum)


def _flux_rhs(f: np.ndarray, u: np.ndarray, L: int, n: int) -> np.ndarray:
    """``-ik P_L(f u)_k`` for half spectra ``f`` and ``u``."""
    from scipy.fft import irfft, rfft

    sf = np.zeros(n // 2 + 1, dtype=np.complex128)
    su = np.zeros(n // 2 + 1, dtype=np.complex128)
    sf[: L + 1] = f
    su[: L + 1] = u
    prod = rfft(irfft(sf, n=n) * irfft(su, n=n)) * n
    k = np.arange(L + 1)
    out = -1j * k * prod[: L + 1]
    out[0] = 0.0
    return out


def _integrals(f: np.ndarray, u: np.ndarray, L: int) -> tuple[float, float, float]:
    mass = 2 * np.pi * f[0].real
    mom = 2 * np.pi * (f[0].real * u[0].real + 2 * np.sum((f[1:] * np.conj(u[1:])).real))
    n = padded_size(L)
    fu2 = 2 * np.pi * np.mean(
        SpectralField1D(f).grid_values(n) * SpectralField1D(u).grid_values(n) ** 2
    )
    return mass, float(mom), float(fu2)


def passive_invariants(u_init, f0: SpectralField1D, config=None) -> PassiveSeries:
    """Co-evolve ``f`` by ``P_L[f_t + (f u)_x] = 0`` alongside ``u`` (RK4).

    ``u_init`` is either the initial field (then ``config`` is required) or a
    trajectory from :func:`burgerslab.dynamics.integrate`, whose initial
    field and configuration are reused.
    """
    from .dynamics import Trajectory

    if isinstance(u_init, Trajectory):
        config = u_init.config if config is None else config
        u_init = u_init.field(0)
    if config is None:
        raise ValueError("an IntegratorConfig is required")
    if f0.cutoff != u_init.cutoff:
        raise ValueError("f and u must share a cutoff")
    L = u_init.cutoff
    n = padded_size(L)
    rhs = backend.kernels.rhs_half
    dt = config.signed_dt
    u = np.array(u_init.coeffs)
    f = np.array(f0.coeffs)

    def deriv(u, f):
        return rhs(u), _flux_rhs(f, u, L, n)

    ts, rows = [0.0], [_integrals(f, u, L)]
    nsteps = config.nsteps
    for step in range(1, nsteps + 1):
        a1, b1 = deriv(u, f)
        a2, b2 = deriv(u + 0.5 * dt * a1, f + 0.5 * dt * b1)
        a3, b3 = deriv(u + 0.5 * dt * a2, f + 0.5 * dt * b2)
        a4, b4 = deriv(u + dt * a3, f + dt * b3)
        u = u + dt / 6 * (a1 + 2 * a2 + 2 * a3 + a4)
        f = f + dt / 6 * (b1 + 2 * b2 + 2 * b3 + b4)
        if step % config.sample_interval == 0 or step == nsteps:
            ts.append(step * dt)
            rows.append(_integrals(f, u, L))
    arr = np.array(rows)
    return PassiveSeries(np.array(ts), arr[:, 0], arr[:, 1], arr[:, 2])
