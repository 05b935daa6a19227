"""Madelung variables on the periodic line: circulation, wave function,
quantum potential, Schrodinger residual, shock suppression and radiation
integrals.  ``hbar`` below always means ``kappa / (2 pi)``.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numpy as np
from scipy.fft import fft, ifft, rfft

from .spectral import SpectralField1D

__all__ = [
    "MadelungState",
    "MultivaluedWavefunctionError",
    "CirculationReport",
    "circulation",
    "wavefunction",
    "quantum_potential",
    "schrodinger_residual",
    "evolve_madelung",
    "shock_suppression_demo",
    "radiation_integrals",
    "RHO_FLOOR",
]

TWO_PI = 2 * np.pi
RHO_FLOOR = 1e-12


class MultivaluedWavefunctionError(ValueError):
    def __init__(self, mismatch: float):
        super().__init__(f"wave function is multivalued: phase mismatch {mismatch:.6g} at the seam")
        self.mismatch = mismatch


def _grid(n: int) -> np.ndarray:
    return TWO_PI * np.arange(n) / n


def _wavenumbers(n: int) -> np.ndarray:
    return np.fft.fftfreq(n, d=1.0 / n)


def _deriv(v: np.ndarray, order: int = 1) -> np.ndarray:
    """Spectral derivative of periodic samples; the Nyquist mode is dropped for odd orders."""
    n = v.shape[-1]
    k = _wavenumbers(n)
    if order % 2 and n % 2 == 0:
        k[n // 2] = 0.0
    out = ifft((1j * k) ** order * fft(v))
    return out if np.iscomplexobj(v) else out.real


@dataclass(frozen=True, eq=False)
class MadelungState:
    """Density and phase on ``n`` uniform points of ``[0, 2pi)``.

    The phase is ``S(x) = s(x) + winding * kappa * x / (2 pi)`` with ``s``
    periodic, so ``S`` gains ``winding * kappa`` per period.
    """

    rho: np.ndarray
    s: np.ndarray
    winding: float
    kappa: float

    def __post_init__(self):
        rho = np.array(self.rho, dtype=np.float64).reshape(-1)
        s = np.array(self.s, dtype=np.float64).reshape(-1)
        if rho.shape != s.shape:
            raise ValueError("rho and s need the same grid")
        if not np.all(rho > 0):
            raise ValueError("density must be positive everywhere")
        if not self.kappa > 0:
            raise ValueError("kappa must be positive")
        rho.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "rho", rho)
        object.__setattr__(self, "s", s)
        object.__setattr__(self, "winding", float(self.winding))
        object.__setattr__(self, "kappa", float(self.kappa))

    @property
    def n(self) -> int:
        return self.rho.shape[0]

    @property
    def x(self) -> np.ndarray:
        return _grid(self.n)

    @property
    def hbar(self) -> float:
        return self.kappa / TWO_PI

    def phase(self) -> np.ndarray:
        """The full multivalued ``S`` on the grid (branch continuous on ``[0, 2pi)``)."""
        return self.s + self.winding * self.kappa * self.x / TWO_PI

    def velocity(self) -> np.ndarray:
        return _deriv(self.s) + self.winding * self.hbar

    @classmethod
    def from_velocity(cls, rho, u: SpectralField1D, kappa: float) -> "MadelungState":
        """Phase with ``S_x = u``: the mean flow sets the winding ``2 pi u_0 / kappa``."""
        rho = np.asarray(rho, dtype=np.float64)
        n = rho.shape[0]
        k = np.arange(u.cutoff + 1)
        c = np.zeros(u.cutoff + 1, dtype=np.complex128)
        c[1:] = u.coeffs[1:] / (1j * k[1:])
        s = SpectralField1D(c).grid_values(n)
        return cls(rho, s, TWO_PI * u.mean / kappa, kappa)

    @classmethod
    def plane_wave(cls, n: int, v: float, kappa: float, t: float = 0.0, rho0: float = 1.0) -> "MadelungState":
        """``rho = rho0``, ``S = v x - v^2 t / 2``."""
        s = np.full(n, -0.5 * v * v * t)
        return cls(np.full(n, rho0), s, TWO_PI * v / kappa, kappa)

    def to_dict(self) -> dict:
        return {"grid_n": self.n, "rho": self.rho.tolist(), "s": self.s.tolist(),
                "winding": self.winding, "kappa": self.kappa}

    @classmethod
    def from_dict(cls, d: dict) -> "MadelungState":
        st = cls(d["rho"], d["s"], d["winding"], d["kappa"])
        if st.n != int(d["grid_n"]):
            raise ValueError(f"grid_n={d['grid_n']} but {st.n} samples given")
        return st


@dataclass
class CirculationReport:
    value: float
    quantum: int  # nearest N
    deviation: float  # value - N kappa

    @property
    def quantized(self) -> bool:
        return abs(self.deviation) < 1e-10 * self._kappa

    _kappa: float = 1.0


def circulation(u, kappa: float) -> CirculationReport:
    """``oint u dx`` (``2 pi u_0`` for a spectral field) against multiples of ``kappa``."""
    if isinstance(u, MadelungState):
        value = u.winding * u.kappa
    elif isinstance(u, SpectralField1D):
        value = TWO_PI * u.mean
    else:
        # uniform samples on [0, 2pi)
        value = TWO_PI * float(np.mean(u))
    N = int(round(value / kappa))
    return CirculationReport(value, N, value - N * kappa, kappa)


def seam_mismatch(state: MadelungState) -> float:
    """Phase jump of ``2 pi S / kappa`` across the periodic seam, in ``[0, pi]``."""
    jump = TWO_PI * state.winding
    return float(abs((jump + math.pi) % TWO_PI - math.pi))


def wavefunction(state: MadelungState, tol: float = 1e-10) -> np.ndarray:
    """``Psi = exp(R + 2 pi i S / kappa)`` with ``rho = exp(2R)``.

    Raises :class:`MultivaluedWavefunctionError` when the seam mismatch
    exceeds ``tol``.
    """
    mm = seam_mismatch(state)
    if mm > tol:
        raise MultivaluedWavefunctionError(mm)
    return np.sqrt(state.rho) * np.exp(1j * state.phase() / state.hbar)


def quantum_potential(rho, kappa: float) -> np.ndarray:
    """``V = (1/2) (kappa/2pi)^2 lap(sqrt rho) / sqrt rho`` by spectral differentiation."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho <= 0):
        raise ValueError("density must be positive for the quantum potential")
    a = np.sqrt(np.maximum(rho, RHO_FLOOR))
    return 0.5 * (kappa / TWO_PI) ** 2 * _deriv(a, 2) / a


@dataclass
class SchrodingerReport:
    residual: float  # max |[-hbar^2/2 lap + V] Psi - i hbar Psi_t|, HJ constant removed
    continuity: float  # max |rho_t + (rho S_x)_x|
    hamilton_jacobi: float  # max |S_t + S_x^2/2 - mean|
    split_error: float  # real/imag parts of residual/Psi vs the two real residuals
    hj_constant: float


def _time_derivative(vals: Sequence[np.ndarray], dt: float) -> np.ndarray:
    if len(vals) == 3:
        return (vals[2] - vals[0]) / (2 * dt)
    if len(vals) == 5:
        return (-vals[4] + 8 * vals[3] - 8 * vals[1] + vals[0]) / (12 * dt)
    raise ValueError("need 3 or 5 equally spaced states")


def schrodinger_residual(states: Sequence[MadelungState], dt: float) -> SchrodingerReport:
    """Residual of the Madelung-Schrodinger equation at the middle state.

    ``states`` are 3 (second-order) or 5 (fourth-order) states ``dt`` apart.
    The free function of time in ``S`` is fixed by giving the
    Hamilton-Jacobi residual zero spatial mean.
    """
    mid = states[len(states) // 2]
    kappa, hb = mid.kappa, mid.hbar
    if any(abs(s.winding - mid.winding) > 0 or s.kappa != kappa or s.n != mid.n for s in states):
        raise ValueError("states must share grid, kappa and winding")
    psi = wavefunction(mid)
    rho = mid.rho
    R = 0.5 * np.log(rho)
    rho_t = _time_derivative([s.rho for s in states], dt)
    S_t = _time_derivative([s.s for s in states], dt)
    R_t = rho_t / (2 * rho)
    Sx = mid.velocity()

    cont = rho_t + _deriv(rho * Sx)
    hj_raw = S_t + 0.5 * Sx**2
    c = float(np.mean(hj_raw))
    hj = hj_raw - c

    V = quantum_potential(rho, kappa)
    psi_t = (R_t + 1j * S_t / hb) * psi
    res = -0.5 * hb**2 * _deriv(psi, 2) + V * psi - 1j * hb * psi_t - c * psi
    q = res / psi
    split = max(float(np.max(np.abs(q.real - hj))), float(np.max(np.abs(q.imag + hb * cont / (2 * rho)))))
    return SchrodingerReport(float(np.max(np.abs(res))), float(np.max(np.abs(cont))),
                             float(np.max(np.abs(hj))), split, c)


def evolve_madelung(state: MadelungState, t_final: float, n_steps: int, sample_every: int = 1):
    """RK4 for ``rho_t = -(rho S_x)_x``, ``s_t = -S_x^2 / 2`` (pressureless).

    Returns ``(times, states)`` every ``sample_every`` steps.
    """
    h = t_final / n_steps
    w = state.winding * state.hbar

    def f(y):
        rho, s = y
        Sx = _deriv(s) + w
        return np.array([-_deriv(rho * Sx), -0.5 * Sx**2])

    y = np.array([state.rho, state.s])
    times, out = [0.0], [state]
    for i in range(1, n_steps + 1):
        k1 = f(y)
        k2 = f(y + 0.5 * h * k1)
        k3 = f(y + 0.5 * h * k2)
        k4 = f(y + h * k3)
        y = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if i % sample_every == 0:
            times.append(i * h)
            out.append(MadelungState(y[0], y[1], state.winding, state.kappa))
    return np.array(times), out


# shock suppression ---------------------------------------------------------

@dataclass
class ShockReport:
    burgers_t: np.ndarray
    burgers_max_grad: np.ndarray
    shock_time: float  # from extrapolating 1 / max|u_x| to zero
    shock_time_oracle: float  # 1 / max(-u0')
    linear_t: np.ndarray
    linear_max_grad: np.ndarray
    linear_max_velocity: np.ndarray

    @property
    def linear_bounded(self) -> bool:
        return bool(np.all(np.isfinite(self.linear_max_grad)) and np.all(np.isfinite(self.linear_max_velocity)))


def _burgers_pseudospectral(u0: np.ndarray, t_final: float, dt: float, growth_stop: float):
    n = u0.shape[0]
    k = np.fft.rfftfreq(n, d=1.0 / n)
    keep = k <= n // 3  # two-thirds dealiasing

    def rhs(uh):
        u = np.fft.irfft(uh, n=n)
        return -0.5j * k * rfft(u * u) * keep

    uh = rfft(u0) * keep
    g0 = np.abs(np.fft.irfft(1j * k * uh, n=n)).max()
    ts, gs = [0.0], [g0]
    t = 0.0
    while t < t_final - 1e-12:
        a = rhs(uh)
        b = rhs(uh + 0.5 * dt * a)
        c = rhs(uh + 0.5 * dt * b)
        d = rhs(uh + dt * c)
        uh = uh + dt / 6 * (a + 2 * b + 2 * c + d)
        t += dt
        g = np.abs(np.fft.irfft(1j * k * uh, n=n)).max()
        if not np.isfinite(g):
            break
        ts.append(t)
        gs.append(g)
        if g0 > 0 and g > growth_stop * g0:
            break
    return np.array(ts), np.array(gs)


def shock_suppression_demo(u0: SpectralField1D, kappa: float = TWO_PI, *, n: int = 1024,
                           t_burgers: float = 1.5, t_linear: float = 5.0, dt: float = 1e-3,
                           n_linear: int = 101, growth_stop: float = 20.0) -> ShockReport:
    """Burgers steepening of ``u0`` next to the free linear evolution of its wave function.

    The Burgers run stops once ``max|u_x|`` grows by ``growth_stop``.  The
    linear evolution is exact per mode, ``Psi_k(t) = Psi_k(0) exp(-i hbar k^2 t/2)``.
    """
    rep = circulation(u0, kappa)
    if not rep.quantized:
        raise MultivaluedWavefunctionError(seam_mismatch(MadelungState(np.ones(4), np.zeros(4), rep.value / kappa, kappa)))
    x = _grid(n)
    ug = u0.grid_values(n)
    dudx = u0.derivative(1).grid_values(n)
    steep = float(np.max(-dudx))
    oracle = 1.0 / steep if steep > 0 else math.inf

    bt, bg = _burgers_pseudospectral(ug, t_burgers, dt, growth_stop)
    shock = math.inf
    if bg[0] > 0 and bg[-1] > 4 * bg[0]:
        inv = 1.0 / bg
        # the tail of 1/max|u_x| is close to linear before the shock
        sel = inv < 0.5 * inv[0]
        if sel.sum() >= 3:
            p = np.polyfit(bt[sel], inv[sel], 1)
            shock = float(-p[1] / p[0]) if p[0] < 0 else math.inf

    state = MadelungState.from_velocity(np.ones(n), u0, kappa)
    psi0 = wavefunction(state)
    hb = state.hbar
    k = _wavenumbers(n)
    ph = fft(psi0)
    lt = np.linspace(0.0, t_linear, n_linear)
    lg, lv = [], []
    for t in lt:
        psi = ifft(ph * np.exp(-0.5j * hb * k * k * t))
        dpsi = ifft(1j * k * ph * np.exp(-0.5j * hb * k * k * t))
        v = hb * np.imag(np.conj(psi) * dpsi) / np.abs(psi) ** 2
        lv.append(float(np.max(np.abs(v))))
        lg.append(float(np.max(np.abs(_deriv(v)))))
    return ShockReport(bt, bg, shock, oracle, lt, np.array(lg), np.array(lv))


# radiation -----------------------------------------------------------------

@dataclass
class RadiationReport:
    classical: float  # int rho V' dx
    classical_scale: float  # int rho |V'| dx
    quantum: float  # int rho |V'|^2 dx


def radiation_integrals(rho, kappa: float) -> RadiationReport:
    """Classical ``int rho grad V`` and quantum ``int rho |grad V|^2`` on the periodic grid."""
    rho = np.asarray(rho, dtype=np.float64)
    if np.any(rho <= 0):
        raise ValueError("density must be positive")
    V = quantum_potential(rho, kappa)
    dV = _deriv(V)
    w = TWO_PI / rho.shape[0]
    return RadiationReport(float(np.sum(rho * dV) * w), float(np.sum(rho * np.abs(dV)) * w),
                           float(np.sum(rho * dV**2) * w))


def random_density(n: int, rng: np.random.Generator, L: int = 4, amp: float = 0.3) -> np.ndarray:
    """``exp(g)`` for a random band-limited ``g``: smooth and positive."""
    c = np.zeros(L + 1, dtype=np.complex128)
    c[1:] = amp * (rng.standard_normal(L) + 1j * rng.standard_normal(L)) / np.sqrt(2 * L)
    return np.exp(SpectralField1D(c).grid_values(n))
