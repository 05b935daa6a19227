"""Truncated compressible Burgers dynamics on the 3-torus, at verification scale."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.fft import fftshift, ifftshift, irfftn, next_fast_len, rfftn

from .dynamics import BLOWUP, BlowUpError, IntegratorConfig
from .soliton import SolitonSolution
from .spectral import SpectralField1D

__all__ = [
    "MAX_CUTOFF_3D",
    "SpectralField3D",
    "rhs3d",
    "integrate3d",
    "factorized_soliton",
    "dirichlet_profile",
    "random_profile",
    "passive_invariants_3d",
    "from_1d",
]

MAX_CUTOFF_3D = 32


def _hermitian(c: np.ndarray) -> np.ndarray:
    """Symmetrise so that ``c[-k] = conj(c[k])`` on the last three axes."""
    flipped = np.conj(c[..., ::-1, ::-1, ::-1])
    return 0.5 * (c + flipped)


@dataclass(frozen=True, eq=False)
class SpectralField3D:
    """``ncomp`` real fields on the 3-torus, modes ``|k_i| <= L`` on every axis.

    ``coeffs[c, i, j, l]`` is the coefficient of component ``c`` at
    ``k = (i-L, j-L, l-L)``.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True)
        if c.ndim == 3:
            c = c[None]
        if c.ndim != 4 or not (c.shape[1] == c.shape[2] == c.shape[3]) or c.shape[1] % 2 == 0:
            raise ValueError("coefficients must have shape (ncomp, 2L+1, 2L+1, 2L+1)")
        L = (c.shape[1] - 1) // 2
        if L < 1:
            raise ValueError("cutoff must be >= 1")
        if L > MAX_CUTOFF_3D:
            raise ValueError(f"3D cutoff {L} exceeds the cap {MAX_CUTOFF_3D}")
        c = _hermitian(c)
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    @classmethod
    def zeros(cls, L: int, ncomp: int = 3) -> "SpectralField3D":
        m = 2 * L + 1
        return cls(np.zeros((ncomp, m, m, m), dtype=np.complex128))

    @property
    def cutoff(self) -> int:
        return (self.coeffs.shape[1] - 1) // 2

    @property
    def ncomp(self) -> int:
        return self.coeffs.shape[0]

    def zero_mode(self) -> np.ndarray:
        L = self.cutoff
        return self.coeffs[:, L, L, L].real.copy()

    def max_modulus(self) -> float:
        return float(np.abs(self.coeffs).max())

    def grid_values(self, n: int | None = None) -> np.ndarray:
        n = padded_size3d(self.cutoff) if n is None else n
        return _to_grid(self.coeffs, self.cutoff, n)

    def to_dict(self) -> dict:
        return {
            "lambda3": self.cutoff,
            "ncomp": self.ncomp,
            "shape": list(self.coeffs.shape),
            "re": self.coeffs.real.ravel().tolist(),
            "im": self.coeffs.imag.ravel().tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralField3D":
        shape = tuple(d["shape"])
        re = np.asarray(d["re"], dtype=np.float64).reshape(shape)
        im = np.asarray(d["im"], dtype=np.float64).reshape(shape)
        f = cls(re + 1j * im)
        if f.cutoff != d["lambda3"]:
            raise ValueError("lambda3 does not match the coefficient shape")
        return f


def padded_size3d(L: int) -> int:
    return next_fast_len(3 * L + 1)


def _to_grid(c: np.ndarray, L: int, n: int) -> np.ndarray:
    # Hermitian input, so only k_z >= 0 is passed to the real inverse transform
    m = 2 * L + 1
    s = n // 2 - L
    big = np.zeros((c.shape[0], n, n, L + 1), dtype=np.complex128)
    big[:, s : s + m, s : s + m, :] = c[..., L:]
    big = ifftshift(big, axes=(1, 2))
    half = np.zeros((c.shape[0], n, n, n // 2 + 1), dtype=np.complex128)
    half[..., : L + 1] = big
    return irfftn(half, s=(n, n, n), axes=(1, 2, 3), overwrite_x=True) * n**3


def _from_grid(v: np.ndarray, L: int) -> np.ndarray:
    n = v.shape[-1]
    m = 2 * L + 1
    s = n // 2 - L
    spec = fftshift(rfftn(v, axes=(1, 2, 3))[..., : L + 1], axes=(1, 2)) / n**3
    pos = spec[:, s : s + m, s : s + m, :]  # k_z = 0..L
    out = np.empty(v.shape[:1] + (m, m, m), dtype=np.complex128)
    out[..., L:] = pos
    out[..., :L] = np.conj(pos[:, ::-1, ::-1, :0:-1])
    return out


def _wavenumbers(L: int):
    k = np.arange(-L, L + 1, dtype=np.float64)
    return np.meshgrid(k, k, k, indexing="ij")


def _rhs_coeffs(c: np.ndarray, L: int, n: int, K) -> np.ndarray:
    # one batched transform: u_i, then d_j u_i for j = 0, 1, 2
    stack = np.concatenate([c] + [1j * K[j] * c for j in range(3)])
    g = _to_grid(stack, L, n)
    u = g[:3]
    adv = u[0] * g[3:6] + u[1] * g[6:9] + u[2] * g[9:12]
    return -_from_grid(adv, L)


def rhs3d(field: SpectralField3D) -> SpectralField3D:
    """``-P_L[(u . grad) u]`` from products on a ``>= 3L+1`` grid per axis."""
    if field.ncomp != 3:
        raise ValueError("rhs3d needs a 3-component velocity")
    L = field.cutoff
    return SpectralField3D(_rhs_coeffs(field.coeffs, L, padded_size3d(L), _wavenumbers(L)))


def _flux_div(f: np.ndarray, c: np.ndarray, L: int, n: int, K) -> np.ndarray:
    fv = _to_grid(f, L, n)[0]
    u = _to_grid(c, L, n)
    flux = _from_grid(fv[None] * u, L)
    return -(1j * (K[0] * flux[0] + K[1] * flux[1] + K[2] * flux[2]))[None]


def _rk4(fun, y, dt):
    k1 = fun(y)
    k2 = fun(y + 0.5 * dt * k1)
    k3 = fun(y + 0.5 * dt * k2)
    k4 = fun(y + dt * k3)
    return y + dt / 6 * (k1 + 2 * k2 + 2 * k3 + k4)


def integrate3d(field: SpectralField3D, config: IntegratorConfig) -> list[tuple[float, SpectralField3D]]:
    """RK4 samples ``(t, field)`` every ``sample_interval`` steps and at the end."""
    L = field.cutoff
    n = padded_size3d(L)
    K = _wavenumbers(L)
    dt = config.signed_dt
    c = np.array(field.coeffs)
    out = [(0.0, field)]
    for step in range(1, config.nsteps + 1):
        c = _rk4(lambda y: _rhs_coeffs(y, L, n, K), c, dt)
        m = np.abs(c).max()
        if not np.isfinite(m) or m > BLOWUP:
            raise BlowUpError(step * dt, float(m))
        if step % config.sample_interval == 0 or step == config.nsteps:
            out.append((step * dt, SpectralField3D(c)))
    return out


def from_1d(field: SpectralField1D) -> SpectralField3D:
    """Embed ``u(x)`` as ``(u(x), 0, 0)``, constant in ``y`` and ``z``."""
    L = field.cutoff
    out = np.zeros((3, 2 * L + 1, 2 * L + 1, 2 * L + 1), dtype=np.complex128)
    out[0, :, L, L] = field.full_spectrum()
    return SpectralField3D(out)


def dirichlet_profile(L: int) -> np.ndarray:
    """Coefficients of ``delta_L(y) delta_L(z)``; each 1D kernel has coefficients ``1/2pi``."""
    m = 2 * L + 1
    return np.full((m, m), 1.0 / (2 * np.pi) ** 2, dtype=np.complex128)


def random_profile(L: int, rng: np.random.Generator) -> np.ndarray:
    """Hermitian random coefficients of a real band-limited ``g(y, z)``."""
    m = 2 * L + 1
    g = rng.standard_normal((m, m)) + 1j * rng.standard_normal((m, m))
    g = 0.5 * (g + np.conj(g[::-1, ::-1]))
    return g / m


def factorized_soliton(sol: SolitonSolution | SpectralField1D, profile="uniform") -> SpectralField3D:
    """``u = u_s(x) g(y, z) e_x``.

    ``profile`` is ``"uniform"`` (g = 1), ``"dirichlet"`` (narrowest,
    ``delta_L(y) delta_L(z)``) or a ``(2L+1, 2L+1)`` array of Hermitian
    coefficients of ``g`` at the soliton's cutoff.
    """
    field = sol.field if isinstance(sol, SolitonSolution) else sol
    L = field.cutoff
    m = 2 * L + 1
    if isinstance(profile, str):
        if profile == "uniform":
            g = np.zeros((m, m), dtype=np.complex128)
            g[L, L] = 1.0
        elif profile == "dirichlet":
            g = dirichlet_profile(L)
        else:
            raise ValueError(f"unknown profile {profile!r}")
    else:
        g = np.asarray(profile, dtype=np.complex128)
        if g.shape != (m, m):
            raise ValueError(f"profile cutoff does not match the soliton cutoff {L}")
    out = np.zeros((3, m, m, m), dtype=np.complex128)
    out[0] = field.full_spectrum()[:, None, None] * g[None, :, :]
    return SpectralField3D(out)


@dataclass
class PassiveSeries3D:
    t: np.ndarray
    mass: np.ndarray  # int f d^3x
    momentum: np.ndarray  # int f u d^3x, shape (n, 3)

    def drift(self) -> tuple[float, float]:
        m = np.abs(self.mass - self.mass[0]).max() / max(abs(self.mass[0]), 1e-300)
        p0 = np.linalg.norm(self.momentum[0])
        p = np.linalg.norm(self.momentum - self.momentum[0], axis=1).max() / max(p0, 1e-300)
        return float(m), float(p)


def _integrals3d(f: np.ndarray, c: np.ndarray) -> tuple[float, np.ndarray]:
    vol = (2 * np.pi) ** 3
    L = (f.shape[1] - 1) // 2
    mass = vol * f[0, L, L, L].real
    mom = vol * np.array([np.sum(f[0] * np.conj(c[i])).real for i in range(3)])
    return float(mass), mom


def passive_invariants_3d(u0: SpectralField3D, f0: SpectralField3D, config: IntegratorConfig) -> PassiveSeries3D:
    """Co-evolve ``P_L[f_t + div(f u)] = 0`` with the velocity; report both integrals."""
    if f0.ncomp != 1 or u0.ncomp != 3:
        raise ValueError("need a scalar f and a 3-component u")
    if f0.cutoff != u0.cutoff:
        raise ValueError("f and u must share a cutoff")
    L = u0.cutoff
    n = padded_size3d(L)
    K = _wavenumbers(L)
    dt = config.signed_dt
    y = np.concatenate([np.array(u0.coeffs), np.array(f0.coeffs)])

    def fun(y):
        c, f = y[:3], y[3:]
        return np.concatenate([_rhs_coeffs(c, L, n, K), _flux_div(f, c, L, n, K)])

    ts, ms, ps = [0.0], [], []
    m, p = _integrals3d(y[3:], y[:3])
    ms.append(m)
    ps.append(p)
    for step in range(1, config.nsteps + 1):
        y = _rk4(fun, y, dt)
        if step % config.sample_interval == 0 or step == config.nsteps:
            m, p = _integrals3d(y[3:], y[:3])
            ts.append(step * dt)
            ms.append(m)
            ps.append(p)
    return PassiveSeries3D(np.array(ts), np.array(ms), np.array(ps))
