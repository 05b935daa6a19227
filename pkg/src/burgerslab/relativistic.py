"""Pressureless relativistic fluid identities on analytic test fields.

Signature ``(+,-,-,-)``; ``c = 1``.  Fields are closures returning the
contravariant four-velocity ``U^mu(t, x, y, z)`` with shape ``(4, ...)``.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np

__all__ = [
    "HBARC_MEV_FM",
    "METRIC",
    "FourVelocityField",
    "constant_boost",
    "stationary_shear",
    "rarefaction",
    "perturbed",
    "dust_residual",
    "proper_time_map",
    "burgers_equivalence",
    "vorticity",
    "vorticity_checks",
    "pfaffian",
    "levi_civita_contraction",
    "reynolds_estimate",
    "to_fm",
]

HBARC_MEV_FM = 197.327
METRIC = np.diag([1.0, -1.0, -1.0, -1.0])

_LENGTH_IN_FM = {"fm": 1.0, "m": 1e15, "km": 1e18, "cm": 1e13}


@dataclass(frozen=True)
class FourVelocityField:
    """Analytic ``U^mu`` with ``U . U = 1``."""

    name: str
    func: Callable

    def __call__(self, t, x, y=0.0, z=0.0) -> np.ndarray:
        t, x, y, z = np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (t, x, y, z)))
        return np.asarray(self.func(t, x, y, z))

    def normalization_error(self, t, x, y=0.0, z=0.0) -> float:
        U = self(t, x, y, z)
        return float(np.max(np.abs(U[0] ** 2 - np.sum(U[1:] ** 2, axis=0) - 1.0)))

    def validate(self, t, x, y=0.0, z=0.0, tol: float = 1e-10) -> None:
        U = self(t, x, y, z)
        if self.normalization_error(t, x, y, z) > tol:
            raise ValueError(f"{self.name}: U.U deviates from 1 by more than {tol}")
        if np.any(U[0] < 1.0 - tol):
            raise ValueError(f"{self.name}: U^0 < 1, not future-directed timelike")


def _lift(ux, uy, uz):
    return np.stack([np.sqrt(1.0 + ux**2 + uy**2 + uz**2), ux, uy, uz])


def constant_boost(theta: float) -> FourVelocityField:
    """Uniform motion along x with rapidity ``theta``."""
    s = np.sinh(theta)
    return FourVelocityField(f"boost({theta})", lambda t, x, y, z: _lift(s + 0 * x, 0 * x, 0 * x))


def stationary_shear(f: Callable = np.sin) -> FourVelocityField:
    """``U = (sqrt(1+f(y)^2), f(y), 0, 0)``: layers sliding along x."""
    return FourVelocityField("shear", lambda t, x, y, z: _lift(f(y), 0 * y, 0 * y))


def rarefaction_label(t, x, iters: int = 60):
    """Invert ``x = x0 (1 + t / sqrt(1 + x0^2))`` for the starting point ``x0``."""
    t = np.asarray(t, dtype=np.float64)
    x = np.asarray(x, dtype=np.float64)
    x0 = x / (1.0 + t)
    for _ in range(iters):
        g = np.sqrt(1.0 + x0**2)
        F = x0 * (1.0 + t / g) - x
        dF = 1.0 + t / g**3
        step = F / dF
        x0 = x0 - step
        if np.all(np.abs(step) <= 1e-15 * (1.0 + np.abs(x0))):
            break
    return x0


def rarefaction() -> FourVelocityField:
    """Dust with ``U^x = x0`` on straight worldlines from ``(0, x0)``.

    In proper time the velocity is ``u = x / (1 + tau)``.
    """
    return FourVelocityField(
        "rarefaction", lambda t, x, y, z: _lift(rarefaction_label(t, x), 0 * x, 0 * x)
    )


def perturbed(base: FourVelocityField, eps: float, omega: float = 1.0) -> FourVelocityField:
    """``U^x -> U^x + eps sin(omega t)``, then renormalised."""

    def func(t, x, y, z):
        U = base.func(t, x, y, z)
        return _lift(U[1] + eps * np.sin(omega * t), U[2], U[3])

    return FourVelocityField(f"{base.name}+{eps}", func)


# derivatives ---------------------------------------------------------------

def _partials(U: FourVelocityField, pts: tuple, h: float, order: int = 2) -> np.ndarray:
    """``dU[alpha, nu] = d_alpha U^nu`` by central differences, shape (4, 4, ...)."""
    if order not in (2, 4):
        raise ValueError("order must be 2 or 4")
    out = []
    for a in range(4):
        def shifted(s):
            q = list(pts)
            q[a] = q[a] + s
            return U(*q)

        if order == 2:
            d = (shifted(h) - shifted(-h)) / (2 * h)
        else:
            d = (-shifted(2 * h) + 8 * shifted(h) - 8 * shifted(-h) + shifted(-2 * h)) / (12 * h)
        out.append(d)
    return np.stack(out)


def _points(t, x, y=0.0, z=0.0):
    return tuple(np.broadcast_arrays(*(np.asarray(a, dtype=np.float64) for a in (t, x, y, z))))


def dust_residual(U: FourVelocityField, t, x, y=0.0, z=0.0, h: float = 1e-3, order: int = 2) -> float:
    """``max |U^alpha d_alpha U^nu|`` over the sample points and ``nu``."""
    pts = _points(t, x, y, z)
    u = U(*pts)
    dU = _partials(U, pts, h, order)
    acc = np.einsum("a...,an...->n...", u, dU)
    return float(np.max(np.abs(acc)))


def burgers_equivalence(U: FourVelocityField, t, x, y=0.0, z=0.0, h: float = 1e-3, order: int = 2) -> dict:
    """Residual of ``d_tau U + (U . grad) U`` with ``d_tau = U^0 d_t``.

    Also reports ``max |U^0 - sqrt(1 + |U|^2)|``.
    """
    pts = _points(t, x, y, z)
    u = U(*pts)
    dU = _partials(U, pts, h, order)
    d_tau = u[0] * dU[0, 1:]
    adv = np.einsum("j...,jn...->n...", u[1:], dU[1:, 1:])
    res = d_tau + adv
    lift = np.abs(u[0] - np.sqrt(1.0 + np.sum(u[1:] ** 2, axis=0)))
    return {"residual": float(np.max(np.abs(res))), "u0_mismatch": float(np.max(lift))}


@dataclass
class ProperTimePaths:
    t: np.ndarray  # (n_steps+1,)
    x: np.ndarray  # (n_steps+1, n_paths, 3)
    tau: np.ndarray  # (n_steps+1, n_paths)
    normalization: np.ndarray  # max |U.U - 1| along each path
    truncated: np.ndarray  # bool per path: left the domain


def proper_time_map(U: FourVelocityField, t_final: float, seeds, n_steps: int = 1000,
                    bounds: Optional[tuple] = None) -> ProperTimePaths:
    """Integrate ``dx/dt = U/U^0``, ``dtau/dt = 1/U^0`` from ``seeds`` at ``t = 0``.

    ``seeds`` has shape ``(n, 3)`` (or ``(n,)`` for x only).  Paths leaving
    ``bounds = (lo, hi)`` (per-coordinate arrays) are frozen and flagged.
    """
    s = np.asarray(seeds, dtype=np.float64)
    if s.ndim == 1:
        s = np.column_stack([s, np.zeros_like(s), np.zeros_like(s)])
    npath = s.shape[0]
    h = t_final / n_steps

    def rates(t, p):
        u = U(t, p[:, 0], p[:, 1], p[:, 2])
        return np.column_stack([u[1] / u[0], u[2] / u[0], u[3] / u[0], 1.0 / u[0]]), u

    y = np.column_stack([s, np.zeros(npath)])
    xs = [y[:, :3].copy()]
    taus = [y[:, 3].copy()]
    norm = np.zeros(npath)
    alive = np.ones(npath, dtype=bool)
    t = 0.0
    for _ in range(n_steps):
        k1, u = rates(t, y)
        norm = np.maximum(norm, np.abs(u[0] ** 2 - np.sum(u[1:] ** 2, axis=0) - 1.0))
        k2, _ = rates(t + h / 2, y + h / 2 * k1)
        k3, _ = rates(t + h / 2, y + h / 2 * k2)
        k4, _ = rates(t + h, y + h * k3)
        yn = y + h / 6 * (k1 + 2 * k2 + 2 * k3 + k4)
        if bounds is not None:
            lo, hi = (np.asarray(b, dtype=np.float64) for b in bounds)
            out = np.any((yn[:, :3] < lo) | (yn[:, :3] > hi), axis=1)
            alive &= ~out
        y = np.where(alive[:, None], yn, y)
        t += h
        xs.append(y[:, :3].copy())
        taus.append(y[:, 3].copy())
    _, u = rates(t, y)
    norm = np.maximum(norm, np.abs(u[0] ** 2 - np.sum(u[1:] ** 2, axis=0) - 1.0))
    return ProperTimePaths(h * np.arange(n_steps + 1), np.array(xs), np.array(taus), norm, ~alive)


# vorticity -----------------------------------------------------------------

def vorticity(U: FourVelocityField, t, x, y=0.0, z=0.0, h: float = 1e-3, order: int = 2) -> np.ndarray:
    """``omega_{mu nu} = d_mu U_nu - d_nu U_mu`` with indices lowered; shape (4, 4, ...)."""
    pts = _points(t, x, y, z)
    dU = _partials(U, pts, h, order)
    g = np.diag(METRIC)
    dlow = dU * g[None, :].reshape((1, 4) + (1,) * (dU.ndim - 2))
    return dlow - np.swapaxes(dlow, 0, 1)


def pfaffian(w: np.ndarray):
    """``w01 w23 - w02 w13 + w03 w12`` for antisymmetric 4x4 (leading axes)."""
    return w[0, 1] * w[2, 3] - w[0, 2] * w[1, 3] + w[0, 3] * w[1, 2]


def _levi_civita() -> np.ndarray:
    e = np.zeros((4, 4, 4, 4))
    for p in itertools.permutations(range(4)):
        inv = sum(1 for i in range(4) for j in range(i + 1, 4) if p[i] > p[j])
        e[p] = -1.0 if inv % 2 else 1.0
    return e


_EPS = _levi_civita()


def levi_civita_contraction(w: np.ndarray):
    """``eps^{mu nu rho sigma} w_{mu nu} w_{rho sigma}`` with ``eps^{0123} = 1``; equals ``8 Pf``."""
    return np.einsum("abcd,ab...,cd...->...", _EPS, w, w)


@dataclass
class VorticityReport:
    transversality: float  # max |U^mu omega_{mu nu}|
    pfaffian: np.ndarray
    determinant: np.ndarray
    contraction: np.ndarray
    rank: np.ndarray
    max_abs: float


def vorticity_checks(U: FourVelocityField, t, x, y=0.0, z=0.0, h: float = 1e-3,
                     order: int = 2, rank_tol: float = 1e-6) -> VorticityReport:
    pts = _points(t, x, y, z)
    w = vorticity(U, *pts, h=h, order=order)
    u = U(*pts)
    trans = np.einsum("m...,mn...->n...", u, w)
    wm = np.moveaxis(w.reshape(4, 4, -1), -1, 0)  # (npts, 4, 4)
    det = np.linalg.det(wm)
    sv = np.linalg.svd(wm, compute_uv=False)
    scale = np.maximum(sv[:, :1], 1e-300)
    rank = np.where(sv[:, 0] > rank_tol, np.sum(sv > rank_tol * scale, axis=1), 0)
    return VorticityReport(
        transversality=float(np.max(np.abs(trans))),
        pfaffian=pfaffian(w).reshape(-1),
        determinant=det,
        contraction=levi_civita_contraction(w).reshape(-1),
        rank=rank,
        max_abs=float(np.max(np.abs(w))),
    )


def random_antisymmetric(n: int, rng: np.random.Generator) -> np.ndarray:
    a = rng.standard_normal((n, 4, 4))
    return a - np.swapaxes(a, 1, 2)


# Reynolds estimate ---------------------------------------------------------

def to_fm(value: float, unit: str = "fm") -> float:
    try:
        return float(value) * _LENGTH_IN_FM[unit]
    except KeyError:
        raise ValueError(f"unknown length unit {unit!r}") from None


def reynolds_estimate(T_mev: float, L_fm: float, eta_over_s: float, L_ref_fm: Optional[float] = None) -> tuple[float, float]:
    """``(Re_local, Re_scaled)``.

    ``Re_local = T L_ref / (hbar c * eta/s)`` is the reference-system value
    and ``Re_scaled = (L / L_ref) Re_local``.  With ``L_ref`` omitted the
    reference length is ``L`` itself.
    """
    L_ref_fm = L_fm if L_ref_fm is None else L_ref_fm
    for name, v in (("T", T_mev), ("L", L_fm), ("eta/s", eta_over_s), ("L_ref", L_ref_fm)):
        if not v > 0:
            raise ValueError(f"{name} must be positive, got {v}")
    re_local = T_mev * L_ref_fm / (HBARC_MEV_FM * eta_over_s)
    return re_local, (L_fm / L_ref_fm) * re_local
