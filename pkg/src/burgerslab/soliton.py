"""Static solitons of the truncated system and related constructions.

The static condition with ``u_0 = 1`` is the fixed-point problem

    u_k = -1/2 sum_{k', k-k' != 0} u_{k-k'} u_{k'},   0 < |k| <= L,

solved by normalised iteration ``f <- g(f) / max g(f)`` and recovered as
``u_k = alpha f_k`` with ``alpha = 1 / max g(f)``.
"""
from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass

import numpy as np
from scipy.fft import irfft, rfft
from scipy.linalg import solve_circulant
from scipy.optimize import least_squares

from . import backend
from .invariants import energy, energy_total, hamiltonian, lagrange_multiplier
from .peaks import peak_position
from .spectral import SpectralField1D, evaluate, galilean, padded_size, quadratic_product, translate

__all__ = [
    "NonConvergenceError",
    "DegenerateSeedError",
    "CompletenessError",
    "FitError",
    "SolitonSolution",
    "FitParams",
    "CirculantBasis",
    "iteration_map",
    "solve_static",
    "static_residual",
    "fixed_point_residual",
    "make_traveling",
    "fit_empirical",
    "empirical_model",
    "energy_scaling",
    "double_soliton_seed",
    "basis_matrix",
    "fwhm",
]

# direct convolution beats the FFT up to about this cutoff
DIRECT_MAX = 128


class NonConvergenceError(RuntimeError):
    def __init__(self, iterations: int, change: float):
        super().__init__(f"no convergence after {iterations} iterations (last change {change:.3e})")
        self.iterations = iterations
        self.change = change


class DegenerateSeedError(ValueError):
    """The normalising maximum of the iteration map vanished or is not finite."""


class CompletenessError(ArithmeticError):
    def __init__(self, min_eig: float):
        super().__init__(f"soliton circulant is singular (min |eigenvalue| {min_eig:.3e})")
        self.min_eig = min_eig


class FitError(RuntimeError):
    def __init__(self, message: str, residual: float):
        super().__init__(f"{message} (residual {residual:.3e})")
        self.residual = residual


def _square(c: np.ndarray) -> np.ndarray:
    L = c.shape[0] - 1
    if backend.compiled is not None and L <= DIRECT_MAX:
        return backend.compiled.square_half(c)
    n = padded_size(L)
    spec = np.zeros(n // 2 + 1, dtype=np.complex128)
    spec[: L + 1] = c
    u = irfft(spec, n=n) * n
    return rfft(u * u)[: L + 1] / n


def iteration_map(f: np.ndarray) -> np.ndarray:
    """``g_k = -1/2 sum_{k', k-k' != 0} f_{k-k'} f_{k'}`` for ``k = 1..L``; ``g_0 = 0``."""
    c = np.array(f, dtype=np.complex128)
    c[0] = 0.0
    g = -0.5 * _square(c)
    g[0] = 0.0
    return g


def _normaliser(g: np.ndarray, real: bool) -> float:
    # the maximum over k = -L..L; for real seeds g_{-k} = g_k
    return float(g[1:].real.max()) if real else float(np.abs(g[1:]).max())


def _prescale(f: np.ndarray, real: bool) -> np.ndarray:
    """Rescale a seed onto the normalisation the map produces.

    The map is invariant under real rescaling of ``f``, so only the first
    change is affected.  For ``f = t f*`` with ``f*`` a normalised fixed point,
    ``t = N(g) <f, f> / <g, f>``, which makes a converged seed stop at once.
    """
    g = iteration_map(f)
    num = _normaliser(g, real) * float(np.vdot(f[1:], f[1:]).real)
    den = float(np.vdot(f[1:], g[1:]).real)
    if den != 0 and np.isfinite(num / den) and num / den != 0:
        return f / (num / den)
    return f / np.abs(f).max()


def _seed_vector(L: int, seed) -> np.ndarray:
    f = np.zeros(L + 1, dtype=np.complex128)
    if seed is None:
        f[1:] = 1.0
        return f
    s = np.asarray(seed, dtype=np.complex128).reshape(-1)
    if s.shape[0] == L:
        f[1:] = s
    elif s.shape[0] == L + 1:
        f[1:] = s[1:]
    else:
        raise ValueError(f"seed needs {L} (k=1..L) or {L + 1} entries, got {s.shape[0]}")
    if not np.all(np.isfinite(f)):
        raise DegenerateSeedError("seed has non-finite entries")
    if not np.any(f[1:] != 0):
        raise DegenerateSeedError("seed is zero")
    return f


@dataclass(frozen=True)
class SolitonSolution:
    """Converged static soliton with ``u_0 = 1``.

    ``E``, ``H`` and ``lam`` are measured in the zero-mean-flow frame, where
    the soliton travels at ``-lam``.
    """

    field: SpectralField1D
    residual: float
    iterations: int
    change: float
    E: float
    H: float
    lam: float
    alpha: float

    @property
    def cutoff(self) -> int:
        return self.field.cutoff

    @property
    def coeffs(self) -> np.ndarray:
        return self.field.coeffs

    @property
    def E_total(self) -> float:
        return energy_total(self.field)

    def to_dict(self) -> dict:
        return {
            "field": self.field.to_dict(),
            "residual": self.residual,
            "iterations": self.iterations,
            "change": self.change,
            "E": self.E,
            "E_total": self.E_total,
            "H": self.H,
            "lambda_multiplier": self.lam,
            "alpha": self.alpha,
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_dict(cls, d: dict) -> "SolitonSolution":
        return cls(
            field=SpectralField1D.from_dict(d["field"]),
            residual=float(d["residual"]),
            iterations=int(d["iterations"]),
            change=float(d["change"]),
            E=float(d["E"]),
            H=float(d["H"]),
            lam=float(d["lambda_multiplier"]),
            alpha=float(d["alpha"]),
        )


def static_residual(field: SpectralField1D) -> float:
    """``max_k |(k/2) [P_L(u^2)]_k|``: the full time derivative, all terms kept."""
    q = quadratic_product(field).coeffs
    k = np.arange(field.cutoff + 1)
    return float(np.abs(0.5 * k * q).max())


def fixed_point_residual(field: SpectralField1D) -> float:
    """``max_k |u_k u_0 + 1/2 sum_{k', k-k' != 0} u_{k-k'} u_{k'}|`` over ``k >= 1``."""
    c = field.coeffs
    g = iteration_map(c)
    return float(np.abs(c[1:] * c[0].real - g[1:]).max())


def solve_static(L: int, seed=None, tol: float = 1e-12, max_iter: int = 100_000,
                 center: bool = True) -> SolitonSolution:
    """Static soliton at cutoff ``L`` from ``seed`` (default all ones).

    ``seed`` holds ``f_k`` for ``k = 1..L`` (a length ``L+1`` vector is also
    accepted, its ``k = 0`` entry ignored).  Real seeds are normalised by the
    signed maximum of the map, complex ones by the maximum modulus.
    Iteration stops once ``max_k |f_new - f| < tol``.
    """
    if L < 1:
        raise ValueError("cutoff must be >= 1")
    if not tol > 0:
        raise ValueError("tol must be positive")
    f = _seed_vector(L, seed)
    real = bool(np.all(f.imag == 0))
    f = _prescale(f, real)

    change = np.inf
    it = 0
    while it < max_iter:
        g = iteration_map(f)
        m = _normaliser(g, real)
        if m == 0 or not np.isfinite(m):
            raise DegenerateSeedError(f"normalising maximum is {m} at iteration {it}")
        fn = g / m
        change = float(np.abs(fn - f).max())
        f = fn
        it += 1
        if change < tol:
            break
    else:
        raise NonConvergenceError(it, change)

    alpha = 1.0 / _normaliser(iteration_map(f), real)
    c = alpha * f
    c[0] = 1.0
    field = SpectralField1D(c)
    if center:
        field = translate(field, peak_position(field))
    c = np.array(field.coeffs)
    if np.abs(c.imag).max() < 1e-9:
        c = c.real.astype(np.complex128)
    field = SpectralField1D(c)

    moving = field.with_mean(0.0)
    E, H = energy(moving), hamiltonian(moving)
    return SolitonSolution(
        field=field,
        residual=static_residual(field),
        iterations=it,
        change=change,
        E=E,
        H=H,
        lam=lagrange_multiplier(E, H),
        alpha=float(alpha),
    )


def make_traveling(sol: SolitonSolution | SpectralField1D, sigma: float) -> SpectralField1D:
    """Scale by ``sigma`` and boost to ``u_0 = 0``; the result moves at ``-sigma``."""
    field = sol.field if isinstance(sol, SolitonSolution) else sol
    scaled = field.scale(sigma)
    return galilean(scaled, scaled.mean, 0.0)


# empirical fit -------------------------------------------------------------

@dataclass(frozen=True)
class FitParams:
    """``u_k ~ a + b sin(2 pi k / (L d) + c)`` for ``k = 1..L``."""

    cutoff: int
    a: float
    b: float
    c: float
    d: float
    residual: float

    def model(self, k) -> np.ndarray:
        return empirical_model(np.asarray(k, dtype=np.float64), self.cutoff, self.a, self.b, self.c, self.d)

    def csv_row(self) -> list:
        return [self.cutoff, self.a, self.b, self.c, self.d, self.residual]

    @staticmethod
    def csv_header() -> list:
        return ["lambda", "a", "b", "c", "d", "residual"]

    def to_csv(self, header: bool = True) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        if header:
            w.writerow(self.csv_header())
        w.writerow([self.cutoff] + [repr(float(v)) for v in self.csv_row()[1:]])
        return buf.getvalue()


def empirical_model(k, L: int, a: float, b: float, c: float, d: float):
    return a + b * np.sin(2 * np.pi * k / (L * d) + c)


def fit_empirical(sol: SolitonSolution | SpectralField1D, p0=None) -> FitParams:
    """Levenberg-Marquardt fit of the real, centred coefficients ``u_1..u_L``."""
    field = sol.field if isinstance(sol, SolitonSolution) else sol
    c = field.coeffs
    if np.abs(c.imag).max() > 1e-9:
        raise ValueError("fit needs real coefficients; centre the soliton first")
    L = field.cutoff
    k = np.arange(1, L + 1, dtype=np.float64)
    y = c.real[1:]
    if p0 is None:
        p0 = (-0.84 / L, 0.80 / L, 4.95, 4.32)

    def resid(p):
        return empirical_model(k, L, *p) - y

    res = least_squares(resid, p0, method="lm", xtol=1e-15, ftol=1e-15, gtol=1e-15, max_nfev=20000)
    rnorm = float(np.linalg.norm(res.fun))
    if not res.success or not np.all(np.isfinite(res.x)):
        raise FitError(f"fit did not converge: {res.message}", rnorm)
    a, b, cc, d = (float(v) for v in res.x)
    return FitParams(L, a, b, cc, d, rnorm)


def energy_scaling(lams, sigma: float = 1.0, solutions: dict | None = None) -> list[dict]:
    """Rest-frame ``E_total`` of the ``sigma``-scaled soliton and ``E_total * L`` per cutoff."""
    rows = []
    for L in lams:
        sol = solutions[L] if solutions and L in solutions else solve_static(int(L))
        e = energy_total(make_traveling(sol, sigma))
        rows.append({"lambda": int(L), "E_total": e, "E_total_times_lambda": e * int(L)})
    return rows


def double_soliton_seed(sol: SolitonSolution, d: float) -> np.ndarray:
    """Seed ``sol + translate(sol, d)`` restricted to ``k = 1..L``."""
    c = sol.field.coeffs + translate(sol.field, d).coeffs
    return np.array(c[1:])


def fwhm(field: SpectralField1D, n: int | None = None) -> float:
    """Full width at half maximum of the main excursion from the mean."""
    L = field.cutoff
    n = n or max(64 * L, 1024)
    x0 = peak_position(field)
    xs = x0 + 2 * np.pi * (np.arange(n) - n // 2) / n
    dev = evaluate(field, xs) - field.mean
    j = n // 2
    half = 0.5 * dev[j]

    def crossing(step):
        i = j
        while 0 < i + step < n and abs(dev[i + step]) > abs(half):
            i += step
        i2 = i + step
        if not 0 <= i2 < n:
            return xs[i]
        # linear interpolation between the bracketing samples
        w = (dev[i] - half) / (dev[i] - dev[i2])
        return xs[i] + w * (xs[i2] - xs[i])

    return float(crossing(1) - crossing(-1))


# circulant completeness ----------------------------------------------------

@dataclass
class CirculantBasis:
    """Translates ``u_s(x - x_j)``, ``x_j = 2 pi j / (2L+1)``, as a basis of band-limited fields."""

    soliton: SpectralField1D
    nodes: np.ndarray
    first_column: np.ndarray
    eigenvalues: np.ndarray

    @property
    def size(self) -> int:
        return self.nodes.shape[0]

    @property
    def min_eigenvalue(self) -> float:
        return float(np.abs(self.eigenvalues).min())

    def dense(self) -> np.ndarray:
        x = self.nodes
        return evaluate(self.soliton, x[:, None] - x[None, :])

    def expand(self, u: SpectralField1D) -> np.ndarray:
        """Coefficients ``a_j`` with ``sum_j a_j u_s(x_i - x_j) = u(x_i)``."""
        b = evaluate(u, self.nodes)
        return np.real(solve_circulant(self.first_column, b))

    def reconstruct(self, a: np.ndarray, x) -> np.ndarray:
        x = np.asarray(x, dtype=np.float64)
        out = np.zeros(x.shape)
        for aj, xj in zip(a, self.nodes):
            out += aj * evaluate(self.soliton, x - xj)
        return out


def basis_matrix(sol: SolitonSolution | SpectralField1D, rtol: float = 1e-12) -> CirculantBasis:
    """Circulant ``C_jk = u_s(x_j - x_k)`` and its eigenvalues from one DFT.

    Raises :class:`CompletenessError` when an eigenvalue is below
    ``rtol`` times the largest.
    """
    field = sol.field if isinstance(sol, SolitonSolution) else sol
    L = field.cutoff
    n = 2 * L + 1
    x = 2 * np.pi * np.arange(n) / n
    col = evaluate(field, x)
    row = evaluate(field, -x)
    # eigenvalues of a circulant are the DFT of its first row
    eig = n * np.fft.ifft(row)
    basis = CirculantBasis(field, x, col, eig)
    if basis.min_eigenvalue <= rtol * np.abs(eig).max():
        raise CompletenessError(basis.min_eigenvalue)
    return basis
