"""Truncated Fourier fields on the 2*pi-periodic line.

A field with cutoff ``L`` stores the half spectrum ``u_k``, ``k = 0..L``;
negative modes are the complex conjugates, so every field is real in
physical space by construction.
"""
from __future__ import annotations

import json
from dataclasses import dataclass

import numpy as np
from scipy.fft import irfft, next_fast_len, rfft

from . import backend

__all__ = [
    "SpectralField1D",
    "GridSpec",
    "padded_size",
    "evaluate",
    "quadratic_product",
    "direct_quadratic_product",
    "translate",
    "galilean",
]


def padded_size(L: int) -> int:
    """Smallest FFT-friendly grid size that dealiases a quadratic product."""
    return next_fast_len(3 * L + 1, real=True)


@dataclass(frozen=True)
class GridSpec:
    n: int

    def __post_init__(self):
        if self.n < 1:
            raise ValueError("grid size must be positive")

    @classmethod
    def for_cutoff(cls, L: int) -> "GridSpec":
        return cls(padded_size(L))

    def dealiases(self, L: int) -> bool:
        return self.n >= 3 * L + 1

    @property
    def x(self) -> np.ndarray:
        return 2 * np.pi * np.arange(self.n) / self.n


@dataclass(frozen=True, eq=False)
class SpectralField1D:
    """Real periodic field ``sum_{|k|<=L} u_k exp(ikx)``.

    Treat instances as immutable values; ``coeffs`` is a read-only view.
    """

    coeffs: np.ndarray

    def __post_init__(self):
        c = np.array(self.coeffs, dtype=np.complex128, copy=True).reshape(-1)
        if c.shape[0] < 2:
            raise ValueError("a field needs cutoff L >= 1 (at least 2 coefficients)")
        c[0] = c[0].real
        c.setflags(write=False)
        object.__setattr__(self, "coeffs", c)

    # construction -------------------------------------------------------
    @classmethod
    def zeros(cls, L: int) -> "SpectralField1D":
        return cls(np.zeros(L + 1, dtype=np.complex128))

    @classmethod
    def from_modes(cls, L: int, modes: dict) -> "SpectralField1D":
        """Build from ``{k: u_k}`` with ``0 <= k <= L``."""
        c = np.zeros(L + 1, dtype=np.complex128)
        for k, v in modes.items():
            if not 0 <= k <= L:
                raise ValueError(f"mode {k} outside 0..{L}")
            c[k] = v
        return cls(c)

    @classmethod
    def from_samples(cls, values, L: int) -> "SpectralField1D":
        """Project uniform samples on [0, 2pi) onto modes ``|k| <= L``."""
        values = np.asarray(values, dtype=np.float64)
        n = values.shape[0]
        if n < 2 * L + 1:
            raise ValueError(f"{n} samples cannot resolve cutoff {L}")
        spec = rfft(values) / n
        return cls(spec[: L + 1])

    # basic properties ---------------------------------------------------
    @property
    def cutoff(self) -> int:
        return self.coeffs.shape[0] - 1

    @property
    def mean(self) -> float:
        return float(self.coeffs[0].real)

    def full_spectrum(self) -> np.ndarray:
        """Coefficients for ``k = -L..L`` in increasing order."""
        c = self.coeffs
        return np.concatenate([np.conj(c[:0:-1]), c])

    def __call__(self, x):
        return evaluate(self, x)

    def __add__(self, other: "SpectralField1D") -> "SpectralField1D":
        _same_cutoff(self, other)
        return SpectralField1D(self.coeffs + other.coeffs)

    def __sub__(self, other: "SpectralField1D") -> "SpectralField1D":
        _same_cutoff(self, other)
        return SpectralField1D(self.coeffs - other.coeffs)

    def __neg__(self) -> "SpectralField1D":
        return SpectralField1D(-self.coeffs)

    def scale(self, s: float) -> "SpectralField1D":
        return SpectralField1D(s * self.coeffs)

    def with_mean(self, u0: float) -> "SpectralField1D":
        c = self.coeffs.copy()
        c[0] = u0
        return SpectralField1D(c)

    def max_modulus(self) -> float:
        return float(np.abs(self.coeffs).max())

    def grid_values(self, n: int | None = None) -> np.ndarray:
        """Exact samples on the uniform ``n``-point grid (default: padded size)."""
        L = self.cutoff
        n = padded_size(L) if n is None else n
        if n < 2 * L + 1:
            raise ValueError("grid too coarse for this cutoff")
        spec = np.zeros(n // 2 + 1, dtype=np.complex128)
        spec[: L + 1] = self.coeffs
        return irfft(spec, n=n) * n

    def derivative(self, order: int = 1) -> "SpectralField1D":
        k = np.arange(self.cutoff + 1)
        return SpectralField1D(self.coeffs * (1j * k) ** order)

    # serialization ------------------------------------------------------
    def to_dict(self) -> dict:
        return {
            "lambda": self.cutoff,
            "re": self.coeffs.real.tolist(),
            "im": [0.0] + self.coeffs.imag[1:].tolist(),
        }

    @classmethod
    def from_dict(cls, d: dict) -> "SpectralField1D":
        re = np.asarray(d["re"], dtype=np.float64)
        im = np.asarray(d["im"], dtype=np.float64)
        L = int(d["lambda"])
        if re.shape != (L + 1,) or im.shape != (L + 1,):
            raise ValueError(f"expected {L + 1} real and imaginary parts")
        if im[0] != 0.0:
            raise ValueError("im[0] must be 0 for a real field")
        return cls(re + 1j * im)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, s: str) -> "SpectralField1D":
        return cls.from_dict(json.loads(s))


def _same_cutoff(a: SpectralField1D, b: SpectralField1D):
    if a.cutoff != b.cutoff:
        raise ValueError(f"cutoff mismatch: {a.cutoff} vs {b.cutoff}")


def evaluate(field: SpectralField1D, x):
    """Trigonometric sum at arbitrary points; scalar in, scalar out."""
    xa = np.asarray(x, dtype=np.float64)
    vals = backend.kernels.evaluate_many(field.coeffs, np.ascontiguousarray(xa.reshape(-1)))
    if xa.ndim == 0:
        return float(vals[0])
    return vals.reshape(xa.shape)


def quadratic_product(field: SpectralField1D) -> SpectralField1D:
    """``P_L(u^2)`` through a zero-padded transform of size >= 3L+1."""
    L = field.cutoff
    u = field.grid_values(padded_size(L))
    n = u.shape[0]
    out = rfft(u * u)[: L + 1] / n
    return SpectralField1D(out)


def direct_quadratic_product(field: SpectralField1D) -> SpectralField1D:
    """``P_L(u^2)`` by the explicit O(L^2) truncated convolution (oracle)."""
    f = field.full_spectrum()
    L = field.cutoff
    out = np.zeros(L + 1, dtype=np.complex128)
    for k in range(L + 1):
        # k' from k-L to L keeps both |k'| and |k-k'| inside the band
        kp = np.arange(k - L, L + 1)
        out[k] = np.sum(f[k - kp + L] * f[kp + L])
    return SpectralField1D(out)


def translate(field: SpectralField1D, d: float) -> SpectralField1D:
    """Shift right by ``d``: the result at ``x`` equals the input at ``x - d``."""
    k = np.arange(field.cutoff + 1)
    return SpectralField1D(field.coeffs * np.exp(-1j * k * d))


def galilean(field: SpectralField1D, v: float, t: float = 0.0) -> SpectralField1D:
    """Boost by ``v`` at time ``t``: ``u_0 -> u_0 - v``, ``u_k -> u_k exp(ikvt)``."""
    k = np.arange(field.cutoff + 1)
    c = field.coeffs * np.exp(1j * k * v * t)
    c[0] = field.coeffs[0] - v
    return SpectralField1D(c)
