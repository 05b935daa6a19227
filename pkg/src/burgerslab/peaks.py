"""Locating the soliton peak of a periodic field."""
from __future__ import annotations

import numpy as np

from .spectral import SpectralField1D, evaluate

TWO_PI = 2 * np.pi


class NoPeakError(ValueError):
    """Raised when a field is constant to within 1e-14."""


def polarity(field: SpectralField1D) -> int:
    """+1 if the largest excursion from the mean is upward, -1 if downward."""
    dev = field.grid_values(max(16 * field.cutoff, 64)) - field.mean
    hi, lo = dev.max(), -dev.min()
    return 1 if hi >= lo else -1


def peak_position(field: SpectralField1D, sign: int | None = None) -> float:
    """Position in [0, 2pi) of the largest excursion of ``u - u_0``.

    ``sign`` picks maxima (+1) or minima (-1); by default the larger
    excursion wins and ties go to the smaller ``x``.  The grid argmax on
    16L points is polished by Newton iteration on ``u'``.
    """
    L = field.cutoff
    c = field.coeffs
    if np.abs(c[1:]).max() <= 1e-14:
        raise NoPeakError("field is constant; no peak to locate")
    n = max(16 * L, 64)
    x = TWO_PI * np.arange(n) / n
    dev = field.grid_values(n) - field.mean
    if sign is None:
        sign = 1 if dev.max() >= -dev.min() else -1
    i = int(np.argmax(sign * dev))
    d1 = field.derivative(1)
    d2 = field.derivative(2)
    h = TWO_PI / n
    x0 = x[i]
    xp = x0
    for _ in range(30):
        g = evaluate(d1, xp)
        gg = evaluate(d2, xp)
        if gg == 0:
            break
        step = g / gg
        xn = xp - step
        if abs(xn - x0) > h:  # Newton left the bracketing cell; keep the grid value
            xp = x0
            break
        xp = xn
        if abs(step) < 1e-15:
            break
    return float(xp % TWO_PI)


def unwrap_positions(p: np.ndarray) -> np.ndarray:
    """Nearest-image continuation of periodic positions between samples."""
    return np.unwrap(np.asarray(p, dtype=np.float64), period=TWO_PI)
