"""Pure numpy implementations of the kernels in ``_kernels.pyx``.

Same signatures and semantics.  Products go through a zero-padded real
transform of size >= 3L+1, which is exact for quadratic terms.
"""
import numpy as np
from scipy.fft import irfft, next_fast_len, rfft


def padded_size(L):
    return next_fast_len(3 * L + 1, real=True)


def square_half(c):
    c = np.asarray(c, dtype=np.complex128)
    L = c.shape[0] - 1
    n = padded_size(L)
    spec = np.zeros(n // 2 + 1, dtype=np.complex128)
    spec[: L + 1] = c
    u = irfft(spec, n=n) * n
    out = rfft(u * u)[: L + 1] / n
    out[0] = out[0].real
    return out


def triad_sum(c):
    c = np.asarray(c, dtype=np.complex128)
    L = c.shape[0] - 1
    full = np.concatenate([np.conj(c[:0:-1]), c])  # index j <-> k = j - L
    k = np.arange(-L, L + 1)
    k3 = -(k[:, None] + k[None, :])
    ok = np.abs(k3) <= L
    third = np.where(ok, full[np.clip(k3 + L, 0, 2 * L)], 0.0)
    return complex(np.sum(full[:, None] * full[None, :] * third))


def rhs_half(c):
    c = np.asarray(c, dtype=np.complex128)
    k = np.arange(c.shape[0])
    out = -0.5j * k * square_half(c)
    out[0] = 0.0
    return out


def rk4_advance(c, dt, nsteps, blowup):
    h2 = 0.5 * dt
    for n in range(nsteps):
        k1 = rhs_half(c)
        k2 = rhs_half(c + h2 * k1)
        k3 = rhs_half(c + h2 * k2)
        k4 = rhs_half(c + dt * k3)
        c += (dt / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        m = np.abs(c).max()
        if not np.isfinite(m) or m > blowup:
            return n
    return nsteps


def evaluate_many(c, x):
    c = np.asarray(c, dtype=np.complex128)
    x = np.asarray(x, dtype=np.float64)
    k = np.arange(1, c.shape[0])
    out = np.empty(x.shape[0])
    # chunked to keep the phase matrix small
    for start in range(0, x.shape[0], 4096):
        xs = x[start:start + 4096]
        out[start:start + 4096] = c[0].real + 2.0 * (np.exp(1j * np.outer(xs, k)) @ c[1:]).real
    return out
