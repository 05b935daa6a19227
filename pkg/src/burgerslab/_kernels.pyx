# cython: language_level=3
"""Compiled hot loops for half-spectrum Burgers fields.

All routines take the stored half spectrum ``c[0..L]`` of a real field and
treat ``c[-k] = conj(c[k])`` implicitly.  Products use the direct truncated
convolution, which is exactly the Galerkin product (no aliasing at all).
"""
import numpy as np
cimport numpy as cnp
from libc.math cimport sqrt, cos, sin, isfinite

cnp.import_array()


cdef inline double complex _conj(double complex z) noexcept nogil:
    return z.real - 1j * z.imag


cdef void _square(const double complex[:] c, double complex[:] out, Py_ssize_t L) noexcept nogil:
    # out_k = sum_{j=0}^{k} c_j c_{k-j} + 2 sum_{m=1}^{L-k} conj(c_m) c_{m+k}
    cdef Py_ssize_t k, j
    cdef double complex s
    for k in range(L + 1):
        s = 0
        for j in range(k + 1):
            s = s + c[j] * c[k - j]
        for j in range(1, L - k + 1):
            s = s + 2.0 * (_conj(c[j]) * c[j + k])
        out[k] = s
    out[0] = out[0].real


def square_half(const double complex[:] c):
    """Truncated square P_L(u^2) as a half spectrum."""
    cdef Py_ssize_t L = c.shape[0] - 1
    out = np.empty(L + 1, dtype=np.complex128)
    cdef double complex[:] ov = out
    with nogil:
        _square(c, ov, L)
    return out


def triad_sum(const double complex[:] c):
    """Enumerate ordered triads k1 + k2 + k3 = 0 with all |k_i| <= L.

    Returns the complex sum of c_{k1} c_{k2} c_{k3}; the caller takes the
    real part after checking it.
    """
    cdef Py_ssize_t L = c.shape[0] - 1
    cdef Py_ssize_t k1, k2, k3
    cdef double complex s = 0, a, b, d
    with nogil:
        for k1 in range(-L, L + 1):
            a = c[k1] if k1 >= 0 else _conj(c[-k1])
            for k2 in range(-L, L + 1):
                k3 = -k1 - k2
                if k3 > L or k3 < -L:
                    continue
                b = c[k2] if k2 >= 0 else _conj(c[-k2])
                d = c[k3] if k3 >= 0 else _conj(c[-k3])
                s = s + a * b * d
    return s


cdef void _rhs(const double complex[:] c, double complex[:] sq, double complex[:] out,
               Py_ssize_t L) noexcept nogil:
    cdef Py_ssize_t k
    _square(c, sq, L)
    out[0] = 0
    for k in range(1, L + 1):
        out[k] = (-0.5j * k) * sq[k]


def rhs_half(const double complex[:] c):
    cdef Py_ssize_t L = c.shape[0] - 1
    sq = np.empty(L + 1, dtype=np.complex128)
    out = np.empty(L + 1, dtype=np.complex128)
    cdef double complex[:] sv = sq
    cdef double complex[:] ov = out
    with nogil:
        _rhs(c, sv, ov, L)
    return out


def rk4_advance(double complex[:] c, double dt, Py_ssize_t nsteps, double blowup):
    """Advance ``c`` in place by ``nsteps`` classical RK4 steps.

    Returns the number of completed steps; fewer than ``nsteps`` means a
    coefficient became non-finite or exceeded ``blowup`` in modulus.
    """
    cdef Py_ssize_t L = c.shape[0] - 1
    cdef Py_ssize_t n, k
    cdef double h6 = dt / 6.0, h2 = 0.5 * dt
    cdef double m
    cdef double complex[:] sq = np.empty(L + 1, dtype=np.complex128)
    cdef double complex[:] k1 = np.empty(L + 1, dtype=np.complex128)
    cdef double complex[:] k2 = np.empty(L + 1, dtype=np.complex128)
    cdef double complex[:] k3 = np.empty(L + 1, dtype=np.complex128)
    cdef double complex[:] k4 = np.empty(L + 1, dtype=np.complex128)
    cdef double complex[:] tmp = np.empty(L + 1, dtype=np.complex128)
    cdef bint bad = False
    cdef Py_ssize_t done = nsteps
    with nogil:
        for n in range(nsteps):
            _rhs(c, sq, k1, L)
            for k in range(L + 1):
                tmp[k] = c[k] + h2 * k1[k]
            _rhs(tmp, sq, k2, L)
            for k in range(L + 1):
                tmp[k] = c[k] + h2 * k2[k]
            _rhs(tmp, sq, k3, L)
            for k in range(L + 1):
                tmp[k] = c[k] + dt * k3[k]
            _rhs(tmp, sq, k4, L)
            bad = False
            for k in range(L + 1):
                c[k] = c[k] + h6 * (k1[k] + 2.0 * k2[k] + 2.0 * k3[k] + k4[k])
                m = sqrt(c[k].real * c[k].real + c[k].imag * c[k].imag)
                if not isfinite(m) or m > blowup:
                    bad = True
            if bad:
                done = n
                break
    return done


def evaluate_many(const double complex[:] c, const double[:] x):
    """u(x_j) = Re c_0 + 2 Re sum_k c_k exp(i k x_j), by angle recurrence."""
    cdef Py_ssize_t L = c.shape[0] - 1
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t j, k
    cdef double complex w, z, s
    out = np.empty(n, dtype=np.float64)
    cdef double[:] ov = out
    with nogil:
        for j in range(n):
            w = cos(x[j]) + 1j * sin(x[j])
            z = w
            s = 0
            for k in range(1, L + 1):
                s = s + c[k] * z
                # resynchronise periodically to bound recurrence error
                if k % 32 == 0:
                    z = cos((k + 1) * x[j]) + 1j * sin((k + 1) * x[j])
                else:
                    z = z * w
            ov[j] = c[0].real + 2.0 * s.real
    return out
