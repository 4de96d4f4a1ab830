# cython: boundscheck=False, wraparound=False, cdivision=True
"""Compiled inner loops. Signatures mirror :mod:`ionforge._pykernels`."""

import numpy as np
cimport numpy as cnp
from libc.math cimport exp, fabs

cnp.import_array()

BACKEND = "cython"

# exp(-mean) underflows past this; readout means are orders of magnitude lower.
cdef double MAX_POISSON_MEAN_C = 700.0
MAX_POISSON_MEAN = MAX_POISSON_MEAN_C


def rotate_pairs(double complex[::1] amps, const long long[::1] lower,
                 const long long[::1] upper, const double[::1] cos_half,
                 const double[::1] sin_half, double complex phase):
    """In-place two-level rotation on each (lower[k], upper[k]) amplitude pair."""
    cdef Py_ssize_t k, n = lower.shape[0]
    cdef double complex a, b, c, s
    cdef double complex ephi = phase
    cdef double complex emphi = phase.conjugate()
    cdef double complex mi = -1j
    for k in range(n):
        a = amps[lower[k]]
        b = amps[upper[k]]
        c = cos_half[k]
        s = sin_half[k]
        amps[lower[k]] = c * a + mi * s * ephi * b
        amps[upper[k]] = mi * s * emphi * a + c * b


def coulomb_system(const double[::1] u):
    """Force residual and Hessian of the dimensionless axial chain potential.

    Potential is sum(u_i**2)/2 + sum_{i<j} 1/|u_i - u_j|.
    """
    cdef Py_ssize_t n = u.shape[0]
    cdef Py_ssize_t i, j
    cdef double d, ad, inv2, inv3
    res_arr = np.empty(n, dtype=np.float64)
    hess_arr = np.zeros((n, n), dtype=np.float64)
    cdef double[::1] res = res_arr
    cdef double[:, ::1] hess = hess_arr
    for i in range(n):
        res[i] = u[i]
        hess[i, i] = 1.0
    for i in range(n):
        for j in range(i + 1, n):
            d = u[i] - u[j]
            ad = fabs(d)
            inv2 = 1.0 / (d * d)
            inv3 = inv2 / ad
            if d > 0:
                res[i] -= inv2
                res[j] += inv2
            else:
                res[i] += inv2
                res[j] -= inv2
            hess[i, i] += 2.0 * inv3
            hess[j, j] += 2.0 * inv3
            hess[i, j] = -2.0 * inv3
            hess[j, i] = -2.0 * inv3
    return res_arr, hess_arr


def poisson_inverse_cdf(const double[::1] uniform, const double[::1] mean):
    """Poisson deviates by sequential inverse-CDF search from k = 0."""
    cdef Py_ssize_t i, n = uniform.shape[0]
    cdef long long k
    cdef double p, cdf, mu, x
    out_arr = np.empty(n, dtype=np.int64)
    cdef long long[::1] out = out_arr
    for i in range(n):
        if mean[i] < 0 or mean[i] > MAX_POISSON_MEAN_C:
            raise ValueError(f"Poisson mean {mean[i]} outside [0, {MAX_POISSON_MEAN_C}]")
    with nogil:
        for i in range(n):
            mu = mean[i]
            x = uniform[i]
            k = 0
            p = exp(-mu)
            cdf = p
            while x > cdf and p > 0.0:
                k += 1
                p *= mu / k
                cdf += p
            out[i] = k
    return out_arr
