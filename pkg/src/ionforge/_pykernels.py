"""Pure-numpy versions of the compiled kernels in ``_ckernels.pyx``.

Each function has the same signature and semantics as its compiled twin.
``poisson_inverse_cdf`` performs the identical floating-point sequence so
that Monte Carlo histograms do not depend on which backend is loaded.
"""

import numpy as np

BACKEND = "python"

MAX_POISSON_MEAN = 700.0


def rotate_pairs(amps, lower, upper, cos_half, sin_half, phase):
    a = amps[lower]
    b = amps[upper]
    phase = complex(phase)
    amps[lower] = cos_half * a - 1j * sin_half * phase * b
    amps[upper] = -1j * sin_half * phase.conjugate() * a + cos_half * b


def coulomb_system(u):
    u = np.asarray(u, dtype=np.float64)
    d = u[:, None] - u[None, :]
    np.fill_diagonal(d, np.inf)
    inv2 = np.sign(d) / d**2
    res = u - inv2.sum(axis=1)
    inv3 = 1.0 / np.abs(d) ** 3
    hess = -2.0 * inv3
    np.fill_diagonal(hess, 1.0 + 2.0 * inv3.sum(axis=1))
    return res, hess


def poisson_inverse_cdf(uniform, mean):
    uniform = np.asarray(uniform, dtype=np.float64)
    mean = np.asarray(mean, dtype=np.float64)
    if mean.size and (mean.min() < 0 or mean.max() > MAX_POISSON_MEAN):
        raise ValueError(f"Poisson mean outside [0, {MAX_POISSON_MEAN}]")
    k = np.zeros(uniform.shape, dtype=np.int64)
    p = np.exp(-mean)
    cdf = p.copy()
    active = (uniform > cdf) & (p > 0.0)
    while active.any():
        idx = np.flatnonzero(active)
        k[idx] += 1
        p[idx] *= mean[idx] / k[idx]
        cdf[idx] += p[idx]
        active[idx] = (uniform[idx] > cdf[idx]) & (p[idx] > 0.0)
    return k
