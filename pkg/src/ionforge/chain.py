"""Axial ion-chain mechanics: equilibrium, normal modes, Lamb-Dicke factors.

Positions are solved in dimensionless units ``u = z / length_scale`` where
the potential reads ``sum(u_i**2)/2 + sum_{i<j} 1/|u_i - u_j|``.
"""

from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy import constants

from . import kernels
from .errors import ConvergenceError, DomainError, PreconditionError
from .trap import CA40

DEFAULT_TOL = 1e-10


@dataclass(frozen=True)
class ChainConfig:
    n_ions: int
    omega_axial: float
    species: object = CA40

    def __post_init__(self):
        if int(self.n_ions) != self.n_ions or self.n_ions < 1:
            raise DomainError(f"n_ions must be a positive integer, got {self.n_ions}")
        if not self.omega_axial > 0:
            raise DomainError(f"omega_axial must be positive, got {self.omega_axial}")


@dataclass(frozen=True)
class ChainModes:
    length_scale: float
    u: np.ndarray
    positions: np.ndarray
    omega_axial: float
    eigenvalues: np.ndarray = field(default=None)
    mode_vectors: np.ndarray = field(default=None)
    residual: float = 0.0

    @property
    def n_ions(self):
        return len(self.u)

    @property
    def mode_frequencies(self):
        return np.sqrt(self.eigenvalues) * self.omega_axial

    @property
    def min_spacing(self):
        """Smallest adjacent gap in metres, or None for a single ion."""
        if self.n_ions < 2:
            return None
        return float(np.min(np.diff(self.positions)))


@dataclass(frozen=True)
class LambDicke:
    eta: float
    wavevector: float
    projection_angle: float
    mode_index: int = 0
    no_axial_coupling: bool = False


def length_scale(omega_axial, species=CA40):
    """Characteristic spacing ``(q^2 / (4 pi eps0 m w^2))**(1/3)`` in metres."""
    if not omega_axial > 0:
        raise DomainError(f"omega_axial must be positive, got {omega_axial}")
    return (species.charge**2 / (4 * math.pi * constants.epsilon_0 * species.mass * omega_axial**2)) ** (1 / 3)


def _initial_guess(n):
    if n == 1:
        return np.zeros(1)
    half = 0.5 * n**0.9
    return np.linspace(-half, half, n)


def _potential(u):
    d = np.abs(u[:, None] - u[None, :])
    iu = np.triu_indices(len(u), 1)
    return 0.5 * np.dot(u, u) + np.sum(1.0 / d[iu])


def solve_equilibrium(n, tol=DEFAULT_TOL, max_iter=200):
    """Dimensionless equilibrium positions of ``n`` ions.

    Damped Newton on the force balance, with backtracking on the potential
    energy. If Newton stalls, plain gradient descent takes a few hundred
    steps before Newton resumes.

    Returns
    -------
    u : ndarray
        Sorted positions, symmetrised about zero.
    residual : float
        Max absolute force residual at ``u``.
    """
    if int(n) != n or n < 1:
        raise DomainError(f"n_ions must be a positive integer, got {n}")
    if tol <= 0:
        raise DomainError("tol must be positive")
    u = _initial_guess(int(n))
    res, hess = kernels.coulomb_system(u)
    for _ in range(max_iter):
        err = np.max(np.abs(res))
        if err < tol:
            break
        energy = _potential(u)
        step = np.linalg.solve(hess, -res)
        lam = 1.0
        while lam > 1e-6:
            trial = u + lam * step
            if np.all(np.diff(trial) > 0) and _potential(trial) <= energy + 1e-14 * abs(energy):
                break
            lam *= 0.5
        else:
            trial = _gradient_descent(u, 500)
        u = trial
        res, hess = kernels.coulomb_system(u)
    else:
        raise ConvergenceError(f"equilibrium for {n} ions did not converge", residuals=res)

    # Enforce the reflection symmetry that the exact solution has.
    u = 0.5 * (u - u[::-1])
    res, _ = kernels.coulomb_system(u)
    err = float(np.max(np.abs(res)))
    if err >= tol:
        raise ConvergenceError(f"equilibrium for {n} ions did not converge", residuals=res)
    return u, err


def _gradient_descent(u, steps):
    u = u.copy()
    rate = 0.05
    for _ in range(steps):
        res, _ = kernels.coulomb_system(u)
        trial = u - rate * res
        if np.all(np.diff(trial) > 0):
            u = trial
        else:
            rate *= 0.5
    return u


def equilibrium_positions(cfg, tol=DEFAULT_TOL):
    ell = length_scale(cfg.omega_axial, cfg.species)
    u, err = solve_equilibrium(cfg.n_ions, tol)
    return ChainModes(length_scale=ell, u=u, positions=u * ell, omega_axial=cfg.omega_axial, residual=err)


def axial_normal_modes(chain, tol=DEFAULT_TOL):
    """Attach eigenvalues (ascending) and orthonormal mode vectors to ``chain``.

    Columns of ``mode_vectors`` are the modes; the first is the
    centre-of-mass mode with eigenvalue exactly 1.
    """
    res, hess = kernels.coulomb_system(np.asarray(chain.u, dtype=np.float64))
    if np.max(np.abs(res)) >= tol:
        raise PreconditionError("positions are not a converged equilibrium")
    evals, evecs = np.linalg.eigh(hess)
    # Fix sign so each mode has a positive first nonzero component.
    for k in range(evecs.shape[1]):
        col = evecs[:, k]
        pivot = col[np.argmax(np.abs(col) > 1e-12)]
        if pivot < 0:
            evecs[:, k] = -col
    return ChainModes(
        length_scale=chain.length_scale,
        u=chain.u,
        positions=chain.positions,
        omega_axial=chain.omega_axial,
        eigenvalues=evals,
        mode_vectors=evecs,
        residual=chain.residual,
    )


def chain_modes(cfg, tol=DEFAULT_TOL):
    return axial_normal_modes(equilibrium_positions(cfg, tol), tol)


def min_spacing(cfg, tol=DEFAULT_TOL):
    """Smallest adjacent ion gap in metres; None means "no spacing" (N=1)."""
    return equilibrium_positions(cfg, tol).min_spacing


def lamb_dicke_cm(cfg, wavelength, projection_angle=0.0):
    """Lamb-Dicke parameter of the centre-of-mass mode.

    eta = k cos(angle) sqrt(hbar / (2 N m omega_axial)). At exactly
    pi/2 there is no axial projection; eta is 0 and a warning is issued.
    """
    if not wavelength > 0:
        raise DomainError("wavelength must be positive")
    if not 0 <= projection_angle <= math.pi / 2:
        raise DomainError("projection_angle must lie in [0, pi/2]")
    k = 2 * math.pi / wavelength
    if math.isclose(projection_angle, math.pi / 2, rel_tol=0, abs_tol=1e-15):
        warnings.warn("beam orthogonal to trap axis: no axial coupling", RuntimeWarning, stacklevel=2)
        return LambDicke(0.0, k, projection_angle, 0, no_axial_coupling=True)
    x0 = math.sqrt(constants.hbar / (2 * cfg.n_ions * cfg.species.mass * cfg.omega_axial))
    return LambDicke(k * math.cos(projection_angle) * x0, k, projection_angle, 0)
