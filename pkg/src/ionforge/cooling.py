"""Cooling budget and quantum-jump readout.

Doppler cooling on the dipole transition, sideband lines of the chain,
the metastable-lifetime bottleneck of sideband cooling, photon collection,
and a seeded Monte Carlo of fluorescence-threshold state detection.
"""

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
import math
import warnings

import numpy as np
from scipy import constants, stats

from . import kernels
from .errors import DomainError

# Standard value for the 40Ca+ 397 nm line (not a measured design input).
GAMMA_397 = 2 * math.pi * 20.7e6
DOPPLER_LINEWIDTH_LIMIT = 2 * math.pi * 10e6

# Trials per independently seeded block; fixed so results do not depend on
# how many lanes share the work.
READOUT_BLOCK = 8192


@dataclass(frozen=True)
class CoolingParams:
    gamma_dipole: float = GAMMA_397
    i_sat: float = 100.0  # W/m^2 (10 mW/cm^2)
    d_lifetime: float = 1.08
    repump_factor: float = 1.0

    def __post_init__(self):
        if not (self.gamma_dipole > 0 and self.i_sat > 0 and self.d_lifetime > 0):
            raise DomainError("cooling parameters must be positive")
        if self.repump_factor < 1:
            raise DomainError("repump_factor must be >= 1")


@dataclass(frozen=True)
class ReadoutParams:
    scatter_rate_bright: float = 5e6
    collection_solid_angle: float = 0.25
    quantum_efficiency: float = 0.2
    integration_time: float = 2.5e-3
    dark_rate: float = 400.0
    threshold: int = 10
    seed: int = None

    def __post_init__(self):
        if not 0 < self.collection_solid_angle <= 4 * math.pi:
            raise DomainError("solid angle must lie in (0, 4 pi]")
        if not 0 <= self.quantum_efficiency <= 1:
            raise DomainError("quantum efficiency must lie in [0, 1]")
        if min(self.scatter_rate_bright, self.integration_time, self.dark_rate) < 0:
            raise DomainError("rates and integration time must be non-negative")

    @property
    def bright_mean(self):
        """Expected counts from an ion in the fluorescing state, background included."""
        eff = collection_efficiency(self)
        return (self.scatter_rate_bright * eff + self.dark_rate) * self.integration_time

    @property
    def dark_mean(self):
        return self.dark_rate * self.integration_time

    @classmethod
    def from_means(cls, bright_mean, dark_mean, integration_time=1e-3, **kw):
        """Build parameters whose bright/dark mean counts equal the given values."""
        solid = kw.pop("collection_solid_angle", 0.25)
        qe = kw.pop("quantum_efficiency", 1.0)
        eff = solid / (4 * math.pi) * qe
        dark_rate = dark_mean / integration_time
        scatter = (bright_mean - dark_mean) / (eff * integration_time)
        return cls(scatter, solid, qe, integration_time, dark_rate, **kw)


@dataclass(frozen=True)
class ImagingChain:
    magnification: float = 7.5
    mcp_channel_pitch: float = 12e-6
    # Channels between resolvable photons: three pitches give 36 um.
    min_channel_separation: int = 3

    def __post_init__(self):
        if not (self.magnification > 0 and self.mcp_channel_pitch > 0 and self.min_channel_separation > 0):
            raise DomainError("imaging parameters must be positive")

    @property
    def mcp_separation(self):
        return self.min_channel_separation * self.mcp_channel_pitch


def doppler_limit(params, omega_axial):
    """Doppler temperature (K) and mean axial phonon number.

    T = hbar gamma / (2 k_B); n = gamma / (2 omega_axial).
    """
    if not omega_axial > 0:
        raise DomainError("omega_axial must be positive")
    temperature = constants.hbar * params.gamma_dipole / (2 * constants.k)
    return temperature, params.gamma_dipole / (2 * omega_axial)


def sideband_spectrum(omega_0, chain):
    """Carrier plus first-order red/blue sidebands of every axial mode.

    ``chain`` is a :class:`~ionforge.chain.ChainModes` or a sequence of
    mode frequencies. Returns ``(label, frequency)`` sorted by frequency;
    mode 0 (centre of mass) gives the pair nearest the carrier.
    """
    freqs = getattr(chain, "mode_frequencies", chain)
    freqs = np.atleast_1d(np.asarray(freqs, dtype=float))
    if freqs.size == 0:
        raise DomainError("chain has no modes")
    lines = [("carrier", float(omega_0))]
    for k, w in enumerate(freqs):
        lines.append((f"red_{k}", float(omega_0 - w)))
        lines.append((f"blue_{k}", float(omega_0 + w)))
    return sorted(lines, key=lambda line: line[1])


@dataclass(frozen=True)
class LinewidthCheck:
    passed: bool
    margin: float
    requirement: float


def sideband_resolution_check(laser_linewidth, omega_cm, factor=10.0):
    """Pass iff the laser linewidth is below ``omega_cm / factor``."""
    if not (laser_linewidth > 0 and omega_cm > 0 and factor > 0):
        raise DomainError("linewidth, mode frequency and factor must be positive")
    limit = omega_cm / factor
    return LinewidthCheck(laser_linewidth < limit, omega_cm / laser_linewidth, limit)


def doppler_linewidth_check(laser_linewidth, limit=DOPPLER_LINEWIDTH_LIMIT):
    """Doppler-stage requirement: linewidth below ~10 MHz (angular units)."""
    if not laser_linewidth > 0:
        raise DomainError("linewidth must be positive")
    return LinewidthCheck(laser_linewidth < limit, limit / laser_linewidth, limit)


def phonon_removal_rate(params):
    """Sideband-cooling rate limit (phonons/s) set by the metastable lifetime."""
    return params.repump_factor / params.d_lifetime


def cooling_time(mean_phonons, params):
    return mean_phonons / phonon_removal_rate(params)


def collection_efficiency(readout):
    return readout.collection_solid_angle / (4 * math.pi) * readout.quantum_efficiency


def analytic_error_rates(bright_mean, dark_mean, threshold):
    """Poisson-tail misclassification probabilities for "bright iff counts > threshold"."""
    return {
        "bright_as_dark": float(stats.poisson.cdf(threshold, bright_mean)),
        "dark_as_bright": float(stats.poisson.sf(threshold, dark_mean)),
    }


@dataclass
class ReadoutResult:
    trials: int
    threshold: int
    bright_mean: float
    dark_mean: float
    histogram: np.ndarray
    histogram_bright: np.ndarray
    histogram_dark: np.ndarray
    n_bright: int
    n_dark: int
    bright_as_dark: int
    dark_as_bright: int
    analytic: dict = field(default_factory=dict)

    @property
    def bright_error_rate(self):
        return self.bright_as_dark / self.n_bright if self.n_bright else math.nan

    @property
    def dark_error_rate(self):
        return self.dark_as_bright / self.n_dark if self.n_dark else math.nan

    @property
    def classified_bright(self):
        return self.n_bright - self.bright_as_dark + self.dark_as_bright

    def histogram_rows(self):
        """(count, frequency) rows, frequency as fraction of trials."""
        return [(k, c / self.trials) for k, c in enumerate(self.histogram)]

    def summary(self):
        return {
            "trials": self.trials,
            "threshold": self.threshold,
            "bright_mean_counts": self.bright_mean,
            "dark_mean_counts": self.dark_mean,
            "n_bright": self.n_bright,
            "n_dark": self.n_dark,
            "bright_error_rate": self.bright_error_rate,
            "dark_error_rate": self.dark_error_rate,
            "analytic_bright_error_rate": self.analytic["bright_as_dark"],
            "analytic_dark_error_rate": self.analytic["dark_as_bright"],
        }


def _run_block(args):
    seed_seq, n, p_bright, bright_mean, dark_mean, threshold = args
    rng = np.random.Generator(np.random.PCG64(seed_seq))
    is_bright = rng.random(n) < p_bright
    u = rng.random(n)
    means = np.where(is_bright, bright_mean, dark_mean)
    counts = kernels.poisson_inverse_cdf(u, means)
    called_bright = counts > threshold
    return counts, is_bright, called_bright


def simulate_readout(state_probabilities, readout, trials, lanes=1):
    """Monte Carlo of threshold fluorescence detection.

    Parameters
    ----------
    state_probabilities : float or sequence of two floats
        Probability of the bright state |0> or the pair (p_bright, p_dark).
    readout : ReadoutParams
        Must carry an explicit ``seed``.
    trials : int
    lanes : int
        Worker threads. Trials are split into fixed-size blocks, each with
        its own child seed, so the result is identical for any lane count.

    Returns
    -------
    ReadoutResult
    """
    if np.ndim(state_probabilities) == 0:
        p_bright = float(state_probabilities)
        p_dark = 1.0 - p_bright
    else:
        p_bright, p_dark = (float(p) for p in state_probabilities)
    if min(p_bright, p_dark) < 0 or abs(p_bright + p_dark - 1) > 1e-9:
        raise DomainError("state probabilities must be non-negative and sum to 1")
    if readout.seed is None:
        raise DomainError("simulate_readout needs an explicit seed")
    trials = int(trials)
    if trials < 1:
        raise DomainError("trials must be >= 1")

    bright_mean, dark_mean = readout.bright_mean, readout.dark_mean
    threshold = readout.threshold
    upper = bright_mean + 10 * math.sqrt(bright_mean) + 10
    if threshold < 0 or threshold > upper:
        warnings.warn(f"threshold {threshold} outside plausible count range [0, {upper:.0f}]", RuntimeWarning, stacklevel=2)

    n_blocks = -(-trials // READOUT_BLOCK)
    children = np.random.SeedSequence(readout.seed).spawn(n_blocks)
    sizes = [READOUT_BLOCK] * (n_blocks - 1) + [trials - READOUT_BLOCK * (n_blocks - 1)]
    jobs = [(children[k], sizes[k], p_bright, bright_mean, dark_mean, threshold) for k in range(n_blocks)]
    if lanes > 1:
        with ThreadPoolExecutor(max_workers=lanes) as pool:
            parts = list(pool.map(_run_block, jobs))
    else:
        parts = [_run_block(job) for job in jobs]

    counts = np.concatenate([p[0] for p in parts])
    is_bright = np.concatenate([p[1] for p in parts])
    called = np.concatenate([p[2] for p in parts])
    size = int(counts.max()) + 1
    return ReadoutResult(
        trials=trials,
        threshold=threshold,
        bright_mean=bright_mean,
        dark_mean=dark_mean,
        histogram=np.bincount(counts, minlength=size),
        histogram_bright=np.bincount(counts[is_bright], minlength=size),
        histogram_dark=np.bincount(counts[~is_bright], minlength=size),
        n_bright=int(is_bright.sum()),
        n_dark=int((~is_bright).sum()),
        bright_as_dark=int((is_bright & ~called).sum()),
        dark_as_bright=int((~is_bright & called).sum()),
        analytic=analytic_error_rates(bright_mean, dark_mean, threshold),
    )


def imaging_min_separation(chain=None):
    """Smallest resolvable ion separation in the object plane (m)."""
    chain = chain or ImagingChain()
    return chain.mcp_separation / chain.magnification


def imaging_resolvable(ion_spacing, chain=None):
    return imaging_min_separation(chain) < ion_spacing
