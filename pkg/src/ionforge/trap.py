"""Linear RF quadrupole trap: species data, Mathieu q and secular frequencies.

Mathieu convention used throughout::

    q = 2 * charge * v_rf / (mass * r0**2 * omega_rf**2)

The radial frequency is the lowest-order pseudopotential result with the
DC a-parameter neglected, ``omega_radial = q * omega_rf / (2 * sqrt(2))``.
The axial frequency comes from the endcap DC potential,
``omega_axial = sqrt(2 * kappa * charge * u_dc / (mass * z0**2))``.
"""

from dataclasses import dataclass, field
import math

from scipy import constants

from .errors import DomainError

# First stability boundary of the Mathieu equation at a = 0.
Q_STABILITY_LIMIT = 0.908

A_PARAMETER_NOTE = "DC a-parameter neglected in radial frequency (lowest-order pseudopotential)"
MATHIEU_CONVENTION = "q = 2*charge*v_rf/(mass*r0^2*omega_rf^2)"


@dataclass(frozen=True)
class Transition:
    label: str
    wavelength: float  # m
    lifetime: float  # s, upper level


@dataclass(frozen=True)
class IonSpecies:
    name: str
    mass: float  # kg
    charge: float  # C
    transitions: tuple = field(default_factory=tuple)

    def __post_init__(self):
        if self.mass <= 0 or self.charge <= 0:
            raise DomainError(f"{self.name}: mass and charge must be positive")
        for t in self.transitions:
            if t.wavelength <= 0:
                raise DomainError(f"{self.name}: transition {t.label} has non-positive wavelength")

    def transition(self, label):
        for t in self.transitions:
            if t.label == label:
                return t
        raise KeyError(label)


# 40Ca+ levels. Lifetimes of the P level (7.1 ns) and D5/2 (1.17 s) are
# standard literature values; the D3/2 lifetime is the 1.08 s design figure.
CA40 = IonSpecies(
    name="40Ca+",
    mass=39.962590863 * constants.atomic_mass - constants.m_e,
    charge=constants.e,
    transitions=(
        Transition("S1/2-P1/2", 396.847e-9, 7.1e-9),
        Transition("S1/2-D3/2", 732.389e-9, 1.08),
        Transition("D3/2-P1/2", 866.214e-9, 7.1e-9),
        Transition("S1/2-D5/2", 729.147e-9, 1.17),
    ),
)

SPECIES = {"40Ca+": CA40, "ca40": CA40}


@dataclass(frozen=True)
class TrapParams:
    """RF drive, endcap DC and geometry of the linear trap (SI units).

    ``r0`` defaults to half the 1.7 mm RF-rod gap and ``z0`` to half the
    10 mm endcap separation.
    """

    v_rf: float = 300.0
    omega_rf: float = 2 * math.pi * 10e6
    r0: float = 0.85e-3
    u_dc: float = 27.3
    z0: float = 5.0e-3
    kappa: float = 0.3

    def validate(self, allow_zero=("v_rf", "u_dc")):
        for name in ("v_rf", "omega_rf", "r0", "u_dc", "z0", "kappa"):
            value = getattr(self, name)
            if value < 0 or (value == 0 and name not in allow_zero):
                raise DomainError(f"trap.{name} must be positive, got {value}")


@dataclass(frozen=True)
class SecularFrequencies:
    omega_radial: float
    omega_axial: float
    q: float
    stable: bool

    @property
    def radial_exceeds_axial(self):
        return self.stable and self.omega_radial > self.omega_axial


def mathieu_q(trap, species=CA40):
    trap.validate()
    return 2 * species.charge * trap.v_rf / (species.mass * trap.r0**2 * trap.omega_rf**2)


def axial_frequency(trap, species=CA40):
    trap.validate()
    return math.sqrt(2 * trap.kappa * species.charge * trap.u_dc / (species.mass * trap.z0**2))


def secular_frequencies(trap, species=CA40):
    """Radial and axial secular frequencies in rad/s.

    When ``q`` is at or beyond the stability limit the radial frequency is
    returned as NaN and ``stable`` is False.
    """
    q = mathieu_q(trap, species)
    omega_axial = axial_frequency(trap, species)
    stable = 0 <= q < Q_STABILITY_LIMIT
    omega_radial = q * trap.omega_rf / (2 * math.sqrt(2)) if stable else math.nan
    return SecularFrequencies(omega_radial, omega_axial, q, stable)


def u_dc_for_axial(omega_axial, trap, species=CA40):
    """Endcap voltage that produces ``omega_axial`` with the given geometry."""
    return omega_axial**2 * species.mass * trap.z0**2 / (2 * trap.kappa * species.charge)


def stability_report(trap, species=CA40, string_threshold=3.0):
    """Summary dictionary of trap operating point.

    The string flag is a heuristic: the chain is taken to sit on the axis
    when the radial/axial ratio exceeds ``string_threshold``.
    """
    if string_threshold <= 1:
        raise DomainError("string_threshold must exceed 1")
    sec = secular_frequencies(trap, species)
    if sec.stable and sec.omega_axial > 0:
        ratio = sec.omega_radial / sec.omega_axial
    else:
        ratio = math.nan
    return {
        "q": sec.q,
        "stable": sec.stable,
        "omega_radial": sec.omega_radial,
        "omega_axial": sec.omega_axial,
        "ratio": ratio,
        "string_phase": bool(sec.stable and ratio > string_threshold),
        "radial_exceeds_axial": sec.radial_exceeds_axial,
        "convention": MATHIEU_CONVENTION,
        "approximation": A_PARAMETER_NOTE,
    }
