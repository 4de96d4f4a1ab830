"""Single-ion addressing optics: Gaussian crosstalk, deflector steering, budgets."""

from dataclasses import dataclass
import math
import warnings

from .errors import DomainError

RAYLEIGH_FACTOR = 1.22
WEDGE_ANGLE = math.radians(2.0)


@dataclass(frozen=True)
class BeamGeometry:
    """Addressing beam. ``spot_diameter`` is the 1/e^2 intensity diameter."""

    spot_diameter: float = 10e-6
    wavelength: float = 397e-9
    input_beam_diameter: float = 3e-3
    focal_length: float = 30e-3
    tilt_wedge: float = WEDGE_ANGLE

    def __post_init__(self):
        for name in ("spot_diameter", "wavelength", "input_beam_diameter", "focal_length", "tilt_wedge"):
            if not getattr(self, name) > 0:
                raise DomainError(f"optics.{name} must be positive")

    @property
    def diffraction_limited_spot(self):
        """1/e^2 focal diameter of an ideal Gaussian: 4 lambda f / (pi D_in)."""
        return 4 * self.wavelength * self.focal_length / (math.pi * self.input_beam_diameter)

    def check_diffraction(self):
        ok = self.spot_diameter >= self.diffraction_limited_spot
        if not ok:
            warnings.warn(
                f"spot {self.spot_diameter:.3g} m below diffraction bound {self.diffraction_limited_spot:.3g} m",
                RuntimeWarning,
                stacklevel=2,
            )
        return ok


@dataclass(frozen=True)
class DeflectorSpec:
    max_angle: float = 9e-3
    max_voltage: float = 3000.0
    switch_time: float = 10e-9

    def __post_init__(self):
        if self.max_angle < 0 or not self.max_voltage > 0 or not self.switch_time > 0:
            raise DomainError("deflector parameters out of range")

    def angle(self, voltage):
        """Linear response, clipped at the rated voltage."""
        v = max(-self.max_voltage, min(self.max_voltage, voltage))
        return self.max_angle * v / self.max_voltage

    def voltage_for_angle(self, angle):
        if abs(angle) > self.max_angle:
            raise DomainError(f"angle {angle} beyond +/-{self.max_angle} rad")
        return self.max_voltage * angle / self.max_angle


def crosstalk(ion_spacing, beam):
    """Relative intensity of the addressing beam at the neighbouring ion.

    A Gaussian with 1/e^2 diameter D gives I(d)/I(0) = exp(-8 d^2 / D^2).
    """
    d = float(ion_spacing)
    D = beam.spot_diameter if isinstance(beam, BeamGeometry) else float(beam)
    if d < 0 or not D > 0:
        raise DomainError("spacing must be >= 0 and spot diameter > 0")
    return math.exp(-8 * d * d / (D * D))


def max_spot_for_crosstalk(ion_spacing, epsilon):
    """Largest 1/e^2 spot diameter that keeps neighbour crosstalk at ``epsilon``."""
    if not 0 < epsilon < 1:
        raise DomainError("epsilon must lie in (0, 1)")
    if not ion_spacing > 0:
        raise DomainError("ion spacing must be positive")
    return ion_spacing * math.sqrt(8 / math.log(1 / epsilon))


def resolvable_spots(beam, deflector):
    """Rayleigh-resolved spots across the full deflection range (floored)."""
    spot_angle = RAYLEIGH_FACTOR * beam.wavelength / beam.input_beam_diameter
    # Small epsilon keeps exact ratios from flooring one short.
    return int(math.floor(2 * deflector.max_angle / spot_angle + 1e-9))


def addressable_ions(deflector, focal_length, ion_spacing):
    """Ion positions reachable within the deflector's scan of the focal plane."""
    if not focal_length > 0 or not ion_spacing > 0:
        raise DomainError("focal length and spacing must be positive")
    span = 2 * deflector.max_angle * focal_length
    return int(math.floor(span / ion_spacing + 1e-9)) + 1


def pulse_area_error_budget(intensity_stability, timing_resolution, pulse_width):
    """Fractional pulse-area error, root-sum-square of intensity and timing terms."""
    if not pulse_width > 0:
        raise DomainError("pulse width must be positive")
    return math.hypot(intensity_stability, timing_resolution / pulse_width)
