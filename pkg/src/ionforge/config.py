"""Flat ``key = value`` run configuration with ``[section]`` headers.

Keys may be written fully qualified (``trap.z0 = 5e-3``) anywhere, or bare
under a section header. Frequencies in the file are in Hz; everything
handed to the physics modules is converted to SI angular units.
"""

from dataclasses import dataclass, field
import math

from .chain import ChainConfig
from .cooling import CoolingParams, ImagingChain, ReadoutParams
from .errors import ConfigError
from .optics import BeamGeometry, DeflectorSpec
from .trap import SPECIES, TrapParams

SCHEMA_VERSION = 1
TWO_PI = 2 * math.pi


def _positive(v):
    return v > 0


def _nonneg(v):
    return v >= 0


def _unit_open(v):
    return 0 < v < 1


def _unit_closed(v):
    return 0 <= v <= 1


# key -> (type, default, check, description of the allowed range)
SCHEMA = {
    "schema_version": (int, SCHEMA_VERSION, lambda v: v == SCHEMA_VERSION, f"== {SCHEMA_VERSION}"),
    "species": (str, "40Ca+", lambda v: v in SPECIES, f"one of {sorted(SPECIES)}"),
    "seed": (int, None, _nonneg, ">= 0"),
    "format": (str, "json", lambda v: v in ("json", "csv"), "json or csv"),
    "trap.v_rf": (float, 300.0, _nonneg, ">= 0"),
    "trap.rf_frequency": (float, 10e6, _positive, "> 0"),
    "trap.r0": (float, 0.85e-3, _positive, "> 0"),
    "trap.u_dc": (float, 27.3, _nonneg, ">= 0"),
    "trap.z0": (float, 5.0e-3, _positive, "> 0"),
    "trap.kappa": (float, 0.3, _positive, "> 0"),
    "trap.string_threshold": (float, 3.0, lambda v: v > 1, "> 1"),
    "chain.n_ions": (int, 2, lambda v: v >= 1, ">= 1"),
    "chain.alt_axial_frequency": (float, 100e3, _positive, "> 0"),
    "chain.tol": (float, 1e-10, _positive, "> 0"),
    "chain.wavelength": (float, 732e-9, _positive, "> 0"),
    "chain.projection_angle": (float, 0.0, lambda v: 0 <= v <= math.pi / 2, "in [0, pi/2]"),
    "gate.script": (str, "", None, ""),
    "gate.area_error": (float, 0.0, lambda v: abs(v) < 1, "|e| < 1"),
    "optics.spot_diameter": (float, 10e-6, _positive, "> 0"),
    "optics.wavelength": (float, 397e-9, _positive, "> 0"),
    "optics.input_beam_diameter": (float, 3e-3, _positive, "> 0"),
    "optics.focal_length": (float, 30e-3, _positive, "> 0"),
    "optics.ion_spacing": (float, 20e-6, _positive, "> 0"),
    "optics.crosstalk_spec": (float, 1e-3, _unit_open, "in (0, 1)"),
    "optics.max_angle": (float, 9e-3, _nonneg, ">= 0"),
    "optics.max_voltage": (float, 3000.0, _positive, "> 0"),
    "optics.switch_time": (float, 10e-9, _positive, "> 0"),
    "optics.intensity_stability": (float, 1e-3, _nonneg, ">= 0"),
    "optics.timing_resolution": (float, 1e-9, _nonneg, ">= 0"),
    "optics.pulse_width": (float, 10e-6, _positive, "> 0"),
    "cooling.dipole_linewidth": (float, 20.7e6, _positive, "> 0"),
    "cooling.i_sat": (float, 100.0, _positive, "> 0"),
    "cooling.d_lifetime": (float, 1.08, _positive, "> 0"),
    "cooling.repump_factor": (float, 1.0, lambda v: v >= 1, ">= 1"),
    "cooling.sideband_laser_linewidth": (float, 10e3, _positive, "> 0"),
    "cooling.doppler_laser_linewidth": (float, 1e6, _positive, "> 0"),
    "cooling.resolution_factor": (float, 10.0, _positive, "> 0"),
    "cooling.carrier_wavelength": (float, 732e-9, _positive, "> 0"),
    "readout.scatter_rate_bright": (float, 5e6, _nonneg, ">= 0"),
    "readout.solid_angle": (float, 0.25, lambda v: 0 < v <= 4 * math.pi, "in (0, 4 pi]"),
    "readout.quantum_efficiency": (float, 0.2, _unit_closed, "in [0, 1]"),
    "readout.integration_time": (float, 2.5e-3, _nonneg, ">= 0"),
    "readout.dark_rate": (float, 400.0, _nonneg, ">= 0"),
    "readout.threshold": (int, 10, _nonneg, ">= 0"),
    "readout.trials": (int, 100000, lambda v: v >= 1, ">= 1"),
    "readout.p_bright": (float, 0.5, _unit_closed, "in [0, 1]"),
    "readout.lanes": (int, 1, lambda v: v >= 1, ">= 1"),
    "imaging.magnification": (float, 7.5, _positive, "> 0"),
    "imaging.mcp_channel_pitch": (float, 12e-6, _positive, "> 0"),
    "imaging.min_channel_separation": (int, 3, lambda v: v >= 1, ">= 1"),
    "imaging.expected_spacing": (float, 25e-6, _positive, "> 0"),
}

SECTIONS = ("trap", "chain", "gate", "optics", "cooling", "readout", "imaging")


def _convert(key, typ, raw, line):
    text = raw.strip()
    if typ is str:
        if len(text) >= 2 and text[0] == text[-1] and text[0] in "\"'":
            text = text[1:-1]
        return text
    if key == "seed" and text.lower() in ("", "none"):
        return None
    try:
        if typ is int:
            value = float(text)
            if not value.is_integer():
                raise ValueError
            return int(value)
        value = float(text)
    except ValueError:
        raise ConfigError(f"expected {typ.__name__}, got {text!r}", key=key, line=line) from None
    if not math.isfinite(value):
        raise ConfigError("value must be finite", key=key, line=line)
    return value


@dataclass
class RunConfig:
    values: dict = field(default_factory=lambda: {k: spec[1] for k, spec in SCHEMA.items()})

    def __getitem__(self, key):
        return self.values[key]

    def with_overrides(self, **kw):
        values = dict(self.values)
        for key, value in kw.items():
            key = key.replace("__", ".")
            if key not in SCHEMA:
                raise ConfigError("unknown key", key=key)
            values[key] = value
        cfg = RunConfig(values)
        cfg.validate()
        return cfg

    def validate(self):
        for key, (typ, _, check, desc) in SCHEMA.items():
            value = self.values[key]
            if value is None:
                continue
            if check is not None and not check(value):
                raise ConfigError(f"value {value!r} out of range ({desc})", key=key)

    def require_seed(self):
        if self.values["seed"] is None:
            raise ConfigError("randomised output requires an explicit seed (config 'seed' or --seed)", key="seed")
        return self.values["seed"]

    # -- domain objects -------------------------------------------------------

    @property
    def species(self):
        return SPECIES[self["species"]]

    def trap_params(self):
        return TrapParams(
            v_rf=self["trap.v_rf"],
            omega_rf=TWO_PI * self["trap.rf_frequency"],
            r0=self["trap.r0"],
            u_dc=self["trap.u_dc"],
            z0=self["trap.z0"],
            kappa=self["trap.kappa"],
        )

    def chain_config(self, omega_axial):
        return ChainConfig(self["chain.n_ions"], omega_axial, self.species)

    def beam(self):
        return BeamGeometry(
            spot_diameter=self["optics.spot_diameter"],
            wavelength=self["optics.wavelength"],
            input_beam_diameter=self["optics.input_beam_diameter"],
            focal_length=self["optics.focal_length"],
        )

    def deflector(self):
        return DeflectorSpec(self["optics.max_angle"], self["optics.max_voltage"], self["optics.switch_time"])

    def cooling_params(self):
        return CoolingParams(
            gamma_dipole=TWO_PI * self["cooling.dipole_linewidth"],
            i_sat=self["cooling.i_sat"],
            d_lifetime=self["cooling.d_lifetime"],
            repump_factor=self["cooling.repump_factor"],
        )

    def readout_params(self, seed=None):
        return ReadoutParams(
            scatter_rate_bright=self["readout.scatter_rate_bright"],
            collection_solid_angle=self["readout.solid_angle"],
            quantum_efficiency=self["readout.quantum_efficiency"],
            integration_time=self["readout.integration_time"],
            dark_rate=self["readout.dark_rate"],
            threshold=self["readout.threshold"],
            seed=seed,
        )

    def imaging_chain(self):
        return ImagingChain(
            self["imaging.magnification"], self["imaging.mcp_channel_pitch"], self["imaging.min_channel_separation"]
        )


def parse_config(text):
    """Parse config text into a validated :class:`RunConfig` with defaults filled in."""
    values = {k: spec[1] for k, spec in SCHEMA.items()}
    section = None
    seen = {}
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("["):
            if not line.endswith("]"):
                raise ConfigError("unterminated section header", line=lineno)
            section = line[1:-1].strip()
            if section not in SECTIONS:
                raise ConfigError(f"unknown section [{section}]", line=lineno)
            continue
        if "=" not in line:
            raise ConfigError("expected 'key = value'", line=lineno)
        key, raw_value = (part.strip() for part in line.split("=", 1))
        if section and "." not in key:
            key = f"{section}.{key}"
        if key not in SCHEMA:
            raise ConfigError("unknown key", key=key, line=lineno)
        if key in seen:
            raise ConfigError(f"duplicate key (first set on line {seen[key]})", key=key, line=lineno)
        seen[key] = lineno
        typ, _, check, desc = SCHEMA[key]
        value = _convert(key, typ, raw_value, lineno)
        if value is not None and check is not None and not check(value):
            raise ConfigError(f"value {value!r} out of range ({desc})", key=key, line=lineno)
        values[key] = value
    return RunConfig(values)


def _format_value(value):
    if value is None:
        return "none"
    if isinstance(value, float):
        return repr(value)
    return str(value)


def serialize_config(cfg):
    """Canonical text form: every key, top-level keys first, then sections."""
    lines = []
    for key, value in cfg.values.items():
        if "." not in key:
            lines.append(f"{key} = {_format_value(value)}")
    for section in SECTIONS:
        lines.append("")
        lines.append(f"[{section}]")
        prefix = section + "."
        for key, value in cfg.values.items():
            if key.startswith(prefix):
                lines.append(f"{key[len(prefix):]} = {_format_value(value)}")
    return "\n".join(lines) + "\n"


def load_config(path):
    if path is None:
        return RunConfig()
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as exc:
        raise ConfigError(f"cannot read config {path}: {exc.strerror}") from None
    except UnicodeDecodeError:
        raise ConfigError(f"config {path} is not UTF-8") from None
    return parse_config(text)
