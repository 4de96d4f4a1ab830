"""Report assembly and serialisation.

A report is an ordered mapping of sections, each an ordered list of
:class:`Entry` rows carrying a value and a unit. JSON output keeps that
order and writes floats with 12 significant digits; CSV output writes one
table per section.
"""

from dataclasses import dataclass
from importlib import resources
import io
import json
import math

import numpy as np

from . import chain as chain_mod
from . import cooling, dynamics, optics, trap
from .config import SCHEMA_VERSION
from .errors import DomainError, IonForgeError

TWO_PI = 2 * math.pi
TARGET_IONS = 20
NO_SPACING = "no spacing"


@dataclass(frozen=True)
class Entry:
    key: str
    value: object
    unit: str


class Report:
    def __init__(self, kind):
        self.kind = kind
        self.sections = {}

    def section(self, name):
        return _Section(self.sections.setdefault(name, []))

    def get(self, section, key):
        for e in self.sections[section]:
            if e.key == key:
                return e.value
        raise KeyError(f"{section}.{key}")

    def to_dict(self):
        return {
            "schema_version": SCHEMA_VERSION,
            "report": self.kind,
            "sections": {
                name: {e.key: {"value": e.value, "unit": e.unit} for e in entries}
                for name, entries in self.sections.items()
            },
        }


class _Section:
    def __init__(self, entries):
        self._entries = entries

    def add(self, key, value, unit):
        if isinstance(value, np.generic):
            value = value.item()
        self._entries.append(Entry(key, value, unit))


class SectionError(IonForgeError):
    """Wraps a module error with the report section it came from."""

    def __init__(self, section, exc):
        super().__init__(f"[{section}] {exc}")
        self.section = section
        self.exit_code = getattr(exc, "exit_code", 1)


def _in_section(name, fn, *args):
    try:
        return fn(*args)
    except IonForgeError as exc:
        raise SectionError(name, exc) from exc


# --- sections -----------------------------------------------------------------


def trap_section(cfg, report):
    params = cfg.trap_params()
    info = trap.stability_report(params, cfg.species, cfg["trap.string_threshold"])
    s = report.section("trap")
    s.add("q", info["q"], "1")
    s.add("stable", info["stable"], "bool")
    s.add("omega_radial", info["omega_radial"], "rad/s")
    s.add("f_radial", info["omega_radial"] / TWO_PI, "Hz")
    s.add("omega_axial", info["omega_axial"], "rad/s")
    s.add("f_axial", info["omega_axial"] / TWO_PI, "Hz")
    s.add("radial_axial_ratio", info["ratio"], "1")
    s.add("string_phase", info["string_phase"], "bool")
    s.add("r0", params.r0, "m")
    s.add("z0", params.z0, "m")
    s.add("mathieu_convention", info["convention"], "text")
    s.add("approximation", info["approximation"], "text")
    return info


def chain_section(cfg, report, omega_axial):
    s = report.section("chain")
    tol = cfg["chain.tol"]
    ccfg = cfg.chain_config(omega_axial)
    modes = chain_mod.chain_modes(ccfg, tol)
    s.add("n_ions", ccfg.n_ions, "count")
    s.add("f_axial", omega_axial / TWO_PI, "Hz")
    s.add("length_scale", modes.length_scale, "m")
    for i, z in enumerate(modes.positions):
        s.add(f"position_{i}", z, "m")
    for k, w in enumerate(modes.mode_frequencies):
        s.add(f"mode_frequency_{k}", w / TWO_PI, "Hz")
    spacing = modes.min_spacing
    s.add("min_spacing", NO_SPACING if spacing is None else spacing, "text" if spacing is None else "m")
    alt = cfg["chain.alt_axial_frequency"]
    alt_spacing = chain_mod.min_spacing(cfg.chain_config(TWO_PI * alt), tol)
    s.add("alt_f_axial", alt, "Hz")
    s.add(
        "alt_min_spacing", NO_SPACING if alt_spacing is None else alt_spacing, "text" if alt_spacing is None else "m"
    )
    ld = chain_mod.lamb_dicke_cm(ccfg, cfg["chain.wavelength"], cfg["chain.projection_angle"])
    s.add("lamb_dicke_wavelength", cfg["chain.wavelength"], "m")
    s.add("lamb_dicke_eta_cm", ld.eta, "1")
    return modes, ld


def optics_section(cfg, report):
    s = report.section("optics")
    beam, defl = cfg.beam(), cfg.deflector()
    spacing = cfg["optics.ion_spacing"]
    xt = optics.crosstalk(spacing, beam)
    max_spot = optics.max_spot_for_crosstalk(spacing, cfg["optics.crosstalk_spec"])
    n_spots = optics.resolvable_spots(beam, defl)
    n_ions = optics.addressable_ions(defl, beam.focal_length, spacing)
    area = optics.pulse_area_error_budget(
        cfg["optics.intensity_stability"], cfg["optics.timing_resolution"], cfg["optics.pulse_width"]
    )
    s.add("ion_spacing", spacing, "m")
    s.add("spot_diameter", beam.spot_diameter, "m")
    s.add("diffraction_limited_spot", beam.diffraction_limited_spot, "m")
    s.add("crosstalk", xt, "1")
    s.add("crosstalk_spec", cfg["optics.crosstalk_spec"], "1")
    s.add("max_spot_for_crosstalk", max_spot, "m")
    s.add("wavelength", beam.wavelength, "m")
    s.add("deflection_range", 2 * defl.max_angle, "rad")
    s.add("deflector_voltage", defl.max_voltage, "V")
    s.add("switch_time", defl.switch_time, "s")
    s.add("resolvable_spots", n_spots, "count")
    s.add("addressable_ions", n_ions, "count")
    s.add("pulse_area_error", area, "1")
    s.add("wedge_angle", beam.tilt_wedge, "rad")
    return {"crosstalk": xt, "addressable_ions": n_ions}


def cooling_section(cfg, report, omega_axial, modes):
    s = report.section("cooling")
    params = cfg.cooling_params()
    temp, nbar = cooling.doppler_limit(params, omega_axial)
    omega_0 = TWO_PI * 299792458.0 / cfg["cooling.carrier_wavelength"]
    # Offsets from the carrier; adding them to omega_0 first would cost
    # ~0.1 Hz of float precision at optical frequencies.
    lines = cooling.sideband_spectrum(0.0, modes)
    sb = cooling.sideband_resolution_check(
        TWO_PI * cfg["cooling.sideband_laser_linewidth"], omega_axial, cfg["cooling.resolution_factor"]
    )
    dop = cooling.doppler_linewidth_check(TWO_PI * cfg["cooling.doppler_laser_linewidth"])
    rate = cooling.phonon_removal_rate(params)
    s.add("dipole_linewidth_assumed", params.gamma_dipole / TWO_PI, "Hz")
    s.add("saturation_intensity", params.i_sat, "W/m^2")
    s.add("doppler_temperature", temp, "K")
    s.add("doppler_mean_phonons", nbar, "1")
    s.add("carrier_frequency", omega_0 / TWO_PI, "Hz")
    for label, w in lines:
        s.add(f"line_{label}_offset", w / TWO_PI, "Hz")
    s.add("sideband_resolved", sb.passed, "bool")
    s.add("sideband_margin", sb.margin, "1")
    s.add("doppler_linewidth_ok", dop.passed, "bool")
    s.add("phonon_removal_rate", rate, "1/s")
    s.add("cooling_time", cooling.cooling_time(nbar, params), "s")
    return sb


def readout_section(cfg, report, seed):
    s = report.section("readout")
    params = cfg.readout_params(seed)
    res = cooling.simulate_readout(cfg["readout.p_bright"], params, cfg["readout.trials"], cfg["readout.lanes"])
    s.add("collection_efficiency", cooling.collection_efficiency(params), "1")
    s.add("bright_mean_counts", res.bright_mean, "count")
    s.add("dark_mean_counts", res.dark_mean, "count")
    s.add("threshold", res.threshold, "count")
    s.add("trials", res.trials, "count")
    s.add("seed", seed, "1")
    s.add("bright_error_rate", res.bright_error_rate, "1")
    s.add("dark_error_rate", res.dark_error_rate, "1")
    s.add("analytic_bright_error_rate", res.analytic["bright_as_dark"], "1")
    s.add("analytic_dark_error_rate", res.analytic["dark_as_bright"], "1")
    return res


def imaging_section(cfg, report):
    s = report.section("imaging")
    ichain = cfg.imaging_chain()
    sep = cooling.imaging_min_separation(ichain)
    resolvable = cooling.imaging_resolvable(cfg["imaging.expected_spacing"], ichain)
    s.add("magnification", ichain.magnification, "1")
    s.add("mcp_separation", ichain.mcp_separation, "m")
    s.add("min_resolved_separation", sep, "m")
    s.add("expected_spacing", cfg["imaging.expected_spacing"], "m")
    s.add("resolvable", resolvable, "bool")
    return resolvable


# --- top-level reports ------------------------------------------------------


def run_design_report(cfg, seed=None):
    seed = cfg.require_seed() if seed is None else seed
    report = Report("design")
    info = _in_section("trap", trap_section, cfg, report)
    omega_axial = info["omega_axial"]
    if not omega_axial > 0:
        raise SectionError("trap", DomainError("axial frequency is zero; set trap.u_dc > 0"))
    modes, _ = _in_section("chain", chain_section, cfg, report, omega_axial)
    opt = _in_section("optics", optics_section, cfg, report)
    sb = _in_section("cooling", cooling_section, cfg, report, omega_axial, modes)
    _in_section("readout", readout_section, cfg, report, seed)
    resolvable = _in_section("imaging", imaging_section, cfg, report)

    clauses = {
        "addressable_ions_ok": opt["addressable_ions"] >= TARGET_IONS,
        "crosstalk_ok": opt["crosstalk"] <= 1e-3,
        "sideband_resolved": sb.passed,
        "imaging_resolvable": resolvable,
    }
    v = report.section("verdict")
    v.add("target_ions", TARGET_IONS, "count")
    v.add("addressable_ions", opt["addressable_ions"], "count")
    for key, ok in clauses.items():
        v.add(key, ok, "bool")
    v.add("string_phase", info["string_phase"], "bool")
    v.add("feasible", all(clauses.values()), "bool")
    return report


def run_trap_report(cfg):
    report = Report("trap")
    _in_section("trap", trap_section, cfg, report)
    return report


def run_chain_report(cfg):
    report = Report("chain")
    omega_axial = _in_section("trap", lambda: trap.axial_frequency(cfg.trap_params(), cfg.species))
    if not omega_axial > 0:
        raise SectionError("chain", DomainError("axial frequency is zero; set trap.u_dc > 0"))
    _in_section("chain", chain_section, cfg, report, omega_axial)
    return report


def run_optics_report(cfg):
    report = Report("optics")
    _in_section("optics", optics_section, cfg, report)
    return report


def run_cooling_report(cfg):
    report = Report("cooling")
    omega_axial = _in_section("trap", lambda: trap.axial_frequency(cfg.trap_params(), cfg.species))
    modes = _in_section("chain", chain_mod.chain_modes, cfg.chain_config(omega_axial), cfg["chain.tol"])
    _in_section("cooling", cooling_section, cfg, report, omega_axial, modes)
    _in_section("imaging", imaging_section, cfg, report)
    return report


def run_readout(cfg, seed=None):
    seed = cfg.require_seed() if seed is None else seed
    report = Report("readout")
    res = _in_section("readout", readout_section, cfg, report, seed)
    return report, res


def bundled_script(name="cnot.pulse"):
    return resources.files("ionforge").joinpath("data", name).read_text(encoding="utf-8")


def run_gate_demo(cfg, script_text):
    """Run a pulse script and report the final state.

    The Lamb-Dicke factor of the configured chain gates the U pulses: an
    orthogonal beam (no axial projection) makes the script infeasible.
    """
    script = _in_section("gate", dynamics.parse_gate_script, script_text)
    if cfg["gate.area_error"]:
        script.area_error = cfg["gate.area_error"]
    omega_axial = trap.axial_frequency(cfg.trap_params(), cfg.species)
    eta = None
    if omega_axial > 0:
        ld = chain_mod.lamb_dicke_cm(
            chain_mod.ChainConfig(script.n_ions, omega_axial, cfg.species),
            cfg["chain.wavelength"],
            cfg["chain.projection_angle"],
        )
        eta = ld.eta
    initial, final = _in_section("gate", dynamics.run_gate_script, script, eta)

    report = Report("gate")
    s = report.section("gate")
    s.add("n_ions", script.n_ions, "count")
    s.add("n_max", script.n_max, "count")
    s.add("n_pulses", len(script.pulses), "count")
    s.add("area_error", script.area_error, "1")
    s.add("initial_state", script.initial, "text")
    if eta is not None:
        s.add("lamb_dicke_eta_cm", eta, "1")
    s.add("norm", final.norm(), "1")
    excited = float(1.0 - final.phonon_distribution()[0])
    s.add("phonon_excited_population", max(excited, 0.0), "1")
    s.add("phonon_restored", excited < 1e-10, "bool")
    expected = script.expected_state()
    target = expected if expected is not None else initial
    s.add("reference_state", script.expect if expected is not None else script.initial, "text")
    fid = dynamics.fidelity(target, final)
    s.add("fidelity", fid, "1")
    s.add("infidelity", 1.0 - fid, "1")
    a = report.section("amplitudes")
    for label, amp in final.amplitude_table():
        a.add(f"{label}.re", amp.real, "1")
        a.add(f"{label}.im", amp.imag, "1")
    return report


# --- emitters ---------------------------------------------------------------


def _fmt_number(x):
    if isinstance(x, bool):
        return "true" if x else "false"
    if isinstance(x, int):
        return str(x)
    if not math.isfinite(x):
        return "null"
    text = format(x, ".12g")
    if text == "-0":
        text = "0"
    return text


def _to_json(obj, indent, level):
    pad = " " * (indent * (level + 1))
    end = " " * (indent * level)
    if isinstance(obj, dict):
        if not obj:
            return "{}"
        items = [f"{pad}{json.dumps(str(k))}: {_to_json(v, indent, level + 1)}" for k, v in obj.items()]
        return "{\n" + ",\n".join(items) + "\n" + end + "}"
    if isinstance(obj, (list, tuple)):
        if not obj:
            return "[]"
        items = [f"{pad}{_to_json(v, indent, level + 1)}" for v in obj]
        return "[\n" + ",\n".join(items) + "\n" + end + "]"
    if obj is None:
        return "null"
    if isinstance(obj, str):
        return json.dumps(obj)
    if isinstance(obj, (bool, int, float)):
        return _fmt_number(obj)
    raise TypeError(f"cannot serialise {type(obj).__name__}")


def emit_json(data):
    return (_to_json(data, 2, 0) + "\n").encode("utf-8")


def emit(report, fmt="json"):
    """Serialise a report to bytes (``json`` or ``csv``)."""
    if fmt == "json":
        return emit_json(report.to_dict())
    if fmt == "csv":
        out = io.StringIO()
        first = True
        for name, entries in report.sections.items():
            if not first:
                out.write("\n")
            first = False
            out.write(f"# section: {name}\n")
            out.write("key,value,unit\n")
            for e in entries:
                if isinstance(e.value, str):
                    value = _csv_text(e.value)
                elif e.value is None:
                    value = ""
                else:
                    value = _fmt_number(e.value)
                out.write(f"{_csv_text(e.key)},{value},{_csv_text(e.unit)}\n")
        return out.getvalue().encode("utf-8")
    raise ValueError(f"unknown format {fmt!r}")


def _csv_text(text):
    if any(c in text for c in ',"\n'):
        return '"' + text.replace('"', '""') + '"'
    return text


def emit_histogram_csv(result):
    out = io.StringIO()
    out.write("count,frequency\n")
    for k, f in result.histogram_rows():
        out.write(f"{k},{_fmt_number(f)}\n")
    return out.getvalue().encode("utf-8")


def emit_readout_json(report, result):
    data = report.to_dict()
    data["histogram"] = [[k, int(c)] for k, c in enumerate(result.histogram)]
    return emit_json(data)
