"""State-vector engine for N three-level ions sharing one phonon mode.

Each ion has levels ``0``, ``1`` and ``aux`` (index 2). The register is a
complex vector over ``3**N * (n_max + 1)`` basis states, ion 0 most
significant and the phonon number least significant.

Everything runs in the interaction picture on resonance, so free evolution
between pulses contributes no phase. A pulse of angle ``theta`` and phase
``phi`` on a two-level pair (lower, upper) applies::

    cos(theta/2) I - i sin(theta/2) (e^{-i phi} |upper><lower| + e^{i phi} |lower><upper|)

V pulses act on the carrier and leave the phonon number alone. U pulses
drive a motional sideband; ``theta`` is the angle for the n=1 <-> n=0 pair
and a pair involving ``n`` and ``n-1`` phonons rotates by ``theta*sqrt(n)``.
"""

from dataclasses import dataclass, replace
from functools import lru_cache
import ast
import math
import operator

import numpy as np
from scipy import constants

from . import kernels
from .errors import DomainError, PreconditionError, TruncationError

LEVELS = {"0": 0, "1": 1, "a": 2, "aux": 2}
LEVEL_NAMES = ("0", "1", "a")
TRANSITIONS = {"01": (0, 1), "0a": (0, 2)}

GROUND_TOL = 1e-9
TRUNCATION_TOL = 1e-9
DEFAULT_N_MAX = 3


@dataclass(frozen=True)
class QubitAssignment:
    zero: str
    one: str
    aux: str
    scheme: str = "single-laser"
    intermediate: str = ""
    zeeman_field_gauss: float = 0.0

    def __post_init__(self):
        if len({self.zero, self.one, self.aux}) != 3:
            raise DomainError("qubit, auxiliary labels must be distinct")

    @property
    def zeeman_splitting_hz(self):
        """Ground-state Zeeman splitting (g_J = 2.0023) at the recorded field."""
        mu_b_hz_per_gauss = constants.physical_constants["Bohr magneton in Hz/T"][0] * 1e-4
        return 2.0023 * mu_b_hz_per_gauss * self.zeeman_field_gauss


SINGLE_LASER = QubitAssignment(
    zero="4S1/2 Mj=+1/2",
    one="3D5/2 Mj=+3/2",
    aux="3D5/2 Mj=-1/2",
)

# 40Ca+ has no spare ground sublevel for aux; a D5/2 sublevel stands in.
RAMAN = QubitAssignment(
    zero="4S1/2 Mj=-1/2",
    one="4S1/2 Mj=+1/2",
    aux="3D5/2 Mj=-1/2",
    scheme="raman",
    intermediate="4P1/2 sublevel",
    zeeman_field_gauss=200.0,
)


@dataclass(frozen=True)
class PulseSpec:
    kind: str
    ion: int
    theta: float
    phi: float = 0.0
    transition: str = "01"
    sideband: int = 0

    def __post_init__(self):
        if self.kind not in ("V", "U"):
            raise DomainError(f"pulse kind must be V or U, got {self.kind!r}")
        if self.transition not in TRANSITIONS:
            raise DomainError(f"unknown transition {self.transition!r}")
        if self.kind == "V" and self.sideband != 0:
            raise DomainError("V pulses act on the carrier (sideband 0)")
        if self.kind == "U" and self.sideband not in (-1, 1):
            raise DomainError("U pulses need sideband -1 or +1")
        if self.theta < 0:
            raise DomainError("theta must be non-negative; shift phi by pi instead")
        if self.ion < 0:
            raise DomainError("ion index must be non-negative")

    def inverse(self):
        return replace(self, phi=self.phi + math.pi)


def raman_pulse(kind, ion, theta, pump_phase, stokes_phase, transition="01", sideband=0):
    """Pulse driven by a pump/Stokes pair; only the phase difference enters."""
    return PulseSpec(kind, ion, theta, pump_phase - stokes_phase, transition, sideband)


class RegisterState:
    """Amplitudes of the ions plus the centre-of-mass phonon mode."""

    def __init__(self, n_ions, n_max, amplitudes, check_norm=True):
        self.n_ions = int(n_ions)
        self.n_max = int(n_max)
        amps = np.ascontiguousarray(amplitudes, dtype=np.complex128)
        if amps.shape != (self.dim,):
            raise DomainError(f"expected {self.dim} amplitudes, got {amps.shape}")
        if check_norm and abs(np.vdot(amps, amps).real - 1) > 1e-12:
            raise DomainError("state is not normalised")
        self.amplitudes = amps

    @property
    def dim(self):
        return 3**self.n_ions * (self.n_max + 1)

    @property
    def shape(self):
        return (3,) * self.n_ions + (self.n_max + 1,)

    @classmethod
    def basis(cls, levels, phonons=0, n_max=DEFAULT_N_MAX):
        """Product state from a level string such as ``"10"`` or ``"0a1"``."""
        digits = [LEVELS[c] for c in levels]
        if not 0 <= phonons <= n_max:
            raise DomainError("phonon number outside truncation")
        amps = np.zeros(3 ** len(digits) * (n_max + 1), dtype=np.complex128)
        amps[basis_index(digits, phonons, n_max)] = 1.0
        return cls(len(digits), n_max, amps)

    @classmethod
    def from_qubit_amplitudes(cls, qubit_amps, n_max=DEFAULT_N_MAX):
        """Embed a 2**N qubit vector with the phonon mode in its ground state."""
        qubit_amps = np.asarray(qubit_amps, dtype=np.complex128)
        n = int(round(math.log2(qubit_amps.size)))
        amps = np.zeros(3**n * (n_max + 1), dtype=np.complex128)
        for k, a in enumerate(qubit_amps):
            bits = [(k >> (n - 1 - i)) & 1 for i in range(n)]
            amps[basis_index(bits, 0, n_max)] = a
        return cls(n, n_max, amps)

    def copy(self):
        return RegisterState(self.n_ions, self.n_max, self.amplitudes.copy(), check_norm=False)

    def norm(self):
        return float(np.sqrt(np.vdot(self.amplitudes, self.amplitudes).real))

    def phonon_distribution(self):
        probs = np.abs(self.amplitudes.reshape(-1, self.n_max + 1)) ** 2
        return probs.sum(axis=0)

    def qubit_amplitudes(self, phonons=0):
        """Amplitudes on the 2**N computational basis at a given phonon number."""
        out = np.empty(2**self.n_ions, dtype=np.complex128)
        for k in range(out.size):
            bits = [(k >> (self.n_ions - 1 - i)) & 1 for i in range(self.n_ions)]
            out[k] = self.amplitudes[basis_index(bits, phonons, self.n_max)]
        return out

    def amplitude_table(self, cutoff=1e-12):
        """(label, amplitude) for every basis state with |amplitude| > cutoff."""
        rows = []
        for idx in np.flatnonzero(np.abs(self.amplitudes) > cutoff):
            digits, n = split_index(int(idx), self.n_ions, self.n_max)
            label = "".join(LEVEL_NAMES[d] for d in digits) + f";n={n}"
            rows.append((label, complex(self.amplitudes[idx])))
        return rows

    def __repr__(self):
        return f"RegisterState(n_ions={self.n_ions}, n_max={self.n_max})"


def basis_index(levels, phonons, n_max):
    idx = 0
    for lvl in levels:
        idx = idx * 3 + lvl
    return idx * (n_max + 1) + phonons


def split_index(idx, n_ions, n_max):
    idx, n = divmod(idx, n_max + 1)
    digits = []
    for _ in range(n_ions):
        idx, d = divmod(idx, 3)
        digits.append(d)
    return digits[::-1], n


@lru_cache(maxsize=256)
def _pair_indices(n_ions, n_max, ion, transition, sideband):
    lo, up = TRANSITIONS[transition]
    idx = np.arange(3**n_ions * (n_max + 1), dtype=np.int64).reshape((3,) * n_ions + (n_max + 1,))
    lower = np.take(idx, lo, axis=ion)
    upper = np.take(idx, up, axis=ion)
    if sideband == 0:
        scale = np.ones(n_max + 1)
    elif sideband == -1:
        # |lower, n> <-> |upper, n-1>
        lower, upper = lower[..., 1:], upper[..., :-1]
        scale = np.sqrt(np.arange(1, n_max + 1))
    else:
        # |lower, n> <-> |upper, n+1>
        lower, upper = lower[..., :-1], upper[..., 1:]
        scale = np.sqrt(np.arange(1, n_max + 1))
    scale = np.broadcast_to(scale, lower.shape)
    out = (
        np.ascontiguousarray(lower.ravel()),
        np.ascontiguousarray(upper.ravel()),
        np.ascontiguousarray(scale.ravel()),
    )
    for arr in out:
        arr.setflags(write=False)
    return out


def _rotate(state, pulse):
    if pulse.ion >= state.n_ions:
        raise DomainError(f"ion {pulse.ion} out of range for {state.n_ions} ions")
    lower, upper, scale = _pair_indices(state.n_ions, state.n_max, pulse.ion, pulse.transition, pulse.sideband)
    half = 0.5 * pulse.theta * scale
    out = state.copy()
    kernels.rotate_pairs(
        out.amplitudes, lower, upper, np.cos(half), np.sin(half), complex(math.cos(pulse.phi), math.sin(pulse.phi))
    )
    return out


def apply_v_pulse(state, pulse):
    if pulse.kind != "V":
        raise DomainError("apply_v_pulse needs a V pulse")
    return _rotate(state, pulse)


def apply_u_pulse(state, pulse, eta=None, check_truncation=True):
    """Apply a sideband pulse.

    ``eta`` (a float or :class:`~ionforge.chain.LambDicke`) only matters as
    a feasibility check: the rotation angle is already given per n=1 pair,
    but a mode with no axial coupling cannot be driven at all.

    With ``check_truncation`` off, basis states at the cutoff that have no
    partner inside the truncated space are left untouched; this is only
    meant for building full propagator matrices.
    """
    if pulse.kind != "U":
        raise DomainError("apply_u_pulse needs a U pulse")
    if state.n_max < 1:
        raise DomainError("U pulses need n_max >= 1")
    if eta is not None and getattr(eta, "eta", eta) <= 0:
        raise PreconditionError("Lamb-Dicke parameter is zero: sideband cannot be driven")
    edge = np.abs(state.amplitudes.reshape(-1, state.n_max + 1)[:, -1])
    if check_truncation and edge.max() >= TRUNCATION_TOL:
        raise TruncationError(f"amplitude {edge.max():.3g} at phonon cutoff n={state.n_max}")
    return _rotate(state, pulse)


def apply_pulse(state, pulse, eta=None, check_truncation=True):
    if pulse.kind == "V":
        return apply_v_pulse(state, pulse)
    return apply_u_pulse(state, pulse, eta, check_truncation)


def _require_ground(state):
    excited = 1.0 - state.phonon_distribution()[0]
    if excited >= GROUND_TOL:
        raise PreconditionError(f"phonon mode not in ground state (excited population {excited:.3g})")


def controlled_z_pulses(control, target):
    return [
        PulseSpec("U", control, math.pi, 0.0, "01", -1),
        PulseSpec("U", target, 2 * math.pi, 0.0, "0a", -1),
        PulseSpec("U", control, math.pi, 0.0, "01", -1),
    ]


def cnot_pulses(control, target):
    # phi = pi/2 makes the target sandwich a pair of y rotations, which
    # yields the textbook CNOT with no extra phases.
    return (
        [PulseSpec("V", target, math.pi / 2, math.pi / 2)]
        + controlled_z_pulses(control, target)
        + [PulseSpec("V", target, math.pi / 2, -math.pi / 2)]
    )


def run_sequence(state, pulses, eta=None, check_truncation=True):
    for p in pulses:
        state = apply_pulse(state, p, eta, check_truncation)
    return state


def sequence_matrix(n_ions, n_max, pulses):
    """Propagator of a pulse sequence, built column by column."""
    dim = 3**n_ions * (n_max + 1)
    out = np.empty((dim, dim), dtype=np.complex128)
    for col in range(dim):
        amps = np.zeros(dim, dtype=np.complex128)
        amps[col] = 1.0
        state = RegisterState(n_ions, n_max, amps)
        out[:, col] = run_sequence(state, pulses, check_truncation=False).amplitudes
    return out


def controlled_z(state, control, target, eta=None):
    """Controlled phase via the auxiliary level; diag(1, 1, 1, -1) on (control, target)."""
    if control == target:
        raise DomainError("control and target must differ")
    _require_ground(state)
    return run_sequence(state, controlled_z_pulses(control, target), eta)


def cnot(state, control, target, eta=None):
    if control == target:
        raise DomainError("control and target must differ")
    _require_ground(state)
    return run_sequence(state, cnot_pulses(control, target), eta)


def fidelity(a, b):
    va = getattr(a, "amplitudes", a)
    vb = getattr(b, "amplitudes", b)
    va = np.asarray(va)
    vb = np.asarray(vb)
    if va.shape != vb.shape:
        raise DomainError(f"dimension mismatch: {va.shape} vs {vb.shape}")
    return float(min(1.0, abs(np.vdot(va, vb)) ** 2))


def pulse_area_perturbation(pulse, fractional_error):
    if not abs(fractional_error) < 1:
        raise DomainError("fractional area error must satisfy |e| < 1")
    return replace(pulse, theta=pulse.theta * (1 + fractional_error))


def entanglement_entropy(state, subsystem):
    """Von Neumann entropy (bits) of the ions in ``subsystem``, all levels kept."""
    psi = state.amplitudes.reshape(state.shape)
    keep = sorted(subsystem)
    rest = [k for k in range(state.n_ions + 1) if k not in keep]
    mat = np.transpose(psi, keep + rest).reshape(3 ** len(keep), -1)
    sv = np.linalg.svd(mat, compute_uv=False)
    p = sv**2
    p = p[p > 1e-15]
    return float(-(p * np.log2(p)).sum())


# --- gate scripts -----------------------------------------------------------

_BINOPS = {ast.Add: operator.add, ast.Sub: operator.sub, ast.Mult: operator.mul, ast.Div: operator.truediv}


def _eval_angle(node):
    if isinstance(node, ast.Constant) and isinstance(node.value, (int, float)):
        return float(node.value)
    if isinstance(node, ast.Name) and node.id == "pi":
        return math.pi
    if isinstance(node, ast.UnaryOp) and isinstance(node.op, (ast.UAdd, ast.USub)):
        value = _eval_angle(node.operand)
        return -value if isinstance(node.op, ast.USub) else value
    if isinstance(node, ast.BinOp) and type(node.op) in _BINOPS:
        return _BINOPS[type(node.op)](_eval_angle(node.left), _eval_angle(node.right))
    raise ValueError("unsupported angle expression")


def parse_angle(text):
    """Parse ``1.5``, ``pi``, ``pi/2``, ``2*pi``, ``-pi/2``."""
    try:
        return _eval_angle(ast.parse(text.strip(), mode="eval").body)
    except (SyntaxError, ValueError, ZeroDivisionError) as exc:
        raise ValueError(f"bad angle {text!r}") from exc


@dataclass
class GateScript:
    pulses: list
    n_ions: int = 2
    n_max: int = DEFAULT_N_MAX
    initial: str = "00"
    expect: str = None
    area_error: float = 0.0

    def initial_state(self):
        return RegisterState.basis(self.initial, 0, self.n_max)

    def expected_state(self):
        if self.expect is None:
            return None
        return RegisterState.basis(self.expect, 0, self.n_max)


def parse_gate_script(text):
    """Parse the line-oriented pulse format.

    Pulse lines are ``V|U ion theta phi transition sideband``. Header
    directives start with ``@``: ``@ions N``, ``@nmax K``, ``@init 10``,
    ``@expect 11``, ``@area_error 0.001``. ``#`` starts a comment.
    """
    script = GateScript(pulses=[])
    init_set = False
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        parts = line.split()
        try:
            if parts[0].startswith("@"):
                key = parts[0][1:]
                if len(parts) != 2:
                    raise ValueError("directive takes exactly one value")
                if key == "ions":
                    script.n_ions = int(parts[1])
                elif key == "nmax":
                    script.n_max = int(parts[1])
                elif key == "init":
                    script.initial = parts[1]
                    init_set = True
                elif key == "expect":
                    script.expect = parts[1]
                elif key == "area_error":
                    script.area_error = float(parts[1])
                else:
                    raise ValueError(f"unknown directive {parts[0]}")
                continue
            if len(parts) != 6:
                raise ValueError("pulse line needs: kind ion theta phi transition sideband")
            kind, ion, theta, phi, transition, sideband = parts
            script.pulses.append(
                PulseSpec(kind, int(ion), parse_angle(theta), parse_angle(phi), transition, int(sideband))
            )
        except (ValueError, KeyError) as exc:
            raise ScriptError(f"line {lineno}: {exc}", lineno) from exc
    if not init_set:
        script.initial = "0" * script.n_ions
    for label in (script.initial, script.expect):
        if label is not None and (len(label) != script.n_ions or any(c not in LEVELS for c in label)):
            raise ScriptError(f"state label {label!r} does not match {script.n_ions} ions", None)
    for p in script.pulses:
        if p.ion >= script.n_ions:
            raise ScriptError(f"pulse targets ion {p.ion} but script has {script.n_ions} ions", None)
    return script


class ScriptError(DomainError):
    def __init__(self, message, line):
        super().__init__(message)
        self.line = line


def format_pulse(p):
    return f"{p.kind} {p.ion} {p.theta!r} {p.phi!r} {p.transition} {p.sideband:+d}"


def run_gate_script(script, eta=None):
    """Run a parsed script; returns (initial_state, final_state)."""
    state = script.initial_state()
    pulses = script.pulses
    if script.area_error:
        pulses = [pulse_area_perturbation(p, script.area_error) for p in pulses]
    return state, run_sequence(state, pulses, eta)
