"""Pulse-level realization on the 1H-13C spin pair.

Convention ledger (fixed for the whole package):

* ``X_s(a)`` is exp(-i a sigma_x / 2) on spin ``s``; a barred pulse negates
  the angle. ``Y`` likewise.
* ``J(a)`` is exp(-i (a/2) sigma_z x sigma_z), i.e. free scalar-coupling
  evolution for a/(pi J) seconds. J(pi/2) therefore lasts 1/(2J).
* The proton is slot A (Alice), the carbon is slot B (Bob).
* Sequences carry an explicit ordering flag. ``"operator"`` reads the list as
  a matrix product (rightmost pulse acts first), ``"temporal"`` applies the
  leftmost pulse first.

Rotation pulses are ideal and instantaneous. Only J evolutions take time.
"""

from __future__ import annotations

import functools
import math
from dataclasses import dataclass, field, replace
from typing import Iterable, Literal, Sequence

import numpy as np

from . import bloch
from .angles import format_angle, parse_angle
from .bloch import QubitParams
from .qcore import (
    I2,
    KET0,
    SEQUENCE_ATOL,
    SIGMA_X,
    SIGMA_Y,
    QuantumError,
    Slot,
    apply_operator,
    computational_projector,
    embed,
    ket_to_dm,
    partial_trace,
    phase_distance,
    tensor_product,
    trace_distance,
)

J_CH_HZ = 214.95

GRID_THETAS = tuple(k * math.pi / 12 for k in range(13))
GRID_PHIS = tuple(k * math.pi / 8 for k in range(17))

Order = Literal["operator", "temporal"]
VerifyMode = Literal["global-phase", "state-level"]

_AXES = {"x": SIGMA_X, "y": SIGMA_Y}


@dataclass(frozen=True)
class PulseOp:
    kind: Literal["rotation", "j_evolution"]
    angle: float
    axis: Literal["x", "y"] | None = None
    sign: int = 1
    target: Slot | None = None

    def __post_init__(self):
        if self.kind == "rotation":
            if self.axis not in _AXES:
                raise ValueError(f"rotation axis must be 'x' or 'y', got {self.axis!r}")
            if self.sign not in (1, -1):
                raise ValueError(f"sign must be +1 or -1, got {self.sign!r}")
            if self.target is None:
                raise ValueError("rotation pulse needs a target spin")
            object.__setattr__(self, "target", Slot.parse(self.target))
        elif self.kind == "j_evolution":
            if self.target is not None or self.axis is not None:
                raise ValueError("J evolution acts on both spins and takes no axis or target")
        else:
            raise ValueError(f"unknown pulse kind {self.kind!r}")
        # rotations are 4pi-periodic, so shifting by 4pi keeps the operator intact
        a = float(self.angle)
        while a > 2 * math.pi:
            a -= 4 * math.pi
        while a <= -2 * math.pi:
            a += 4 * math.pi
        object.__setattr__(self, "angle", a)

    @property
    def signed_angle(self) -> float:
        return self.sign * self.angle

    def duration(self, constants: PhysicalConstants | None = None) -> float:
        """Seconds; rotation pulses are treated as instantaneous."""
        if self.kind == "rotation":
            return 0.0
        j = (constants or PhysicalConstants()).j_coupling
        return abs(self.angle) / (math.pi * j)

    def label(self) -> str:
        if self.kind == "j_evolution":
            return f"J({format_angle(self.angle)})"
        bar = "-" if self.sign < 0 else ""
        return f"{self.axis.upper()}{bar}:{self.target.nucleus}({format_angle(self.angle)})"


def rot(axis: str, target, angle: float, bar: bool = False) -> PulseOp:
    return PulseOp("rotation", angle, axis=axis, sign=-1 if bar else 1, target=Slot.parse(target))


def jev(angle: float) -> PulseOp:
    return PulseOp("j_evolution", angle)


@dataclass(frozen=True)
class PulseSequence:
    pulses: tuple[PulseOp, ...]
    order: Order

    def __post_init__(self):
        object.__setattr__(self, "pulses", tuple(self.pulses))
        if not self.pulses:
            raise ValueError("pulse sequence must not be empty")
        if self.order not in ("operator", "temporal"):
            raise ValueError(f"order must be 'operator' or 'temporal', got {self.order!r}")

    def __len__(self):
        return len(self.pulses)

    def in_time_order(self) -> tuple[PulseOp, ...]:
        return self.pulses[::-1] if self.order == "operator" else self.pulses

    def reversed_flag(self) -> PulseSequence:
        """Same physical sequence written with the other ordering flag."""
        other = "temporal" if self.order == "operator" else "operator"
        return PulseSequence(self.pulses[::-1], other)

    def text(self) -> str:
        return " ".join(p.label() for p in self.pulses)

    def total_duration(self, constants: PhysicalConstants | None = None) -> float:
        return sum(p.duration(constants) for p in self.pulses)


@dataclass(frozen=True)
class PhysicalConstants:
    j_coupling: float = J_CH_HZ

    def __post_init__(self):
        if not self.j_coupling > 0:
            raise ValueError(f"J coupling must be positive, got {self.j_coupling!r}")


@dataclass
class VerificationReport:
    composed: np.ndarray
    target: np.ndarray
    mode: VerifyMode
    distance: float
    tolerance: float
    timing: list[tuple[str, float]] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return self.distance <= self.tolerance


def rotation_matrix(axis: str, angle: float) -> np.ndarray:
    sigma = _AXES[axis]
    return math.cos(angle / 2) * I2 - 1j * math.sin(angle / 2) * sigma


def j_matrix(angle: float) -> np.ndarray:
    a = np.exp(-0.5j * angle)
    b = np.exp(0.5j * angle)
    return np.diag([a, b, b, a])


def pulse_unitary(op: PulseOp) -> np.ndarray:
    if op.kind == "j_evolution":
        return j_matrix(op.angle)
    return embed(rotation_matrix(op.axis, op.signed_angle), op.target)


def compose_sequence(seq: PulseSequence) -> np.ndarray:
    u = np.eye(4, dtype=complex)
    for op in seq.in_time_order():
        u = pulse_unitary(op) @ u
    return u


def epr_sequence() -> PulseSequence:
    """Ybar_C(pi/2) J(pi/2) Y_C(pi/2) Xbar_C(pi/2) Ybar_H(pi) X_H(pi/2).

    Read as an operator product: starting from |00>, the rightmost pulse acts
    first. Read the other way round the same list leaves a product state.
    """
    h = math.pi / 2
    return PulseSequence(
        (
            rot("y", "C", h, bar=True),
            jev(h),
            rot("y", "C", h),
            rot("x", "C", h, bar=True),
            rot("y", "H", math.pi, bar=True),
            rot("x", "H", h),
        ),
        "operator",
    )


@functools.lru_cache(maxsize=1)
def epr_unitary() -> np.ndarray:
    """Composed EPR sequence, cached read-only."""
    u = compose_sequence(epr_sequence())
    u.setflags(write=False)
    return u


def rotation_sequence(p: QubitParams) -> PulseSequence:
    """X_H(theta1) Ybar_H(theta2) X_H(theta1), a palindrome realizing R+."""
    angles = bloch.rotation_decomposition(p)
    return PulseSequence(
        (
            rot("x", "H", angles.theta1),
            rot("y", "H", angles.theta2, bar=True),
            rot("x", "H", angles.theta1),
        ),
        "operator",
    )


def conditional_target(phi0: float) -> np.ndarray:
    """S = E+ x U(phi0) + E- x 1 with E+- the proton's computational projectors."""
    e_plus = np.outer(KET0, KET0.conj())
    e_minus = I2 - e_plus
    return tensor_product(e_plus, bloch.correction_unitary(phi0)) + tensor_product(e_minus, I2)


def conditional_sequence(phi0: float, verbatim: bool = False) -> PulseSequence:
    """Xbar_C(pi/2) J(pi/2) X_C(pi/2 + phi0) Ybar_C(pi/2) J(phi0) Y_H(pi).

    Under this module's ledger the middle carbon pulse needs the angle
    pi/2 + phi0; the corrected list works under either ordering flag. With
    ``verbatim=True`` the pi/2 - phi0 form is returned for comparison: read
    in time order it hands Bob the mirror state (azimuth -phi0). The Y_H(pi)
    swaps the proton's subspaces, so the sequence equals S only at the level
    of Bob's reduced state.
    """
    h = math.pi / 2
    middle = h - phi0 if verbatim else h + phi0
    return PulseSequence(
        (
            rot("x", "C", h, bar=True),
            jev(h),
            rot("x", "C", middle),
            rot("y", "C", h, bar=True),
            jev(phi0),
            rot("y", "H", math.pi),
        ),
        "operator",
    )


def eps_init() -> np.ndarray:
    """Effective pure state, taken to be |00><00|."""
    rho = np.zeros((4, 4), dtype=complex)
    rho[0, 0] = 1.0
    return rho


def singlet_prep_unitary() -> np.ndarray:
    """A reference unitary with |00> -> singlet, built from textbook gates."""
    hadamard = np.array([[1, 1], [1, -1]], dtype=complex) / math.sqrt(2)
    cnot = np.array([[1, 0, 0, 0], [0, 1, 0, 0], [0, 0, 0, 1], [0, 0, 1, 0]], dtype=complex)
    return embed(SIGMA_X, Slot.B) @ cnot @ embed(hadamard, Slot.A) @ embed(SIGMA_X, Slot.A)


def perturb(seq: PulseSequence, index: int, delta: float) -> PulseSequence:
    pulses = list(seq.pulses)
    pulses[index] = replace(pulses[index], angle=pulses[index].angle + delta)
    return PulseSequence(tuple(pulses), seq.order)


def timing_table(seq: PulseSequence, constants: PhysicalConstants | None = None) -> list[tuple[str, float]]:
    return [(op.label(), op.duration(constants)) for op in seq.pulses]


def _as_dm(state) -> np.ndarray:
    state = np.asarray(state, dtype=complex)
    return ket_to_dm(state) if state.ndim == 1 else state


def verify_sequence(
    seq: PulseSequence,
    target,
    mode: VerifyMode = "global-phase",
    *,
    inputs: Iterable | None = None,
    keep: Slot | None = Slot.B,
    tolerance: float = SEQUENCE_ATOL,
    constants: PhysicalConstants | None = None,
) -> VerificationReport:
    """Compare a composed pulse sequence with a target operator.

    ``global-phase`` mode uses the phase distance between the two unitaries.
    ``state-level`` mode pushes every input state through both operators and
    reports the largest trace distance between the reduced states on ``keep``
    (or between the full joint states when ``keep`` is None). Inputs default
    to the computational basis.
    """
    composed = compose_sequence(seq)
    target = np.asarray(target, dtype=complex)
    if target.shape == (2, 2):
        slots = {op.target for op in seq.pulses if op.kind == "rotation"}
        if len(slots) != 1 or any(op.kind == "j_evolution" for op in seq.pulses):
            raise ValueError("a single-qubit target needs a single-spin rotation sequence")
        target = embed(target, slots.pop())
    if mode == "global-phase":
        distance = phase_distance(composed, target)
    elif mode == "state-level":
        if inputs is None:
            inputs = [np.eye(4, dtype=complex)[k] for k in range(4)]
        distance = 0.0
        for state in inputs:
            rho = _as_dm(state)
            out_c = apply_operator(composed, rho)
            out_t = apply_operator(target, rho)
            if keep is not None:
                out_c, out_t = partial_trace(out_c, keep), partial_trace(out_t, keep)
            distance = max(distance, trace_distance(out_c, out_t))
    else:
        raise ValueError(f"unknown verification mode {mode!r}")
    return VerificationReport(
        composed=composed,
        target=target,
        mode=mode,
        distance=float(distance),
        tolerance=tolerance,
        timing=timing_table(seq, constants),
    )


def rsp_inputs(phi0: float, thetas: Sequence[float] = GRID_THETAS) -> list[np.ndarray]:
    """Post-R+ singlets along one longitude: the states S is supposed to act on."""
    states = []
    for theta in thetas:
        r = embed(bloch.alice_rotation(QubitParams(theta, phi0)), Slot.A)
        states.append(r @ bloch.singlet())
    return states


def verify_epr(seq: PulseSequence | None = None, **kw) -> VerificationReport:
    return verify_sequence(
        seq or epr_sequence(),
        singlet_prep_unitary(),
        "state-level",
        inputs=[eps_init()],
        keep=None,
        **kw,
    )


def verify_rotation(p: QubitParams, seq: PulseSequence | None = None, **kw) -> VerificationReport:
    return verify_sequence(seq or rotation_sequence(p), bloch.alice_rotation(p), "global-phase", **kw)


def verify_conditional(
    phi0: float,
    seq: PulseSequence | None = None,
    thetas: Sequence[float] = GRID_THETAS,
    **kw,
) -> VerificationReport:
    return verify_sequence(
        seq or conditional_sequence(phi0),
        conditional_target(phi0),
        "state-level",
        inputs=rsp_inputs(phi0, thetas),
        keep=Slot.B,
        **kw,
    )


def readout_xyz(rho, spin: Slot = Slot.B) -> tuple[float, float, float]:
    """Emulate the two acquisitions used to read one spin.

    The first acquisition gives the transverse components <sigma_x/2> and
    <sigma_y/2>. The second follows a Y(pi/2) reading-out pulse on the same
    spin, whose transverse x signal is the original longitudinal component.
    """
    spin = Slot.parse(spin)
    rho = _as_dm(rho)
    first = partial_trace(rho, spin)
    ix = float(np.trace(first @ SIGMA_X).real) / 2
    iy = float(np.trace(first @ SIGMA_Y).real) / 2
    read_pulse = embed(rotation_matrix("y", math.pi / 2), spin)
    second = partial_trace(apply_operator(read_pulse, rho), spin)
    iz = float(np.trace(second @ SIGMA_X).real) / 2
    return ix, iy, iz


def subspace_expectation(rho, alice_outcome: int, obs) -> float:
    """Bob's expectation of ``obs`` conditioned on the proton being in |a>."""
    rho = _as_dm(rho)
    proj = computational_projector(Slot.A, alice_outcome)
    weight = float(np.trace(proj @ rho).real)
    if weight <= 1e-12:
        raise QuantumError(f"proton subspace |{alice_outcome}> has zero population")
    value = np.trace(proj @ embed(np.asarray(obs, dtype=complex), Slot.B) @ rho).real
    return float(value) / weight


def parse_pulse(token: str) -> PulseOp:
    """Parse one token of the sequence text format: ``Y-:C(pi/2)`` or ``J(pi/2)``."""
    token = token.strip()
    if not token.endswith(")") or "(" not in token:
        raise ValueError(f"malformed pulse token {token!r}")
    head, arg = token[:-1].split("(", 1)
    angle = parse_angle(arg)
    if head.upper() == "J":
        return jev(angle)
    if ":" not in head:
        raise ValueError(f"rotation token needs a spin, got {token!r}")
    name, spin = head.split(":", 1)
    bar = name.endswith("-")
    axis = name.rstrip("-").lower()
    if axis not in _AXES:
        raise ValueError(f"unknown axis in {token!r}")
    return rot(axis, spin, angle, bar=bar)


def parse_sequence(text: str, order: Order = "operator") -> PulseSequence:
    return PulseSequence(tuple(parse_pulse(t) for t in text.split()), order)


def format_report(title: str, seq: PulseSequence, report: VerificationReport, extra: Sequence[str] = ()) -> str:
    """Plain-text compile report with the pulse list, matrices and timing."""
    lines = [f"# {title}", f"sequence ({seq.order} order): {seq.text()}", ""]
    for op in seq.pulses:
        lines.append(f"pulse {op.label()}")
        lines.append(_format_matrix(pulse_unitary(op)))
    lines += ["composed", _format_matrix(report.composed), "target", _format_matrix(report.target), ""]
    lines.append("timing")
    for label, seconds in report.timing:
        lines.append(f"  {label:<16} {seconds * 1e3:.4f} ms")
    total = sum(t for _, t in report.timing)
    lines.append(f"  {'total':<16} {total * 1e3:.4f} ms")
    lines.append("")
    lines.extend(extra)
    verdict = "PASS" if report.passed else "FAIL"
    lines.append(f"verification: {report.mode} distance={report.distance:.3e} tolerance={report.tolerance:.1e} {verdict}")
    return "\n".join(lines) + "\n"


def _format_matrix(m: np.ndarray) -> str:
    rows = []
    for row in np.asarray(m):
        cells = []
        for z in row:
            re_, im_ = round(z.real, 6) + 0.0, round(z.imag, 6) + 0.0
            cells.append(f"{re_:+.6f}{im_:+.6f}j")
        rows.append("  [" + " ".join(cells) + "]")
    return "\n".join(rows)
