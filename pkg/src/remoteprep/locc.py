"""Two-party protocol engine for remote state preparation and measurement.

Alice owns slot A, Bob owns slot B. Each party can only touch its own slot;
the only thing that crosses between them is a single classical bit on a FIFO
channel. A session runs in one of two modes:

``measured``
    Alice rotates and measures, the outcome bit travels over the channel and
    Bob applies either U(phi0) or nothing. The joint state is a vector.
``coherent``
    The measurement and classically controlled correction are replaced by
    the conditional unitary S, as in the ensemble NMR realization. The joint
    state is a density matrix.

Outcome mapping: bit 0 means Alice's qubit collapsed to |0> after R+, i.e. she
projected onto |psi> and Bob holds the complement, so Bob applies U.
"""

from __future__ import annotations

import collections
from dataclasses import dataclass, field
from typing import Literal

import numpy as np

from . import bloch, nmr
from .bloch import QubitParams
from .qcore import (
    ATOL,
    I2,
    Slot,
    apply_operator,
    as_generator,
    computational_projector,
    embed,
    fidelity,
    ket_to_dm,
    measure_projective,
    partial_trace,
    unitary,
)

Mode = Literal["measured", "coherent"]


class ProtocolError(RuntimeError):
    """A protocol step was invoked out of order or in the wrong mode."""


class LocalityError(ProtocolError):
    """A party tried to act on the other party's qubit."""


@dataclass
class Step:
    index: int
    party: str
    label: str
    message: int | None = None
    probability: float | None = None
    state: np.ndarray | None = field(default=None, repr=False)

    def line(self) -> str:
        msg = "-" if self.message is None else str(self.message)
        prob = "-" if self.probability is None else f"{self.probability:.12f}"
        return f"{self.index}\t{self.party}\t{self.label}\t{msg}\t{prob}"


@dataclass
class ProtocolTranscript:
    header: dict = field(default_factory=dict)
    steps: list[Step] = field(default_factory=list)

    def record(self, party, label, message=None, probability=None, state=None) -> Step:
        step = Step(len(self.steps), party, label, message, probability, None if state is None else np.array(state))
        self.steps.append(step)
        return step

    @property
    def cbits(self) -> list[int]:
        return [s.message for s in self.steps if s.message is not None and s.label.startswith("send")]

    def text(self) -> str:
        head = "# " + " ".join(f"{k}={v}" for k, v in self.header.items())
        return "\n".join([head] + [s.line() for s in self.steps]) + "\n"


class ClassicalChannel:
    """FIFO of single bits between Alice and Bob."""

    def __init__(self, capacity: int = 1):
        if capacity < 1:
            raise ValueError("channel capacity must be at least 1")
        self.capacity = capacity
        self._queue: collections.deque[int] = collections.deque()
        self.sent = 0
        self.received = 0

    def send(self, bit: int):
        if bit not in (0, 1):
            raise ValueError(f"channel carries single bits, got {bit!r}")
        if len(self._queue) >= self.capacity:
            raise ProtocolError("classical channel is full")
        self._queue.append(bit)
        self.sent += 1

    def receive(self) -> int:
        if not self._queue:
            raise ProtocolError("classical channel is empty")
        self.received += 1
        return self._queue.popleft()

    def __len__(self):
        return len(self._queue)


class Party:
    """Handle through which one participant acts on the joint state."""

    def __init__(self, name: str, slot: Slot, session: Session):
        self.name = name
        self.slot = slot
        self._session = session

    def apply(self, u, label: str, slot: Slot | None = None):
        slot = self.slot if slot is None else Slot.parse(slot)
        if slot is not self.slot:
            raise LocalityError(f"{self.name} cannot act on slot {slot.name}")
        u = unitary(u)
        if u.shape != (2, 2):
            raise LocalityError(f"{self.name} may only apply single-qubit operators")
        s = self._session
        s.joint_state = apply_operator(embed(u, self.slot), s.joint_state)
        s.transcript.record(self.name, label, state=s.joint_state)


class Session:
    """One RSP or RSM run. All randomness comes from the session's own generator."""

    def __init__(self, seed=0, mode: Mode = "measured"):
        if mode not in ("measured", "coherent"):
            raise ValueError(f"mode must be 'measured' or 'coherent', got {mode!r}")
        self.mode = mode
        self.seed = seed
        self.rng = as_generator(seed)
        init = nmr.eps_init()
        self.joint_state = init if mode == "coherent" else init[:, 0].copy()
        self.alice = Party("alice", Slot.A, self)
        self.bob = Party("bob", Slot.B, self)
        self.channel = ClassicalChannel()
        seed_label = seed if isinstance(seed, (int, np.integer)) else "external"
        self.transcript = ProtocolTranscript({"mode": mode, "seed": seed_label})
        self.phase = "initial"
        self._ensemble: np.ndarray | None = None

    def _require(self, phase: str, mode: Mode | None = None):
        if mode is not None and self.mode != mode:
            raise ProtocolError(f"step needs {mode} mode, session is {self.mode}")
        if self.phase != phase:
            raise ProtocolError(f"step needs phase {phase!r}, session is at {self.phase!r}")

    def share_epr(self):
        """Prepare the shared singlet from |00> with the EPR pulse sequence."""
        self._require("initial")
        self.joint_state = apply_operator(nmr.epr_unitary(), self.joint_state)
        self.transcript.record("source", "share_epr", state=self.joint_state)
        self.phase = "shared"

    def alice_rotate(self, p: QubitParams):
        self._require("shared")
        self.alice.apply(bloch.alice_rotation(p), "R+")
        self.phase = "rotated"

    def alice_measure(self, outcome: int | None = None) -> int:
        """Measure slot A in the computational basis and send the bit."""
        self._require("rotated", "measured")
        before = self.joint_state
        probs = [float(np.vdot(before, computational_projector(Slot.A, k) @ before).real) for k in (0, 1)]
        self._ensemble = sum(
            computational_projector(Slot.A, k) @ ket_to_dm(before) @ computational_projector(Slot.A, k)
            for k in (0, 1)
            if probs[k] > ATOL
        )
        bit, collapsed, prob = measure_projective(before, Slot.A, self.rng, outcome=outcome)
        self.joint_state = collapsed
        self.transcript.record("alice", "measure_A", probability=prob, state=collapsed)
        self.channel.send(bit)
        self.transcript.record("alice", "send", message=bit)
        self.phase = "measured"
        return bit

    def alice_prepare_measure(self, p: QubitParams, outcome: int | None = None) -> int:
        """R+ on slot A followed by the computational-basis measurement."""
        self._require("shared", "measured")
        self.alice_rotate(p)
        return self.alice_measure(outcome)

    def bob_correct(self, phi0: float) -> int:
        """Receive the bit and apply U(phi0) on 0, nothing on 1."""
        if self.phase != "measured":
            raise ProtocolError(f"bob_correct needs phase 'measured', session is at {self.phase!r}")
        if len(self.channel) == 0:
            raise ProtocolError("no classical bit waiting for Bob")
        bit = self.channel.receive()
        self.transcript.record("bob", "receive", message=bit)
        if bit == 0:
            self.bob.apply(bloch.correction_unitary(phi0), "U")
        else:
            self.bob.apply(I2, "E")
        self._ensemble = None
        self.phase = "done"
        return bit

    def conditional(self, phi0: float, pulses: bool = False):
        """Coherent replacement for measurement, cbit and correction."""
        self._require("rotated", "coherent")
        if pulses:
            op = nmr.compose_sequence(nmr.conditional_sequence(phi0))
        else:
            op = nmr.conditional_target(phi0)
        self.joint_state = apply_operator(op, self.joint_state)
        self.transcript.record("alice+bob", "S", state=self.joint_state)
        self.phase = "done"

    def bob_marginal(self) -> np.ndarray:
        """Bob's reduced state as Bob can know it.

        While a sent bit has not been consumed Bob does not know the outcome,
        so his state is the outcome-averaged one.
        """
        if self._ensemble is not None:
            return partial_trace(self._ensemble, Slot.B)
        return partial_trace(self.joint_state, Slot.B)


def new_session(seed=0, mode: Mode = "measured") -> Session:
    return Session(seed, mode)


@dataclass
class MeasuredRun:
    transcripts: list[ProtocolTranscript]
    fidelities: list[float]
    outcomes: list[int]

    @property
    def frequencies(self) -> tuple[float, float]:
        n = len(self.outcomes)
        zeros = self.outcomes.count(0)
        return zeros / n, (n - zeros) / n


def run_rsp_measured(p: QubitParams, seed=0, trials: int = 1, outcome: int | None = None) -> MeasuredRun:
    """Repeat the measured-mode protocol; each trial gets its own child seed."""
    if trials < 1:
        raise ValueError("trials must be at least 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    target = bloch.make_qubit(p)
    run = MeasuredRun([], [], [])
    for k, child in enumerate(children):
        s = Session(np.random.default_rng(child), "measured")
        s.transcript.header = {"mode": "measured", "seed": seed, "trial": k}
        s.share_epr()
        s.alice_prepare_measure(p, outcome)
        bit = s.bob_correct(p.phi)
        run.transcripts.append(s.transcript)
        run.fidelities.append(fidelity(target, s.bob_marginal()))
        run.outcomes.append(bit)
    return run


@dataclass
class CoherentRun:
    rho: np.ndarray
    readout: tuple[float, float, float]
    fidelity: float
    transcript: ProtocolTranscript


def run_rsp_coherent(p: QubitParams, pulses: bool = False) -> CoherentRun:
    """Coherent-mode RSP on a density matrix; Bob is read out NMR-style."""
    s = Session(0, "coherent")
    s.share_epr()
    s.alice_rotate(p)
    s.conditional(p.phi, pulses=pulses)
    rho = s.joint_state
    return CoherentRun(
        rho=rho,
        readout=nmr.readout_xyz(rho, Slot.B),
        fidelity=fidelity(bloch.make_qubit(p), partial_trace(rho, Slot.B)),
        transcript=s.transcript,
    )


@dataclass
class RsmResult:
    b: np.ndarray
    rho_probs: tuple[float, float]
    perp_probs_raw: tuple[float, float]
    rho_expect: float
    perp_expect_raw: float

    @property
    def perp_probs_reversed(self) -> tuple[float, float]:
        """Reversing b swaps the roles of the + and - outcomes."""
        return self.perp_probs_raw[1], self.perp_probs_raw[0]

    @property
    def perp_expect_reversed(self) -> float:
        return -self.perp_expect_raw


def run_rsm(p: QubitParams, b) -> RsmResult:
    """R+ without S; read Bob in each of the proton's subspaces.

    The |1>_A subspace carries |psi> (the rho branch) and the |0>_A subspace
    carries |psi_perp>.
    """
    b = bloch.unit_vector(b)
    s = Session(0, "coherent")
    s.share_epr()
    s.alice_rotate(p)
    rho = s.joint_state
    obs = bloch.observable(b)
    plus, minus = bloch.projector(b, 1), bloch.projector(b, -1)

    def branch(a):
        return (
            nmr.subspace_expectation(rho, a, plus),
            nmr.subspace_expectation(rho, a, minus),
            nmr.subspace_expectation(rho, a, obs),
        )

    rp, rm, re_ = branch(1)
    pp, pm, pe = branch(0)
    return RsmResult(b=b, rho_probs=(rp, rm), perp_probs_raw=(pp, pm), rho_expect=re_, perp_expect_raw=pe)


AXES = {"x": (1.0, 0.0, 0.0), "y": (0.0, 1.0, 0.0), "z": (0.0, 0.0, 1.0)}


def no_signalling_marginal(p: QubitParams, seed=0) -> np.ndarray:
    """Bob's marginal after Alice has measured but before he reads the bit."""
    s = Session(seed, "measured")
    s.share_epr()
    s.alice_prepare_measure(p)
    return s.bob_marginal()


def ensemble_bob_state(p: QubitParams) -> np.ndarray:
    """Probability-weighted Bob marginal over both corrected measured branches."""
    total = np.zeros((2, 2), dtype=complex)
    for outcome in (0, 1):
        s = Session(0, "measured")
        s.share_epr()
        s.alice_rotate(p)
        prob = float(np.vdot(s.joint_state, computational_projector(Slot.A, outcome) @ s.joint_state).real)
        if prob <= ATOL:
            continue
        s.alice_measure(outcome)
        s.bob_correct(p.phi)
        total += prob * s.bob_marginal()
    return total

