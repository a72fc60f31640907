"""Dense linear algebra for one- and two-qubit objects.

States and operators are plain numpy arrays. Pure states are 1-D complex
vectors of length 2 or 4, density matrices and operators are square complex
arrays of the same sizes. Two-qubit objects use the basis ordering
|00>, |01>, |10>, |11> with slot A (Alice, the proton) as the left tensor
factor and slot B (Bob, the carbon) as the right one.
"""

from __future__ import annotations

import enum

import numpy as np

ATOL = 1e-12
SEQUENCE_ATOL = 1e-10

I2 = np.eye(2, dtype=complex)
SIGMA_X = np.array([[0, 1], [1, 0]], dtype=complex)
SIGMA_Y = np.array([[0, -1j], [1j, 0]], dtype=complex)
SIGMA_Z = np.array([[1, 0], [0, -1]], dtype=complex)
PAULIS = (SIGMA_X, SIGMA_Y, SIGMA_Z)

KET0 = np.array([1, 0], dtype=complex)
KET1 = np.array([0, 1], dtype=complex)


class QuantumError(ValueError):
    """Raised when an object violates a state or operator invariant."""


class Slot(enum.Enum):
    """Tensor position of a party's qubit."""

    A = 0
    B = 1

    @property
    def other(self) -> Slot:
        return Slot.B if self is Slot.A else Slot.A

    @property
    def nucleus(self) -> str:
        return "H" if self is Slot.A else "C"

    @classmethod
    def parse(cls, label: str | Slot) -> Slot:
        if isinstance(label, Slot):
            return label
        key = label.strip().upper()
        if key in ("A", "H", "1H", "ALICE"):
            return cls.A
        if key in ("B", "C", "13C", "BOB"):
            return cls.B
        raise ValueError(f"unknown slot {label!r}")


def _as_array(x) -> np.ndarray:
    return np.asarray(x, dtype=complex)


def pure_state(amplitudes, atol: float = ATOL) -> np.ndarray:
    """Validate and return a normalized state vector of dimension 2 or 4."""
    v = _as_array(amplitudes)
    if v.ndim != 1 or v.shape[0] not in (2, 4):
        raise QuantumError(f"state vector must have length 2 or 4, got shape {v.shape}")
    norm2 = float(np.vdot(v, v).real)
    if abs(norm2 - 1.0) > atol:
        raise QuantumError(f"state not normalized: |psi|^2 = {norm2!r}")
    return v


def char_poly_coefficients(m: np.ndarray) -> np.ndarray:
    """Elementary symmetric functions e_1..e_n of the eigenvalues of ``m``.

    Uses Newton's identities on the power traces, so no eigensolver is
    involved. For Hermitian ``m`` all eigenvalues are non-negative iff every
    e_k is non-negative.
    """
    n = m.shape[0]
    power_traces = []
    p = np.eye(n, dtype=complex)
    for _ in range(n):
        p = p @ m
        power_traces.append(np.trace(p).real)
    e = [1.0]
    for k in range(1, n + 1):
        acc = 0.0
        for i in range(1, k + 1):
            acc += (-1) ** (i - 1) * e[k - i] * power_traces[i - 1]
        e.append(acc / k)
    return np.array(e[1:])


def is_positive_semidefinite(m: np.ndarray, atol: float = 1e-10) -> bool:
    return bool(np.all(char_poly_coefficients(m) >= -atol))


def density_matrix(entries, atol: float = ATOL) -> np.ndarray:
    """Validate and return a Hermitian, unit-trace, positive matrix."""
    rho = _as_array(entries)
    if rho.ndim != 2 or rho.shape[0] != rho.shape[1] or rho.shape[0] not in (2, 4):
        raise QuantumError(f"density matrix must be 2x2 or 4x4, got shape {rho.shape}")
    if not np.allclose(rho, rho.conj().T, rtol=0, atol=atol):
        raise QuantumError("density matrix is not Hermitian")
    tr = np.trace(rho)
    if abs(tr - 1.0) > atol:
        raise QuantumError(f"density matrix trace is {tr!r}, expected 1")
    if not is_positive_semidefinite(rho):
        raise QuantumError("density matrix has a negative eigenvalue")
    return rho


def is_unitary(u, atol: float = ATOL) -> bool:
    u = _as_array(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1]:
        return False
    return bool(np.allclose(u.conj().T @ u, np.eye(u.shape[0]), rtol=0, atol=atol))


def is_hermitian(h, atol: float = ATOL) -> bool:
    h = _as_array(h)
    return h.ndim == 2 and h.shape[0] == h.shape[1] and bool(np.allclose(h, h.conj().T, rtol=0, atol=atol))


def unitary(u, atol: float = ATOL) -> np.ndarray:
    """Validate and return a 2x2 or 4x4 unitary."""
    u = _as_array(u)
    if u.ndim != 2 or u.shape[0] != u.shape[1] or u.shape[0] not in (2, 4):
        raise QuantumError(f"operator must be 2x2 or 4x4, got shape {u.shape}")
    if not is_unitary(u, atol):
        raise QuantumError("operator is not unitary")
    return u


def ket_to_dm(psi) -> np.ndarray:
    psi = _as_array(psi)
    return np.outer(psi, psi.conj())


def _kron2(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    # np.kron is general-purpose and slow for the 2x2 case
    if x.ndim == 1:
        return np.outer(x, y).ravel()
    return (x[:, None, :, None] * y[None, :, None, :]).reshape(4, 4)


def tensor_product(x, y) -> np.ndarray:
    """Kronecker product of two single-qubit objects, slot A on the left."""
    x, y = _as_array(x), _as_array(y)
    if x.shape[0] != 2 or y.shape[0] != 2 or x.ndim != y.ndim or x.ndim not in (1, 2):
        raise QuantumError(f"tensor_product needs two dimension-2 objects of the same kind, got {x.shape} and {y.shape}")
    return _kron2(x, y)


def embed(u, slot: Slot) -> np.ndarray:
    """Lift a single-qubit operator to the two-qubit space."""
    u = _as_array(u)
    if u.shape != (2, 2):
        raise QuantumError(f"embed needs a 2x2 operator, got {u.shape}")
    return _kron2(u, I2) if Slot.parse(slot) is Slot.A else _kron2(I2, u)


def apply_operator(u, target) -> np.ndarray:
    """Apply a 4x4 unitary to a vector (U psi) or a density matrix (U rho U^dag)."""
    u, target = _as_array(u), _as_array(target)
    if target.ndim == 1:
        return u @ target
    return u @ target @ u.conj().T


def apply_local(u, slot: Slot, target) -> np.ndarray:
    """Apply a single-qubit unitary to one slot of a two-qubit state."""
    u = unitary(u)
    if u.shape != (2, 2):
        raise QuantumError("apply_local needs a single-qubit operator")
    target = _as_array(target)
    if target.shape[0] != 4:
        raise QuantumError(f"apply_local target must be two-qubit, got shape {target.shape}")
    return apply_operator(embed(u, slot), target)


def partial_trace(rho, keep: Slot) -> np.ndarray:
    """Reduced density matrix of the kept slot. Accepts vectors as well."""
    rho = _as_array(rho)
    if rho.ndim == 1:
        rho = ket_to_dm(rho)
    if rho.shape != (4, 4):
        raise QuantumError(f"partial_trace needs a 4x4 density matrix, got {rho.shape}")
    r = rho.reshape(2, 2, 2, 2)  # indices a, b, a', b'
    if Slot.parse(keep) is Slot.A:
        return np.einsum("ijkj->ik", r)
    return np.einsum("ijik->jk", r)


def fidelity(psi, rho) -> float:
    """<psi|rho|psi>, clipped to [0, 1]. ``rho`` may also be a state vector."""
    psi, rho = _as_array(psi), _as_array(rho)
    if rho.ndim == 1:
        rho = ket_to_dm(rho)
    if psi.shape[0] != rho.shape[0]:
        raise QuantumError("fidelity arguments have different dimensions")
    value = float(np.vdot(psi, rho @ psi).real)
    return min(1.0, max(0.0, value))


def trace_distance(rho, sigma) -> float:
    """Half the trace norm of rho - sigma (both Hermitian)."""
    rho, sigma = _as_array(rho), _as_array(sigma)
    if rho.ndim == 1:
        rho = ket_to_dm(rho)
    if sigma.ndim == 1:
        sigma = ket_to_dm(sigma)
    return float(0.5 * np.sum(np.abs(np.linalg.eigvalsh(rho - sigma))))


def phase_distance(u, v) -> float:
    """1 - |tr(u^dag v)| / dim; zero exactly when v = e^{i alpha} u."""
    u, v = unitary(u), unitary(v)
    if u.shape != v.shape:
        raise QuantumError("phase_distance operands have different dimensions")
    d = u.shape[0]
    return max(0.0, 1.0 - abs(np.trace(u.conj().T @ v)) / d)


_PROJECTORS = {
    (slot, k): embed(np.diag([1.0 - k, float(k)]).astype(complex), slot) for slot in Slot for k in (0, 1)
}
for _p in _PROJECTORS.values():
    _p.setflags(write=False)


def computational_projector(slot: Slot, outcome: int) -> np.ndarray:
    """|outcome><outcome| on ``slot`` embedded in the two-qubit space (read-only)."""
    return _PROJECTORS[(Slot.parse(slot), outcome)]


def as_generator(rng) -> np.random.Generator:
    if isinstance(rng, np.random.Generator):
        return rng
    return np.random.default_rng(rng)


def measure_projective(state, slot: Slot, rng=None, *, outcome: int | None = None):
    """Computational-basis measurement of one slot of a two-qubit pure state.

    Returns ``(outcome, collapsed, probability)``. The outcome is drawn from
    ``rng`` (a seed or a ``numpy.random.Generator``) unless ``outcome`` forces
    a branch; forcing a zero-probability branch raises ``QuantumError``.
    """
    psi = pure_state(state)
    if psi.shape[0] != 4:
        raise QuantumError("measure_projective needs a two-qubit state")
    slot = Slot.parse(slot)
    probs = [float(np.vdot(psi, computational_projector(slot, k) @ psi).real) for k in (0, 1)]
    if outcome is None:
        gen = as_generator(rng)
        outcome = 0 if gen.random() < probs[0] else 1
        if probs[outcome] <= ATOL:
            outcome = 1 - outcome
    elif outcome not in (0, 1):
        raise ValueError(f"outcome must be 0 or 1, got {outcome!r}")
    p = probs[outcome]
    if p <= ATOL:
        raise QuantumError(f"outcome {outcome} has zero probability")
    collapsed = computational_projector(slot, outcome) @ psi / np.sqrt(p)
    return outcome, collapsed, p
