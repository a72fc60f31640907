"""Closed-form single-qubit formulas for the longitude RSP scheme.

A target qubit is cos(theta/2)|0> + sin(theta/2) e^{i phi}|1>. Alice and Bob
agree in advance on the longitude phi0, which lets Bob turn the complement
state into the target with a fixed unitary.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Literal

import numpy as np

from .qcore import ATOL, I2, PAULIS, SIGMA_X, SIGMA_Y, fidelity, ket_to_dm

TWO_PI = 2.0 * math.pi


@dataclass(frozen=True)
class QubitParams:
    """Polar and azimuthal Bloch angles; phi is reduced mod 2pi."""

    theta: float
    phi: float = 0.0

    def __post_init__(self):
        theta = float(self.theta)
        if not (-ATOL <= theta <= math.pi + ATOL):
            raise ValueError(f"theta must lie in [0, pi], got {theta!r}")
        object.__setattr__(self, "theta", min(max(theta, 0.0), math.pi))
        phi = math.fmod(float(self.phi), TWO_PI)
        if phi < 0:
            phi += TWO_PI
        if phi >= TWO_PI:
            phi = 0.0
        object.__setattr__(self, "phi", phi)


@dataclass(frozen=True)
class RotationAngles:
    theta1: float
    theta2: float


def unit_vector(v, atol: float = ATOL) -> np.ndarray:
    b = np.asarray(v, dtype=float)
    if b.shape != (3,):
        raise ValueError(f"direction must be a 3-vector, got shape {b.shape}")
    if abs(np.linalg.norm(b) - 1.0) > atol:
        raise ValueError(f"direction must have unit norm, got |b| = {np.linalg.norm(b)!r}")
    return b


def make_qubit(p: QubitParams) -> np.ndarray:
    c, s = math.cos(p.theta / 2), math.sin(p.theta / 2)
    return np.array([c, s * np.exp(1j * p.phi)], dtype=complex)


def perp_qubit(p: QubitParams) -> np.ndarray:
    """Complement qubit cos(theta/2)|1> - sin(theta/2) e^{-i phi}|0>.

    The phase convention matters: the correction unitary and the singlet
    rewriting are only exact with this particular sign.
    """
    c, s = math.cos(p.theta / 2), math.sin(p.theta / 2)
    return np.array([-s * np.exp(-1j * p.phi), c], dtype=complex)


def singlet() -> np.ndarray:
    r = 1 / math.sqrt(2)
    return np.array([0, r, -r, 0], dtype=complex)


def bloch_vector(state) -> np.ndarray:
    psi = np.asarray(state, dtype=complex)
    return np.array([np.vdot(psi, s @ psi).real for s in PAULIS])


def bloch_from_params(p: QubitParams) -> np.ndarray:
    return np.array(
        [
            math.sin(p.theta) * math.cos(p.phi),
            math.sin(p.theta) * math.sin(p.phi),
            math.cos(p.theta),
        ]
    )


def correction_unitary(phi0: float) -> np.ndarray:
    """Bob's fixed correction U(phi0), mapping the complement onto the target."""
    return np.array(
        [[0, -np.exp(-1j * phi0)], [np.exp(1j * phi0), 0]],
        dtype=complex,
    )


def correction_unitary_pauli(phi0: float) -> np.ndarray:
    """Same operator written as i (sin phi0 sigma_x - cos phi0 sigma_y)."""
    return 1j * (math.sin(phi0) * SIGMA_X - math.cos(phi0) * SIGMA_Y)


def alice_rotation(p: QubitParams) -> np.ndarray:
    """R+ taking {|psi>, |psi_perp>} to {|0>, |1>} with no residual phase."""
    c, s = math.cos(p.theta / 2), math.sin(p.theta / 2)
    return np.array(
        [[c, s * np.exp(-1j * p.phi)], [-s * np.exp(1j * p.phi), c]],
        dtype=complex,
    )


def rotation_decomposition(p: QubitParams) -> RotationAngles:
    """Pulse angles for R+ = X(theta1) Ybar(theta2) X(theta1).

    theta1 = atan(tan(theta/2) sin phi0) is evaluated as the argument of
    cos(theta/2) + i sin(theta/2) sin phi0, which stays finite at theta = pi.
    """
    half = p.theta / 2
    theta1 = math.atan2(math.sin(half) * math.sin(p.phi), math.cos(half))
    arg = min(1.0, max(-1.0, math.sin(half) * math.cos(p.phi)))
    theta2 = 2.0 * math.asin(arg)
    if theta1 <= -math.pi / 2:
        # X(t+pi) Ybar(-u) X(t+pi) = -X(t) Ybar(u) X(t)
        theta1 += math.pi
        theta2 = -theta2
    return RotationAngles(theta1, theta2)


def projector(b, sign: int) -> np.ndarray:
    """P_+-(b) = (1 +- b.sigma) / 2."""
    b = unit_vector(b)
    if sign not in (1, -1):
        raise ValueError(f"sign must be +1 or -1, got {sign!r}")
    b_sigma = sum(bi * s for bi, s in zip(b, PAULIS))
    return 0.5 * (I2 + sign * b_sigma)


def outcome_probs(n, b, branch: Literal["rho", "perp"] = "rho") -> tuple[float, float]:
    """Closed-form (P+, P-) for measuring b.sigma on the target or its complement."""
    n = unit_vector(n)
    b = unit_vector(b)
    dot = float(np.dot(b, n))
    if branch == "rho":
        return 0.5 * (1 + dot), 0.5 * (1 - dot)
    if branch == "perp":
        return 0.5 * (1 - dot), 0.5 * (1 + dot)
    raise ValueError(f"branch must be 'rho' or 'perp', got {branch!r}")


def observable(b) -> np.ndarray:
    """b.sigma for a unit direction b."""
    b = unit_vector(b)
    return sum(bi * s for bi, s in zip(b, PAULIS))


def density_from_bloch(n) -> np.ndarray:
    return 0.5 * (I2 + sum(ni * s for ni, s in zip(np.asarray(n, dtype=float), PAULIS)))


def correction_fidelity(p: QubitParams) -> float:
    """Fidelity of U(phi)|psi_perp> with |psi>."""
    corrected = correction_unitary(p.phi) @ perp_qubit(p)
    return fidelity(make_qubit(p), ket_to_dm(corrected))

