import math

import numpy as np
import pytest
from hypothesis import given, settings

from remoteprep import bloch
from remoteprep.bloch import QubitParams
from remoteprep.qcore import I2, SIGMA_X, SIGMA_Y, SIGMA_Z, Slot, fidelity, ket_to_dm, partial_trace, phase_distance

from .conftest import params, unit_vectors

R2 = 1 / math.sqrt(2)


def test_params_reduce_phi():
    assert QubitParams(1.0, 2 * math.pi).phi == 0.0
    assert QubitParams(1.0, -math.pi / 2).phi == pytest.approx(3 * math.pi / 2)
    with pytest.raises(ValueError):
        QubitParams(4.0, 0.0)


class TestStates:
    def test_make_qubit_cases(self):
        np.testing.assert_allclose(bloch.make_qubit(QubitParams(0, 1.3)), [1, 0], atol=1e-15)
        np.testing.assert_allclose(bloch.make_qubit(QubitParams(math.pi, 0)), [0, 1], atol=1e-15)
        np.testing.assert_allclose(bloch.make_qubit(QubitParams(math.pi / 2, math.pi / 2)), [R2, 1j * R2], atol=1e-15)

    def test_perp_cases(self):
        np.testing.assert_allclose(bloch.perp_qubit(QubitParams(0, 0.7)), [0, 1], atol=1e-15)
        np.testing.assert_allclose(bloch.perp_qubit(QubitParams(math.pi / 2, 0)), [-R2, R2], atol=1e-15)

    def test_perp_orthogonal(self, rng):
        for _ in range(100):
            p = QubitParams(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            assert abs(np.vdot(bloch.make_qubit(p), bloch.perp_qubit(p))) < 1e-15

    def test_singlet(self):
        np.testing.assert_array_equal(bloch.singlet(), [0, R2, -R2, 0])
        np.testing.assert_allclose(partial_trace(ket_to_dm(bloch.singlet()), Slot.A), I2 / 2, atol=1e-15)

    def test_singlet_in_qubit_basis(self, rng):
        for _ in range(20):
            p = QubitParams(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            psi, perp = bloch.make_qubit(p), bloch.perp_qubit(p)
            rewritten = (np.kron(psi, perp) - np.kron(perp, psi)) * R2
            np.testing.assert_allclose(rewritten, bloch.singlet(), atol=1e-15)


class TestBlochVector:
    def test_cases(self):
        np.testing.assert_allclose(bloch.bloch_vector([1, 0]), [0, 0, 1], atol=1e-15)
        np.testing.assert_allclose(bloch.bloch_vector(bloch.make_qubit(QubitParams(math.pi / 2, math.pi / 2))), [0, 1, 0], atol=1e-15)

    def test_expectation_oracle(self, rng):
        for _ in range(50):
            p = QubitParams(rng.uniform(0, math.pi), rng.uniform(0, 2 * math.pi))
            rho = ket_to_dm(bloch.make_qubit(p))
            oracle = [np.trace(rho @ s).real for s in (SIGMA_X, SIGMA_Y, SIGMA_Z)]
            np.testing.assert_allclose(bloch.bloch_vector(bloch.make_qubit(p)), oracle, atol=1e-15)
            np.testing.assert_allclose(bloch.bloch_from_params(p), oracle, atol=1e-14)

    @given(params)
    def test_perp_is_antipodal(self, p):
        np.testing.assert_allclose(
            bloch.bloch_vector(bloch.perp_qubit(p)), -bloch.bloch_vector(bloch.make_qubit(p)), atol=1e-12
        )


class TestCorrection:
    def test_special_cases(self):
        # the matrix form gives -i sigma_y at phi0 = 0: i sigma_y only up to a global sign
        np.testing.assert_allclose(bloch.correction_unitary(0), -1j * SIGMA_Y, atol=1e-15)
        assert phase_distance(bloch.correction_unitary(0), 1j * SIGMA_Y) == pytest.approx(0.0, abs=1e-15)
        np.testing.assert_allclose(bloch.correction_unitary(math.pi / 2), 1j * SIGMA_X, atol=1e-15)
        np.testing.assert_allclose(bloch.correction_unitary(math.pi), [[0, 1], [-1, 0]], atol=1e-15)

    @given(params)
    def test_both_forms_agree(self, p):
        np.testing.assert_allclose(bloch.correction_unitary(p.phi), bloch.correction_unitary_pauli(p.phi), atol=1e-15)

    @given(params)
    def test_maps_perp_to_target(self, p):
        corrected = bloch.correction_unitary(p.phi) @ bloch.perp_qubit(p)
        np.testing.assert_allclose(corrected, -np.exp(-1j * p.phi) * bloch.make_qubit(p), atol=1e-12)
        assert fidelity(bloch.make_qubit(p), ket_to_dm(corrected)) == pytest.approx(1.0, abs=1e-12)


class TestAliceRotation:
    def test_cases(self):
        np.testing.assert_allclose(bloch.alice_rotation(QubitParams(0, 1.0)), I2, atol=1e-15)
        expected = R2 * np.array([[1, -1j], [-1j, 1]])
        np.testing.assert_allclose(bloch.alice_rotation(QubitParams(math.pi / 2, math.pi / 2)), expected, atol=1e-15)

    @given(params)
    def test_rotates_into_computational_basis(self, p):
        r = bloch.alice_rotation(p)
        np.testing.assert_allclose(r @ bloch.make_qubit(p), [1, 0], atol=1e-12)
        np.testing.assert_allclose(r @ bloch.perp_qubit(p), [0, 1], atol=1e-12)


class TestDecomposition:
    def test_polar_longitude(self):
        a = bloch.rotation_decomposition(QubitParams(1.2, 0.0))
        assert (a.theta1, a.theta2) == (pytest.approx(0.0, abs=1e-15), pytest.approx(1.2, abs=1e-15))

    def test_north_pole(self):
        a = bloch.rotation_decomposition(QubitParams(0.0, 2.1))
        assert (a.theta1, a.theta2) == (0.0, 0.0)

    def test_south_pole_limit(self):
        a = bloch.rotation_decomposition(QubitParams(math.pi, math.pi / 2))
        assert a.theta1 == pytest.approx(math.pi / 2, abs=1e-15)
        assert a.theta2 == pytest.approx(0.0, abs=1e-15)

    def test_matches_tangent_formula_off_pole(self, rng):
        for _ in range(200):
            theta, phi = rng.uniform(0, math.pi - 1e-3), rng.uniform(0, 2 * math.pi)
            a = bloch.rotation_decomposition(QubitParams(theta, phi))
            assert a.theta1 == pytest.approx(math.atan(math.tan(theta / 2) * math.sin(phi)), abs=1e-9)
            assert a.theta2 == pytest.approx(2 * math.asin(math.sin(theta / 2) * math.cos(phi)), abs=1e-12)

    @given(params)
    def test_ranges(self, p):
        a = bloch.rotation_decomposition(p)
        assert -math.pi / 2 < a.theta1 <= math.pi / 2
        assert -math.pi <= a.theta2 <= math.pi


class TestProjectors:
    def test_cases(self):
        np.testing.assert_allclose(bloch.projector((0, 0, 1), 1), np.diag([1, 0]), atol=1e-15)
        np.testing.assert_allclose(bloch.projector((1, 0, 0), 1), 0.5 * np.ones((2, 2)), atol=1e-15)

    @settings(max_examples=50)
    @given(unit_vectors())
    def test_idempotent_and_complete(self, b):
        plus, minus = bloch.projector(b, 1), bloch.projector(b, -1)
        np.testing.assert_allclose(plus @ plus, plus, atol=1e-12)
        np.testing.assert_allclose(plus + minus, I2, atol=1e-15)
        np.testing.assert_allclose(plus, plus.conj().T, atol=1e-15)

    def test_rejects_non_unit(self):
        with pytest.raises(ValueError):
            bloch.projector((1, 1, 0), 1)


class TestOutcomeProbs:
    def test_aligned(self):
        assert bloch.outcome_probs((0, 0, 1), (0, 0, 1), "rho") == (1.0, 0.0)

    def test_perpendicular(self):
        for branch in ("rho", "perp"):
            assert bloch.outcome_probs((1, 0, 0), (0, 1, 0), branch) == (0.5, 0.5)

    @settings(max_examples=50)
    @given(unit_vectors(), unit_vectors())
    def test_trace_oracle(self, n, b):
        rho = bloch.density_from_bloch(n)
        perp = I2 - rho
        for branch, state in (("rho", rho), ("perp", perp)):
            oracle = tuple(np.trace(bloch.projector(b, s) @ state).real for s in (1, -1))
            np.testing.assert_allclose(bloch.outcome_probs(n, b, branch), oracle, atol=1e-12)

    @settings(max_examples=50)
    @given(unit_vectors(), unit_vectors())
    def test_reversal_identity(self, n, b):
        assert bloch.outcome_probs(n, b, "perp") == bloch.outcome_probs(n, -b, "rho")
