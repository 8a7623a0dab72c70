import math
import unittest
import warnings

import numpy as np

from errors import NonPhysicalMapError, OrderMismatchError
from errpoly import CONSTANT, ErrorPoly, PolyMatrix
from statevec import GATE_MATRICES, PAULI_MATRICES
from steane import STEANE
from tomography import (
    QPT_LABELS,
    chi_from_runs,
    chi_to_kraus,
    gate_fidelity,
    ideal_chi,
    kraus_completeness_defect,
    kraus_to_json,
    process_response,
    qpt_input_amplitudes,
    qpt_input_states,
)

X = PAULI_MATRICES["x"]


def significant(kraus, floor=1e-6):
    return [k for k in kraus if np.linalg.norm(k) > floor]


def unitary_outputs(unitary, k=1):
    out = {}
    for label, amps in qpt_input_amplitudes().items():
        v = unitary @ amps
        out[label] = PolyMatrix.from_numeric(np.outer(v, v.conj()), k)
    return out


def bit_flip_outputs(acceptance=None):
    """(1 - px) rho + px X rho X, optionally scaled by an acceptance polynomial."""
    out = {}
    for label, amps in qpt_input_amplitudes().items():
        rho = np.outer(amps, amps.conj())
        m = PolyMatrix({CONSTANT: rho, (1, 0, 0): X @ rho @ X - rho})
        out[label] = m if acceptance is None else m.scale(acceptance)
    return out


class TestInputs(unittest.TestCase):
    def test_four_encoded_inputs(self):
        states = qpt_input_states()
        self.assertEqual(len(states), len(QPT_LABELS))
        plus = STEANE.encode(qpt_input_amplitudes()["+"])
        self.assertAlmostEqual(abs(np.vdot(states[2].amplitudes, plus)), 1.0, delta=1e-12)


class TestChi(unittest.TestCase):
    def test_ideal_t(self):
        chi = ideal_chi(GATE_MATRICES["T"]).constant()
        self.assertAlmostEqual(chi[0, 0].real, math.cos(math.pi / 8) ** 2, delta=1e-12)
        self.assertAlmostEqual(chi[3, 3].real, math.sin(math.pi / 8) ** 2, delta=1e-12)
        self.assertAlmostEqual(abs(chi[1, 1]), 0.0, delta=1e-12)

    def test_identity_process(self):
        chi = chi_from_runs(unitary_outputs(np.eye(2))).constant()
        np.testing.assert_allclose(chi, np.diag([1, 0, 0, 0]), atol=1e-12)

    def test_runs_reproduce_ideal_chi(self):
        for kind in ("T", "H", "Y"):
            unitary = GATE_MATRICES[kind]
            chi = chi_from_runs(unitary_outputs(unitary))
            np.testing.assert_allclose(chi.constant(), ideal_chi(unitary).constant(), atol=1e-12)
            self.assertAlmostEqual(gate_fidelity(chi, ideal_chi(unitary)).constant_term, 1.0, delta=1e-12)

    def test_bit_flip_channel(self):
        chi = chi_from_runs(bit_flip_outputs())
        self.assertTrue(chi.entry(0, 0)[0].almost_equal(ErrorPoly({CONSTANT: 1.0, (1, 0, 0): -1.0})))
        self.assertTrue(chi.entry(1, 1)[0].almost_equal(ErrorPoly({(1, 0, 0): 1.0})))
        self.assertTrue(chi.trace().almost_equal(ErrorPoly.one()))
        self.assertTrue(chi.is_hermitian(0.01, 0.0, 0.0))
        fidelity = gate_fidelity(chi, ideal_chi(np.eye(2)))
        self.assertTrue(fidelity.almost_equal(ErrorPoly({CONSTANT: 1.0, (1, 0, 0): -1.0})))

    def test_acceptance_is_divided_out(self):
        acceptance = ErrorPoly({CONSTANT: 0.5, (0, 1, 0): -3.0})
        scaled = chi_from_runs(bit_flip_outputs(acceptance))
        self.assertTrue(scaled.matrix.almost_equal(chi_from_runs(bit_flip_outputs()).matrix))

    def test_missing_and_mismatched_outputs(self):
        outputs = unitary_outputs(np.eye(2))
        del outputs["+i"]
        with self.assertRaises(ValueError):
            chi_from_runs(outputs)
        outputs = unitary_outputs(np.eye(2))
        outputs["0"] = PolyMatrix.from_numeric(np.diag([1.0, 0.0]), 2)
        with self.assertRaises(OrderMismatchError):
            chi_from_runs(outputs)


class TestLinearResponse(unittest.TestCase):
    def test_any_input(self):
        t = GATE_MATRICES["T"]
        response = process_response(unitary_outputs(t))
        amps = np.array([0.6, 0.8j])
        out = t @ amps
        np.testing.assert_allclose(response.for_state(amps).constant(), np.outer(out, out.conj()), atol=1e-12)
        self.assertAlmostEqual(response.acceptance(amps).constant_term, 1.0, delta=1e-12)


class TestKraus(unittest.TestCase):
    def test_bit_flip_kraus(self):
        chi = chi_from_runs(bit_flip_outputs())
        kraus = chi_to_kraus(chi, 0.1, 0.0, 0.0)
        self.assertEqual(len(significant(kraus)), 2)
        self.assertLess(kraus_completeness_defect(kraus), 1e-12)
        weights = sorted(float(np.trace(k.conj().T @ k).real) / 2 for k in significant(kraus))
        np.testing.assert_allclose(weights, [0.1, 0.9], atol=1e-12)
        record = kraus_to_json(kraus, 0.1, 0.0, 0.0)
        self.assertEqual(len(record["operators"]), len(kraus))

    def test_unitary_kraus(self):
        t = GATE_MATRICES["T"]
        (k,) = significant(chi_to_kraus(ideal_chi(t), 0.0, 0.0, 0.0))
        self.assertAlmostEqual(abs(np.trace(k.conj().T @ t)) / 2, 1.0, delta=1e-10)

    def test_negative_eigenvalue_rejected(self):
        chi = chi_from_runs(bit_flip_outputs())
        with self.assertRaises(NonPhysicalMapError):
            chi_to_kraus(chi, -0.1, 0.0, 0.0)

    def test_tiny_negative_eigenvalue_clipped(self):
        chi = chi_from_runs(bit_flip_outputs())
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always")
            kraus = chi_to_kraus(chi, -1e-10, 0.0, 0.0)
        self.assertEqual(len(significant(kraus)), 1)
        self.assertTrue(any(issubclass(w.category, RuntimeWarning) for w in caught))


if __name__ == "__main__":
    unittest.main()
