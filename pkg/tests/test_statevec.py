import cmath
import math
import unittest

import numpy as np

from errors import ArityError, QubitIndexError
from ops.measure_ops import outcome_mask
from statevec import (
    GATE_MATRICES,
    Ensemble,
    Gate,
    PureState,
    apply_gate,
    compress,
    measure_project,
    overlap_fidelity,
    states_equal_up_to_phase,
)

R = 1.0 / math.sqrt(2.0)


def random_state(n_qubits, seed):
    rng = np.random.default_rng(seed)
    amps = rng.normal(size=2**n_qubits) + 1j * rng.normal(size=2**n_qubits)
    return PureState(amps / np.linalg.norm(amps))


def density(ensemble):
    rho = 0
    for m in ensemble.members:
        v = m.reshape(-1)
        rho = rho + np.outer(v, v.conj())
    return rho


class TestGates(unittest.TestCase):
    def test_hadamard_and_t(self):
        plus = apply_gate(PureState.zero(1), Gate.named("H"), [0])
        np.testing.assert_allclose(plus.amplitudes, [R, R], atol=1e-12)
        theta = apply_gate(plus, Gate.named("T"), [0])
        np.testing.assert_allclose(theta.amplitudes, [R, R * cmath.exp(1j * math.pi / 4)], atol=1e-12)

    def test_controlled_m(self):
        cm = Gate.named("CM")
        out = apply_gate(PureState.from_bits("11"), cm, [0, 1])
        np.testing.assert_allclose(out.amplitudes, [0, 0, cmath.exp(1j * math.pi / 4), 0], atol=1e-12)
        out = apply_gate(PureState.from_bits("10"), cm, [0, 1])
        np.testing.assert_allclose(out.amplitudes, [0, 0, 0, cmath.exp(-1j * math.pi / 4)], atol=1e-12)
        # control 0 leaves the target alone
        out = apply_gate(PureState.from_bits("01"), cm, [0, 1])
        np.testing.assert_allclose(out.amplitudes, [0, 1, 0, 0], atol=1e-12)

    def test_qubit_zero_is_most_significant(self):
        out = apply_gate(PureState.zero(3), Gate.named("X"), [0])
        self.assertEqual(int(np.argmax(np.abs(out.amplitudes))), 4)
        out = apply_gate(PureState.from_bits("100"), Gate.named("CNOT"), [0, 2])
        self.assertTrue(states_equal_up_to_phase(out, PureState.from_bits("101")))

    def test_all_gates_unitary_and_norm_preserving(self):
        for kind in GATE_MATRICES:
            gate = Gate.named(kind)
            self.assertTrue(gate.is_unitary(), kind)
            targets = [1] if gate.arity == 1 else [2, 0]
            for seed in range(3):
                out = apply_gate(random_state(3, seed), gate, targets)
                self.assertAlmostEqual(out.norm_squared, 1.0, delta=1e-10)

    def test_cm_is_a_unitary_involution(self):
        cm = GATE_MATRICES["CM"]
        np.testing.assert_allclose(cm @ cm.conj().T, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(cm @ cm, np.eye(4), atol=1e-12)
        np.testing.assert_allclose(cm[:2, :2], np.eye(2), atol=1e-12)

    def test_bad_targets(self):
        with self.assertRaises(ArityError):
            apply_gate(PureState.zero(2), Gate.named("CNOT"), [0])
        with self.assertRaises(QubitIndexError):
            apply_gate(PureState.zero(2), Gate.named("H"), [2])
        with self.assertRaises(QubitIndexError):
            apply_gate(PureState.zero(2), Gate.named("CNOT"), [1, 1])


class TestMeasurement(unittest.TestCase):
    def test_examples(self):
        plus = PureState(np.array([R, R]))
        _, prob = measure_project(plus, 0, "z", 0)
        self.assertAlmostEqual(prob, 0.5, places=12)
        projected, prob = measure_project(PureState.zero(1), 0, "z", 1)
        self.assertEqual(prob, 0.0)
        self.assertFalse(projected.normalized)
        _, prob = measure_project(PureState.zero(1), 0, "x", 0)
        self.assertAlmostEqual(prob, 0.5, places=12)

    def test_completeness(self):
        state = random_state(3, 7)
        for basis in ("z", "x"):
            total = sum(measure_project(state, 1, basis, o)[1] for o in (0, 1))
            self.assertAlmostEqual(total, state.norm_squared, delta=1e-10)


class TestOverlap(unittest.TestCase):
    def test_examples(self):
        state = random_state(2, 3)
        self.assertAlmostEqual(overlap_fidelity(state, state), 1.0, places=12)
        self.assertEqual(overlap_fidelity(PureState.from_bits("0"), PureState.from_bits("1")), 0.0)
        self.assertAlmostEqual(overlap_fidelity(PureState(np.array([R, R])), PureState.zero(1)), 0.5)

    def test_dimension_mismatch(self):
        with self.assertRaises(ValueError):
            overlap_fidelity(PureState.zero(1), PureState.zero(2))

    def test_normalization_flag_checked(self):
        with self.assertRaises(ValueError):
            PureState(np.array([1.0, 1.0]))
        PureState(np.array([1.0, 1.0]), normalized=False)


class TestEnsemble(unittest.TestCase):
    def test_post_select_matches_projector_and_reset(self):
        state = random_state(3, 11)
        ens = Ensemble.from_state(state)
        rho = np.outer(state.amplitudes, state.amplitudes.conj()).reshape((2,) * 6)
        ens.post_select([2, 0], outcome_mask("odd", 2))
        # reference: keep outcomes 01 and 10 of (q2, q0), trace them, reset to |00>
        reduced = rho[1, :, 0, 1, :, 0] + rho[0, :, 1, 0, :, 1]
        expected = np.zeros((2,) * 6, dtype=complex)
        expected[0, :, 0, 0, :, 0] = reduced
        np.testing.assert_allclose(density(ens), expected.reshape(8, 8), atol=1e-12)

    def test_compress_keeps_density_matrix(self):
        vectors = [random_state(2, s).amplitudes * 0.5 for s in range(6)]
        kept = compress(vectors)
        self.assertLessEqual(len(kept), 4)
        before = sum(np.outer(v, v.conj()) for v in vectors)
        after = sum(np.outer(v, v.conj()) for v in kept)
        np.testing.assert_allclose(after, before, atol=1e-12)

    def test_compress_drops_round_off_directions(self):
        v = random_state(3, 4).amplitudes
        vectors = [v, 2 * v, -3j * v, 0.1 * v]
        kept = compress(vectors)
        self.assertEqual(len(kept), 1)
        before = sum(np.outer(u, u.conj()) for u in vectors)
        np.testing.assert_allclose(np.outer(kept[0], kept[0].conj()), before, atol=1e-10)

    def test_prepare_and_view(self):
        ens = Ensemble.zero(3)
        vec = np.array([0.6, 0.8j])
        ens.prepare([1], vec)
        view = ens.view_matrix([1], np.eye(2))
        np.testing.assert_allclose(view, np.outer(vec, vec.conj()), atol=1e-12)
        scalar = ens.view_matrix([], np.ones((1, 1)))
        self.assertAlmostEqual(scalar[0, 0].real, 1.0)

    def test_view_respects_register_order(self):
        ens = Ensemble.from_state(PureState.from_bits("01"))
        view = ens.view_matrix([1, 0], np.eye(4))
        self.assertAlmostEqual(view[2, 2].real, 1.0)

    def test_qubit_limit(self):
        with self.assertRaises(ValueError):
            Ensemble.zero(17)


if __name__ == "__main__":
    unittest.main()
