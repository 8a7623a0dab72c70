import unittest

import numpy as np

from circuit import NoisyCircuit, Target
from constants import ORACLE_MAX_QUBITS
from errors import OracleSizeError
from errpoly import poly_eval
from noise_engine import fidelity_polynomial
from ops.gate_ops import GateOp
from ops.measure_ops import InitOp
from oracle import DensityMatrix, dense_channel_oracle, observed_orders, oracle_check
from oracle_corpus import CORPUS, oracle_corpus


class TestDensityMatrix(unittest.TestCase):
    def test_starts_in_zero_state(self):
        dm = DensityMatrix(2)
        self.assertAlmostEqual(dm.trace(), 1.0)
        np.testing.assert_allclose(dm.reduced([0, 1]), np.diag([1, 0, 0, 0]), atol=1e-12)

    def test_size_cap(self):
        with self.assertRaises(OracleSizeError):
            DensityMatrix(ORACLE_MAX_QUBITS + 1)

    def test_pauli_channel_preserves_trace(self):
        dm = DensityMatrix(2)
        dm.conjugate(np.array([[1, 1], [1, -1]]) / np.sqrt(2), [1])
        dm.pauli_channel(1, 0.1, 0.2, 0.3)
        self.assertAlmostEqual(dm.trace(), 1.0, delta=1e-12)
        # |+><+| under x, y, z flips: only y and z move it to |->
        rho = dm.reduced([1])
        self.assertAlmostEqual(rho[0, 1].real, 0.5 * (1 - 2 * (0.2 + 0.3)), delta=1e-12)

    def test_reduced_follows_register_order(self):
        dm = DensityMatrix(2)
        dm.conjugate(np.array([[0, 1], [1, 0]]), [1])
        self.assertAlmostEqual(dm.reduced([0, 1])[1, 1].real, 1.0)
        self.assertAlmostEqual(dm.reduced([1, 0])[2, 2].real, 1.0)

    def test_keep_and_reset(self):
        dm = DensityMatrix(2)
        dm.conjugate(np.array([[1, 1], [1, -1]]) / np.sqrt(2), [0])
        dm.keep_and_reset([0], np.array([False, True]))
        self.assertAlmostEqual(dm.trace(), 0.5, delta=1e-12)
        self.assertAlmostEqual(dm.reduced([0])[0, 0].real, 0.5, delta=1e-12)


class TestDenseChannelOracle(unittest.TestCase):
    def test_idle_bit_flip(self):
        ops = [InitOp(0, noisy=False), GateOp("I", (0,))]
        circuit = NoisyCircuit(1, ops, Target((0,), np.array([1.0, 0.0])))
        result = dense_channel_oracle(circuit, 0.1, 0.0, 0.0)
        self.assertAlmostEqual(result.accept_prob, 1.0)
        self.assertAlmostEqual(result.fidelity, 0.9, places=12)

    def test_noiseless_corpus(self):
        for name, build in CORPUS.items():
            result = dense_channel_oracle(build(), 0.0, 0.0, 0.0)
            expected = 0.5 if name == "reused-ancilla" else 1.0
            self.assertAlmostEqual(result.fidelity, expected, delta=1e-10, msg=name)

    def test_acceptance_matches_engine_constant(self):
        circuit = CORPUS["cm-projection"]()
        result = dense_channel_oracle(circuit, 0.0, 0.0, 0.0)
        self.assertAlmostEqual(result.accept_prob, 0.5, delta=1e-12)

    def test_engine_agrees_at_small_p(self):
        circuit = CORPUS["verified-ghz3"]()
        series = fidelity_polynomial(circuit, 2).fidelity
        for px, py, pz in ((1e-4, 2e-4, 3e-4), (1e-3, 0.0, 5e-4)):
            exact = dense_channel_oracle(circuit, px, py, pz).fidelity
            self.assertAlmostEqual(poly_eval(series, px, py, pz), exact, delta=1e-5)


class TestOracleCheck(unittest.TestCase):
    def test_corpus_size(self):
        circuits = oracle_corpus()
        self.assertGreaterEqual(len(circuits), 12)
        self.assertTrue(all(c.n_qubits <= 6 for c in circuits))
        self.assertEqual(len({c.name for c in circuits}), len(circuits))

    def test_bound_is_hundred_p_to_the_order_plus_one(self):
        for check in oracle_check([CORPUS["bell"]()]):
            self.assertAlmostEqual(check.bound, 100.0 * check.p ** (check.order + 1), delta=1e-20)

    def test_every_corpus_circuit_passes(self):
        checks = oracle_check(oracle_corpus())
        self.assertEqual(len(checks), len(CORPUS) * 2 * 2)
        failed = [c.to_record() for c in checks if not c.passed]
        self.assertEqual(failed, [])

    def test_truncation_gap_of_theta_state(self):
        # F(p) = 1 - 6p + 24p^2 - 32p^3 at px = py = pz = p
        checks = oracle_check([CORPUS["theta"]()], probabilities=(1e-2, 1e-3), orders=(1, 2))
        by_key = {(c.order, c.p): c for c in checks}
        self.assertAlmostEqual(by_key[(1, 1e-3)].scaled_deviation, 24.0 - 32e-3, delta=1e-4)
        self.assertAlmostEqual(by_key[(2, 1e-3)].scaled_deviation, 32.0, delta=1e-3)
        self.assertAlmostEqual(by_key[(2, 1e-2)].scaled_deviation, 32.0, delta=1e-6)
        slopes = observed_orders(checks)
        self.assertAlmostEqual(slopes[("theta", 1)], 2.0, delta=0.01)
        self.assertAlmostEqual(slopes[("theta", 2)], 3.0, delta=1e-4)

    def test_exact_series_has_no_slope(self):
        # one noisy slot: the fidelity is linear in p
        slopes = observed_orders(oracle_check([CORPUS["hadamard"]()], probabilities=(1e-2, 1e-3), orders=(1,)))
        self.assertIsNone(slopes[("hadamard", 1)])

    def test_record_fields(self):
        (check,) = oracle_check([CORPUS["hadamard"]()], probabilities=(1e-3,), orders=(1,))
        record = check.to_record()
        self.assertEqual(record["circuit"], "hadamard")
        self.assertTrue(record["pass"])
        self.assertLessEqual(record["scaled_deviation"], 10.0)


if __name__ == "__main__":
    unittest.main()
