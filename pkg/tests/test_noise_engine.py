import unittest

import numpy as np

from circuit import NoisyCircuit, Target
from errors import ConfigError, InvalidPostSelectionError, OrderTooHighError
from errpoly import ErrorPoly
from noise_engine import (
    BranchInsertion,
    branch_weight,
    enumerate_branches,
    fidelity_polynomial,
    iter_branch_masses,
    location_insertions,
    reduced_views,
    run_branch,
)
from ops.gate_ops import GateOp, ideal
from ops.measure_ops import InitOp, MeasureOp, PostSelectOp
from oracle_corpus import CORPUS, hadamard, idle_gate, oracle_corpus, verified_ghz3

ZERO = np.array([1.0, 0.0])


def P(c0=0.0, px=0.0, py=0.0, pz=0.0, k=1):
    return ErrorPoly({(0, 0, 0): c0, (1, 0, 0): px, (0, 1, 0): py, (0, 0, 1): pz}, k)


def one_gate(kind="H"):
    return NoisyCircuit(1, [InitOp(0, noisy=False), GateOp(kind, (0,))], Target((0,), ZERO))


def two_qubit_gate():
    ops = [InitOp(0, noisy=False), InitOp(1, noisy=False), GateOp("CNOT", (0, 1))]
    return NoisyCircuit(2, ops, Target((0, 1), [1, 0, 0, 0]))


def two_gates():
    ops = [InitOp(0, noisy=False), GateOp("H", (0,)), GateOp("H", (0,))]
    return NoisyCircuit(1, ops, Target((0,), ZERO))


def z_readout():
    """Qubit 0 read out in z and post-selected on 0; qubit 1 carries the target."""
    ops = [
        InitOp(0, noisy=False),
        InitOp(1, noisy=False),
        MeasureOp(0, "z"),
        PostSelectOp((0,), "zero"),
    ]
    return NoisyCircuit(2, ops, Target((1,), ZERO))


def brute_force(circuit, order):
    num, den = ErrorPoly.zero(order), ErrorPoly.zero(order)
    for _, weight, accept, target in iter_branch_masses(circuit, order):
        num = num + weight * target
        den = den + weight * accept
    return num, den


class TestEnumeration(unittest.TestCase):
    def test_location_insertion_counts(self):
        self.assertEqual(len(location_insertions(1, 1)), 3)
        self.assertEqual(len(location_insertions(2, 1)), 6)
        self.assertEqual(len(location_insertions(2, 2)), 15)

    def test_branch_counts(self):
        self.assertEqual(len(enumerate_branches(one_gate(), 1)), 4)
        self.assertEqual(len(enumerate_branches(two_qubit_gate(), 2)), 16)
        self.assertEqual(len(enumerate_branches(two_gates(), 2)), 16)
        self.assertEqual(len(enumerate_branches(two_gates(), 0)), 1)

    def test_weights_never_exceed_order(self):
        for insertion in enumerate_branches(verified_ghz3(), 2):
            self.assertLessEqual(insertion.weight, 2)

    def test_order_guard(self):
        with self.assertRaises(OrderTooHighError):
            enumerate_branches(one_gate(), 3)
        with self.assertRaises(ConfigError):
            enumerate_branches(one_gate(), -1)


class TestBranchWeight(unittest.TestCase):
    def test_examples(self):
        self.assertEqual(branch_weight(BranchInsertion(), one_gate(), 1), ErrorPoly.p_identity(1))
        single = BranchInsertion(((1, ("x",)),))
        self.assertEqual(branch_weight(single, one_gate(), 2), ErrorPoly.variable("px", 2))
        p0 = ErrorPoly.p_identity(2)
        self.assertTrue(branch_weight(BranchInsertion(), two_gates(), 2).almost_equal(p0 * p0))

    def test_two_qubit_pair_carries_both_factors(self):
        pair = BranchInsertion(((2, ("x", "z")),))
        self.assertEqual(pair.weight, 2)
        self.assertEqual(branch_weight(pair, two_qubit_gate(), 2), ErrorPoly({(1, 0, 1): 1.0}, 2))


class TestRunBranch(unittest.TestCase):
    def test_x_before_z_readout_is_rejected(self):
        circuit = z_readout()
        self.assertEqual(run_branch(circuit, BranchInsertion(((2, ("x",)),))), (0.0, 0.0))
        accept, target = run_branch(circuit, BranchInsertion())
        self.assertAlmostEqual(accept, 1.0)
        self.assertAlmostEqual(target, 1.0)

    def test_z_on_init_is_harmless(self):
        circuit = NoisyCircuit(1, [InitOp(0)], Target((0,), ZERO))
        self.assertEqual(run_branch(circuit, BranchInsertion(((0, ("z",)),))), run_branch(circuit, BranchInsertion()))


class TestFidelityPolynomial(unittest.TestCase):
    def test_noisy_identity(self):
        result = fidelity_polynomial(idle_gate(), 1)
        self.assertTrue(result.fidelity.almost_equal(P(1, -1, -1, 0), 1e-12))

    def test_noisy_hadamard(self):
        result = fidelity_polynomial(hadamard(), 1)
        self.assertTrue(result.fidelity.almost_equal(P(1, 0, -1, -1), 1e-12))

    def test_noisy_init_has_no_pz_term(self):
        result = fidelity_polynomial(NoisyCircuit(1, [InitOp(0)], Target((0,), ZERO)), 1)
        self.assertTrue(result.fidelity.almost_equal(P(1, -1, -1, 0), 1e-12))

    def test_order_zero_is_exact_for_every_corpus_circuit(self):
        for name, build in CORPUS.items():
            if name == "reused-ancilla":
                continue
            result = fidelity_polynomial(build(), 0)
            self.assertAlmostEqual(result.fidelity.constant_term, 1.0, delta=1e-10, msg=name)

    def test_probability_conserved_without_post_selection(self):
        result = fidelity_polynomial(CORPUS["ghz3"](), 2)
        self.assertTrue(result.denominator.almost_equal(ErrorPoly.one(2), 1e-10))

    def test_matches_brute_force_enumeration(self):
        for circuit in (verified_ghz3(), CORPUS["cm-projection"](), CORPUS["odd-parity"]()):
            for order in (1, 2):
                result = fidelity_polynomial(circuit, order)
                num, den = brute_force(circuit, order)
                self.assertTrue(result.numerator.almost_equal(num, 1e-10), circuit.name)
                self.assertTrue(result.denominator.almost_equal(den, 1e-10), circuit.name)

    def test_post_selection_lowers_acceptance(self):
        result = fidelity_polynomial(CORPUS["cm-projection"](), 1)
        self.assertAlmostEqual(result.denominator.constant_term, 0.5, delta=1e-12)

    def test_workers_give_identical_results(self):
        for circuit in oracle_corpus()[:6]:
            serial = fidelity_polynomial(circuit, 2, workers=1)
            threaded = fidelity_polynomial(circuit, 2, workers=3)
            self.assertEqual(dict(serial.numerator.coeffs), dict(threaded.numerator.coeffs), circuit.name)
            self.assertEqual(dict(serial.denominator.coeffs), dict(threaded.denominator.coeffs), circuit.name)

    def test_rejected_noiseless_run(self):
        ops = [
            InitOp(0, noisy=False),
            InitOp(1, noisy=False),
            ideal("X", 0),
            MeasureOp(0, "z"),
            PostSelectOp((0,), "zero"),
        ]
        circuit = NoisyCircuit(2, ops, Target((1,), ZERO), name="always-rejected")
        with self.assertRaises(InvalidPostSelectionError):
            fidelity_polynomial(circuit, 1)


class TestReducedViews(unittest.TestCase):
    def test_metadata(self):
        result = reduced_views(one_gate(), 1)
        self.assertEqual(result.metadata["branches_by_order"], {"0": 1, "1": 3})
        self.assertEqual(result.metadata["noisy_slots"], 1)
        self.assertEqual(result.order, 1)

    def test_needs_a_probe(self):
        circuit = NoisyCircuit(1, [InitOp(0)])
        with self.assertRaises(ConfigError):
            reduced_views(circuit, 1)

    def test_unknown_probe(self):
        with self.assertRaises(ConfigError):
            reduced_views(one_gate(), 1).probe("missing")

    def test_bad_worker_count(self):
        with self.assertRaises(ConfigError):
            reduced_views(one_gate(), 1, workers=0)


if __name__ == "__main__":
    unittest.main()
