import json
import unittest

import numpy as np

from circuit import TARGET_PROBE, NoisyCircuit, Target, circuit_to_json
from errors import ArityError, CircuitValidationError, QubitIndexError
from ops.gate_ops import GateOp, PrepareOp, ideal, inverse_ops, noisy
from ops.ideal_ops import PerfectCorrectionOp, ProbeOp, View
from ops.measure_ops import InitOp, MeasureOp, PostSelectOp, outcome_mask
from utils import json_text


def bell_circuit():
    ops = [InitOp(0), InitOp(1), GateOp("H", (0,)), GateOp("CNOT", (0, 1))]
    return NoisyCircuit(2, ops, Target((0, 1), np.array([1, 0, 0, 1]) / np.sqrt(2)), name="bell")


def readout_circuit():
    ops = [
        InitOp(0),
        InitOp(1),
        GateOp("CNOT", (0, 1)),
        MeasureOp(1, "x"),
        PostSelectOp((1,), "zero"),
        InitOp(1),
        GateOp("CNOT", (0, 1)),
        MeasureOp(1),
        PostSelectOp((1,), "even"),
    ]
    return NoisyCircuit(2, ops, name="reuse")


class TestOps(unittest.TestCase):
    def test_gate_arity_and_targets(self):
        with self.assertRaises(ArityError):
            GateOp("CNOT", (0,))
        with self.assertRaises(ArityError):
            GateOp("SWAP", (0, 1))
        with self.assertRaises(QubitIndexError):
            GateOp("CM", (2, 2))

    def test_noise_slots(self):
        self.assertEqual(noisy("CNOT", 0, 1).noise_arity, 2)
        self.assertEqual(ideal("CNOT", 0, 1).noise_arity, 0)
        self.assertEqual(MeasureOp(3).noise_qubits, (3,))
        self.assertTrue(MeasureOp(3).errors_before)
        self.assertFalse(InitOp(3).errors_before)
        self.assertEqual(PostSelectOp((1, 2)).noise_arity, 0)
        self.assertEqual(PerfectCorrectionOp(tuple(range(7))).noise_arity, 0)

    def test_measure_basis_checked(self):
        with self.assertRaises(CircuitValidationError):
            MeasureOp(0, "y")

    def test_outcome_masks(self):
        np.testing.assert_array_equal(outcome_mask("zero", 2), [True, False, False, False])
        np.testing.assert_array_equal(outcome_mask("even", 2), [True, False, False, True])
        np.testing.assert_array_equal(outcome_mask("odd", 2), [False, True, True, False])
        self.assertTrue(outcome_mask("any", 3).all())
        with self.assertRaises(CircuitValidationError):
            outcome_mask("majority", 3)

    def test_inverse_ops(self):
        ops = [noisy("H", 0), noisy("CNOT", 0, 1)]
        inv = inverse_ops(ops)
        self.assertEqual([op.kind for op in inv], ["CNOT", "H"])
        self.assertTrue(all(not op.noisy for op in inv))
        with self.assertRaises(ArityError):
            inverse_ops([noisy("T", 0)])

    def test_view_basis_must_fit(self):
        with self.assertRaises(CircuitValidationError):
            View("bad", (0, 1), np.eye(2))

    def test_duplicate_views_rejected(self):
        view = View("v", (0,), np.eye(2))
        with self.assertRaises(CircuitValidationError):
            ProbeOp("p", (view, view))

    def test_perfect_correction_needs_a_block(self):
        with self.assertRaises(CircuitValidationError):
            PerfectCorrectionOp((0, 1, 2))

    def test_register_is_required(self):
        with self.assertRaises(TypeError):
            PrepareOp(vector=np.array([1.0, 0.0]))
        with self.assertRaises(TypeError):
            PerfectCorrectionOp()
        op = PrepareOp((2,), np.array([0.6, 0.8]))
        self.assertEqual(op.register, (2,))
        self.assertEqual(op.qubits, (2,))
        self.assertEqual(PerfectCorrectionOp(tuple(range(7))).qubits, tuple(range(7)))


class TestNoisyCircuit(unittest.TestCase):
    def test_slots_and_stats(self):
        circuit = bell_circuit()
        self.assertEqual(len(circuit), 4)
        self.assertEqual(circuit.noisy_slots, 5)
        self.assertEqual(circuit.slots_before(3), 3)
        self.assertEqual(circuit.slots_before(99), 5)
        stats = circuit.stats()
        self.assertEqual(stats["init"], 2)
        self.assertEqual(stats["gate"], 2)
        self.assertEqual(stats["noisy_locations"], 4)

    def test_target_becomes_last_probe(self):
        circuit = bell_circuit()
        probes = circuit.probes()
        self.assertEqual(len(probes), 1)
        position, probe = probes[0]
        self.assertEqual(position, 4)
        self.assertEqual(probe.label, TARGET_PROBE)

    def test_qubit_reuse_after_post_selection(self):
        circuit = readout_circuit()
        self.assertEqual(circuit.noisy_slots, 2 + 2 + 1 + 1 + 2 + 1)

    def test_rejects_gate_on_fresh_qubit(self):
        with self.assertRaises(CircuitValidationError):
            NoisyCircuit(2, [InitOp(0), GateOp("CNOT", (0, 1))])

    def test_inputs_are_live(self):
        circuit = NoisyCircuit(2, [InitOp(1), GateOp("CNOT", (0, 1))], inputs=(0,))
        self.assertEqual(circuit.inputs, (0,))

    def test_rejects_init_on_live_qubit(self):
        with self.assertRaises(CircuitValidationError):
            NoisyCircuit(1, [InitOp(0), InitOp(0)])

    def test_rejects_dangling_measurement(self):
        with self.assertRaises(CircuitValidationError):
            NoisyCircuit(1, [InitOp(0), MeasureOp(0)])

    def test_rejects_post_selection_without_measurement(self):
        with self.assertRaises(CircuitValidationError):
            NoisyCircuit(1, [InitOp(0), PostSelectOp((0,))])

    def test_rejects_out_of_range(self):
        with self.assertRaises(QubitIndexError):
            NoisyCircuit(1, [InitOp(0), GateOp("H", (1,))])

    def test_prepare_needs_fresh_register(self):
        vec = np.array([1.0, 0.0])
        NoisyCircuit(1, [PrepareOp((0,), vec), GateOp("H", (0,))])
        with self.assertRaises(CircuitValidationError):
            NoisyCircuit(1, [InitOp(0), PrepareOp((0,), vec)])

    def test_target_length_checked(self):
        with self.assertRaises(CircuitValidationError):
            Target((0, 1), np.array([1.0, 0.0]))

    def test_compose(self):
        a = NoisyCircuit(2, [InitOp(0), InitOp(1)])
        b = NoisyCircuit(2, [GateOp("CNOT", (0, 1))], inputs=(0, 1))
        joined = NoisyCircuit.compose(2, [a, b], name="joined")
        self.assertEqual(len(joined), 3)
        self.assertEqual(joined.noisy_slots, 4)


class TestCircuitJson(unittest.TestCase):
    def test_location_records(self):
        payload = circuit_to_json(readout_circuit())
        self.assertEqual(payload["schema"], 1)
        self.assertEqual(payload["n_qubits"], 2)
        ops = [r["op"] for r in payload["locations"]]
        self.assertEqual(ops[:5], ["init", "init", "gate", "measure", "post-select"])
        self.assertEqual(payload["locations"][3]["basis"], "x")
        self.assertEqual([r["index"] for r in payload["locations"]], list(range(9)))
        json.loads(json_text(payload))

    def test_target_recorded(self):
        payload = circuit_to_json(bell_circuit())
        self.assertEqual(payload["target"]["register"], [0, 1])


if __name__ == "__main__":
    unittest.main()
