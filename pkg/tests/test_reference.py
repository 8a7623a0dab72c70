import math
import os
import tempfile
import unittest

from errors import ConfigError
from reference import ComputedCell, ReferenceTables, compare_cell, compare_cells


class TestReferenceTables(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tables = ReferenceTables.load()

    def test_cell_counts(self):
        self.assertEqual(len(self.tables.table("table1")), 6)
        self.assertEqual(len(self.tables.table("table2")), 18)
        self.assertEqual(len(self.tables.table("table3")), 9)

    def test_fractions_parsed(self):
        cell = self.tables.get("table1", "FT", "state", "seven_qubit")
        self.assertEqual(cell.coefficients["px"], (-83.5, 0.0, 0.0))
        self.assertEqual(cell.coefficients["pz"], (-19.0, 0.0, 0.0))
        self.assertFalse(cell.angle_dependent)

    def test_angle_dependent_cell(self):
        cell = self.tables.get("table2", "GET", "t-gate", "one_qubit")
        self.assertTrue(cell.angle_dependent)
        self.assertEqual(cell.coefficients["px"], (-3.0, 0.0, 1.5))
        # a = pi/4, b = pi/4: cos4a = -1, sin^2(2a) sin(2b) = 1
        self.assertAlmostEqual(cell.value("px", math.pi / 4, math.pi / 4), -1.5, delta=1e-12)
        self.assertAlmostEqual(cell.value("py", math.pi / 4, math.pi / 4), -4.5, delta=1e-12)

    def test_missing_cell(self):
        with self.assertRaises(ConfigError):
            self.tables.get("table1", "FT", "t-gate", "seven_qubit")

    def test_unreadable_file(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "broken.json")
            with open(path, "w", encoding="utf-8") as fh:
                fh.write("{not json")
            with self.assertRaises(ConfigError):
                ReferenceTables.load(path)
            with self.assertRaises(ConfigError):
                ReferenceTables.load(os.path.join(tmp, "absent.json"))


class TestCompare(unittest.TestCase):
    @classmethod
    def setUpClass(cls):
        cls.tables = ReferenceTables.load()

    def test_matching_constant_cell(self):
        computed = ComputedCell.constant("table3", "FT", "t-gate", "gate", {"px": -3.0, "py": -5.0, "pz": -14.0})
        result = compare_cell(computed, self.tables.get(*computed.key))
        self.assertTrue(result.passed)
        self.assertEqual(result.max_difference, 0.0)
        self.assertTrue(result.to_record()["pass"])

    def test_mismatch_is_reported(self):
        computed = ComputedCell.constant("table3", "FT", "t-gate", "gate", {"px": -3.0, "py": -5.0, "pz": -13.0})
        (result,) = compare_cells([computed], self.tables)
        self.assertFalse(result.passed)
        self.assertAlmostEqual(result.max_difference, 1.0)

    def test_samples_checked_pointwise(self):
        reference = self.tables.get("table2", "FT", "t-gate", "one_qubit")
        coefficients = dict(reference.coefficients)
        samples = {v: [(0.3, 0.9, reference.value(v, 0.3, 0.9))] for v in coefficients}
        good = ComputedCell("table2", "FT", "t-gate", "one_qubit", coefficients, samples)
        self.assertTrue(compare_cell(good, reference).passed)
        samples["pz"] = [(0.3, 0.9, reference.value("pz", 0.3, 0.9) + 0.01)]
        bad = ComputedCell("table2", "FT", "t-gate", "one_qubit", coefficients, samples)
        self.assertFalse(compare_cell(bad, reference).passed)


if __name__ == "__main__":
    unittest.main()
