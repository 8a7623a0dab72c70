import json
import os
import tempfile
import unittest

from constants import EXIT_OK, EXIT_SIMULATION_ERROR
from core.orchestrator import Report, RunConfig, fit_text, render
from errors import ConfigError, OrderTooHighError
from main import build_parser, main
from protocols import METHODS, STATE, T_GATE, MethodId


def run_cli(*argv):
    """main() with --quiet, output captured through --out."""
    with tempfile.TemporaryDirectory() as tmp:
        path = os.path.join(tmp, "report.out")
        code = main([*argv, "--quiet", "--out", path])
        text = ""
        if os.path.exists(path):
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    return code, text


class TestRunConfig(unittest.TestCase):
    def test_defaults(self):
        cfg = RunConfig("table3")
        self.assertEqual(cfg.selected_methods, METHODS)
        self.assertEqual(cfg.selected_stages[0], T_GATE)
        self.assertEqual(cfg.effective_order, 1)
        self.assertEqual(RunConfig("table1").selected_stages, (STATE,))
        self.assertEqual(RunConfig("sweep").selected_methods, (MethodId.FT,))

    def test_rejections(self):
        with self.assertRaises(ConfigError):
            RunConfig("table4")
        with self.assertRaises(ConfigError):
            RunConfig("table2", stages=(STATE,))
        with self.assertRaises(ConfigError):
            RunConfig("table1", stages=(T_GATE,))
        with self.assertRaises(ConfigError):
            RunConfig("sweep", methods=("FT", "GET"))
        with self.assertRaises(ConfigError):
            RunConfig("table3", methods=("GET",), rounds=1)
        with self.assertRaises(ConfigError):
            RunConfig("table3", rounds=3)
        with self.assertRaises(ConfigError):
            RunConfig("table3", compare=True, order=0)
        with self.assertRaises(ConfigError):
            RunConfig("table3", output_format="xml")
        with self.assertRaises(OrderTooHighError):
            RunConfig("table3", order=3)

    def test_from_args(self):
        args = build_parser().parse_args(["table2", "--method", "ge0", "--stage", "t-gate", "--order", "2"])
        cfg = RunConfig.from_args(args)
        self.assertEqual(cfg.methods, (MethodId.GE0,))
        self.assertEqual(cfg.stages, (T_GATE,))
        self.assertEqual(cfg.effective_order, 2)
        self.assertIsNone(cfg.plot)


class TestRendering(unittest.TestCase):
    def test_fit_text(self):
        self.assertEqual(fit_text((-2.25, -0.75, 0.0)), "-9/4 - 3/4 cos4a")
        self.assertEqual(fit_text((0.0, 0.0, 0.5)), "1/2 sin2(2a)sin2b")
        self.assertEqual(fit_text((0.0, 0.0, 0.0)), "0")

    def test_formats(self):
        report = Report("table3", 1, [{"method": "FT"}], ["method", "value"], [["FT", "-3"]], title="table3")
        payload = json.loads(render(report, "json"))
        self.assertEqual(payload["schema"], 1)
        self.assertEqual(payload["cells"], [{"method": "FT"}])
        self.assertEqual(render(report, "csv"), "method,value\nFT,-3")
        self.assertIn("| FT | -3 |", render(report, "markdown"))


class TestMain(unittest.TestCase):
    def test_dump_circuit(self):
        code, text = run_cli("dump-circuit", "--method", "GET", "--stage", "t-gate")
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(text)
        self.assertEqual(payload["command"], "dump-circuit")
        self.assertEqual(payload["metadata"]["n_qubits"], 15)
        self.assertEqual(payload["cells"][0]["op"], "init")

    def test_dump_circuit_markdown(self):
        code, text = run_cli("dump-circuit", "--method", "FT", "--format", "markdown")
        self.assertEqual(code, EXIT_OK)
        self.assertTrue(text.startswith("## circuit FT-t-gate"))

    def test_oracle_check(self):
        code, text = run_cli("oracle-check", "--order", "1")
        self.assertEqual(code, EXIT_OK)
        payload = json.loads(text)
        self.assertEqual(payload["metadata"]["failed"], 0)
        self.assertTrue(all(cell["pass"] for cell in payload["cells"]))

    def test_configuration_errors_exit_with_two(self):
        code, text = run_cli("table1", "--stage", "t-gate")
        self.assertEqual(code, EXIT_SIMULATION_ERROR)
        self.assertEqual(text, "")
        code, _ = run_cli("table3", "--order", "3")
        self.assertEqual(code, EXIT_SIMULATION_ERROR)

    def test_sweep_of_state_stage_is_rejected(self):
        code, _ = run_cli("sweep", "--method", "GET", "--stage", "state", "--order", "0")
        self.assertEqual(code, EXIT_SIMULATION_ERROR)


if __name__ == "__main__":
    unittest.main()
