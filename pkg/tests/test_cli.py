"""Integration tests for the fixpoint CLI."""

import csv
import json
import os
import shutil
import tempfile
import unittest
from fractions import Fraction
from io import StringIO
from unittest.mock import patch

from rich.console import Console

from fixpoint_lab import cli
from fixpoint_lab.cli import EXIT_CHECK_FAILED, EXIT_CONFIG, EXIT_DIVERGENCE, EXIT_OK, main, run_cli
from fixpoint_lab.config import load_config
from fixpoint_lab.operators import power_apply
from fixpoint_lab.report import read_trace
from fixpoint_lab.spaces import distance

HALVING = {"kind": "toward_point", "center": [0], "r": 0.5}
HARMONIC = {"a": 1, "b": 1, "q": 1}

CONVERGENT = {
    "schema_version": 1,
    "dim": 1,
    "iteration": {
        "p": 2,
        "operators": [HALVING, HALVING],
        "alpha": HARMONIC,
        "betas": [HARMONIC],
        "x1": [1],
        "xstar": [0],
        "n_max": 10000,
        "tol": 1e-3,
    },
}

DIVERGENT = {
    "schema_version": 1,
    "dim": 1,
    "iteration": {
        "p": 2,
        "operators": [{"kind": "scaling", "c": 2}, {"kind": "scaling", "c": 2}],
        "alpha": {"a": 1, "q": 0},
        "betas": [{"a": 1, "q": 0}],
        "x1": [1],
        "n_max": 1000,
    },
}

SINGLE_OPERATOR = {
    "schema_version": 1,
    "dim": 1,
    "iteration": {
        "p": 1,
        "operators": [HALVING],
        "alpha": HARMONIC,
        "betas": [],
        "x1": [1],
    },
}

DOUBLING_CHECKS = {
    "schema_version": 1,
    "dim": 1,
    "seed": 11,
    "classify": {
        "operator": {"kind": "scaling", "c": 2},
        "samples": 32,
        "checks": {
            "power_lipschitz": {"n": 1},
            "uniform_lipschitz": {"L": 100},
        },
    },
}

CONTRACTION_CHECKS = {
    "schema_version": 1,
    "dim": 2,
    "norm_p": 3,
    "seed": 5,
    "classify": {
        "operator": {"kind": "toward_point", "center": [0, 0], "r": 0.5},
        "samples": 32,
        "n_max": 16,
        "checks": {
            "uniform_lipschitz": {"L": 1},
            "asymptotic_pseudocontractivity": {"k": {"c": 0}},
            "star_condition": {"xstar": [0, 0], "psi": {"lambda": 0.5, "m": 2}},
            "unique_fixed_point": {"xstar": [0, 0], "candidates": 16},
        },
    },
}


class CliTestCase(unittest.TestCase):
    """Shared fixtures: a scratch directory and captured rich output."""

    def setUp(self):
        self.temp_dir = tempfile.mkdtemp()
        self.output = StringIO()
        console = Console(file=self.output, width=120)
        patches = [
            patch("fixpoint_lab.messages.console", console),
            patch("fixpoint_lab.messages.err_console", console),
            patch("fixpoint_lab.config.load_dotenv"),
            patch.dict(os.environ, {}, clear=True),
        ]
        for p in patches:
            p.start()
            self.addCleanup(p.stop)

    def tearDown(self):
        shutil.rmtree(self.temp_dir)

    def write_config(self, name, data):
        path = os.path.join(self.temp_dir, name)
        with open(path, "w", encoding="utf-8") as f:
            json.dump(data, f)
        return path

    def read(self, path, mode="r"):
        with open(path, mode) as f:
            return f.read()


class TestParser(CliTestCase):
    """Test suite for argument handling."""

    def test_no_args(self):
        with patch("sys.argv", ["fixpoint"]), self.assertRaises(SystemExit) as cm:
            main()
        self.assertEqual(cm.exception.code, EXIT_CONFIG)

    def test_help(self):
        with patch("sys.argv", ["fixpoint", "--help"]), \
             patch("sys.stdout", new_callable=StringIO), \
             self.assertRaises(SystemExit) as cm:
            main()
        self.assertEqual(cm.exception.code, 0)

    def test_usage_error_is_a_config_error(self):
        with patch("sys.stderr", new_callable=StringIO), self.assertRaises(SystemExit) as cm:
            run_cli(["iterate"])
        self.assertEqual(cm.exception.code, EXIT_CONFIG)


class TestIterate(CliTestCase):
    """Test suite for the iterate command."""

    def test_convergent_run(self):
        config = self.write_config("halving.json", CONVERGENT)
        self.assertEqual(run_cli(["iterate", "--config", config]), EXIT_OK)
        out = os.path.join(self.temp_dir, "halving.csv")
        with open(out, encoding="utf-8", newline="") as f:
            rows = list(csv.reader(f))
        self.assertEqual(rows[0], ["n", "x_0", "y1_0", "residual", "pair_gap", "d_n", "xnext_0"])
        self.assertEqual(rows[1][:3], ["1", "1", "0.75"])
        self.assertLessEqual(float(rows[-1][3]), 1e-3)

    def test_rows_recompute_pair_gap_and_dn(self):
        config_path = self.write_config("halving.json", CONVERGENT)
        run_cli(["iterate", "--config", config_path])
        iteration = load_config(config_path).iteration
        T1 = iteration.operators[0]
        with open(os.path.join(self.temp_dir, "halving.csv"), encoding="utf-8", newline="") as f:
            rows = read_trace(f)
        self.assertGreater(len(rows), 1)
        for row in rows:
            y, x_next = row["ys"][0], row["x_next"]
            gap = distance(y, x_next, iteration.norm)
            d_n = iteration.M * distance(power_apply(T1, row["n"], y),
                                         power_apply(T1, row["n"], x_next), iteration.norm)
            self.assertAlmostEqual(gap, row["pair_gap"], delta=1e-12)
            self.assertAlmostEqual(d_n, row["d_n"], delta=1e-12)

    def test_output_is_byte_identical(self):
        config = self.write_config("halving.json", CONVERGENT)
        first = os.path.join(self.temp_dir, "a.csv")
        second = os.path.join(self.temp_dir, "b.csv")
        run_cli(["iterate", "--config", config, "--out", first])
        run_cli(["iterate", "--config", config, "--out", second])
        self.assertEqual(self.read(first, "rb"), self.read(second, "rb"))

    def test_single_operator_is_rejected(self):
        config = self.write_config("single.json", SINGLE_OPERATOR)
        self.assertEqual(run_cli(["iterate", "--config", config]), EXIT_CONFIG)
        self.assertFalse(os.path.exists(os.path.join(self.temp_dir, "single.csv")))
        self.assertIn("iteration.p", self.output.getvalue())

    def test_divergence_writes_partial_trace(self):
        config = self.write_config("doubling.json", DIVERGENT)
        self.assertEqual(run_cli(["iterate", "--config", config]), EXIT_DIVERGENCE)
        out = os.path.join(self.temp_dir, "doubling.csv")
        self.assertTrue(os.path.exists(out))
        self.assertGreater(len(self.read(out).splitlines()), 1)

    def test_missing_config(self):
        missing = os.path.join(self.temp_dir, "absent.json")
        self.assertEqual(run_cli(["iterate", "--config", missing]), EXIT_CONFIG)

    def test_compare_reduced(self):
        config = self.write_config("halving.json", CONVERGENT)
        self.assertEqual(run_cli(["iterate", "--config", config, "--compare-reduced"]), EXIT_OK)
        self.assertIn("Max deviation", self.output.getvalue())


class TestClassify(CliTestCase):
    """Test suite for the classify command."""

    def test_doubling_map(self):
        config = self.write_config("doubling.json", DOUBLING_CHECKS)
        self.assertEqual(run_cli(["classify", "--config", config]), EXIT_CHECK_FAILED)
        report = json.loads(self.read(os.path.join(self.temp_dir, "doubling.report.json")))
        self.assertEqual(report["config"], "doubling.json")
        self.assertEqual(report["seed"], 11)
        power, uniform = report["checks"]
        self.assertEqual(power["metadata"]["estimate"], 2.0)
        self.assertEqual(uniform["verdict"], "fail")
        violation = uniform["first_violation"]
        self.assertEqual(violation["n"], 7)
        self.assertAlmostEqual(violation["lhs"] / 2 ** 7, 1.0, delta=1e-12)

    def test_contraction_passes(self):
        config = self.write_config("halving.json", CONTRACTION_CHECKS)
        self.assertEqual(run_cli(["classify", "--config", config]), EXIT_OK)
        report = json.loads(self.read(os.path.join(self.temp_dir, "halving.report.json")))
        self.assertEqual(report["norm_p"], 3.0)
        self.assertTrue(all(check["verdict"] == "pass" for check in report["checks"]))
        self.assertTrue(report["checks"][-1]["metadata"]["star_condition_passed"])

    def test_star_condition_precondition(self):
        data = json.loads(json.dumps(CONTRACTION_CHECKS))
        data["classify"]["checks"] = {"star_condition": {"xstar": [1, 0], "psi": {"lambda": 1}}}
        config = self.write_config("offset.json", data)
        self.assertEqual(run_cli(["classify", "--config", config]), EXIT_CHECK_FAILED)
        report = json.loads(self.read(os.path.join(self.temp_dir, "offset.report.json")))
        self.assertEqual(report["checks"][0]["metadata"]["residual"], 0.5)

    def test_report_is_deterministic(self):
        config = self.write_config("doubling.json", DOUBLING_CHECKS)
        first = os.path.join(self.temp_dir, "a.json")
        second = os.path.join(self.temp_dir, "b.json")
        run_cli(["classify", "--config", config, "--out", first])
        run_cli(["classify", "--config", config, "--out", second])
        self.assertEqual(self.read(first, "rb"), self.read(second, "rb"))

    def test_seed_from_environment(self):
        config = self.write_config("doubling.json", DOUBLING_CHECKS)
        with patch.dict(os.environ, {"FIXPOINT_SEED": "42"}):
            run_cli(["classify", "--config", config])
        report = json.loads(self.read(os.path.join(self.temp_dir, "doubling.report.json")))
        self.assertEqual(report["seed"], 42)
        self.assertTrue(report["seed_from_env"])

    def test_negative_seed_from_environment(self):
        config = self.write_config("doubling.json", DOUBLING_CHECKS)
        with patch.dict(os.environ, {"FIXPOINT_SEED": "-1"}):
            self.assertEqual(run_cli(["classify", "--config", config]), EXIT_CONFIG)
        self.assertIn("FIXPOINT_SEED", self.output.getvalue())
        self.assertFalse(os.path.exists(os.path.join(self.temp_dir, "doubling.report.json")))

    def test_overflow_is_a_failed_check(self):
        data = json.loads(json.dumps(DOUBLING_CHECKS))
        data["classify"]["checks"] = {"uniform_lipschitz": {"L": 1e308, "n_max": 1100}}
        config = self.write_config("overflow.json", data)
        self.assertEqual(run_cli(["classify", "--config", config]), EXIT_CHECK_FAILED)
        report = json.loads(self.read(os.path.join(self.temp_dir, "overflow.report.json")))
        self.assertEqual(report["checks"][0]["verdict"], "fail")
        self.assertIn("overflow", report["checks"][0]["metadata"])

    def test_section_required(self):
        config = self.write_config("halving.json", CONVERGENT)
        self.assertEqual(run_cli(["classify", "--config", config]), EXIT_CONFIG)


class TestCounterexample(CliTestCase):
    """Test suite for the counterexample command."""

    def test_verifies(self):
        self.assertEqual(run_cli(["counterexample", "--n", "64"]), EXIT_OK)
        text = self.output.getvalue()
        self.assertIn("Tail maximum below", text)

    def test_epsilon(self):
        self.assertEqual(run_cli(["counterexample", "--n", "32", "--epsilon", "1/1000"]), EXIT_OK)
        self.assertIn("2001", self.output.getvalue())

    def test_large_gaps_are_printed_exactly(self):
        self.assertEqual(run_cli(["counterexample", "--n", "512"]), EXIT_OK)
        lines = [line.strip() for line in self.output.getvalue().splitlines()]
        printed = next(line for line in lines if line.startswith("gap(512) = "))
        self.assertEqual(Fraction(printed.split(" = ")[1]), Fraction(2 ** 513, 512))

    def test_exact_values_written_as_json(self):
        out = os.path.join(self.temp_dir, "counter.json")
        self.assertEqual(run_cli(["counterexample", "--n", "300", "--out", out]), EXIT_OK)
        report = json.loads(self.read(out))
        self.assertEqual(Fraction(report["note"]["samples"]["256"]), Fraction(2 ** 257, 256))
        self.assertEqual(report["corrected"]["first_below"], 17)
        self.assertEqual(Fraction(report["corrected"]["tail_max"]["17"]), Fraction(2, 2 ** 17 * 17))

    def test_invalid_flags(self):
        self.assertEqual(run_cli(["counterexample", "--epsilon", "abc"]), EXIT_CONFIG)
        self.assertEqual(run_cli(["counterexample", "--n", "0"]), EXIT_CONFIG)
        self.assertEqual(run_cli(["counterexample", "--n", "8", "--ratio", "2"]), EXIT_CONFIG)


class TestSweep(CliTestCase):
    """Test suite for the sweep command."""

    def test_worst_outcome_wins(self):
        self.write_config("a_halving.json", CONVERGENT)
        self.write_config("b_doubling.json", DIVERGENT)
        self.write_config("c_checks.json", DOUBLING_CHECKS)
        self.assertEqual(run_cli(["sweep", "--dir", self.temp_dir]), EXIT_DIVERGENCE)
        self.assertTrue(os.path.exists(os.path.join(self.temp_dir, "a_halving.csv")))
        self.assertTrue(os.path.exists(os.path.join(self.temp_dir, "c_checks.report.json")))

    def test_config_error_outranks_divergence(self):
        self.write_config("b_doubling.json", DIVERGENT)
        self.write_config("single.json", SINGLE_OPERATOR)
        self.assertEqual(run_cli(["sweep", "--dir", self.temp_dir]), EXIT_CONFIG)

    def test_all_pass(self):
        self.write_config("halving.json", CONVERGENT)
        self.assertEqual(run_cli(["sweep", "--dir", self.temp_dir]), EXIT_OK)

    def test_not_a_directory(self):
        self.assertEqual(cli.cmd_sweep(os.path.join(self.temp_dir, "nowhere")), EXIT_CONFIG)


if __name__ == '__main__':
    unittest.main()
