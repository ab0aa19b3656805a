import unittest
import csv
import json
import math
import os
import shutil
import tempfile
from io import StringIO
from contextlib import redirect_stdout, redirect_stderr
from .. import cli
from .. import kernels
from ..geometry import Point


def run(*argv):
    out = StringIO()
    err = StringIO()
    with redirect_stdout(out), redirect_stderr(err):
        code = cli.main(list(argv))
    return code, out.getvalue(), err.getvalue()


def csv_rows(text):
    return list(csv.DictReader(StringIO(text)))


class TestEval(unittest.TestCase):

    def test_plane_diagonal(self):
        (code, out, err) = run("eval", "--surface", "plane", "--x", "0,0", "--y", "0,0", "--t", "0.25")
        self.assertEqual(code, 0)
        [row] = csv_rows(out)
        self.assertAlmostEqual(float(row["value"]), 1 / math.pi, places=14)
        self.assertEqual(row["surface"], "euclidean")

    def test_sphere_long_time(self):
        (code, out, err) = run("eval", "--surface", "sphere", "--x", "0,0", "--y", "1,2", "--t", "20")
        self.assertEqual(code, 0)
        [row] = csv_rows(out)
        self.assertAlmostEqual(float(row["value"]), 1 / (4 * math.pi), places=7)

    def test_one_form_transpose(self):
        args = ["--surface", "hyperbolic", "--degree", "1", "--t", "0.5", "--format", "json"]
        (code, forward, _) = run("eval", "--x", "0.5,0.2", "--y", "1.0,1.5", *args)
        self.assertEqual(code, 0)
        (code, backward, _) = run("eval", "--x", "1.0,1.5", "--y", "0.5,0.2", *args)
        a = json.loads(forward)
        b = json.loads(backward)
        self.assertAlmostEqual(a["m12"], b["m21"], places=8)
        self.assertAlmostEqual(a["m21"], b["m12"], places=8)
        self.assertAlmostEqual(a["m11"], b["m11"], places=8)

    def test_matches_library_call(self):
        (code, out, _) = run("eval", "--surface", "hyperbolic", "--degree", "1", "--x", "1,0",
                             "--y", "2,0.5", "--t", "0.5")
        [row] = csv_rows(out)
        expected = kernels.k1("hyperbolic", Point("hyperbolic", 1.0, 0.0),
                              Point("hyperbolic", 2.0, 0.5), 0.5).matrix
        self.assertEqual(float(row["m11"]), expected.m11)
        self.assertEqual(float(row["m12"]), expected.m12)
        self.assertEqual(float(row["m21"]), expected.m21)
        self.assertEqual(float(row["m22"]), expected.m22)

    def test_several_pairs(self):
        (code, out, _) = run("eval", "--surface", "plane", "--x", "0,0", "--y", "1,0",
                             "--x", "1,0", "--y", "1,3", "--t", "0.5")
        self.assertEqual(len(csv_rows(out)), 2)

    def test_unpaired_points(self):
        (code, out, err) = run("eval", "--surface", "plane", "--x", "0,0", "--x", "1,0",
                               "--y", "1,0", "--t", "0.5")
        self.assertEqual(code, cli.EXIT_USAGE)

    def test_json_keys_match_csv_header(self):
        base = ["eval", "--surface", "sphere", "--x", "0.5,0.1", "--y", "1.0,2.0", "--t", "0.3"]
        (_, csv_out, _) = run(*base)
        (_, json_out, _) = run(*(base + ["--format", "json"]))
        header = csv_out.split("\n")[0].split(",")
        self.assertEqual(list(json.loads(json_out).keys()), header)

    def test_deterministic(self):
        base = ["eval", "--surface", "hyperbolic", "--x", "0.5,0.1", "--y", "1.0,2.0", "--t", "0.3"]
        self.assertEqual(run(*base)[1], run(*base)[1])

    def test_time_below_minimum(self):
        (code, out, err) = run("eval", "--surface", "plane", "--x", "0,0", "--y", "0,0", "--t", "1e-6")
        self.assertEqual(code, cli.EXIT_USAGE)
        self.assertTrue(err.startswith("riemann-heat: error[domain]:"))

    def test_out_file(self):
        directory = tempfile.mkdtemp()
        try:
            path = os.path.join(directory, "k0.csv")
            (code, out, _) = run("eval", "--surface", "plane", "--x", "0,0", "--y", "0,0",
                                 "--t", "0.25", "--out", path)
            self.assertEqual(out, "")
            with open(path) as f:
                self.assertEqual(len(f.read().strip().split("\n")), 2)
        finally:
            shutil.rmtree(directory)


class TestUsage(unittest.TestCase):

    def test_unknown_flag(self):
        (code, out, err) = run("eval", "--bogus")
        self.assertEqual(code, cli.EXIT_USAGE)
        self.assertEqual(out, "")
        self.assertEqual(err.count("\n"), 1)
        self.assertTrue(err.startswith("riemann-heat: error[usage]:"))

    def test_missing_command(self):
        (code, _, err) = run()
        self.assertEqual(code, cli.EXIT_USAGE)

    def test_bad_pair(self):
        (code, _, _) = run("eval", "--surface", "plane", "--x", "0", "--y", "0,0", "--t", "1")
        self.assertEqual(code, cli.EXIT_USAGE)

    def test_nonpositive_tolerance(self):
        (code, _, _) = run("eval", "--surface", "plane", "--x", "0,0", "--y", "0,0",
                           "--t", "1", "--tol", "0")
        self.assertEqual(code, cli.EXIT_USAGE)


class TestGrid(unittest.TestCase):

    def test_empty_range(self):
        (code, out, _) = run("grid", "--surface", "plane", "--x1", "0:1:0", "--t", "0.5")
        self.assertEqual(code, 0)
        self.assertEqual(out, cli.OutputRecord.csv_header() + "\n")

    def test_row_order(self):
        (code, out, _) = run("grid", "--surface", "plane", "--x1", "0:1:3", "--t", "0.5:1:2")
        rows = csv_rows(out)
        self.assertEqual(len(rows), 6)
        self.assertEqual([float(row["x1"]) for row in rows], [0.0, 0.0, 0.5, 0.5, 1.0, 1.0])
        self.assertEqual([float(row["t"]) for row in rows[:2]], [0.5, 1.0])

    def test_one_form_columns(self):
        (code, out, _) = run("grid", "--surface", "sphere", "--degree", "1",
                             "--x1", "0.5", "--y", "1,1", "--t", "0.5")
        self.assertEqual(out.split("\n")[0], cli.MatrixRecord.csv_header())


class TestQuotient(unittest.TestCase):

    def test_torus_long_time(self):
        (code, out, _) = run("quotient", "--model", "torus", "--x", "0.1,0.2", "--y", "0.5,0.5",
                             "--t", "20")
        self.assertEqual(code, 0)
        [row] = csv_rows(out)
        self.assertAlmostEqual(float(row["value"]), 1.0, places=7)

    def test_torus_uniform_limit_default_tolerance(self):
        (code, out, _) = run("quotient", "--model", "torus", "--lattice", "1,0,0,1",
                             "--x", "0,0", "--y", "0,0", "--t", "20")
        self.assertEqual(code, 0)
        [row] = csv_rows(out)
        self.assertLess(abs(float(row["value"]) - 1.0), 1e-10)

    def test_orientation_reversing(self):
        (code, out, err) = run("quotient", "--model", "klein-bottle", "--x", "0,0", "--y", "0,0",
                               "--t", "1")
        self.assertEqual(code, cli.EXIT_USAGE)
        self.assertIn("orientation", err)

    def test_hyperbolic_one_forms_unsupported(self):
        (code, _, err) = run("quotient", "--model", "hyperbolic-cylinder", "--degree", "1",
                             "--x", "0.5,0", "--y", "0.5,1", "--t", "1")
        self.assertEqual(code, cli.EXIT_USAGE)
        self.assertTrue(err.startswith("riemann-heat: error[unsupported]:"))

    def test_enumeration_overflow(self):
        (code, _, err) = run("quotient", "--model", "torus", "--lattice", "0.001,0,0,0.001",
                             "--x", "0,0", "--y", "0,0", "--t", "1")
        self.assertEqual(code, cli.EXIT_NONCONVERGENCE)
        self.assertTrue(err.startswith("riemann-heat: error[nonconvergence]:"))


class TestTransform(unittest.TestCase):

    def test_heat_forward(self):
        (code, out, _) = run("transform", "--profile", "heat", "--rho", "0.5:1.5:2", "--format", "json")
        self.assertEqual(code, 0)
        for line in out.strip().split("\n"):
            record = json.loads(line)
            self.assertAlmostEqual(record["value"], record["exact"], places=5)

    def test_inverse_needs_closed_form(self):
        (code, _, _) = run("transform", "--direction", "inverse", "--profile", "tanh")
        self.assertEqual(code, cli.EXIT_USAGE)


class TestVerify(unittest.TestCase):

    def test_tolerance_override_fails(self):
        (code, out, err) = run("verify", "--suite", "euclid-k1", "--tol", "1e-20")
        self.assertEqual(code, cli.EXIT_FAILED)
        self.assertIn("false", out)
        self.assertTrue(err.startswith("riemann-heat: error[verify]:"))

    def test_suite_passes(self):
        (code, out, _) = run("verify", "--suite", "euclid-k1")
        self.assertEqual(code, 0)
        self.assertTrue(all(row["passed"] == "true" for row in csv_rows(out)))

    def test_check_names_with_commas_stay_one_field(self):
        (code, out, _) = run("verify", "--suite", "euclid-k1")
        self.assertEqual(code, 0)
        rows = list(csv.reader(StringIO(out)))
        self.assertEqual(rows[0], ["suite", "name", "error", "tolerance", "passed"])
        self.assertTrue(all(len(row) == 5 for row in rows))
        self.assertTrue(any("," in row[1] for row in rows[1:]))

    def test_json_lines_parse(self):
        (code, out, _) = run("verify", "--suite", "euclid-k1", "--format", "json")
        self.assertEqual(code, 0)
        for line in out.strip().split("\n"):
            record = json.loads(line)
            self.assertEqual(list(record.keys()), ["suite", "name", "error", "tolerance", "passed"])
            self.assertIs(record["passed"], True)
