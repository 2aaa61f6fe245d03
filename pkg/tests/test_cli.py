"""
Command-line tests driven through typer's CliRunner.
"""
import json
import os
import sys
import tempfile
import unittest

import numpy as np
from typer.testing import CliRunner

# Ensure src is importable
_BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(_BASE_DIR, "src"))
sys.path.insert(0, _BASE_DIR)

from src.cli import app
from src.core.models import SsimConfig
from src.data.conversion import image_to_mesh
from src.data.image_io import read_image, write_image
from src.data.kernel import make_kernel_element
from src.data.mesh_io import read_fields, write_mesh_signal
from src.data.noise import add_gaussian_noise
from src.data.synthetic import disk_mask, ramp_square_image, random_delaunay_mesh
from src.fespace.fields import Dg0Field
from src.functionals.grid import GridImage
from src.mesh.trimesh import build_mesh

runner = CliRunner()


def invoke(*args):
    return runner.invoke(app, ["--log-level", "ERROR", *args])


def last_line(result) -> str:
    return [line for line in result.output.splitlines() if line.strip()][-1]


class CliTestCase(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()
        self.square = build_mesh([[0, 0], [1, 0], [1, 1], [0, 1]], [[0, 1, 2], [0, 2, 3]])

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)


class TestEvalAndMssim(CliTestCase):
    def test_eval_tv_on_square(self):
        write_mesh_signal(self.path("u.ply"), self.square, Dg0Field(self.square, [0.0, 1.0]))
        result = invoke("eval", "--in", self.path("u.ply"), "--regularizer", "tv", "--alpha1", "0.5")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertAlmostEqual(float(last_line(result)), 0.5 * np.sqrt(2.0), places=12)

    def test_eval_constant_fetgv(self):
        mesh = random_delaunay_mesh(20, seed=1)
        write_mesh_signal(self.path("c.ply"), mesh, np.full(mesh.n_triangles, 0.4))
        result = invoke("eval", "--in", self.path("c.ply"), "--regularizer", "fetgv", "--alpha1", "1", "--alpha0", "1")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(float(last_line(result)), 0.0)

    def test_mssim_of_identical_inputs(self):
        mesh = random_delaunay_mesh(30, seed=2)
        u = np.random.default_rng(0).uniform(size=mesh.n_triangles)
        write_mesh_signal(self.path("a.ply"), mesh, u)
        result = invoke("mssim", "--a", self.path("a.ply"), "--b", self.path("a.ply"), "--radius", "2")
        self.assertEqual(result.exit_code, 0, result.output)
        self.assertEqual(float(last_line(result)), 1.0)

    def test_mssim_record(self):
        img = ramp_square_image(8)
        write_image(self.path("a.pgm"), img)
        result = invoke("mssim", "--a", self.path("a.pgm"), "--b", self.path("a.pgm"), "--window", "5",
                        "--record", self.path("r.json"), "--name", "same")
        self.assertEqual(result.exit_code, 0, result.output)
        with open(self.path("r.json")) as f:
            record = json.load(f)
        self.assertEqual(record["name"], "same")
        self.assertEqual(record["ssim_fingerprint"], SsimConfig(mode="grid", window=5).fingerprint())

    def test_mssim_rejects_both_window_kinds(self):
        write_mesh_signal(self.path("u.ply"), self.square, Dg0Field(self.square, [0.0, 1.0]))
        result = invoke("mssim", "--a", self.path("u.ply"), "--b", self.path("u.ply"), "--radius", "1", "--window", "3")
        self.assertNotEqual(result.exit_code, 0)


class TestSolverCommands(CliTestCase):
    def test_denoise_constant_is_unchanged(self):
        mesh = random_delaunay_mesh(30, seed=3)
        write_mesh_signal(self.path("c.ply"), mesh, np.full(mesh.n_triangles, 0.3))
        result = invoke("denoise", "--in", self.path("c.ply"), "--regularizer", "fetgv", "--alpha1", "0.2",
                        "--alpha0", "0.4", "--out", self.path("out.ply"), "--report", self.path("rep.json"))
        self.assertEqual(result.exit_code, 0, result.output)
        _, (u,) = read_fields(self.path("out.ply"))
        np.testing.assert_array_equal(u.values, 0.3)
        with open(self.path("rep.json")) as f:
            report = json.load(f)
        self.assertTrue(report["converged"])
        self.assertEqual(report["reports"][0]["iterations"], 1)

    def test_no_convergence_writes_last_iterate(self):
        mesh, u = image_to_mesh(ramp_square_image(6))
        write_mesh_signal(self.path("u.ply"), mesh, add_gaussian_noise(u, 0.1, 0))
        result = invoke("denoise", "--in", self.path("u.ply"), "--regularizer", "tv", "--alpha1", "0.1",
                        "--tol", "1e-12", "--max-iter", "2", "--out", self.path("out.ply"))
        self.assertEqual(result.exit_code, 1)
        self.assertTrue(os.path.exists(self.path("out.ply")))

    def test_inpaint_with_image_mask(self):
        img = ramp_square_image(6)
        write_image(self.path("u.pgm"), img)
        mask = np.ones((6, 6))
        mask[2:4, 2:4] = 0.0
        write_image(self.path("m.pgm"), GridImage(mask))
        result = invoke("inpaint", "--in", self.path("u.pgm"), "--mask", self.path("m.pgm"), "--regularizer", "tv",
                        "--alpha1", "0.01", "--max-iter", "50", "--out", self.path("out.pgm"))
        self.assertIn(result.exit_code, (0, 1))
        (out,) = read_image(self.path("out.pgm"))
        self.assertEqual(out.shape, (6, 6))

    def test_inpaint_fills_hole_in_kernel_element(self):
        mesh = random_delaunay_mesh(110, seed=3)
        u, _ = make_kernel_element(mesh, 0.3, 0.5, -0.2)
        held = disk_mask(mesh, (0.5, 0.5), 0.18)
        write_mesh_signal(self.path("u.ply"), mesh, u)
        write_mesh_signal(self.path("m.ply"), mesh, (~held).astype(float))
        result = invoke("inpaint", "--in", self.path("u.ply"), "--mask", self.path("m.ply"), "--regularizer", "fetgv",
                        "--alpha1", "1", "--alpha0", "1", "--tol", "1e-8", "--out", self.path("o.ply"))
        self.assertEqual(result.exit_code, 0, result.output)
        _, (rec,) = read_fields(self.path("o.ply"))
        self.assertLessEqual(float(np.max(np.abs(rec.values[held] - u.values[held]))), 1e-4)

    def test_unknown_regularizer(self):
        write_mesh_signal(self.path("u.ply"), self.square, Dg0Field(self.square, [0.0, 1.0]))
        result = invoke("denoise", "--in", self.path("u.ply"), "--regularizer", "nope", "--alpha1", "1",
                        "--out", self.path("o.ply"))
        self.assertNotEqual(result.exit_code, 0)

    def test_bad_input_file(self):
        with open(self.path("bad.ply"), "w") as f:
            f.write("garbage\n")
        result = invoke("eval", "--in", self.path("bad.ply"), "--regularizer", "tv", "--alpha1", "1")
        self.assertEqual(result.exit_code, 1)
        result = invoke("eval", "--in", self.path("missing.ply"), "--regularizer", "tv", "--alpha1", "1")
        self.assertEqual(result.exit_code, 1)


class TestDataCommands(CliTestCase):
    def test_noise_is_seeded(self):
        mesh = random_delaunay_mesh(20, seed=4)
        write_mesh_signal(self.path("z.ply"), mesh, np.zeros(mesh.n_triangles))
        result = invoke("noise", "--in", self.path("z.ply"), "--sigma", "0.1", "--seed", "7", "--out", self.path("n.ply"))
        self.assertEqual(result.exit_code, 0, result.output)
        _, (noisy,) = read_fields(self.path("n.ply"))
        expected = add_gaussian_noise(Dg0Field.zeros(mesh), 0.1, 7)
        np.testing.assert_array_equal(noisy.values, expected.values)

    def test_convert_round_trip(self):
        values = np.random.default_rng(5).integers(0, 256, size=(4, 3)) / 255.0
        write_image(self.path("a.pgm"), GridImage(values))
        result = invoke("convert", "--image", self.path("a.pgm"), "--out", self.path("a.ply"))
        self.assertEqual(result.exit_code, 0, result.output)
        mesh, (u,) = read_fields(self.path("a.ply"))
        self.assertEqual(mesh.n_triangles, 24)
        result = invoke("convert", "--mesh", self.path("a.ply"), "--out", self.path("b.pgm"))
        self.assertEqual(result.exit_code, 0, result.output)
        (back,) = read_image(self.path("b.pgm"))
        np.testing.assert_allclose(back.values, values, atol=1e-12)

    def test_convert_needs_exactly_one_source(self):
        result = invoke("convert", "--out", self.path("x.ply"))
        self.assertEqual(result.exit_code, 1)

    def test_kernel_element(self):
        write_mesh_signal(self.path("sq.ply"), self.square, np.zeros(2))
        result = invoke("kernel", "--mesh", self.path("sq.ply"), "--abc", "1,2,3", "--out", self.path("k.ply"))
        self.assertEqual(result.exit_code, 0, result.output)
        _, (u,) = read_fields(self.path("k.ply"))
        np.testing.assert_allclose(u.values, [3.5, 3.5])
        result = invoke("kernel", "--mesh", self.path("sq.ply"), "--abc", "1,2", "--out", self.path("k.ply"))
        self.assertEqual(result.exit_code, 1)


class TestCompare(CliTestCase):
    def write(self, name, records):
        with open(self.path(name), "w") as f:
            json.dump(records, f)
        return self.path(name)

    def test_ranking(self):
        fp = SsimConfig().fingerprint()
        a = self.write("a.json", {"name": "tv", "mssim": 0.6, "ssim_fingerprint": fp})
        b = self.write("b.json", {"scores": [{"name": "fetgv", "mssim": 0.8, "ssim_fingerprint": fp}]})
        result = invoke("compare", "--reports", a, "--reports", b)
        self.assertEqual(result.exit_code, 0, result.output)
        lines = [line for line in result.output.splitlines() if "\t" in line]
        self.assertEqual([line.split("\t")[0] for line in lines], ["fetgv", "tv"])

    def test_mixed_windows(self):
        a = self.write("a.json", {"name": "tv", "mssim": 0.6, "ssim_fingerprint": SsimConfig(radius=2).fingerprint()})
        b = self.write("b.json", {"name": "fetgv", "mssim": 0.8, "ssim_fingerprint": SsimConfig(radius=4).fingerprint()})
        result = invoke("compare", "--reports", a, "--reports", b)
        self.assertNotEqual(result.exit_code, 0)


if __name__ == "__main__":
    unittest.main()
