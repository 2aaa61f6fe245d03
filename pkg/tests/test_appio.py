"""
Unit tests for image/mesh conversion, file I/O, noise, kernel elements, synthetic cases and tuning.
"""
import os
import sys
import tempfile
import unittest

import numpy as np

# Ensure src is importable
_BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(_BASE_DIR, "src"))
sys.path.insert(0, _BASE_DIR)

from src.core.errors import MeshFormatError, MeshMismatch, NotPixelSplit, SurfaceNotSupported
from src.core.models import ParamSearchSpec, SsimConfig, StopCriteria, TgvParams
from src.data.conversion import channels_to_mesh, image_to_mesh, mesh_to_image, pixel_split_mesh
from src.data.image_io import is_image_path, read_image, write_image
from src.data.kernel import make_kernel_element
from src.data.mesh_io import read_fields, read_mask, read_mesh_signal, write_mesh_signal
from src.data.noise import add_gaussian_noise
from src.data.synthetic import (
    disk_mask,
    height_field_surface,
    inpainting_case,
    random_delaunay_mesh,
    ramp_square_image,
    surface_rgb_case,
    unstructured_case,
)
from src.experiments.tuning import reconstruct, tune_parameters
from src.fespace.fields import Dg0Field
from src.fespace.operators import jump_field
from src.functionals.grid import GridImage
from src.mesh.trimesh import build_mesh

SQRT3 = np.sqrt(3.0)


class TestConversion(unittest.TestCase):
    def test_two_by_two_image(self):
        img = GridImage(np.array([[0.1, 0.2], [0.3, 0.4]]))
        mesh, u = image_to_mesh(img)
        self.assertEqual(mesh.n_triangles, 8)
        self.assertEqual(mesh.n_vertices, 9)
        self.assertEqual(mesh.pixel_grid, (2, 2, 1.0))
        np.testing.assert_array_equal(u.values, [0.1, 0.1, 0.2, 0.2, 0.3, 0.3, 0.4, 0.4])
        np.testing.assert_allclose(mesh.areas, 0.5)

    def test_round_trip(self):
        img = GridImage(np.random.default_rng(0).uniform(size=(5, 3)))
        mesh, u = image_to_mesh(img)
        np.testing.assert_array_equal(mesh_to_image(mesh, u).values, img.values)

    def test_pixel_average(self):
        mesh = pixel_split_mesh(2, 2)
        out = mesh_to_image(mesh, Dg0Field(mesh, np.tile([0.0, 1.0], 4)))
        np.testing.assert_array_equal(out.values, 0.5)

    def test_unstructured_mesh_rejected(self):
        mesh = random_delaunay_mesh(20, seed=0)
        with self.assertRaises(NotPixelSplit):
            mesh_to_image(mesh, Dg0Field.zeros(mesh))

    def test_channels_share_mesh(self):
        a, b = GridImage(np.zeros((3, 3))), GridImage(np.ones((3, 3)))
        mesh, fields = channels_to_mesh([a, b])
        self.assertIs(fields[0].mesh, fields[1].mesh)
        with self.assertRaises(MeshMismatch):
            channels_to_mesh([a, GridImage(np.zeros((3, 4)))])


class TestMeshIO(unittest.TestCase):
    def setUp(self):
        self.tmp = tempfile.TemporaryDirectory()

    def tearDown(self):
        self.tmp.cleanup()

    def path(self, name):
        return os.path.join(self.tmp.name, name)

    def test_planar_round_trip_is_exact(self):
        mesh = random_delaunay_mesh(30, seed=1)
        u = Dg0Field(mesh, np.random.default_rng(1).normal(size=mesh.n_triangles) / 3.0)
        write_mesh_signal(self.path("u.ply"), mesh, u)
        back, fields = read_fields(self.path("u.ply"))
        self.assertTrue(back.same_as(mesh))
        np.testing.assert_array_equal(back.vertices, mesh.vertices)
        np.testing.assert_array_equal(fields[0].values, u.values)

    def test_pixel_grid_and_channels(self):
        mesh, fields = surface_rgb_case(4)
        write_mesh_signal(self.path("rgb.ply"), mesh, fields)
        back, payload, names = read_mesh_signal(self.path("rgb.ply"))
        self.assertEqual(names, ["red", "green", "blue"])
        self.assertTrue(back.is_surface)
        np.testing.assert_array_equal(payload[:, 2], fields[2].values)

        img_mesh, u = image_to_mesh(ramp_square_image(4))
        write_mesh_signal(self.path("img.ply"), img_mesh, u)
        back, _ = read_fields(self.path("img.ply"))
        self.assertEqual(back.pixel_grid, img_mesh.pixel_grid)

    def test_mask(self):
        mesh = random_delaunay_mesh(20, seed=2)
        observed = np.arange(mesh.n_triangles) % 3 != 0
        write_mesh_signal(self.path("mask.ply"), mesh, observed.astype(float))
        np.testing.assert_array_equal(read_mask(self.path("mask.ply"), mesh), observed)
        with self.assertRaises(MeshMismatch):
            read_mask(self.path("mask.ply"), random_delaunay_mesh(20, seed=3))

    def test_payload_shape_checked(self):
        mesh = random_delaunay_mesh(20, seed=2)
        with self.assertRaises(MeshMismatch):
            write_mesh_signal(self.path("bad.ply"), mesh, np.zeros(mesh.n_triangles + 1))

    def test_malformed_files(self):
        with open(self.path("junk.ply"), "w") as f:
            f.write("not a mesh\n")
        with self.assertRaises(MeshFormatError):
            read_fields(self.path("junk.ply"))
        with open(self.path("short.ply"), "w") as f:
            f.write("ply\nformat ascii 1.0\nelement vertex 3\nproperty double x\nproperty double y\n"
                    "element face 1\nproperty list uchar int vertex_indices\nend_header\n0 0\n1 0\n")
        with self.assertRaises(MeshFormatError):
            read_fields(self.path("short.ply"))
        with self.assertRaises(MeshFormatError):
            read_fields(self.path("missing.ply"))


class TestImageIO(unittest.TestCase):
    def test_gray_round_trip(self):
        values = np.random.default_rng(3).integers(0, 256, size=(6, 4)) / 255.0
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "a.pgm")
            write_image(path, GridImage(values))
            (back,) = read_image(path)
        np.testing.assert_allclose(back.values, values, atol=1e-12)

    def test_rgb_round_trip(self):
        rng = np.random.default_rng(4)
        channels = [GridImage(rng.integers(0, 256, size=(3, 5)) / 255.0) for _ in range(3)]
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "a.ppm")
            write_image(path, channels)
            back = read_image(path)
        self.assertEqual(len(back), 3)
        for a, b in zip(back, channels):
            np.testing.assert_allclose(a.values, b.values, atol=1e-12)

    def test_values_are_clipped(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = os.path.join(tmp, "c.pgm")
            write_image(path, GridImage(np.array([[-0.5, 2.0], [0.0, 1.0]])))
            (back,) = read_image(path)
        np.testing.assert_allclose(back.values, [[0.0, 1.0], [0.0, 1.0]])

    def test_suffixes(self):
        self.assertTrue(is_image_path("x.PGM"))
        self.assertFalse(is_image_path("x.ply"))


class TestNoise(unittest.TestCase):
    def test_zero_sigma_is_identity(self):
        img = ramp_square_image(8)
        np.testing.assert_array_equal(add_gaussian_noise(img, 0.0, 1).values, img.values)

    def test_seeded(self):
        mesh = random_delaunay_mesh(30, seed=0)
        u = Dg0Field.zeros(mesh)
        a = add_gaussian_noise(u, 0.1, 7)
        b = add_gaussian_noise(u, 0.1, 7)
        c = add_gaussian_noise(u, 0.1, 8)
        np.testing.assert_array_equal(a.values, b.values)
        self.assertFalse(np.array_equal(a.values, c.values))

    def test_empirical_deviation(self):
        img = GridImage(np.zeros((400, 250)))
        noisy = add_gaussian_noise(img, 0.1, 0)
        self.assertLess(abs(float(np.std(noisy.values)) - 0.1), 0.002)

    def test_negative_sigma(self):
        with self.assertRaises(ValueError):
            add_gaussian_noise(ramp_square_image(4), -1.0, 0)


class TestKernelElement(unittest.TestCase):
    def test_constant(self):
        mesh = random_delaunay_mesh(20, seed=5)
        u, w = make_kernel_element(mesh, 5.0, 0.0, 0.0)
        np.testing.assert_array_equal(u.values, 5.0)
        np.testing.assert_array_equal(w.values, 0.0)

    def test_linear_jump_equals_gap(self):
        mesh = build_mesh([[0, 0], [1, 0], [0.5, SQRT3 / 2], [0.5, -SQRT3 / 2]], [[0, 1, 2], [0, 3, 1]])
        u, _ = make_kernel_element(mesh, 0.0, 0.0, 1.0)
        self.assertAlmostEqual(float(jump_field(u).values[0]), 1.0 / SQRT3)

    def test_pixel_diagonals_do_not_jump(self):
        mesh = pixel_split_mesh(3, 3)
        u, _ = make_kernel_element(mesh, 0.0, 1.0, 1.0)
        np.testing.assert_allclose(u.values[0::2], u.values[1::2], atol=1e-12)

    def test_surface_rejected(self):
        with self.assertRaises(SurfaceNotSupported):
            make_kernel_element(height_field_surface(3), 1.0, 0.0, 0.0)


class TestSyntheticCases(unittest.TestCase):
    def test_ramp_square_range(self):
        img = ramp_square_image(16)
        self.assertEqual(img.shape, (16, 16))
        self.assertGreaterEqual(img.values.min(), 0.0)
        self.assertLessEqual(img.values.max(), 1.0)

    def test_random_mesh_is_deterministic(self):
        a, b = random_delaunay_mesh(50, seed=9), random_delaunay_mesh(50, seed=9)
        self.assertTrue(a.same_as(b))
        self.assertAlmostEqual(a.total_area, 1.0, places=9)

    def test_unstructured_case(self):
        mesh, u = unstructured_case(200, seed=1)
        self.assertEqual(u.values.shape, (mesh.n_triangles,))
        self.assertAlmostEqual(mesh.total_area, 32.0 * 32.0, places=6)

    def test_inpainting_case(self):
        mesh, u, observed = inpainting_case(16)
        self.assertEqual(observed.shape, (mesh.n_triangles,))
        self.assertTrue(np.any(~observed))
        np.testing.assert_array_equal(observed[0::2], observed[1::2])

    def test_disk_mask(self):
        mesh = random_delaunay_mesh(100, seed=2)
        held = disk_mask(mesh, (0.5, 0.5), 0.2)
        self.assertTrue(np.any(held))
        self.assertTrue(np.all(np.linalg.norm(mesh.centroids[held, :2] - 0.5, axis=1) <= 0.2))


class TestTuning(unittest.TestCase):
    def setUp(self):
        clean = ramp_square_image(6)
        self.mesh, self.truth = image_to_mesh(clean)
        self.noisy = add_gaussian_noise(self.truth, 0.1, 0)
        self.stop = StopCriteria(max_iter=100)

    def test_single_evaluation_is_midpoint(self):
        spec = ParamSearchSpec(regularizer="tv", max_evaluations=1, stop=self.stop, ssim=SsimConfig(radius=2))
        result = tune_parameters(self.noisy, self.truth, spec)
        self.assertEqual(len(result.trace), 1)
        self.assertAlmostEqual(result.alpha1, np.sqrt(1e-3), places=12)
        self.assertEqual(result.alpha0, 0.0)
        self.assertEqual(result.ssim_fingerprint, spec.ssim.fingerprint())

    def test_budget_is_respected(self):
        spec = ParamSearchSpec(regularizer="fetgv", max_evaluations=4, stop=self.stop, ssim=SsimConfig(radius=2))
        result = tune_parameters(self.noisy, self.truth, spec)
        self.assertLessEqual(len(result.trace), 4)
        self.assertEqual(result.best_mssim, max(e.mssim for e in result.trace if e.mssim is not None))

    def test_clean_data_prefers_small_weight(self):
        spec = ParamSearchSpec(regularizer="tv", max_evaluations=5, stop=self.stop, ssim=SsimConfig(radius=2))
        result = tune_parameters(self.truth, self.truth, spec)
        self.assertLess(result.alpha1, np.sqrt(1e-3))

    def test_reconstruct_channels(self):
        rec = reconstruct([self.noisy, self.noisy], "tv", TgvParams(alpha1=0.05, alpha0=0.1), stop=self.stop, strict=False)
        self.assertEqual(len(rec.channels), 2)
        np.testing.assert_array_equal(rec.channels[0].values, rec.channels[1].values)
        self.assertEqual(rec.iterations, sum(r.iterations for r in rec.reports))

    def test_grid_reconstruction_lives_on_pixels(self):
        rec = reconstruct(self.noisy, "gridtgv", TgvParams(alpha1=0.05, alpha0=0.1), stop=self.stop, strict=False)
        u = rec.channels[0].values
        np.testing.assert_array_equal(u[0::2], u[1::2])


if __name__ == "__main__":
    unittest.main()
