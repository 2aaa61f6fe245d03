"""
Unit tests for SSIM / MSSIM on meshes and grids and for score comparison.
"""
import os
import sys
import unittest

import numpy as np

# Ensure src is importable
_BASE_DIR = os.path.dirname(os.path.dirname(os.path.abspath(__file__)))
sys.path.insert(0, os.path.join(_BASE_DIR, "src"))
sys.path.insert(0, _BASE_DIR)

from src.core.errors import MeshMismatch, SizeMismatch, WindowMismatch
from src.core.models import SsimConfig
from src.data.conversion import image_to_mesh
from src.data.synthetic import ramp_square_image, random_delaunay_mesh
from src.fespace.fields import Dg0Field
from src.functionals.grid import GridImage
from src.mesh.trimesh import build_mesh
from src.quality.ssim import (
    ScoreRecord,
    clamp_moments,
    compare_scores,
    mesh_ssim_map,
    mesh_window_stats,
    mssim,
    psnr,
    ssim_at,
)


class TestMeshSsim(unittest.TestCase):
    def setUp(self):
        self.mesh = random_delaunay_mesh(40, seed=3)
        self.rng = np.random.default_rng(0)

    def random_field(self):
        return Dg0Field(self.mesh, self.rng.uniform(size=self.mesh.n_triangles))

    def test_identity_and_symmetry(self):
        cfg = SsimConfig(radius=2)
        for _ in range(50):
            u, v = self.random_field(), self.random_field()
            self.assertEqual(mssim(u, u, cfg), 1.0)
            self.assertEqual(mssim(u, v, cfg), mssim(v, u, cfg))
            self.assertLessEqual(mssim(u, v, cfg), 1.0)

    def test_area_weighted_window_stats(self):
        # areas 1 and 3, values 0 and 4
        mesh = build_mesh([[0, 0], [1, 0], [0, 2], [3, 2]], [[0, 1, 2], [1, 3, 2]])
        np.testing.assert_allclose(mesh.areas, [1.0, 3.0])
        u = Dg0Field(mesh, [0.0, 4.0])
        mu_u, mu_v, var_u, var_v, cov = mesh_window_stats(u, u, 0, 1)
        self.assertAlmostEqual(mu_u, 3.0)
        self.assertAlmostEqual(var_u, 3.0)
        self.assertAlmostEqual(cov, var_v)
        # radius 0 sees a single triangle
        self.assertAlmostEqual(mesh_window_stats(u, u, 0, 0)[0], 0.0)

    def test_vectorized_map_matches_pointwise(self):
        cfg = SsimConfig(radius=2)
        u, v = self.random_field(), self.random_field()
        values = mesh_ssim_map(u, v, cfg)
        for t in range(0, self.mesh.n_triangles, 5):
            self.assertAlmostEqual(float(values[t]), ssim_at(u, v, t, cfg), places=10)

    def test_only_identical_fields_score_one(self):
        cfg = SsimConfig(radius=2)
        u = self.random_field()
        self.assertEqual(mssim(u, u, cfg), 1.0)
        perturbed = Dg0Field(self.mesh, u.values + 0.05 * self.rng.normal(size=self.mesh.n_triangles))
        shifted = Dg0Field(self.mesh, u.values + 0.1)
        for v in (perturbed, shifted):
            score = mssim(u, v, cfg)
            self.assertLess(score, 1.0)
            self.assertTrue(np.all(mesh_ssim_map(u, v, cfg) <= 1.0 + 1e-12))

    def test_nearly_constant_windows_stay_bounded(self):
        cfg = SsimConfig(radius=2)
        base = np.full(self.mesh.n_triangles, 0.7)
        u = Dg0Field(self.mesh, base + 1e-9 * self.rng.uniform(size=self.mesh.n_triangles))
        v = Dg0Field(self.mesh, base + 1e-9 * self.rng.uniform(size=self.mesh.n_triangles))
        values = mesh_ssim_map(u, v, cfg)
        self.assertTrue(np.all(np.isfinite(values)))
        self.assertTrue(np.all(np.abs(values) <= 1.0 + 1e-12))
        np.testing.assert_array_equal(mesh_ssim_map(u, u, cfg), 1.0)

    def test_clamped_moments(self):
        var_u, var_v, cov = clamp_moments(np.array([-1e-18, 0.04]), np.array([0.2, 0.01]), np.array([0.3, -0.5]))
        np.testing.assert_array_equal(var_u, [0.0, 0.04])
        np.testing.assert_array_equal(var_v, [0.2, 0.01])
        np.testing.assert_allclose(cov, [0.0, -0.02], atol=1e-15)

    def test_mesh_mismatch(self):
        other = random_delaunay_mesh(40, seed=4)
        with self.assertRaises(MeshMismatch):
            mssim(self.random_field(), Dg0Field.zeros(other))
        with self.assertRaises(MeshMismatch):
            mssim(self.random_field(), GridImage(np.zeros((3, 3))))


class TestGridSsim(unittest.TestCase):
    def test_identity(self):
        img = ramp_square_image(16)
        self.assertEqual(mssim(img, img, SsimConfig(mode="grid")), 1.0)

    def test_noise_lowers_score(self):
        img = ramp_square_image(16)
        rng = np.random.default_rng(1)
        slightly = GridImage(img.values + 0.02 * rng.normal(size=img.shape))
        heavily = GridImage(img.values + 0.3 * rng.normal(size=img.shape))
        cfg = SsimConfig(mode="grid", window=7)
        self.assertGreater(mssim(img, slightly, cfg), mssim(img, heavily, cfg))

    def test_pixel_mesh_scored_on_grid(self):
        clean = ramp_square_image(12)
        noisy = GridImage(clean.values + 0.1 * np.random.default_rng(2).normal(size=clean.shape))
        mesh, u = image_to_mesh(clean)
        _, v = image_to_mesh(noisy)
        v = Dg0Field(mesh, v.values)
        cfg = SsimConfig(mode="grid", window=5)
        self.assertAlmostEqual(mssim(u, v, cfg), mssim(clean, noisy, cfg), places=12)

    def test_size_mismatch(self):
        with self.assertRaises(SizeMismatch):
            mssim(GridImage(np.zeros((4, 4))), GridImage(np.zeros((4, 5))))

    def test_even_window_rejected(self):
        with self.assertRaises(ValueError):
            SsimConfig(mode="grid", window=10)


class TestPsnr(unittest.TestCase):
    def test_identical_is_infinite(self):
        img = ramp_square_image(8)
        self.assertEqual(psnr(img, img), float("inf"))

    def test_known_error(self):
        a = GridImage(np.zeros((4, 4)))
        b = GridImage(np.full((4, 4), 0.1))
        self.assertAlmostEqual(psnr(a, b), 20.0)


class TestCompareScores(unittest.TestCase):
    def test_ranked_best_first(self):
        fp = SsimConfig().fingerprint()
        ranked = compare_scores([
            ScoreRecord(name="tv", mssim=0.7, ssim_fingerprint=fp),
            {"name": "fetgv", "mssim": 0.9, "ssim_fingerprint": fp},
            ScoreRecord(name="lapfetgv", mssim=0.8, ssim_fingerprint=fp),
        ])
        self.assertEqual([r.name for r in ranked], ["fetgv", "lapfetgv", "tv"])

    def test_mixed_windows_rejected(self):
        with self.assertRaises(WindowMismatch):
            compare_scores([
                ScoreRecord(name="tv", mssim=0.7, ssim_fingerprint=SsimConfig(radius=2).fingerprint()),
                ScoreRecord(name="fetgv", mssim=0.9, ssim_fingerprint=SsimConfig(radius=4).fingerprint()),
            ])


if __name__ == "__main__":
    unittest.main()
