import json
import os
import time
from typing import Dict, List, Optional

import numpy as np

from .core.config import (
    EXPERIMENT_CASES_PATH,
    OUTPUT_DIR,
    ensure_output_dirs,
)
from .core.errors import FetgvError
from .core.models import ParamSearchSpec, PenaltyParams, SsimConfig, StopCriteria, TgvParams
from .data import synthetic
from .data.conversion import image_to_mesh
from .data.mesh_io import write_mesh_signal
from .data.noise import add_gaussian_noise
from .experiments.tuning import reconstruct, score_channels, tune_parameters
from .quality.ssim import ScoreRecord, compare_scores


def load_cases() -> Dict:
    """Loads the experiment presets from the templates directory."""
    if os.path.exists(EXPERIMENT_CASES_PATH):
        try:
            with open(EXPERIMENT_CASES_PATH, "r", encoding="utf-8") as f:
                return json.load(f)
        except Exception as e:
            print(f"Error reading {EXPERIMENT_CASES_PATH}: {e}")
    return {}


def build_case_data(preset: Dict, size: int):
    """Returns (mesh, ground-truth channels, observed mask or None)."""
    kind = preset["data"]
    if kind == "ramp_square":
        mesh, u = image_to_mesh(synthetic.ramp_square_image(size))
        return mesh, [u], None
    if kind == "unstructured":
        mesh, u = synthetic.unstructured_case(size, seed=preset.get("seed", 0))
        return mesh, [u], None
    if kind == "surface_rgb":
        mesh, channels = synthetic.surface_rgb_case(size)
        return mesh, channels, None
    if kind == "inpainting":
        mesh, u, observed = synthetic.inpainting_case(size)
        return mesh, [u], observed
    raise ValueError(f"Unknown experiment data '{kind}'")


def run_case(case_id: int, size: Optional[int] = None, budget: Optional[int] = None,
             out_dir: Optional[str] = None) -> Optional[Dict]:
    """
    Desk-scale experiment: synthesize the case data, add noise, tune every regularizer
    by MSSIM, write the reconstructions and a JSON summary. Returns the summary.
    """
    cases = load_cases()
    preset = cases.get(str(case_id))
    if not preset:
        print(f"❌ Experiment case '{case_id}' not found in {EXPERIMENT_CASES_PATH}.")
        return None

    size = size or preset["size"]
    budget = budget or preset["budget"]
    out_dir = out_dir or OUTPUT_DIR
    meshes_dir = os.path.join(out_dir, "meshes")
    reports_dir = os.path.join(out_dir, "reports")
    if out_dir == OUTPUT_DIR:
        ensure_output_dirs()
    os.makedirs(meshes_dir, exist_ok=True)
    os.makedirs(reports_dir, exist_ok=True)

    print(f"\n🚀 Starting Experiment Case {case_id}: {preset['description']}")
    print(f"   Size → {size} | Budget:{budget} | Regularizers:{', '.join(preset['regularizers'])}")

    # ── 1. DATA ────────────────────────────────────────────────────────────────
    print(f"\n📂 Building case data…")
    mesh, truth, observed = build_case_data(preset, size)
    sigma = float(preset.get("noise_sigma", 0.0))
    seed = int(preset.get("seed", 0))
    noisy = [add_gaussian_noise(c, sigma, seed + k) for k, c in enumerate(truth)]
    print(f"   ✅ {mesh.n_triangles} triangles, {len(truth)} channel(s), noise σ={sigma} (seed {seed})")
    prefix = os.path.join(meshes_dir, f"case{case_id}")
    write_mesh_signal(f"{prefix}_truth.ply", mesh, truth)
    write_mesh_signal(f"{prefix}_noisy.ply", mesh, noisy)
    if observed is not None:
        write_mesh_signal(f"{prefix}_mask.ply", mesh, observed.astype(float))
        print(f"   🕳️  {int((~observed).sum())} triangle(s) hidden for inpainting")

    # ── 2. TUNE + RECONSTRUCT ──────────────────────────────────────────────────
    ssim = SsimConfig(**preset.get("ssim", {}))
    penalties = PenaltyParams.uniform(float(preset.get("penalty", 10.0)))
    stop = StopCriteria()
    records: List[ScoreRecord] = []
    tuning: Dict[str, Dict] = {}
    for regularizer in preset["regularizers"]:
        print(f"\n🧮 Tuning {regularizer}…")
        started = time.time()
        spec = ParamSearchSpec(regularizer=regularizer, max_evaluations=budget,
                               penalties=penalties, stop=stop, ssim=ssim)
        try:
            result = tune_parameters(noisy, truth, spec, mask=observed)
            if not np.isfinite(result.best_mssim):
                print(f"   ❌ Every evaluation failed for {regularizer}.")
                continue
            rec = reconstruct(noisy, regularizer, TgvParams(alpha1=result.alpha1, alpha0=result.alpha0),
                              penalties, stop, mask=observed, strict=False)
        except FetgvError as e:
            print(f"   ❌ {regularizer} failed: {e}")
            continue
        score = score_channels(rec.channels, truth, ssim)
        out_path = write_mesh_signal(f"{prefix}_{regularizer}.ply", mesh, rec.channels)
        records.append(ScoreRecord(name=regularizer, mssim=score, ssim_fingerprint=ssim.fingerprint(),
                                   alpha1=result.alpha1, alpha0=result.alpha0))
        tuning[regularizer] = result.model_dump()
        print(f"   ✅ α1={result.alpha1:.4g} α0={result.alpha0:.4g} → MSSIM {score:.5f} "
              f"({len(result.trace)} evaluations, {time.time() - started:.1f}s)")
        print(f"   💾 {out_path}")

    # ── 3. SUMMARY ─────────────────────────────────────────────────────────────
    ranking = compare_scores(records)
    summary = {
        "case": case_id,
        "description": preset["description"],
        "size": size,
        "n_triangles": mesh.n_triangles,
        "noise_sigma": sigma,
        "seed": seed,
        "ssim_fingerprint": ssim.fingerprint(),
        "scores": [r.model_dump() for r in ranking],
        "tuning": tuning,
    }
    summary_path = os.path.join(reports_dir, f"case{case_id}_summary.json")
    with open(summary_path, "w", encoding="utf-8") as f:
        json.dump(summary, f, indent=2)

    print(f"\n🏁 Ranking (MSSIM):")
    for r in ranking:
        print(f"   {r.name:<9} {r.mssim:.5f}")
    print(f"   📄 Summary → {summary_path}")
    return summary


__all__ = ["load_cases", "build_case_data", "run_case"]
