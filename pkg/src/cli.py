import json
import logging
import os
from typing import List, Optional, Tuple

import numpy as np
import typer
from pydantic import ValidationError
from rich.console import Console
from rich.logging import RichHandler

from . import workflow
from .core.config import DEFAULT_NOISE_SIGMA, DEFAULT_PENALTY, LOG_LEVEL, SURFACE_PENALTY
from .core.errors import FetgvError, MeshMismatch, NotPixelSplit
from .core.models import ParamSearchSpec, PenaltyParams, SsimConfig, StopCriteria, TgvParams
from .data.conversion import channels_to_mesh, mesh_to_image
from .data.image_io import is_image_path, read_image, write_image
from .data.kernel import make_kernel_element
from .data.mesh_io import read_fields, read_mask, read_mesh_signal, write_mesh_signal
from .data.noise import add_gaussian_noise
from .experiments.tuning import reconstruct, score_channels, tune_parameters
from .fespace.fields import Dg0Field
from .functionals.fetgv import regularizer_value
from .functionals.grid import grid_tgv_value
from .mesh.trimesh import TriMesh
from .quality.ssim import ScoreRecord, compare_scores

app = typer.Typer(add_completion=False, help="FE-TGV denoising, inpainting and evaluation on triangle meshes.")
console = Console()
err_console = Console(stderr=True)

REGULARIZERS = ("tv", "fetgv", "lapfetgv", "gridtgv")


@app.callback()
def main(log_level: str = typer.Option(LOG_LEVEL, "--log-level", help="Logging level")):
    logging.basicConfig(
        level=log_level.upper(),
        format="%(message)s",
        handlers=[RichHandler(console=err_console, show_path=False)],
        force=True,
    )


def _fail(message: str, code: int = 1):
    err_console.print(f"❌ {message}", highlight=False)
    raise typer.Exit(code=code)


def _load(path: str) -> Tuple[TriMesh, List[Dg0Field]]:
    """Mesh and channels of a mesh+signal file, or of a PGM/PPM image on its pixel split."""
    if not os.path.exists(path):
        raise FileNotFoundError(f"No such file: {path}")
    if is_image_path(path):
        return channels_to_mesh(read_image(path))
    return read_fields(path)


def _save(path: str, mesh: TriMesh, channels: List[Dg0Field]) -> str:
    if is_image_path(path):
        return write_image(path, [mesh_to_image(mesh, c) for c in channels])
    return write_mesh_signal(path, mesh, channels)


def _load_mask(path: str, mesh: TriMesh) -> np.ndarray:
    """Observed triangles: a one-channel container, or an image whose nonzero pixels are observed."""
    if is_image_path(path):
        img = read_image(path)[0]
        if mesh.pixel_grid is None or img.shape != (int(mesh.pixel_grid[0]), int(mesh.pixel_grid[1])):
            raise MeshMismatch("Mask image does not match the data raster")
        return np.repeat(img.values.ravel() > 0.5, 2)
    return read_mask(path, mesh)


def _regularizer(name: str) -> str:
    if name not in REGULARIZERS:
        raise typer.BadParameter(f"must be one of {', '.join(REGULARIZERS)}", param_hint="--regularizer")
    return name


def _penalties(mesh: TriMesh, lambda0, lambda1, lambda2) -> PenaltyParams:
    default = SURFACE_PENALTY if mesh.is_surface else DEFAULT_PENALTY
    return PenaltyParams(
        lambda0=default if lambda0 is None else lambda0,
        lambda1=default if lambda1 is None else lambda1,
        lambda2=default if lambda2 is None else lambda2,
    )


def _ssim_config(radius: Optional[int], window: Optional[int], c1: Optional[float], c2: Optional[float]) -> SsimConfig:
    if radius is not None and window is not None:
        raise typer.BadParameter("give either --radius or --window, not both")
    kwargs = {}
    if window is not None:
        kwargs.update(mode="grid", window=window)
    if radius is not None:
        kwargs.update(mode="mesh", radius=radius)
    if c1 is not None:
        kwargs["c1"] = c1
    if c2 is not None:
        kwargs["c2"] = c2
    return SsimConfig(**kwargs)


def _run_solver(in_path, mask_path, regularizer, alpha1, alpha0, lambda0, lambda1, lambda2,
                tol, max_iter, out, report_path):
    try:
        regularizer = _regularizer(regularizer)
        mesh, channels = _load(in_path)
        mask = _load_mask(mask_path, mesh) if mask_path else None
        p = TgvParams(alpha1=alpha1, alpha0=alpha0)
        pp = _penalties(mesh, lambda0, lambda1, lambda2)
        stop = StopCriteria(tol_primal=tol, tol_dual=tol, max_iter=max_iter)
        console.print(f"🧮 {regularizer} on {mesh.n_triangles} triangles, {len(channels)} channel(s)")
        rec = reconstruct(channels, regularizer, p, pp, stop, mask=mask, strict=False)
        _save(out, mesh, rec.channels)
        console.print(f"💾 {out}")
        if report_path:
            payload = {
                "regularizer": regularizer,
                "params": p.model_dump(),
                "converged": rec.converged,
                "reports": [r.model_dump() for r in rec.reports],
            }
            os.makedirs(os.path.dirname(os.path.abspath(report_path)), exist_ok=True)
            with open(report_path, "w", encoding="utf-8") as f:
                json.dump(payload, f, indent=2)
            console.print(f"📄 {report_path}")
    except (FetgvError, ValidationError, ValueError, FileNotFoundError) as e:
        _fail(f"{type(e).__name__}: {e}")
    if not rec.converged:
        _fail(f"NoConvergence: no convergence within {max_iter} iterations (last iterate written to {out})")
    console.print(f"✅ Converged in {rec.iterations} iteration(s)")


@app.command()
def denoise(
    in_path: str = typer.Option(..., "--in", help="Mesh+signal file or PGM/PPM image"),
    regularizer: str = typer.Option(..., "--regularizer", help="tv | fetgv | lapfetgv | gridtgv"),
    alpha1: float = typer.Option(..., "--alpha1"),
    alpha0: float = typer.Option(0.0, "--alpha0"),
    lambda0: Optional[float] = typer.Option(None, "--lambda0"),
    lambda1: Optional[float] = typer.Option(None, "--lambda1"),
    lambda2: Optional[float] = typer.Option(None, "--lambda2"),
    tol: float = typer.Option(1e-4, "--tol"),
    max_iter: int = typer.Option(2000, "--max-iter"),
    out: str = typer.Option(..., "--out"),
    report: Optional[str] = typer.Option(None, "--report", help="JSON solve report"),
):
    """Denoise every channel with the chosen regularizer."""
    _run_solver(in_path, None, regularizer, alpha1, alpha0, lambda0, lambda1, lambda2, tol, max_iter, out, report)


@app.command()
def inpaint(
    in_path: str = typer.Option(..., "--in", help="Mesh+signal file or PGM/PPM image"),
    mask: str = typer.Option(..., "--mask", help="Observed-triangle mask (one 0/1 channel) or mask image"),
    regularizer: str = typer.Option(..., "--regularizer", help="tv | fetgv | lapfetgv | gridtgv"),
    alpha1: float = typer.Option(..., "--alpha1"),
    alpha0: float = typer.Option(0.0, "--alpha0"),
    lambda0: Optional[float] = typer.Option(None, "--lambda0"),
    lambda1: Optional[float] = typer.Option(None, "--lambda1"),
    lambda2: Optional[float] = typer.Option(None, "--lambda2"),
    tol: float = typer.Option(1e-4, "--tol"),
    max_iter: int = typer.Option(2000, "--max-iter"),
    out: str = typer.Option(..., "--out"),
    report: Optional[str] = typer.Option(None, "--report", help="JSON solve report"),
):
    """Fill in unobserved triangles (and denoise the observed ones)."""
    _run_solver(in_path, mask, regularizer, alpha1, alpha0, lambda0, lambda1, lambda2, tol, max_iter, out, report)


@app.command("eval")
def evaluate(
    in_path: str = typer.Option(..., "--in"),
    regularizer: str = typer.Option(..., "--regularizer"),
    alpha1: float = typer.Option(..., "--alpha1"),
    alpha0: float = typer.Option(0.0, "--alpha0"),
    tol: float = typer.Option(1e-6, "--tol"),
):
    """Print the regularizer value of every channel, one line each."""
    try:
        regularizer = _regularizer(regularizer)
        mesh, channels = _load(in_path)
        p = TgvParams(alpha1=alpha1, alpha0=alpha0)
        for u in channels:
            if regularizer == "gridtgv":
                value = grid_tgv_value(mesh_to_image(mesh, u), p, tol)
            else:
                value = regularizer_value(u, regularizer, p, tol)
            typer.echo(repr(float(value)))
    except (FetgvError, ValidationError, ValueError, FileNotFoundError) as e:
        _fail(f"{type(e).__name__}: {e}")


@app.command("mssim")
def mssim_command(
    a: str = typer.Option(..., "--a"),
    b: str = typer.Option(..., "--b"),
    radius: Optional[int] = typer.Option(None, "--radius", help="Dual-graph hop radius (mesh windows)"),
    window: Optional[int] = typer.Option(None, "--window", help="Odd pixel square side (pixel-split meshes and images)"),
    c1: Optional[float] = typer.Option(None, "--c1"),
    c2: Optional[float] = typer.Option(None, "--c2"),
    record: Optional[str] = typer.Option(None, "--record", help="Also write a JSON score record"),
    name: str = typer.Option("mssim", "--name", help="Label of the score record"),
):
    """Print the mean SSIM of two signals on the same mesh (channel mean for RGB)."""
    try:
        cfg = _ssim_config(radius, window, c1, c2)
        mesh_a, ch_a = _load(a)
        mesh_b, ch_b = _load(b)
        if not mesh_a.same_as(mesh_b):
            raise MeshMismatch("The two inputs live on different meshes")
        ch_b = [Dg0Field(mesh_a, c.values) for c in ch_b]
        if cfg.mode == "grid" and mesh_a.pixel_grid is None:
            raise NotPixelSplit("--window needs a pixel-split mesh or an image")
        value = score_channels(ch_a, ch_b, cfg)
        typer.echo(repr(value))
        if record:
            rec = ScoreRecord(name=name, mssim=value, ssim_fingerprint=cfg.fingerprint())
            with open(record, "w", encoding="utf-8") as f:
                f.write(rec.model_dump_json(indent=2))
    except (FetgvError, ValidationError, ValueError, FileNotFoundError) as e:
        _fail(f"{type(e).__name__}: {e}")


@app.command()
def noise(
    in_path: str = typer.Option(..., "--in"),
    sigma: float = typer.Option(DEFAULT_NOISE_SIGMA, "--sigma"),
    seed: int = typer.Option(..., "--seed"),
    out: str = typer.Option(..., "--out"),
):
    """Add Gaussian noise; channel k uses seed + k."""
    try:
        mesh, channels = _load(in_path)
        noisy = [add_gaussian_noise(c, sigma, seed + k) for k, c in enumerate(channels)]
        _save(out, mesh, noisy)
    except (FetgvError, ValueError, FileNotFoundError) as e:
        _fail(f"{type(e).__name__}: {e}")
    console.print(f"🎲 σ={sigma} seed={seed} → {out}")


@app.command()
def convert(
    image: Optional[str] = typer.Option(None, "--image", help="PGM/PPM image to split into triangles"),
    mesh: Optional[str] = typer.Option(None, "--mesh", help="Pixel-split mesh+signal file to rasterize"),
    out: str = typer.Option(..., "--out"),
):
    """Image to pixel-split mesh (--image), or back (--mesh)."""
    if (image is None) == (mesh is None):
        _fail("give exactly one of --image or --mesh")
    try:
        if image is not None:
            m, channels = channels_to_mesh(read_image(image))
            write_mesh_signal(out, m, channels)
            console.print(f"🔺 {image} → {out} ({m.n_triangles} triangles)")
        else:
            m, channels = read_fields(mesh)
            write_image(out, [mesh_to_image(m, c) for c in channels])
            console.print(f"🖼️  {mesh} → {out}")
    except (FetgvError, ValueError, FileNotFoundError) as e:
        _fail(f"{type(e).__name__}: {e}")


@app.command()
def kernel(
    mesh: str = typer.Option(..., "--mesh", help="Mesh file (any payload is ignored)"),
    abc: str = typer.Option(..., "--abc", help="Coefficients a,b,c of a + b x + c y"),
    out: str = typer.Option(..., "--out"),
):
    """Write the kernel element sampled from a + b x + c y."""
    try:
        a, b, c = (float(s) for s in abc.split(","))
    except ValueError:
        _fail(f"--abc expects three comma-separated numbers, got '{abc}'")
    try:
        m, _, _ = read_mesh_signal(mesh)
        u, _ = make_kernel_element(m, a, b, c)
        write_mesh_signal(out, m, u)
    except (FetgvError, ValueError, FileNotFoundError) as e:
        _fail(f"{type(e).__name__}: {e}")
    console.print(f"📐 ({a}, {b}, {c}) → {out}")


@app.command()
def tune(
    noisy: str = typer.Option(..., "--noisy"),
    truth: str = typer.Option(..., "--truth"),
    regularizer: str = typer.Option(..., "--regularizer"),
    out: str = typer.Option(..., "--out", help="JSON tuning result"),
    mask: Optional[str] = typer.Option(None, "--mask"),
    budget: int = typer.Option(20, "--budget", help="Maximum number of reconstructions"),
    radius: Optional[int] = typer.Option(None, "--radius"),
    window: Optional[int] = typer.Option(None, "--window"),
    tol: float = typer.Option(1e-4, "--tol"),
    max_iter: int = typer.Option(2000, "--max-iter"),
):
    """Search alpha1 (and alpha0) maximizing the MSSIM against the ground truth."""
    try:
        regularizer = _regularizer(regularizer)
        mesh, noisy_ch = _load(noisy)
        mesh_t, truth_ch = _load(truth)
        if not mesh.same_as(mesh_t):
            raise MeshMismatch("Noisy and ground-truth inputs live on different meshes")
        truth_ch = [Dg0Field(mesh, c.values) for c in truth_ch]
        observed = _load_mask(mask, mesh) if mask else None
        spec = ParamSearchSpec(
            regularizer=regularizer,
            max_evaluations=budget,
            penalties=_penalties(mesh, None, None, None),
            stop=StopCriteria(tol_primal=tol, tol_dual=tol, max_iter=max_iter),
            ssim=_ssim_config(radius, window, None, None),
        )
        console.print(f"🔎 Tuning {regularizer} ({budget} evaluations max)…")
        result = tune_parameters(noisy_ch, truth_ch, spec, mask=observed)
        os.makedirs(os.path.dirname(os.path.abspath(out)), exist_ok=True)
        with open(out, "w", encoding="utf-8") as f:
            f.write(result.model_dump_json(indent=2))
    except (FetgvError, ValidationError, ValueError, FileNotFoundError) as e:
        _fail(f"{type(e).__name__}: {e}")
    console.print(f"✅ α1={result.alpha1:.4g} α0={result.alpha0:.4g} MSSIM={result.best_mssim:.5f} → {out}")


def _records_of(path: str) -> List[ScoreRecord]:
    with open(path, "r", encoding="utf-8") as f:
        data = json.load(f)
    if isinstance(data, dict) and "scores" in data:
        data = data["scores"]
    if isinstance(data, dict):
        data = [data]
    return [ScoreRecord(**r) for r in data]


@app.command()
def compare(reports: List[str] = typer.Option(..., "--reports", help="Score records or experiment summaries")):
    """Rank scored reconstructions; refuses scores computed with different SSIM windows."""
    try:
        records = [r for path in reports for r in _records_of(path)]
        ranking = compare_scores(records)
    except (FetgvError, ValidationError, ValueError, OSError) as e:
        _fail(f"{type(e).__name__}: {e}")
    for r in ranking:
        typer.echo(f"{r.name}\t{r.mssim!r}")


@app.command()
def experiment(
    case: int = typer.Option(..., "--case", min=1, max=4),
    size: Optional[int] = typer.Option(None, "--size"),
    budget: Optional[int] = typer.Option(None, "--budget"),
    out_dir: Optional[str] = typer.Option(None, "--out-dir"),
):
    """Run one desk-scale experiment case end to end."""
    summary = workflow.run_case(case, size=size, budget=budget, out_dir=out_dir)
    if summary is None:
        raise typer.Exit(code=1)


if __name__ == "__main__":
    app()
