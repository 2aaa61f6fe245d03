"""
Reconstruction dispatch and MSSIM-driven parameter search.

The search works on log10(alpha): every coordinate keeps an interval, probes the
points a quarter width left and right of its center and keeps the half around the
better probe. Coordinates alternate (alpha1 only for TV) until every interval is
narrower than `min_width_log10` or the evaluation budget is spent.
"""
import logging
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence, Tuple, Union

import numpy as np

from ..core.errors import FetgvError, MeshMismatch
from ..core.models import (
    ParamSearchSpec,
    PenaltyParams,
    SolveReport,
    SsimConfig,
    StopCriteria,
    TgvParams,
    TuneEvaluation,
    TuneResult,
)
from ..data.conversion import mesh_to_image
from ..fespace.fields import Dg0Field, same_mesh
from ..quality.ssim import mssim
from ..solver.grid_tgv import solve_grid_tgv
from ..solver.split_bregman import solve_denoise

logger = logging.getLogger(__name__)

Channels = Union[Dg0Field, Sequence[Dg0Field]]


@dataclass
class Reconstruction:
    channels: List[Dg0Field]
    reports: List[SolveReport] = field(default_factory=list)

    @property
    def iterations(self) -> int:
        return sum(r.iterations for r in self.reports)

    @property
    def converged(self) -> bool:
        return all(r.converged for r in self.reports)


def _as_channels(u: Channels) -> List[Dg0Field]:
    return [u] if isinstance(u, Dg0Field) else list(u)


def _solve_channel(f: Dg0Field, regularizer: str, p: TgvParams, pp: PenaltyParams,
                   stop: StopCriteria, mask, strict: bool) -> Tuple[Dg0Field, SolveReport]:
    if regularizer != "gridtgv":
        u, _, report = solve_denoise(f, p, pp, mask=mask, mode=regularizer, stop=stop, strict=strict)
        return u, report
    img = mesh_to_image(f.mesh, f)
    observed = None
    if mask is not None:
        m = np.asarray(mask, dtype=bool)
        observed = (m[0::2] & m[1::2]).reshape(img.shape)
    u_img, _, report = solve_grid_tgv(img, p, pp, stop, mask=observed, strict=strict)
    return Dg0Field(f.mesh, np.repeat(u_img.values.ravel(), 2)), report


def reconstruct(
    noisy: Channels,
    regularizer: str,
    p: TgvParams,
    pp: Optional[PenaltyParams] = None,
    stop: Optional[StopCriteria] = None,
    mask=None,
    strict: bool = True,
) -> Reconstruction:
    """
    Denoise (or inpaint, given a mask) every channel with the same parameters.

    `gridtgv` rasterizes a pixel-split mesh, solves on the grid and maps the result back.
    Channels are independent and solved concurrently.
    """
    channels = _as_channels(noisy)
    pp = pp or PenaltyParams()
    stop = stop or StopCriteria()
    if len(channels) == 1:
        results = [_solve_channel(channels[0], regularizer, p, pp, stop, mask, strict)]
    else:
        same_mesh(*channels)
        with ThreadPoolExecutor(max_workers=len(channels)) as executor:
            futures = [executor.submit(_solve_channel, c, regularizer, p, pp, stop, mask, strict) for c in channels]
            results = [fut.result() for fut in futures]
    return Reconstruction([u for u, _ in results], [r for _, r in results])


def score_channels(u: Channels, truth: Channels, cfg: SsimConfig) -> float:
    """Mean of the per-channel MSSIM."""
    us, ts = _as_channels(u), _as_channels(truth)
    if len(us) != len(ts):
        raise MeshMismatch(f"{len(us)} channel(s) against {len(ts)}")
    return float(np.mean([mssim(a, b, cfg) for a, b in zip(us, ts)]))


class _Search:
    """Evaluation cache and trace of one tuning run."""

    def __init__(self, noisy, truth, spec: ParamSearchSpec, mask):
        self.noisy = noisy
        self.truth = truth
        self.spec = spec
        self.mask = mask
        self.trace: List[TuneEvaluation] = []
        self._cache: Dict[Tuple[float, float], float] = {}

    @property
    def exhausted(self) -> bool:
        return len(self.trace) >= self.spec.max_evaluations

    def score(self, log_a1: float, log_a0: float) -> float:
        key = (round(log_a1, 12), round(log_a0, 12))
        if key in self._cache:
            return self._cache[key]
        a1 = float(10.0 ** log_a1)
        a0 = 0.0 if self.spec.regularizer == "tv" else float(10.0 ** log_a0)
        entry = TuneEvaluation(alpha1=a1, alpha0=a0)
        try:
            rec = reconstruct(
                self.noisy, self.spec.regularizer, TgvParams(alpha1=a1, alpha0=a0),
                self.spec.penalties, self.spec.stop, mask=self.mask, strict=False,
            )
            entry.mssim = score_channels(rec.channels, self.truth, self.spec.ssim)
            entry.iterations = rec.iterations
            entry.converged = rec.converged
        except FetgvError as exc:
            entry.error = f"{type(exc).__name__}: {exc}"
            logger.warning("Tuning evaluation alpha1=%.4g alpha0=%.4g failed: %s", a1, a0, entry.error)
        self.trace.append(entry)
        value = entry.mssim if entry.mssim is not None else -np.inf
        self._cache[key] = value
        logger.info("[%d/%d] alpha1=%.4g alpha0=%.4g mssim=%s", len(self.trace), self.spec.max_evaluations,
                    a1, a0, "n/a" if entry.mssim is None else f"{entry.mssim:.5f}")
        return value


def tune_parameters(noisy: Channels, truth: Channels, spec: ParamSearchSpec, mask=None) -> TuneResult:
    """Search (alpha1, alpha0) maximizing the MSSIM of the reconstruction against `truth`."""
    same_mesh(*_as_channels(noisy), *_as_channels(truth))
    search = _Search(noisy, truth, spec, mask)
    bounds = [list(np.log10(spec.alpha1_bounds)), list(np.log10(spec.alpha0_bounds))]
    active = [0] if spec.regularizer == "tv" else [0, 1]
    center = [0.5 * (lo + hi) for lo, hi in bounds]
    search.score(*center)

    turn = 0
    while not search.exhausted:
        open_coords = [k for k in active if bounds[k][1] - bounds[k][0] >= spec.min_width_log10]
        if not open_coords:
            break
        k = open_coords[turn % len(open_coords)]
        turn += 1
        lo, hi = bounds[k]
        quarter = 0.25 * (hi - lo)
        left, right = list(center), list(center)
        left[k] -= quarter
        right[k] += quarter
        s_left = search.score(*left)
        if search.exhausted:
            break
        s_right = search.score(*right)
        if s_left > s_right:
            bounds[k] = [lo, center[k]]
        else:
            bounds[k] = [center[k], hi]
        center[k] = 0.5 * (bounds[k][0] + bounds[k][1])

    scored = [e for e in search.trace if e.mssim is not None]
    if not scored:
        first = search.trace[0]
        return TuneResult(alpha1=first.alpha1, alpha0=first.alpha0, best_mssim=float("nan"),
                          trace=search.trace, ssim_fingerprint=spec.ssim.fingerprint())
    best = max(scored, key=lambda e: e.mssim)
    logger.info("Best %s: alpha1=%.4g alpha0=%.4g mssim=%.5f after %d evaluations",
                spec.regularizer, best.alpha1, best.alpha0, best.mssim, len(search.trace))
    return TuneResult(alpha1=best.alpha1, alpha0=best.alpha0, best_mssim=best.mssim,
                      trace=search.trace, ssim_fingerprint=spec.ssim.fingerprint())


__all__ = ["Reconstruction", "reconstruct", "score_channels", "tune_parameters"]
