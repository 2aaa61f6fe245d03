"""
TGV-L2 denoising and inpainting with the pixel-grid discretization.
"""
import logging
from typing import Optional, Tuple

import numpy as np

from ..core.errors import NoConvergence
from ..core.models import PenaltyParams, SolveReport, StopCriteria, TgvParams
from ..functionals.grid import GridImage, grid_tgv_problem
from .split_bregman import SplitBregmanSolver, constant_report

logger = logging.getLogger(__name__)


def solve_grid_tgv(
    img: GridImage,
    p: TgvParams,
    pp: Optional[PenaltyParams] = None,
    stop: Optional[StopCriteria] = None,
    mask=None,
    strict: bool = True,
) -> Tuple[GridImage, np.ndarray, SolveReport]:
    """
    Minimize 1/2 sum_obs (u - f)^2 + alpha1 sum |grad u - w|_2 + alpha0 sum |E w|_F.

    `mask` is an (M, N) boolean array of observed pixels. Returns (u, w, report) with
    w of shape (M, N, 2).
    """
    problem = grid_tgv_problem(img, p, observed=mask)
    n = img.values.size
    pp = pp or PenaltyParams()
    stop = stop or StopCriteria()

    obs_values = img.values.ravel()[problem.fidelity[:n] > 0]
    if obs_values.size and np.all(obs_values == obs_values[0]):
        logger.info("gridtgv: constant data, returning it unchanged")
        u = GridImage(np.full(img.shape, obs_values[0]), img.h)
        return u, np.zeros(img.shape + (2,)), constant_report(problem, pp, stop)

    solver = SplitBregmanSolver(problem, pp, stop)

    def unpack(x):
        u = GridImage(x[:n].reshape(img.shape), img.h)
        w = np.stack([x[n:2 * n].reshape(img.shape), x[2 * n:].reshape(img.shape)], axis=-1)
        return u, w

    try:
        state, report = solver.run(strict=strict)
    except NoConvergence as exc:
        exc.best = unpack(exc.best)
        raise
    u, w = unpack(state.x)
    return u, w, report


__all__ = ["solve_grid_tgv"]
