import logging
from typing import Union

import numpy as np

from ..fespace.fields import Dg0Field
from ..functionals.grid import GridImage

logger = logging.getLogger(__name__)


def add_gaussian_noise(u: Union[Dg0Field, GridImage], sigma: float, seed: int) -> Union[Dg0Field, GridImage]:
    """Add i.i.d. N(0, sigma^2) noise to every value; the same seed always gives the same output."""
    if sigma < 0:
        raise ValueError("sigma must be nonnegative")
    if sigma == 0:
        return u.copy() if isinstance(u, Dg0Field) else GridImage(u.values.copy(), u.h)
    rng = np.random.default_rng(seed)
    noise = rng.normal(0.0, sigma, size=u.values.shape)
    logger.debug("Gaussian noise sigma=%g seed=%d on %d values", sigma, seed, u.values.size)
    if isinstance(u, Dg0Field):
        return Dg0Field(u.mesh, u.values + noise)
    return GridImage(u.values + noise, u.h)


__all__ = ["add_gaussian_noise"]
