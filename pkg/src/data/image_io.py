"""
PGM/PPM reading and writing through Pillow.

Arrays are indexed (i, j) = (x, y) with y measured from the bottom row, so the pixel
rows of the file are flipped and transposed on the way in and out. Values are scaled
to [0, 1].
"""
import logging
import os
from typing import List

import numpy as np
from PIL import Image, UnidentifiedImageError

from ..core.errors import MeshFormatError
from ..functionals.grid import GridImage

logger = logging.getLogger(__name__)

IMAGE_SUFFIXES = (".pgm", ".ppm", ".pnm")


def is_image_path(path: str) -> bool:
    return os.path.splitext(path)[1].lower() in IMAGE_SUFFIXES


def read_image(path: str, h: float = 1.0) -> List[GridImage]:
    """One GridImage per channel (one for PGM, three for PPM)."""
    try:
        with Image.open(path) as im:
            im.load()
            if im.mode.startswith("I"):
                arr, scale = np.asarray(im, dtype=float), 65535.0
            else:
                if im.mode not in ("L", "RGB"):
                    im = im.convert("RGB")
                arr, scale = np.asarray(im, dtype=float), 255.0
    except (OSError, UnidentifiedImageError) as exc:
        raise MeshFormatError(f"Cannot read image {path}: {exc}") from exc
    arr = arr / scale
    if arr.ndim == 2:
        return [GridImage(np.flipud(arr).T.copy(), h)]
    return [GridImage(np.flipud(arr[:, :, c]).T.copy(), h) for c in range(arr.shape[2])]


def _to_bytes(img: GridImage) -> np.ndarray:
    return np.flipud(np.clip(np.rint(img.values.T * 255.0), 0, 255)).astype(np.uint8)


def write_image(path: str, channels) -> str:
    """Write one channel as PGM or three channels as PPM; values are clipped to [0, 1]."""
    if isinstance(channels, GridImage):
        channels = [channels]
    if len(channels) == 1:
        im = Image.fromarray(_to_bytes(channels[0]))
    elif len(channels) == 3:
        im = Image.fromarray(np.stack([_to_bytes(c) for c in channels], axis=-1))
    else:
        raise ValueError(f"Need 1 or 3 channels, got {len(channels)}")
    parent = os.path.dirname(os.path.abspath(path))
    os.makedirs(parent, exist_ok=True)
    im.save(path, format="PPM")
    logger.debug("Wrote %s (%s)", path, im.mode)
    return path


__all__ = ["IMAGE_SUFFIXES", "is_image_path", "read_image", "write_image"]
