"""Global Otsu binarization of the grid-free grayscale page."""

from __future__ import annotations

import numpy as np

from .errors import DegenerateHistogramError, NoTraceError
from .otsu import otsu_split


def otsu_threshold_u8(img: np.ndarray) -> int:
    """Otsu level t in 1..255; the dark class is ``value < t``."""
    hist = np.bincount(np.asarray(img, dtype=np.uint8).ravel(), minlength=256)
    return otsu_split(hist)


def binarize_trace(gray_no_grid: np.ndarray) -> np.ndarray:
    """Dark ink becomes True (the complement is folded into the comparison)."""
    try:
        level = otsu_threshold_u8(gray_no_grid)
    except DegenerateHistogramError as exc:
        raise NoTraceError("no trace found: page is a single gray level") from exc
    return gray_no_grid < level
