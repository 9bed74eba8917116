"""Millimeter-grid detection by a red-dominance color index, and pitch estimation.

The index compares red against the mean of green and blue,
``(R - G/2 - B/2) / (R + G/2 + B/2)``. Pink grid ink scores clearly
positive, black trace ink and white paper score near zero.
"""

from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .errors import DegenerateHistogramError, NoGridError, NonSquareGridError, TooFewLinesError
from .otsu import otsu_split
from .raster import check_rgb

log = logging.getLogger(__name__)

MIN_GRID_LINES = 10
SQUARE_TOLERANCE = 0.15
PLAUSIBLE_PITCH_PX = (8.0, 40.0)


@dataclass(frozen=True)
class GridEstimate:
    px_per_mm: float
    h_pitch_px: float  # spacing of vertical lines, measured along columns
    v_pitch_px: float  # spacing of horizontal lines, measured along rows
    n_lines_h: int
    n_lines_v: int

    @property
    def plausible(self) -> bool:
        lo, hi = PLAUSIBLE_PITCH_PX
        return lo <= self.px_per_mm <= hi


def color_index(img: np.ndarray) -> np.ndarray:
    """Per-pixel red-dominance index in [-1, 1]; pure black maps to 0."""
    check_rgb(img)
    rgb = img.astype(np.float64)
    red = rgb[..., 0]
    rest = 0.5 * (rgb[..., 1] + rgb[..., 2])
    num = red - rest
    den = red + rest
    out = np.zeros(den.shape)
    np.divide(num, den, out=out, where=den > 0)
    return out


def relu_rectify(idx: np.ndarray) -> np.ndarray:
    return np.maximum(idx, 0.0)


def otsu_threshold_real(values: np.ndarray, bins: int = 256) -> float:
    """Otsu level for real values in [0, 1], quantized into ``bins`` equal bins.

    The returned level is the center of the highest bin of the low class.
    """
    v = np.asarray(values, dtype=np.float64).ravel()
    q = np.clip(np.floor(v * bins), 0, bins - 1).astype(np.int64)
    hist = np.bincount(q, minlength=bins)
    k = otsu_split(hist)
    return (k - 0.5) / bins


def grid_mask(idx_rectified: np.ndarray, scale: float = 0.5, bins: int = 256) -> np.ndarray:
    """Binary grid mask: index at or above ``scale`` times the Otsu level."""
    try:
        level = otsu_threshold_real(idx_rectified, bins)
    except DegenerateHistogramError as exc:
        raise NoGridError("no grid detected: color index is flat across the page") from exc
    return idx_rectified >= scale * level


def projection_peaks(proj: np.ndarray, rel_height: float = 0.5, window: int = 3) -> np.ndarray:
    """Indices of local maxima above ``rel_height * max``.

    Non-maximum suppression keeps, within every ``window``-wide neighborhood,
    only the highest sample (leftmost on ties).
    """
    proj = np.asarray(proj, dtype=np.float64)
    top = proj.max(initial=0.0)
    if top <= 0:
        return np.zeros(0, dtype=np.int64)
    half = window // 2
    n = len(proj)
    padded = np.concatenate([np.full(half, -np.inf), proj, np.full(half, -np.inf)])
    keep = proj >= rel_height * top
    for d in range(1, half + 1):
        left = padded[half - d: half - d + n]
        right = padded[half + d: half + d + n]
        keep &= (proj > left) & (proj >= right)
    return np.flatnonzero(keep)


def estimate_pitch(mask: np.ndarray) -> GridEstimate:
    """Grid pitch in px from row and column projections of the grid mask."""
    mask = np.asarray(mask, dtype=bool)
    col_peaks = projection_peaks(mask.sum(axis=0))
    row_peaks = projection_peaks(mask.sum(axis=1))
    if len(col_peaks) < MIN_GRID_LINES or len(row_peaks) < MIN_GRID_LINES:
        raise TooFewLinesError(
            f"found {len(col_peaks)} vertical and {len(row_peaks)} horizontal grid lines, "
            f"need {MIN_GRID_LINES} of each"
        )
    h_pitch = float(np.median(np.diff(col_peaks)))
    v_pitch = float(np.median(np.diff(row_peaks)))
    px_per_mm = (h_pitch + v_pitch) / 2.0
    if abs(h_pitch - v_pitch) / px_per_mm > SQUARE_TOLERANCE:
        raise NonSquareGridError(
            f"grid cells are {h_pitch:.2f} x {v_pitch:.2f} px; scan rotated or anisotropic?"
        )
    est = GridEstimate(px_per_mm, h_pitch, v_pitch, len(col_peaks), len(row_peaks))
    log.debug("grid pitch %.3f px/mm (h %.2f, v %.2f)", px_per_mm, h_pitch, v_pitch)
    return est
