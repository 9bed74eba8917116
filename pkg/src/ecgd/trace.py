"""Reduce a cleaned stripe to one row coordinate per column."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyImageError, MissingSamplesError
from .morphology import Disk, group
from .segment import ColumnRoi

CLEAN_CLOSE_MM = 1.0
GAP_WINDOW_MM = 2.0


@dataclass(frozen=True)
class ColumnTrace:
    """Row of the curve at each column; NaN marks a column with no ink."""

    rows: np.ndarray
    height: int
    col_offset: int = 0

    @property
    def width(self) -> int:
        return len(self.rows)

    @property
    def missing(self) -> np.ndarray:
        return np.isnan(self.rows)


def clean_curve(stripe: np.ndarray, pitch_px: float, close_mm: float = CLEAN_CLOSE_MM) -> np.ndarray:
    """Keep only the ink that belongs to the dominant curve.

    Curve pieces within about two disk radii of each other are joined into
    one group; the biggest group is kept and detached noise dropped. A plain
    close would not do: its erosion splits a thin curve again at every gap
    wider than a few pixels.
    """
    stripe = np.asarray(stripe, dtype=bool)
    if not stripe.any():
        raise EmptyImageError("nothing to clean: stripe is empty")
    label_map, blobs = group(stripe, Disk(round(close_mm * pitch_px)))
    return label_map == blobs[0].label


def tight_bounds(img: np.ndarray) -> ColumnRoi:
    cols = np.flatnonzero(np.asarray(img, dtype=bool).any(axis=0))
    if cols.size == 0:
        raise EmptyImageError("no active columns")
    return ColumnRoi(int(cols[0]), int(cols[-1]))


def thin_topmost(img: np.ndarray, col_offset: int = 0) -> ColumnTrace:
    """First active row scanning each column from the top."""
    img = np.asarray(img, dtype=bool)
    has_ink = img.any(axis=0)
    rows = np.where(has_ink, np.argmax(img, axis=0), np.nan).astype(np.float64)
    return ColumnTrace(rows, img.shape[0], col_offset)


def fill_gaps(tr: ColumnTrace, window_px: int) -> ColumnTrace:
    """Replace each missing column by the median of the valid rows within
    ``window_px`` columns of it, doubling the window until one is found."""
    if window_px < 1:
        raise ValueError("window_px must be >= 1")
    rows = tr.rows
    valid = ~np.isnan(rows)
    if not valid.any():
        raise MissingSamplesError("trace has no valid columns")
    if valid.all():
        return tr
    n = len(rows)
    valid_cols = np.flatnonzero(valid)
    out = rows.copy()
    for c in np.flatnonzero(~valid):
        w = window_px
        while True:
            lo = np.searchsorted(valid_cols, c - w, side="left")
            hi = np.searchsorted(valid_cols, min(c + w, n - 1), side="right")
            if hi > lo:
                out[c] = np.median(rows[valid_cols[lo:hi]])
                break
            w *= 2
    return ColumnTrace(out, tr.height, tr.col_offset)
