"""Split the binarized page into one horizontal stripe per curve, then find
the column range of the curve inside each stripe."""

from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .errors import EmptyRoiError, NoCurvesError

# Curve rows stand out at 0.8 or more of the tallest peak; the rows of a
# lead label under a flat curve reach about 0.3.
PROMINENCE_FRACTION = 0.5
LEFT_FRACTION = 1.0 / 3.0
MIDDLE_FRACTION = 2.0 / 3.0


class ColumnRoi(NamedTuple):
    col_start: int
    col_end: int  # inclusive


@dataclass(frozen=True)
class Stripe:
    row_start: int
    row_end: int  # inclusive
    image: np.ndarray
    lead_index: int


def row_projection(img: np.ndarray) -> np.ndarray:
    """Mean of every row (fraction of active pixels)."""
    img = np.asarray(img, dtype=bool)
    return img.sum(axis=1) / img.shape[1]


def smooth(proj: np.ndarray, width: int) -> np.ndarray:
    """Centered moving average, zero beyond the ends, ``width`` forced odd."""
    width = max(1, int(width))
    if width % 2 == 0:
        width += 1
    kernel = np.full(width, 1.0 / width)
    # rounding lets equal window sums compare equal
    return np.round(np.convolve(np.asarray(proj, dtype=np.float64), kernel, mode="same"), 12)


def _runs_of_equal(values):
    change = np.flatnonzero(np.diff(values) != 0) + 1
    starts = np.concatenate([[0], change])
    ends = np.concatenate([change - 1, [len(values) - 1]])
    return starts, ends


def _prominence(values, a, b):
    """Height of the plateau ``values[a..b]`` above the higher of its two bases."""
    v = values[a]
    left = values[:a]
    higher = np.flatnonzero(left > v)
    if higher.size:
        left = left[higher[-1] + 1:]
    right = values[b + 1:]
    higher = np.flatnonzero(right > v)
    if higher.size:
        right = right[: higher[0]]
    return v - max(left.min(initial=v), right.min(initial=v))


def local_maxima(values: np.ndarray, radius: int, min_prominence: float) -> list:
    """Samples strictly above every other sample within ``radius``.

    A flat-topped maximum counts once, at the middle of its plateau; the
    comparison then runs from the plateau ends outward.
    """
    values = np.asarray(values, dtype=np.float64)
    n = len(values)
    peaks = []
    starts, ends = _runs_of_equal(values)
    for a, b in zip(starts.tolist(), ends.tolist()):
        v = values[a]
        if v <= 0:
            continue
        lo, hi = max(0, a - radius), min(n, b + radius + 1)
        neighborhood = np.concatenate([values[lo:a], values[b + 1: hi]])
        if neighborhood.size and not (v > neighborhood.max()):
            continue
        if _prominence(values, a, b) < min_prominence:
            continue
        peaks.append((a + b) // 2)
    return peaks


def find_stripes(proj: np.ndarray, pitch_px: float, prominence: float = PROMINENCE_FRACTION):
    """Row intervals ``(row_start, row_end)``, one per detected curve.

    Breaking lines sit at the lowest smoothed projection between neighboring
    maxima and belong to the stripe above.
    """
    if pitch_px <= 0:
        raise ValueError("pitch_px must be positive")
    n = len(proj)
    smoothed = smooth(proj, round(pitch_px))
    top = smoothed.max(initial=0.0)
    if top <= 0:
        raise NoCurvesError("row projection is empty")
    peaks = local_maxima(smoothed, round(2 * pitch_px), prominence * top)
    if not peaks:
        raise NoCurvesError("no curve rows found in the projection")
    breaks = []
    for p, q in zip(peaks, peaks[1:]):
        seg = smoothed[p: q + 1]
        ties = np.flatnonzero(seg == seg.min()) + p
        breaks.append(int(ties[(len(ties) - 1) // 2]))
    bounds = [-1] + breaks + [n - 1]
    return [(bounds[i] + 1, bounds[i + 1]) for i in range(len(bounds) - 1)]


def split_stripes(img: np.ndarray, intervals) -> list:
    return [
        Stripe(r0, r1, img[r0: r1 + 1], i) for i, (r0, r1) in enumerate(intervals)
    ]


def edge_projection(stripe: np.ndarray) -> np.ndarray:
    """Per column, the number of vertical on/off transitions."""
    s = np.asarray(stripe, dtype=bool)
    return np.count_nonzero(s[1:] != s[:-1], axis=0)


def zero_runs(values: np.ndarray, min_len: int):
    """Maximal runs of zeros at least ``min_len`` long, as ``(start, end)``."""
    z = np.concatenate([[0], (np.asarray(values) == 0).astype(np.int8), [0]])
    d = np.diff(z)
    starts = np.flatnonzero(d == 1)
    ends = np.flatnonzero(d == -1) - 1
    return [(int(a), int(b)) for a, b in zip(starts, ends) if b - a + 1 >= min_len]


def find_roi_columns(
    eproj: np.ndarray,
    pitch_px: float,
    left_fraction: float = LEFT_FRACTION,
    middle_fraction: float = MIDDLE_FRACTION,
) -> ColumnRoi:
    """Columns between the last blank gap of the left part and the first
    blank gap starting in the middle region.

    A blank gap is a run of at least ``round(pitch_px / 2)`` columns with no
    edges, so a one-column pen skip does not cut the curve.
    """
    eproj = np.asarray(eproj)
    width = len(eproj)
    runs = zero_runs(eproj, max(1, round(pitch_px / 2)))
    left_limit = width * left_fraction
    mid_limit = width * middle_fraction
    col_start = 0
    for a, b in runs:
        if b < left_limit:
            col_start = b + 1
    col_end = width - 1
    for a, b in runs:
        if left_limit <= a <= mid_limit:
            col_end = a - 1
            break
    if col_start > col_end or not np.any(eproj[col_start: col_end + 1]):
        raise EmptyRoiError(f"no curve columns between {col_start} and {col_end}")
    return ColumnRoi(col_start, col_end)


def crop_roi(stripe: Stripe, roi: ColumnRoi) -> np.ndarray:
    width = stripe.image.shape[1]
    if not (0 <= roi.col_start <= roi.col_end < width):
        raise ValueError(f"roi {tuple(roi)} outside stripe of width {width}")
    return stripe.image[:, roi.col_start: roi.col_end + 1].copy()
