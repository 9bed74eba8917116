"""Pixel trace to physical units."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import MissingSamplesError

DEFAULT_MV_PER_MM = 0.1
# 25 mm/s paper speed
DEFAULT_MS_PER_MM = 40.0


@dataclass(frozen=True)
class Calibration:
    px_per_mm: float
    mv_per_mm: float = DEFAULT_MV_PER_MM
    ms_per_mm: float = DEFAULT_MS_PER_MM

    def __post_init__(self):
        for name in ("px_per_mm", "mv_per_mm", "ms_per_mm"):
            v = getattr(self, name)
            if not (math.isfinite(v) and v > 0):
                raise ValueError(f"{name} must be positive and finite, got {v}")

    @property
    def ms_per_px(self) -> float:
        return self.ms_per_mm / self.px_per_mm

    @property
    def mv_per_px(self) -> float:
        return self.mv_per_mm / self.px_per_mm


@dataclass(frozen=True)
class Signal:
    lead_index: int
    t_ms: np.ndarray
    v_mv: np.ndarray
    name: str = ""

    def __len__(self):
        return len(self.t_ms)


def to_signal(tr, cal: Calibration, lead: int, name: str = "") -> Signal:
    """Time base from column index, amplitude from row, median-centered.

    Rows grow downward, so amplitude is the negated row.
    """
    rows = np.asarray(tr.rows, dtype=np.float64)
    if np.isnan(rows).any():
        raise MissingSamplesError("trace still has missing columns; fill gaps first")
    t_ms = np.arange(len(rows)) * cal.ms_per_px
    raw = -rows * cal.mv_per_px
    return Signal(lead, t_ms, raw - np.median(raw), name)
