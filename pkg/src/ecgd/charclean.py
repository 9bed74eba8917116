"""Remove printed characters (lead names and the like) from a curve stripe.

Characters are told apart from the curve by blob geometry: size, aspect
ratio and, above all, vertical distance from the curve's typical row.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import EmptyImageError
from .morphology import Disk, group


@dataclass(frozen=True)
class CharFilterConfig:
    close_radius_mm: float = 0.15
    max_char_height_mm: float = 4.0
    max_char_width_mm: float = 4.0
    aspect_ratio_range: tuple = (0.2, 3.0)
    min_centroid_offset_mm: float = 2.0

    def __post_init__(self):
        lo, hi = self.aspect_ratio_range
        values = (self.close_radius_mm, self.max_char_height_mm, self.max_char_width_mm,
                  lo, hi, self.min_centroid_offset_mm)
        if min(values) <= 0:
            raise ValueError("character filter settings must be positive")
        if lo >= hi:
            raise ValueError("aspect_ratio_range must satisfy lo < hi")


def grouped_blobs(stripe: np.ndarray, pitch_px: float, cfg: CharFilterConfig):
    """Group the stripe's pixels across small breaks; returns ``(label_map, blobs)``.

    Pieces of one character, or of a dashed curve, end up in one blob.
    Blob geometry is measured on the original pixels only.
    """
    radius = round(cfg.close_radius_mm * pitch_px)
    return group(stripe, Disk(radius))


def reference_row(label_map: np.ndarray, curve_label: int) -> float:
    """Median row of the curve blob, the largest group."""
    return float(np.median(np.nonzero(label_map == curve_label)[0]))


def is_character(blob, curve_row: float, pitch_px: float, cfg: CharFilterConfig) -> bool:
    lo, hi = cfg.aspect_ratio_range
    return (
        blob.height <= cfg.max_char_height_mm * pitch_px
        and blob.width <= cfg.max_char_width_mm * pitch_px
        and lo <= blob.aspect_ratio <= hi
        and abs(blob.centroid[0] - curve_row) >= cfg.min_centroid_offset_mm * pitch_px
    )


def remove_characters(stripe: np.ndarray, pitch_px: float, cfg: CharFilterConfig = None) -> np.ndarray:
    """Return ``stripe`` with every character-like blob erased.

    Only original pixels are ever deleted, so the output is a subset of
    the input.
    """
    cfg = cfg or CharFilterConfig()
    stripe = np.asarray(stripe, dtype=bool)
    label_map, blobs = grouped_blobs(stripe, pitch_px, cfg)
    if not blobs:
        raise EmptyImageError("stripe has no active pixels")
    curve_row = reference_row(label_map, blobs[0].label)
    doomed = [b.label for b in blobs[1:] if is_character(b, curve_row, pitch_px, cfg)]
    if not doomed:
        return stripe.copy()
    return stripe & ~np.isin(label_map, doomed)
