"""End-to-end digitization of one page, in stage order.

Page stages: color index, rectification, grid mask, pitch, grid whiteout,
binarization, stripe split. Then, for each stripe: ROI columns, character
removal, curve cleaning, tight crop, topmost thinning, gap filling and
calibration.
"""

from __future__ import annotations

import contextlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import binarize, gridmask, raster, segment
from .calibrate import DEFAULT_MS_PER_MM, DEFAULT_MV_PER_MM, Calibration, Signal, to_signal
from .charclean import CharFilterConfig, grouped_blobs, remove_characters
from .errors import EcgdError, StageError
from .trace import CLEAN_CLOSE_MM, GAP_WINDOW_MM, clean_curve, fill_gaps, thin_topmost, tight_bounds

log = logging.getLogger(__name__)

SCHEMA_VERSION = 1
SIX_LEAD_NAMES = ("I", "II", "III", "aVR", "aVL", "aVF")

PAGE_STAGES = ("input", "color_index", "relu_index", "grid_mask", "gray_no_grid", "binarized")
LEAD_STAGES = ("stripe", "roi", "no_characters", "cleaned", "tight", "thinned")


@dataclass
class RunConfig:
    inputs: list = field(default_factory=list)
    out_dir: Path = Path("out")
    mv_per_mm: float = DEFAULT_MV_PER_MM
    ms_per_mm: float = DEFAULT_MS_PER_MM
    px_per_mm: Optional[float] = None
    otsu_scale: float = 0.5
    char_filter: CharFilterConfig = field(default_factory=CharFilterConfig)
    clean_close_mm: float = CLEAN_CLOSE_MM
    gap_window_mm: float = GAP_WINDOW_MM
    stripe_prominence: float = segment.PROMINENCE_FRACTION
    left_fraction: float = segment.LEFT_FRACTION
    middle_fraction: float = segment.MIDDLE_FRACTION
    debug_images: bool = False
    output_format: str = "csv"

    def __post_init__(self):
        for name in ("mv_per_mm", "ms_per_mm", "otsu_scale", "clean_close_mm", "gap_window_mm"):
            if not getattr(self, name) > 0:
                raise ValueError(f"{name} must be positive")
        if self.px_per_mm is not None and not self.px_per_mm > 0:
            raise ValueError("px_per_mm must be positive")
        if self.output_format not in ("csv", "json"):
            raise ValueError("output_format must be 'csv' or 'json'")


@dataclass
class LeadResult:
    index: int
    name: str
    stripe: tuple
    roi: tuple = None
    trace_cols: tuple = None  # page columns of the first and last sample
    filled: int = 0
    signal: Signal = None


@dataclass
class PageResult:
    path: str
    width: int = 0
    height: int = 0
    px_per_mm: float = None
    px_per_mm_source: str = None
    grid: gridmask.GridEstimate = None
    leads: list = field(default_factory=list)
    warnings: list = field(default_factory=list)
    error: StageError = None
    debug: list = field(default_factory=list)  # (relative path, image)

    @property
    def ok(self) -> bool:
        return self.error is None


def lead_names(n: int):
    if n == len(SIX_LEAD_NAMES):
        return list(SIX_LEAD_NAMES)
    return [f"lead_{i}" for i in range(n)]


class _Run:
    """Tracks the current stage so failures can name it."""

    def __init__(self, path, debug):
        self.path = path
        self.debug = debug
        self.images = []
        self.stage = None

    @contextlib.contextmanager
    def stage_of(self, name):
        self.stage = name
        try:
            yield
        except StageError:
            raise
        except (EcgdError, ValueError) as exc:
            raise StageError(name, self.path, exc) from exc

    def dump(self, subdir, stages, name, img):
        if not self.debug:
            return
        number = stages.index(name) + 1
        if stages is LEAD_STAGES:
            number += len(PAGE_STAGES)
        rel = f"{number:02d}_{name}.png"
        self.images.append((f"{subdir}/{rel}" if subdir else rel, img))


def front_end(rgb, cfg: RunConfig, run: _Run, result: PageResult):
    """Page-level stages; returns the binarized page."""
    run.dump("", PAGE_STAGES, "input", rgb)
    with run.stage_of("color_index"):
        idx = gridmask.color_index(rgb)
    run.dump("", PAGE_STAGES, "color_index", raster.index_to_gray(idx))
    with run.stage_of("relu"):
        rect = gridmask.relu_rectify(idx)
    run.dump("", PAGE_STAGES, "relu_index", raster.index_to_gray(rect))
    with run.stage_of("grid_mask"):
        mask = gridmask.grid_mask(rect, cfg.otsu_scale)
    run.dump("", PAGE_STAGES, "grid_mask", mask)
    if cfg.px_per_mm is not None:
        result.px_per_mm, result.px_per_mm_source = float(cfg.px_per_mm), "override"
    else:
        with run.stage_of("estimate_pitch"):
            est = gridmask.estimate_pitch(mask)
        result.grid = est
        result.px_per_mm, result.px_per_mm_source = est.px_per_mm, "grid"
    lo, hi = gridmask.PLAUSIBLE_PITCH_PX
    if not lo <= result.px_per_mm <= hi:
        msg = (f"grid pitch {result.px_per_mm:.2f} px/mm outside the plausible range "
               f"{lo:g}..{hi:g}; consider --px-per-mm")
        log.warning("%s: %s", result.path, msg)
        result.warnings.append(msg)
    with run.stage_of("whiteout"):
        gray = raster.whiteout(raster.to_grayscale(rgb), mask)
    run.dump("", PAGE_STAGES, "gray_no_grid", gray)
    with run.stage_of("binarize_trace"):
        binary = binarize.binarize_trace(gray)
    run.dump("", PAGE_STAGES, "binarized", binary)
    return binary


def page_stripes(binary, pitch, cfg: RunConfig, run: _Run):
    with run.stage_of("find_stripes"):
        intervals = segment.find_stripes(segment.row_projection(binary), pitch, cfg.stripe_prominence)
    return segment.split_stripes(binary, intervals)


def stripe_roi(stripe, pitch, cfg: RunConfig, run: _Run):
    with run.stage_of("find_roi_columns"):
        eproj = segment.edge_projection(stripe.image)
        roi = segment.find_roi_columns(eproj, pitch, cfg.left_fraction, cfg.middle_fraction)
        return roi, segment.crop_roi(stripe, roi)


def digitize_lead(stripe, name, pitch, cal, cfg: RunConfig, run: _Run) -> LeadResult:
    res = LeadResult(stripe.lead_index, name, (stripe.row_start, stripe.row_end))
    sub = f"{stripe.lead_index:02d}_{name}"
    run.dump(sub, LEAD_STAGES, "stripe", stripe.image)
    roi, crop = stripe_roi(stripe, pitch, cfg, run)
    res.roi = tuple(roi)
    run.dump(sub, LEAD_STAGES, "roi", crop)
    with run.stage_of("remove_characters"):
        clean = remove_characters(crop, pitch, cfg.char_filter)
    run.dump(sub, LEAD_STAGES, "no_characters", clean)
    with run.stage_of("clean_curve"):
        curve = clean_curve(clean, pitch, cfg.clean_close_mm)
    run.dump(sub, LEAD_STAGES, "cleaned", curve)
    with run.stage_of("tight_bounds"):
        bounds = tight_bounds(curve)
    tight = curve[:, bounds.col_start: bounds.col_end + 1]
    run.dump(sub, LEAD_STAGES, "tight", tight)
    with run.stage_of("thin_topmost"):
        tr = thin_topmost(tight, col_offset=roi.col_start + bounds.col_start)
    if run.debug:
        thin = np.zeros_like(tight)
        ok = ~tr.missing
        thin[tr.rows[ok].astype(int), np.flatnonzero(ok)] = True
        run.dump(sub, LEAD_STAGES, "thinned", thin)
    res.filled = int(tr.missing.sum())
    with run.stage_of("fill_gaps"):
        tr = fill_gaps(tr, max(1, round(cfg.gap_window_mm * pitch)))
    with run.stage_of("to_signal"):
        res.signal = to_signal(tr, cal, stripe.lead_index, name)
    res.trace_cols = (tr.col_offset, tr.col_offset + tr.width - 1)
    return res


def digitize_image(rgb, cfg: RunConfig, path="<memory>") -> PageResult:
    """Run every stage on an RGB array. Errors are captured in the result."""
    result = PageResult(str(path))
    run = _Run(str(path), cfg.debug_images)
    try:
        raster.check_rgb(rgb)
        result.height, result.width = rgb.shape[:2]
        binary = front_end(rgb, cfg, run, result)
        pitch = result.px_per_mm
        cal = Calibration(pitch, cfg.mv_per_mm, cfg.ms_per_mm)
        stripes = page_stripes(binary, pitch, cfg, run)
        names = lead_names(len(stripes))
        for stripe, name in zip(stripes, names):
            result.leads.append(digitize_lead(stripe, name, pitch, cal, cfg, run))
    except StageError as exc:
        log.error("%s", exc)
        result.error = exc
    result.debug = run.images
    return result


def digitize_file(path, cfg: RunConfig) -> PageResult:
    run = _Run(str(path), False)
    try:
        with run.stage_of("load"):
            rgb = raster.load_image(path)
    except StageError as exc:
        log.error("%s", exc)
        return PageResult(str(path), error=exc)
    return digitize_image(rgb, cfg, path)


def manifest(result: PageResult, cfg: RunConfig, files=None) -> dict:
    files = files or {}
    m = {
        "schema_version": SCHEMA_VERSION,
        "input": result.path,
        "status": "ok" if result.ok else "error",
        "image": {"width": result.width, "height": result.height},
        "px_per_mm": result.px_per_mm,
        "px_per_mm_source": result.px_per_mm_source,
        "grid": None,
        "calibration": {"mv_per_mm": cfg.mv_per_mm, "ms_per_mm": cfg.ms_per_mm},
        "leads": [],
        "warnings": list(result.warnings),
    }
    if result.grid is not None:
        g = result.grid
        m["grid"] = {"h_pitch_px": g.h_pitch_px, "v_pitch_px": g.v_pitch_px,
                     "n_lines_h": g.n_lines_h, "n_lines_v": g.n_lines_v}
    for lead in result.leads:
        m["leads"].append({
            "index": lead.index,
            "name": lead.name,
            "stripe_rows": list(lead.stripe),
            "roi_cols": list(lead.roi),
            "trace_cols": list(lead.trace_cols),
            "samples": len(lead.signal),
            "filled_columns": lead.filled,
            "file": files.get(lead.index),
        })
    if result.error is not None:
        m["error"] = {"stage": result.error.stage, "message": str(result.error.cause)}
    return m


def feature_rows(rgb, stripe_index: int, cfg: RunConfig, path="<memory>"):
    """Blob table of one stripe, grouped as for character removal."""
    result = PageResult(str(path))
    run = _Run(str(path), False)
    binary = front_end(rgb, cfg, run, result)
    pitch = result.px_per_mm
    stripes = page_stripes(binary, pitch, cfg, run)
    if not 0 <= stripe_index < len(stripes):
        raise StageError("feature_stats", str(path),
                         ValueError(f"stripe {stripe_index} out of range 0..{len(stripes) - 1}"))
    stripe = stripes[stripe_index]
    try:
        _, crop = stripe_roi(stripe, pitch, cfg, run)
    except StageError:
        crop = np.zeros((stripe.image.shape[0], 0), dtype=bool)
    if crop.size == 0:
        return []
    _, blobs = grouped_blobs(crop, pitch, cfg.char_filter)
    return blobs
