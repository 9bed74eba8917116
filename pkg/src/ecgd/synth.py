"""Synthetic ECG sheets with exact ground truth, plus scan distortions.

A sheet is paper color, a 1 mm grid with heavier lines every few mm, and
one curve per lead drawn in its own horizontal stripe. Everything drawn is
recorded: the real-valued centerline of every curve, the pixels it inked,
and the pixels of each label glyph.
"""

from __future__ import annotations

import json
import math
from dataclasses import asdict, dataclass, field

import numpy as np

from .calibrate import DEFAULT_MS_PER_MM, DEFAULT_MV_PER_MM
from .errors import RenderError
from .font5x7 import CELL_H, render_text
from .morphology import Disk, dilate
from .raster import check_rgb, to_grayscale

PX_PER_MM_600DPI = 600 / 25.4


@dataclass(frozen=True)
class Lead:
    name: str
    samples_mv: tuple
    ms_per_sample: float

    @property
    def duration_ms(self) -> float:
        return (len(self.samples_mv) - 1) * self.ms_per_sample


@dataclass(frozen=True)
class SheetSpec:
    leads: tuple
    px_per_mm: float = round(PX_PER_MM_600DPI, 3)
    grid_color: tuple = (244, 188, 188)
    grid_heavy_every: int = 5
    grid_heavy_color: tuple = (236, 130, 130)
    paper_color: tuple = (252, 250, 248)
    ink_color: tuple = (20, 20, 20)
    stroke_width_px: int = 3
    stripe_height_mm: float = 25.0
    label_glyphs: bool = False
    # "below": under the curve's left end; "left": before the curve start
    glyph_placement: str = "below"
    glyph_height_mm: float = 2.5
    glyph_offset_mm: float = 3.0
    mv_per_mm: float = DEFAULT_MV_PER_MM
    ms_per_mm: float = DEFAULT_MS_PER_MM
    margin_left_mm: float = 12.0
    margin_right_mm: float = 8.0
    margin_vertical_mm: float = 5.0

    def __post_init__(self):
        if not self.leads:
            raise ValueError("a sheet needs at least one lead")
        for color in (self.grid_color, self.grid_heavy_color, self.paper_color, self.ink_color):
            if len(color) != 3 or not all(0 <= int(c) <= 255 for c in color):
                raise ValueError(f"invalid RGB color {color}")
        if self.stroke_width_px < 1 or self.stroke_width_px % 2 == 0:
            raise ValueError("stroke_width_px must be a positive odd integer")
        if self.px_per_mm <= 0 or self.stripe_height_mm <= 0:
            raise ValueError("px_per_mm and stripe_height_mm must be positive")
        if self.glyph_placement not in ("below", "left"):
            raise ValueError("glyph_placement must be 'below' or 'left'")
        for lead in self.leads:
            if len(lead.samples_mv) < 2 or lead.ms_per_sample <= 0:
                raise ValueError(f"lead {lead.name!r} needs >= 2 samples and a positive period")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["leads"] = [
            {"name": ld.name, "samples_mv": list(ld.samples_mv), "ms_per_sample": ld.ms_per_sample}
            for ld in self.leads
        ]
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "SheetSpec":
        d = dict(d)
        leads = tuple(
            Lead(str(ld["name"]), tuple(float(v) for v in ld["samples_mv"]), float(ld["ms_per_sample"]))
            for ld in d.pop("leads")
        )
        for key in ("grid_color", "grid_heavy_color", "paper_color", "ink_color"):
            if key in d:
                d[key] = tuple(int(c) for c in d[key])
        known = set(cls.__dataclass_fields__)
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown sheet fields: {sorted(unknown)}")
        return cls(leads=leads, **d)


@dataclass
class LeadTruth:
    name: str
    stripe_rows: tuple  # nominal (row_start, row_end) of the lead's band
    baseline_row: int
    col_start: int  # first curve column
    centerline: np.ndarray  # real row per curve column
    v_mv: np.ndarray  # signal value per curve column
    trace_mask: np.ndarray = field(repr=False)  # full page, this lead's ink
    glyph_mask: np.ndarray = field(repr=False)

    @property
    def col_end(self) -> int:
        return self.col_start + len(self.centerline) - 1

    @property
    def columns(self) -> np.ndarray:
        return np.arange(self.col_start, self.col_end + 1)


@dataclass
class GroundTruth:
    width: int
    height: int
    px_per_mm: float
    stroke_width_px: int
    leads: list

    @property
    def trace_mask(self) -> np.ndarray:
        return np.logical_or.reduce([ld.trace_mask for ld in self.leads])

    @property
    def glyph_mask(self) -> np.ndarray:
        return np.logical_or.reduce([ld.glyph_mask for ld in self.leads])

    def to_dict(self) -> dict:
        return {
            "width": self.width,
            "height": self.height,
            "px_per_mm": self.px_per_mm,
            "stroke_width_px": self.stroke_width_px,
            "leads": [
                {
                    "name": ld.name,
                    "stripe_rows": list(ld.stripe_rows),
                    "baseline_row": ld.baseline_row,
                    "col_start": ld.col_start,
                    "col_end": ld.col_end,
                    "centerline": [round(float(v), 4) for v in ld.centerline],
                    "v_mv": [round(float(v), 6) for v in ld.v_mv],
                    "glyph_pixels": np.argwhere(ld.glyph_mask).tolist(),
                }
                for ld in self.leads
            ],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), separators=(",", ":"))


# ------------------------------------------------------------------ signals


def synthetic_ecg(
    duration_ms: float = 4000.0,
    ms_per_sample: float = 2.0,
    sinusoids=((0.15, 1.2, 0.0), (0.08, 6.0, 1.0), (0.04, 17.0, 2.0)),
    heart_rate_bpm: float = 72.0,
    r_amp_mv: float = 1.0,
    qrs_sigma_ms: float = 10.0,
    first_beat_ms: float = 400.0,
):
    """Band-limited background (``(amp_mv, freq_hz, phase)`` sinusoids) plus
    a QRS-like spike train: a small Q dip, a Gaussian R wave, a small S dip."""
    t = np.arange(0.0, duration_ms + 1e-9, ms_per_sample)
    v = np.zeros_like(t)
    for amp, freq, phase in sinusoids:
        v += amp * np.sin(2 * np.pi * freq * t / 1000.0 + phase)
    period = 60000.0 / heart_rate_bpm
    for beat in np.arange(first_beat_ms, duration_ms, period):
        v += r_amp_mv * np.exp(-0.5 * ((t - beat) / qrs_sigma_ms) ** 2)
        for dt, depth in ((-2.5, 0.12), (2.5, 0.25)):
            center = beat + dt * qrs_sigma_ms
            v -= depth * r_amp_mv * np.exp(-0.5 * ((t - center) / qrs_sigma_ms) ** 2)
    return v


# ------------------------------------------------------------------ rendering


def _toward(own, nb):
    """Midpoint of two rows, rounded toward ``own``."""
    total = own + nb
    return np.where(nb > own, total // 2, -((-total) // 2))


def _column_spans(rows):
    """Row span inked in each column: from the column's own row halfway to
    each neighbor's, so consecutive columns stay 8-connected."""
    lo, hi = rows.copy(), rows.copy()
    if len(rows) > 1:
        to_next = _toward(rows[:-1], rows[1:])
        to_prev = _toward(rows[1:], rows[:-1])
        lo[:-1] = np.minimum(lo[:-1], to_next)
        hi[:-1] = np.maximum(hi[:-1], to_next)
        lo[1:] = np.minimum(lo[1:], to_prev)
        hi[1:] = np.maximum(hi[1:], to_prev)
    return lo, hi


def grid_positions(length: int, px_per_mm: float):
    """Pixel positions of the 1 mm lines along one axis, with their mm index."""
    k = np.arange(int(length / px_per_mm) + 2)
    pos = np.floor(k * px_per_mm + 0.5).astype(np.int64)
    keep = pos < length
    return pos[keep], k[keep]


def _paint_grid(img, spec):
    h, w = img.shape[:2]
    rows, row_mm = grid_positions(h, spec.px_per_mm)
    cols, col_mm = grid_positions(w, spec.px_per_mm)
    every = spec.grid_heavy_every
    img[rows, :] = spec.grid_color
    img[:, cols] = spec.grid_color
    if every > 0:
        img[rows[row_mm % every == 0], :] = spec.grid_heavy_color
        img[:, cols[col_mm % every == 0]] = spec.grid_heavy_color


def render_sheet(spec: SheetSpec):
    """Draw the sheet; returns ``(rgb_image, GroundTruth)``."""
    ppm = spec.px_per_mm
    n_leads = len(spec.leads)
    ms_per_px = spec.ms_per_mm / ppm
    px_per_mv = ppm / spec.mv_per_mm
    curve_cols = [int(math.floor(ld.duration_ms / ms_per_px + 1e-9)) + 1 for ld in spec.leads]
    x0 = int(round(spec.margin_left_mm * ppm))
    width = x0 + max(curve_cols) + int(round(spec.margin_right_mm * ppm))
    height = int(round((2 * spec.margin_vertical_mm + n_leads * spec.stripe_height_mm) * ppm))

    img = np.empty((height, width, 3), dtype=np.uint8)
    img[:] = spec.paper_color
    _paint_grid(img, spec)

    stroke = Disk((spec.stroke_width_px - 1) // 2)
    dot = max(1, int(round(spec.glyph_height_mm * ppm / CELL_H)))
    truths = []
    for k, (lead, ncols) in enumerate(zip(spec.leads, curve_cols)):
        top_mm = spec.margin_vertical_mm + k * spec.stripe_height_mm
        r0 = int(round(top_mm * ppm))
        r1 = int(round((top_mm + spec.stripe_height_mm) * ppm)) - 1
        baseline = int(round((top_mm + spec.stripe_height_mm / 2) * ppm))

        t = np.arange(ncols) * ms_per_px
        t_samples = np.arange(len(lead.samples_mv)) * lead.ms_per_sample
        v = np.interp(t, t_samples, np.asarray(lead.samples_mv, dtype=np.float64))
        center = baseline - v * px_per_mv
        rows = np.floor(center + 0.5).astype(np.int64)
        lo, hi = _column_spans(rows)

        line = np.zeros((height, width), dtype=bool)
        if lo.min() < 0 or hi.max() >= height:
            raise RenderError(f"lead {lead.name!r} leaves the page; reduce its amplitude")
        for i in range(ncols):
            line[lo[i]: hi[i] + 1, x0 + i] = True
        trace = dilate(line, stroke)
        inked_rows = np.flatnonzero(trace.any(axis=1))
        if inked_rows[0] < r0 or inked_rows[-1] > r1:
            raise RenderError(
                f"lead {lead.name!r} spans rows {inked_rows[0]}..{inked_rows[-1]}, "
                f"outside its stripe {r0}..{r1}; clipping refused"
            )

        glyphs = np.zeros((height, width), dtype=bool)
        if spec.label_glyphs:
            bitmap = render_text(lead.name, dot)
            gh, gw = bitmap.shape
            if spec.glyph_placement == "below":
                gr = baseline + int(round(spec.glyph_offset_mm * ppm))
                gc = x0
            else:
                gr = baseline - gh // 2
                gc = x0 - int(round(2.0 * ppm)) - gw
            if gc < 0 or gr < r0 or gr + gh - 1 > r1 or gc + gw > width:
                raise RenderError(f"label {lead.name!r} does not fit inside its stripe")
            glyphs[gr: gr + gh, gc: gc + gw] = bitmap
            if (glyphs & trace).any():
                raise RenderError(f"label {lead.name!r} overlaps its curve")

        truths.append(
            LeadTruth(lead.name, (r0, r1), baseline, x0, center, v, trace, glyphs)
        )

    ink = np.logical_or.reduce([tr.trace_mask | tr.glyph_mask for tr in truths])
    img[ink] = spec.ink_color
    return img, GroundTruth(width, height, ppm, spec.stroke_width_px, truths)


# ---------------------------------------------------------------- distortions


def gaussian_kernel(sigma: float) -> np.ndarray:
    radius = int(math.ceil(3 * sigma))
    x = np.arange(-radius, radius + 1, dtype=np.float64)
    k = np.exp(-0.5 * (x / sigma) ** 2)
    return k / k.sum()


def _convolve_axis(arr, kernel, axis):
    radius = len(kernel) // 2
    pad = [(0, 0)] * arr.ndim
    pad[axis] = (radius, radius)
    padded = np.pad(arr, pad, mode="edge")
    n = arr.shape[axis]
    out = np.zeros(arr.shape, dtype=np.float64)
    for i, kv in enumerate(kernel):
        out += kv * np.take(padded, np.arange(i, i + n), axis=axis)
    return out


def blur(img: np.ndarray, sigma_px: float) -> np.ndarray:
    """Separable Gaussian blur, kernel cut at 3 sigma, edges replicated."""
    check_rgb(img)
    if sigma_px < 0:
        raise ValueError("sigma must be >= 0")
    if sigma_px == 0:
        return img.copy()
    k = gaussian_kernel(sigma_px)
    out = _convolve_axis(_convolve_axis(img.astype(np.float64), k, 0), k, 1)
    return np.clip(np.floor(out + 0.5), 0, 255).astype(np.uint8)


def desaturate(img: np.ndarray, factor: float) -> np.ndarray:
    """Pull every channel ``factor`` of the way toward the pixel's luma."""
    check_rgb(img)
    if not 0.0 <= factor <= 1.0:
        raise ValueError("desaturation factor must lie in [0, 1]")
    luma = to_grayscale(img).astype(np.float64)[..., None]
    c = img.astype(np.float64)
    return np.clip(np.floor(c + factor * (luma - c) + 0.5), 0, 255).astype(np.uint8)


def rotate(img: np.ndarray, degrees: float, fill=(252, 250, 248), chunk_rows: int = 256) -> np.ndarray:
    """Rotate counterclockwise (as displayed) about the image center.

    Bilinear sampling; output keeps the input size and samples falling
    outside the source take ``fill``.
    """
    check_rgb(img)
    h, w = img.shape[:2]
    theta = math.radians(degrees)
    cos_t, sin_t = math.cos(theta), math.sin(theta)
    cy, cx = (h - 1) / 2.0, (w - 1) / 2.0
    src = img.astype(np.float64)
    fill = np.asarray(fill, dtype=np.float64)
    out = np.empty_like(img)
    xs = np.arange(w) - cx
    for r0 in range(0, h, chunk_rows):
        ys = (np.arange(r0, min(h, r0 + chunk_rows)) - cy)[:, None]
        # inverse map: output offset -> source offset
        sx = xs[None, :] * cos_t - ys * sin_t + cx
        sy = xs[None, :] * sin_t + ys * cos_t + cy
        inside = (sx >= 0) & (sx <= w - 1) & (sy >= 0) & (sy <= h - 1)
        x0 = np.clip(np.floor(sx).astype(np.int64), 0, w - 1)
        y0 = np.clip(np.floor(sy).astype(np.int64), 0, h - 1)
        x1 = np.minimum(x0 + 1, w - 1)
        y1 = np.minimum(y0 + 1, h - 1)
        fx = (sx - x0)[..., None]
        fy = (sy - y0)[..., None]
        val = (
            src[y0, x0] * (1 - fx) * (1 - fy)
            + src[y0, x1] * fx * (1 - fy)
            + src[y1, x0] * (1 - fx) * fy
            + src[y1, x1] * fx * fy
        )
        val = np.where(inside[..., None], val, fill)
        out[r0: r0 + len(ys)] = np.clip(np.floor(val + 0.5), 0, 255).astype(np.uint8)
    return out


def apply_distortions(img, blur_sigma=0.0, desaturation=0.0, rotation_deg=0.0, fill=(252, 250, 248)):
    """Rotate, then blur, then desaturate; zero settings are skipped."""
    if rotation_deg:
        img = rotate(img, rotation_deg, fill=fill)
    if blur_sigma:
        img = blur(img, blur_sigma)
    if desaturation:
        img = desaturate(img, desaturation)
    return img
