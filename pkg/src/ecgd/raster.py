"""Raster conventions, color conversion and lossless image I/O.

Every stage works on plain numpy arrays, row-major, origin top-left:

* RGB image    -- ``(h, w, 3)`` uint8
* gray image   -- ``(h, w)`` uint8
* binary image -- ``(h, w)`` bool, True is the active (white) color
* index image  -- ``(h, w)`` float64

PNG goes through Pillow; binary PPM (P6) is parsed and written here since the
format is a ten line affair.
"""

from __future__ import annotations

import io
import os
import re
from pathlib import Path

import numpy as np
from PIL import Image

from .errors import (
    CorruptStreamError,
    DimensionMismatchError,
    ImageWriteError,
    UnreadableFileError,
    UnsupportedFormatError,
)

LUMA_WEIGHTS = (0.299, 0.587, 0.114)

_PNG_MAGIC = b"\x89PNG\r\n\x1a\n"
# Pillow modes that are 8 bits per channel
_PNG_MODES = {"RGB", "RGBA", "L", "LA", "P", "PA"}


def check_rgb(img: np.ndarray) -> np.ndarray:
    if img.dtype != np.uint8 or img.ndim != 3 or img.shape[2] != 3:
        raise ValueError(f"expected (h, w, 3) uint8 image, got {img.dtype} {img.shape}")
    if img.shape[0] < 1 or img.shape[1] < 1:
        raise ValueError("image must be at least 1x1")
    return img


def to_grayscale(img: np.ndarray) -> np.ndarray:
    """Rec. 601 luma, rounded half away from zero and clamped to 0..255."""
    check_rgb(img)
    r, g, b = (img[..., i].astype(np.float64) for i in range(3))
    y = LUMA_WEIGHTS[0] * r + LUMA_WEIGHTS[1] * g + LUMA_WEIGHTS[2] * b
    return np.clip(np.floor(y + 0.5), 0, 255).astype(np.uint8)


def complement(img: np.ndarray) -> np.ndarray:
    return ~np.asarray(img, dtype=bool)


def whiteout(gray: np.ndarray, mask: np.ndarray) -> np.ndarray:
    """Saturating add of a 255-valued mask: masked pixels become white."""
    if gray.shape != mask.shape:
        raise DimensionMismatchError(f"gray {gray.shape} vs mask {mask.shape}")
    out = gray.copy()
    out[mask] = 255
    return out


def binary_to_gray(img: np.ndarray) -> np.ndarray:
    return np.where(img, 255, 0).astype(np.uint8)


def index_to_gray(idx: np.ndarray) -> np.ndarray:
    """Map an index image from [-1, 1] onto 0..255 for viewing."""
    return np.clip(np.round((idx + 1.0) * 127.5), 0, 255).astype(np.uint8)


# ---------------------------------------------------------------- reading


def load_image(path) -> np.ndarray:
    """Read a PNG or binary PPM file as an ``(h, w, 3)`` uint8 array.

    Alpha is dropped, gray PNGs are replicated into three channels.
    """
    path = Path(path)
    try:
        raw = path.read_bytes()
    except OSError as exc:
        raise UnreadableFileError(f"cannot read {path}: {exc.strerror or exc}") from exc
    if raw.startswith(b"P6"):
        return _decode_ppm(raw)
    if raw.startswith(_PNG_MAGIC):
        return _decode_png(raw)
    if raw[:2] in (b"P3", b"P5", b"P2", b"P1", b"P4"):
        raise UnsupportedFormatError(f"{path}: only binary RGB PPM (P6) is supported")
    raise UnsupportedFormatError(f"{path}: not a PNG or P6 PPM file")


_PPM_HEADER = re.compile(rb"P6(?:\s+|#[^\n]*\n)+?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)(?:\s+|#[^\n]*\n)+?(\d+)\s")


def _decode_ppm(raw: bytes) -> np.ndarray:
    # comments are legal anywhere whitespace is between header fields
    m = _PPM_HEADER.match(raw)
    if m is None:
        raise CorruptStreamError("malformed PPM header")
    w, h, maxval = (int(g) for g in m.groups())
    if maxval != 255:
        raise UnsupportedFormatError(f"PPM maxval {maxval} unsupported, need 255")
    if w < 1 or h < 1:
        raise CorruptStreamError(f"PPM dimensions {w}x{h} invalid")
    body = raw[m.end():]
    need = w * h * 3
    if len(body) < need:
        raise CorruptStreamError(f"PPM body has {len(body)} bytes, expected {need}")
    return np.frombuffer(body[:need], dtype=np.uint8).reshape(h, w, 3).copy()


def _decode_png(raw: bytes) -> np.ndarray:
    try:
        with Image.open(io.BytesIO(raw)) as im:
            mode = im.mode
            if mode not in _PNG_MODES:
                raise UnsupportedFormatError(
                    f"PNG pixel mode {mode!r} unsupported (need 8 bits per channel)"
                )
            im.load()
            rgb = im.convert("RGB")
    except UnsupportedFormatError:
        raise
    except (OSError, SyntaxError, ValueError) as exc:
        raise CorruptStreamError(f"corrupt PNG stream: {exc}") from exc
    return np.asarray(rgb, dtype=np.uint8).copy()


# ---------------------------------------------------------------- writing


def save_image(img: np.ndarray, path) -> None:
    """Write RGB, gray or binary arrays losslessly.

    ``.ppm`` selects P6 (RGB only); anything else is written as PNG. Binary
    images are stored as 0/255 gray.
    """
    img = np.asarray(img)
    if img.dtype == bool:
        img = binary_to_gray(img)
    if img.dtype != np.uint8 or img.ndim not in (2, 3):
        raise ValueError(f"cannot save array of dtype {img.dtype} and shape {img.shape}")
    path = Path(path)
    try:
        if path.suffix.lower() == ".ppm":
            if img.ndim != 3:
                img = np.repeat(img[..., None], 3, axis=2)
            h, w = img.shape[:2]
            with open(path, "wb") as fh:
                fh.write(b"P6\n%d %d\n255\n" % (w, h))
                fh.write(np.ascontiguousarray(img).tobytes())
        else:
            Image.fromarray(np.ascontiguousarray(img)).save(path, format="PNG")
    except OSError as exc:
        raise ImageWriteError(f"cannot write {path}: {exc.strerror or exc}") from exc


def atomic_write_bytes(path, data: bytes) -> None:
    """Write via a sibling temp file and rename, so readers never see a partial file."""
    path = Path(path)
    tmp = path.with_name(f".{path.name}.{os.getpid()}.tmp")
    with open(tmp, "wb") as fh:
        fh.write(data)
    os.replace(tmp, path)
