"""Digitize scanned paper electrocardiograms into calibrated per-lead signals."""

from .calibrate import Calibration, Signal, to_signal
from .pipeline import RunConfig, digitize_file, digitize_image

__all__ = ["Calibration", "RunConfig", "Signal", "digitize_file", "digitize_image", "to_signal"]
__version__ = "0.1.0"
