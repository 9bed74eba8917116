import functools

import numpy as np
import pytest

from ecgd import synth

SIX = ("I", "II", "III", "aVR", "aVL", "aVF")
# R-wave amplitudes per lead, aVR inverted as on a real sheet
R_AMPS = {"I": 0.7, "II": 1.2, "III": 0.5, "aVR": -0.7, "aVL": 0.4, "aVF": 0.9}


def ecg_leads(names=SIX, duration_ms=4000.0, qrs_sigma_ms=12.5):
    return tuple(
        synth.Lead(n, tuple(synth.synthetic_ecg(duration_ms, r_amp_mv=R_AMPS.get(n, 0.8),
                                                qrs_sigma_ms=qrs_sigma_ms)), 2.0)
        for n in names
    )


@functools.lru_cache(maxsize=None)
def sheet(names=SIX, duration_ms=4000.0, **kw):
    """Rendered sheet and ground truth, cached across tests (treat as read-only)."""
    spec = synth.SheetSpec(leads=ecg_leads(names, duration_ms), **kw)
    img, truth = synth.render_sheet(spec)
    img.setflags(write=False)
    return spec, img, truth


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
