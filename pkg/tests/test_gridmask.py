import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ecgd import gridmask
from ecgd.errors import DegenerateHistogramError, NoGridError, NonSquareGridError, TooFewLinesError
from ecgd.otsu import otsu_split
from oracles import otsu_brute


def px(*rgb):
    return np.array([[rgb]], dtype=np.uint8)


def test_color_index_examples():
    assert gridmask.color_index(px(255, 0, 0))[0, 0] == 1.0
    assert gridmask.color_index(px(0, 0, 0))[0, 0] == 0.0
    assert gridmask.color_index(px(230, 180, 180))[0, 0] == pytest.approx(50 / 410)
    for g in (1, 77, 255):
        assert gridmask.color_index(px(g, g, g))[0, 0] == 0.0


@given(arrays(np.uint8, (4, 4, 3)))
def test_color_index_range(img):
    idx = gridmask.color_index(img)
    assert np.all(idx >= -1) and np.all(idx <= 1)
    rect = gridmask.relu_rectify(idx)
    assert np.all(rect >= 0) and np.all(rect <= 1)


@given(arrays(np.uint8, (3, 3, 3), elements=st.integers(1, 255)), st.sampled_from([0.5, 0.9]))
def test_color_index_scale_invariance(img, s):
    base = gridmask.color_index(img)
    scaled = np.floor(img.astype(np.float64) * s + 0.5).astype(np.uint8)
    real = img.astype(np.float64) * s
    r, rest = real[..., 0], 0.5 * (real[..., 1] + real[..., 2])
    assert np.allclose((r - rest) / (r + rest), base)
    # 8-bit quantization of dark pixels can move the index a little more
    bright = img.min(axis=2) >= 50
    assert np.all(np.abs(gridmask.color_index(scaled) - base)[bright] <= 0.02)


def test_relu():
    assert gridmask.relu_rectify(np.array([-0.3, 0.5, 0.0])).tolist() == [0.0, 0.5, 0.0]


# ------------------------------------------------------------------ otsu


@settings(max_examples=200, deadline=None)
@given(st.lists(st.integers(0, 50), min_size=2, max_size=256).filter(lambda h: sum(1 for c in h if c) >= 2))
def test_otsu_split_matches_brute_force(hist):
    assert otsu_split(hist) == otsu_brute(hist)


def test_otsu_split_degenerate():
    with pytest.raises(DegenerateHistogramError):
        otsu_split([0, 5, 0])


def test_otsu_real_bimodal():
    v = np.array([0.1] * 50 + [0.9] * 50)
    assert 0.1 < gridmask.otsu_threshold_real(v) < 0.9


def test_otsu_real_three_levels_match_brute_force():
    v = np.array([0.2] * 70 + [0.6] * 20 + [0.9] * 10)
    hist = np.bincount(np.floor(v * 256).astype(int), minlength=256)
    k = otsu_brute(hist.tolist())
    assert gridmask.otsu_threshold_real(v) == (k - 0.5) / 256


def test_otsu_real_constant():
    with pytest.raises(DegenerateHistogramError):
        gridmask.otsu_threshold_real(np.full(10, 0.3))


def test_grid_mask_half_and_half():
    rect = np.zeros((4, 8))
    rect[:, 4:] = 0.4
    level = gridmask.otsu_threshold_real(rect)
    assert level == pytest.approx(0.2, abs=0.01)
    mask = gridmask.grid_mask(rect)
    assert np.array_equal(mask, rect == 0.4)


def test_grid_mask_empty_page():
    with pytest.raises(NoGridError):
        gridmask.grid_mask(np.zeros((5, 5)))


@settings(max_examples=30)
@given(arrays(np.float64, (6, 6), elements=st.floats(0, 1)))
def test_grid_mask_monotone_in_scale(rect):
    if len(np.unique(np.floor(rect * 256).clip(0, 255))) < 2:
        return
    assert np.all(gridmask.grid_mask(rect, 1.0) <= gridmask.grid_mask(rect, 0.5))


# ----------------------------------------------------------------- pitch


def lattice(h, w, step, offset=3):
    m = np.zeros((h, w), bool)
    m[offset::step, :] = True
    m[:, offset::step] = True
    return m


def test_estimate_pitch_24():
    est = gridmask.estimate_pitch(lattice(400, 500, 24))
    assert est.px_per_mm == 24.0
    assert est.h_pitch_px == est.v_pitch_px == 24.0
    assert est.px_per_mm == (est.h_pitch_px + est.v_pitch_px) / 2


def test_estimate_pitch_600dpi_grid():
    from ecgd.synth import grid_positions

    ppm = 600 / 25.4
    m = np.zeros((600, 700), bool)
    m[grid_positions(600, ppm)[0], :] = True
    m[:, grid_positions(700, ppm)[0]] = True
    assert gridmask.estimate_pitch(m).px_per_mm == pytest.approx(ppm, abs=0.5)


@pytest.mark.parametrize("step", [9, 17, 31])
def test_estimate_pitch_noisy(rng, step):
    m = lattice(420, 420, step) | (rng.random((420, 420)) < 0.05)
    assert abs(gridmask.estimate_pitch(m).px_per_mm - step) <= 1


def test_too_few_lines():
    m = np.zeros((100, 100), bool)
    m[[10, 40, 70], :] = True
    m[:, [10, 40, 70]] = True
    with pytest.raises(TooFewLinesError):
        gridmask.estimate_pitch(m)


def test_anisotropic_grid_rejected():
    m = np.zeros((400, 400), bool)
    m[::20, :] = True
    m[:, ::30] = True
    with pytest.raises(NonSquareGridError):
        gridmask.estimate_pitch(m)


def test_projection_peaks_plateau_keeps_leftmost():
    assert gridmask.projection_peaks(np.array([0, 5, 5, 0, 0, 0, 4, 0])).tolist() == [1, 6]
