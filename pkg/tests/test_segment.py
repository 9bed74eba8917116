import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from ecgd import segment
from ecgd.errors import EmptyRoiError, NoCurvesError
from oracles import count_edges_by_runs


def test_row_projection():
    assert segment.row_projection(np.ones((2, 4), bool)).tolist() == [1.0, 1.0]
    assert segment.row_projection(np.zeros((3, 4), bool)).tolist() == [0, 0, 0]
    assert segment.row_projection(np.array([[False, True, False, False]]))[0] == 0.25


def bumps(n, centers, sigma=20.0):
    r = np.arange(n)
    return sum(np.exp(-0.5 * ((r - c) / sigma) ** 2) for c in centers)


def test_two_bumps_split_at_valley():
    assert segment.find_stripes(bumps(400, [100, 300]), 10) == [(0, 200), (201, 399)]


def test_single_bump_whole_page():
    assert segment.find_stripes(bumps(300, [140]), 10) == [(0, 299)]


def test_flat_zero_projection():
    with pytest.raises(NoCurvesError):
        segment.find_stripes(np.zeros(50), 10)


def test_small_bump_below_prominence_ignored():
    proj = bumps(600, [100, 300]) + 0.1 * bumps(600, [500], sigma=5)
    assert len(segment.find_stripes(proj, 10)) == 2


@settings(max_examples=40)
@given(st.lists(st.integers(60, 540), min_size=1, max_size=5, unique=True))
def test_breaks_below_neighbouring_peaks(centers):
    centers = sorted(centers)
    if any(b - a < 80 for a, b in zip(centers, centers[1:])):
        return
    proj = bumps(600, centers, sigma=12)
    stripes = segment.find_stripes(proj, 8)
    assert len(stripes) == len(centers)
    smoothed = segment.smooth(proj, 8)
    for (a, b), (c, d) in zip(stripes, stripes[1:]):
        brk = b
        assert smoothed[brk] <= smoothed[a:b + 1].max()
        assert smoothed[brk] <= smoothed[c:d + 1].max()
    for (a, b), c in zip(stripes, centers):
        assert a <= c <= b


def test_local_maxima_plateau_counts_once():
    v = np.array([0, 1, 3, 3, 3, 1, 0, 0, 0, 0], float)
    assert segment.local_maxima(v, 2, 0.5) == [3]


def test_edge_projection_examples():
    col = lambda *v: np.array(v, bool)[:, None]
    assert segment.edge_projection(col(False, True, True, False)).tolist() == [2]
    assert segment.edge_projection(col(False, False, False)).tolist() == [0]
    assert segment.edge_projection(col(True, False, True, False)).tolist() == [3]


@given(arrays(bool, (12, 7)))
def test_edge_projection_matches_run_oracle(img):
    expected = [count_edges_by_runs(img[:, c]) for c in range(img.shape[1])]
    assert segment.edge_projection(img).tolist() == expected


def test_roi_example():
    e = np.ones(900, int)
    e[0:100] = 0
    e[450:530] = 0
    assert segment.find_roi_columns(e, 24) == (100, 449)


def test_roi_no_gaps_is_full_width():
    assert segment.find_roi_columns(np.ones(300, int), 24) == (0, 299)


def test_roi_all_zero():
    with pytest.raises(EmptyRoiError):
        segment.find_roi_columns(np.zeros(300, int), 24)


def test_short_zero_run_does_not_split():
    e = np.ones(900, int)
    e[500:505] = 0  # pen skip shorter than half a pitch
    assert segment.find_roi_columns(e, 24) == (0, 899)


@settings(max_examples=40)
@given(st.integers(0, 11))
def test_roi_stable_under_short_right_padding(pad):
    e = np.ones(900, int)
    e[0:60] = 0
    e[450:530] = 0
    assert segment.find_roi_columns(np.concatenate([e, np.zeros(pad, int)]), 24) == \
        segment.find_roi_columns(e, 24)


def test_crop_roi():
    img = np.arange(12).reshape(3, 4) % 2 == 0
    s = segment.Stripe(0, 2, img, 0)
    assert np.array_equal(segment.crop_roi(s, segment.ColumnRoi(0, 3)), img)
    assert segment.crop_roi(s, segment.ColumnRoi(2, 2)).shape == (3, 1)
    with pytest.raises(ValueError):
        segment.crop_roi(s, segment.ColumnRoi(2, 4))


def test_split_stripes_disjoint_and_ordered():
    img = np.zeros((10, 3), bool)
    stripes = segment.split_stripes(img, [(0, 3), (4, 9)])
    assert [(s.row_start, s.row_end, s.lead_index) for s in stripes] == [(0, 3, 0), (4, 9, 1)]
    assert [s.image.shape[0] for s in stripes] == [4, 6]
