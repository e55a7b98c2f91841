import numpy as np
import pytest
from hypothesis import given, strategies as st

from pitchwarp.curve import SEMITONE, PitchCurve, from_frames
from pitchwarp.dtw import AlignmentPath, map_to_path
from pitchwarp.metrics import MetricError, f0_rmse, paa

from conftest import HOP


def test_paa_perfect():
    gt = np.array([0, 0, 1, 2, 4, 5])
    assert paa(map_to_path(gt, 6), gt) == 100.0


def test_paa_constant_prediction():
    gt = np.arange(10)
    assert paa(np.zeros(10), gt, tolerance=5) == 60.0
    # as a path: frame 9's partners are 0..9, lower median 4 -> one more hit
    path = AlignmentPath(np.array([[i, 0] for i in range(10)] + [[9, j] for j in range(1, 10)]))
    assert paa(path, gt, tolerance=5) == 70.0


def test_paa_errors():
    gt = np.arange(4)
    with pytest.raises(MetricError):
        paa(map_to_path(np.arange(3), 3), gt)
    with pytest.raises(MetricError):
        paa(map_to_path(gt, 4), gt, tolerance=-1)


@given(st.lists(st.integers(0, 3), min_size=2, max_size=60), st.integers(0, 10))
def test_paa_range_and_self_score(steps, tol):
    gt = np.concatenate([[0], np.cumsum(steps)])
    assert paa(gt, gt, tol) == 100.0
    # a path through the map scores within half the largest jump
    score = paa(map_to_path(gt, int(gt[-1]) + 1), gt, max(tol, 1))
    assert 0.0 <= score <= 100.0
    assert paa(map_to_path(gt, int(gt[-1]) + 1), gt, 2) == 100.0


def test_f0_rmse_examples():
    a = from_frames([100, 100], [1, 1], HOP)
    assert f0_rmse(a, a) == 0.0
    assert f0_rmse(a, from_frames([103, 97], [1, 1], HOP)) == pytest.approx(3.0, abs=1e-12)


def test_f0_rmse_masks_and_errors():
    a = from_frames([100, 200, 300], [1, 0, 1], HOP)
    b = from_frames([110, 500, 0], [1, 1, 0], HOP)
    assert f0_rmse(a, b) == pytest.approx(10.0)
    with pytest.raises(MetricError):
        f0_rmse(a, from_frames([1, 2], [1, 1], HOP))
    with pytest.raises(MetricError):
        f0_rmse(a, from_frames([0, 0, 0], [0, 0, 0], HOP))
    with pytest.raises(MetricError):
        f0_rmse(a, PitchCurve([1, 2, 3], [1, 1, 1], HOP, SEMITONE))


@given(st.lists(st.tuples(st.floats(50, 900), st.floats(50, 900)), min_size=1, max_size=40))
def test_f0_rmse_symmetric(rows):
    a = from_frames([r[0] for r in rows], [True] * len(rows), HOP)
    b = from_frames([r[1] for r in rows], [True] * len(rows), HOP)
    assert f0_rmse(a, b) == f0_rmse(b, a)
