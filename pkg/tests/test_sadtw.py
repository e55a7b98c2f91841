import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from pitchwarp.curve import SEMITONE, PitchCurve
from pitchwarp.dtw import dtw, euclidean_cost
from pitchwarp.metrics import paa
from pitchwarp.sadtw import (
    DescriptorError, SADTWParams, chi_square_cost, chi_square_matrix, robust_scale, sadtw,
    sadtw_cost, shape_descriptors,
)
from pitchwarp.synth import AmateurParams, CorpusParams, gen_pair, pair_in_unit

from conftest import HOP


def st_curve(values):
    return PitchCurve(np.asarray(values, dtype=float), np.ones(len(values), bool), HOP, SEMITONE)


def loop_descriptor(f, i, m, n, hw, s):
    """Direct transcription of the bin definition, one neighbour at a time."""
    h = [0.0] * (m * n)
    for j in range(max(0, i - hw), min(len(f), i + hw + 1)):
        if j == i:
            continue
        w = min(m - 1, max(0, math.floor(m * (j - i + hw) / (2 * hw + 1))))
        theta = math.atan2((f[j] - f[i]) / s + 0.0, (j - i) / hw)
        a = math.floor((theta + math.pi) / (2 * math.pi) * n) % n
        h[w * n + a] += 1
    total = sum(h)
    return [v / total for v in h] if total else h


def test_three_frame_hand_count():
    d = shape_descriptors(st_curve([0, 1, 2]), m=1, n=4, half_width=1, freq_scale=1.0)
    # middle frame: atan2(-1,-1) = -3pi/4 -> sector 0, atan2(1,1) = pi/4 -> sector 2
    assert d[1].tolist() == [0.5, 0.0, 0.5, 0.0]


def test_constant_curve_uses_only_horizontal_sectors():
    d = shape_descriptors(st_curve(np.full(20, 7.0)), m=4, n=6, half_width=5, freq_scale=1.0)
    # angle 0 -> sector 3, angle pi -> wraps to sector 0
    mass = d.reshape(20, 4, 6).sum(axis=(0, 1))
    assert set(np.flatnonzero(mass)) == {0, 3}


def test_descriptor_matches_loop_oracle():
    rng = np.random.default_rng(7)
    for trial in range(20):
        n_frames = int(rng.integers(2, 60))
        f = np.cumsum(rng.normal(size=n_frames))
        m, n, hw = int(rng.integers(1, 5)), int(rng.integers(2, 9)), int(rng.integers(1, 12))
        s = float(rng.uniform(0.3, 3))
        d = shape_descriptors(st_curve(f), m=m, n=n, half_width=hw, freq_scale=s)
        for i in range(n_frames):
            np.testing.assert_allclose(d[i], loop_descriptor(f, i, m, n, hw, s), atol=1e-15)


def test_descriptor_rows_are_normalized():
    rng = np.random.default_rng(1)
    d = shape_descriptors(st_curve(np.cumsum(rng.normal(size=100))))
    assert d.shape == (100, 24)
    assert np.all(d >= 0)
    np.testing.assert_allclose(d.sum(axis=1), 1.0, atol=1e-9)
    assert shape_descriptors(st_curve([3.0]), freq_scale=1.0).sum() == 0


def test_descriptor_argument_checks():
    c = st_curve([0, 1, 2])
    for kw in ({"m": 0}, {"n": 1}, {"half_width": 0}):
        with pytest.raises(DescriptorError):
            shape_descriptors(c, freq_scale=1.0, **kw)
    with pytest.raises(DescriptorError, match="fixed"):
        shape_descriptors(st_curve(np.full(10, 5.0)))


@settings(max_examples=50)
@given(st.integers(0, 10_000), st.floats(-24, 24))
def test_descriptor_shift_invariance(seed, c):
    f = np.cumsum(np.random.default_rng(seed).normal(size=80))
    fixed = shape_descriptors(st_curve(f), freq_scale=0.7)
    assert np.array_equal(shape_descriptors(st_curve(f + np.round(c)), freq_scale=0.7), fixed)
    robust = shape_descriptors(st_curve(f))
    np.testing.assert_allclose(shape_descriptors(st_curve(f + c)), robust, atol=1e-9)


def test_descriptor_locality():
    rng = np.random.default_rng(5)
    f = np.cumsum(rng.normal(size=200))
    hw, i = 10, 100
    g = f.copy()
    g[: i - hw] += rng.normal(size=i - hw) * 5
    g[i + hw + 1 :] -= 3.0
    a = shape_descriptors(st_curve(f), half_width=hw, freq_scale=1.0)
    b = shape_descriptors(st_curve(g), half_width=hw, freq_scale=1.0)
    assert np.array_equal(a[i], b[i])


def test_robust_scale():
    assert robust_scale([0, 1, 2, 3]) == 0.0
    d = np.random.default_rng(0).normal(size=200_001)
    assert robust_scale(np.cumsum(d)) == pytest.approx(1.0, rel=0.01)


def test_chi_square_examples():
    assert chi_square_cost([0.25, 0.75], [0.25, 0.75]) == 0.0
    assert chi_square_cost([1, 0], [0, 1]) == 1.0
    assert chi_square_cost([0.5, 0.5], [1, 0]) == pytest.approx(1 / 3, abs=1e-9)
    # empty bins contribute nothing
    assert chi_square_cost([0, 0, 1], [0, 0, 1]) == 0.0
    with pytest.raises(DescriptorError):
        chi_square_cost([1, 0], [1, 0, 0])


histograms = st.lists(st.floats(0, 1), min_size=6, max_size=6).filter(lambda v: sum(v) > 0)


@given(histograms, histograms)
def test_chi_square_symmetric_bounded(a, b):
    a = np.array(a) / sum(a)
    b = np.array(b) / sum(b)
    assert chi_square_cost(a, b) == chi_square_cost(b, a)
    assert chi_square_cost(a, a) == 0.0
    assert 0.0 <= chi_square_cost(a, b) <= 1.0


def test_chi_square_matrix_agrees_with_scalar():
    rng = np.random.default_rng(2)
    A = rng.dirichlet(np.ones(24) * 0.3, size=7)
    P = rng.dirichlet(np.ones(24) * 0.3, size=5)
    M = chi_square_matrix(A, P)
    for i in range(7):
        for j in range(5):
            assert M[i, j] == pytest.approx(chi_square_cost(A[i], P[j]), abs=1e-14)


def _pair(seed, **amateur):
    pair = gen_pair(CorpusParams(amateur=AmateurParams(**amateur)), seed)
    return pair_in_unit(pair, SEMITONE), pair.gt_map


def test_sadtw_identical_curves_diagonal():
    (a, t), _ = _pair(3)
    p = sadtw(t, t)
    assert np.array_equal(p.pairs, np.stack([np.arange(len(t))] * 2, axis=1))
    assert p.total_cost == 0.0
    assert p.meta["m"] == 4 and p.meta["n"] == 6


def test_sadtw_constant_shift_gives_identical_path():
    (a, t), _ = _pair(11)
    base = sadtw(a, t)
    shifted = sadtw(a.shifted(3.0), t)
    assert np.array_equal(sadtw_cost(a.shifted(3.0), t), sadtw_cost(a, t))
    assert shifted.same_pairs(base)


def test_sadtw_beats_dtw_on_segment_shifts():
    wins = 0
    for seed in range(10):
        (a, t), gt = _pair(seed, offkey_prob=0.5, offkey_range_st=2.0)
        wins += paa(sadtw(a, t), gt) > paa(dtw(euclidean_cost(a, t)), gt)
    assert wins >= 8


def test_sadtw_params_are_configurable():
    (a, t), gt = _pair(4)
    p = sadtw(a, t, SADTWParams(m=2, n=8, half_width=16, freq_scale=0.5))
    assert p.meta == {"algo": "sadtw", "m": 2, "n": 8, "half_width": 16, "freq_scale": 0.5}
