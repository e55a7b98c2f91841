import numpy as np
import pytest

from pitchwarp.curve import SEMITONE, hz_to_semitones
from pitchwarp.dtw import dtw, euclidean_cost
from pitchwarp.metrics import paa
from pitchwarp.synth import (
    AmateurParams, CorpusParams, TemplateParams, detect_layout, gen_amateur, gen_corpus,
    gen_pair, gen_template, gen_template_with_layout, load_corpus, pair_in_unit, pair_seed, save_corpus,
)

STILL = AmateurParams(warp_strength=0, offkey_prob=0, jitter_st=0, drift_st=0)
WARP_ONLY = AmateurParams(offkey_prob=0, jitter_st=0, drift_st=0)


def test_single_note_without_vibrato_is_constant():
    c = gen_template(TemplateParams(n_notes=1, vibrato_depth_st=0), seed=3)
    assert np.ptp(c.values) == 0
    assert c.voiced.all()


def test_template_deterministic():
    a = gen_template(TemplateParams(), 42)
    b = gen_template(TemplateParams(), 42)
    assert a.values.tobytes() == b.values.tobytes()
    assert gen_template(TemplateParams(), 43) != a


def test_vibrato_rate_from_spectrum():
    params = TemplateParams(n_notes=1, note_len_range=(1500, 1500), vibrato_depth_st=0.5,
                            vibrato_rate_hz=5.5)
    c = hz_to_semitones(gen_template(params, 0))
    x = c.values - c.values.mean()
    spec = np.abs(np.fft.rfft(x * np.hanning(x.size), 8 * x.size))
    freqs = np.fft.rfftfreq(8 * x.size, d=c.hop_seconds)
    assert freqs[np.argmax(spec)] == pytest.approx(5.5, abs=0.3)


def test_zero_edits_reproduce_template():
    t = gen_template(TemplateParams(), 5)
    pair = gen_amateur(t, STILL, seed=9)
    assert pair.amateur == t
    assert pair.gt_map.tolist() == list(range(len(t)))


def test_gt_map_invariants():
    for seed in range(30):
        pair = gen_pair(CorpusParams(), pair_seed(1, seed))
        gt = pair.gt_map
        assert gt.size == len(pair.amateur)
        assert gt[0] == 0 and gt[-1] == len(pair.template) - 1
        assert np.all(np.diff(gt) >= 0)
        # slopes stay within the warp-strength bound (plus rounding)
        assert np.diff(gt).max() <= np.ceil(AmateurParams().warp_strength) + 1


def test_warp_only_dtw_is_near_perfect():
    scores = []
    for seed in range(10):
        pair = gen_pair(CorpusParams(amateur=WARP_ONLY), pair_seed(2, seed))
        a, t = pair_in_unit(pair, SEMITONE)
        scores.append(paa(dtw(euclidean_cost(a, t)), pair.gt_map, 5))
    assert min(scores) >= 99.0


def test_offkey_segments_are_shifted():
    pair = gen_pair(CorpusParams(amateur=AmateurParams(offkey_prob=1.0, jitter_st=0, drift_st=0)),
                    11)
    offsets = np.array(pair.meta["offsets_st"])
    assert np.all(np.abs(offsets) <= 2.0)
    assert np.count_nonzero(offsets) >= len(offsets) // 2


def test_detect_layout_recovers_notes():
    for seed in range(20):
        t, truth, _ = gen_template_with_layout(TemplateParams(), seed)
        found = detect_layout(t)
        assert found.pitches == truth.pitches
        np.testing.assert_allclose(found.boundaries, truth.boundaries, atol=6)


def test_leaps_bounded():
    for seed in range(20):
        _, layout, _ = gen_template_with_layout(TemplateParams(max_leap_st=4), seed)
        steps = np.abs(np.diff(layout.pitches))
        assert np.all((steps > 0) & (steps <= 4))


def test_corpus_round_trip(tmp_path):
    corpus = CorpusParams()
    pairs = gen_corpus(corpus, 3, master_seed=5)
    save_corpus(pairs, tmp_path / "c", corpus, 5)
    back = load_corpus(tmp_path / "c")
    assert len(back) == 3
    for p, q in zip(pairs, back):
        assert p.template == q.template and p.amateur == q.amateur
        assert np.array_equal(p.gt_map, q.gt_map) and p.seed == q.seed


def test_pair_seeds_distinct_and_stable():
    seeds = [pair_seed(0, k) for k in range(100)]
    assert len(set(seeds)) == 100
    assert seeds == [pair_seed(0, k) for k in range(100)]
