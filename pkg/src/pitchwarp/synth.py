"""Seeded synthetic template/amateur pitch pairs with known alignment.

Templates are note sequences with logistic transitions and vibrato. An
amateur rendition is the template pushed through a random piecewise-linear
time warp, with some notes sung off-key, a slow drift and frame jitter.
The warp is known, so the ground-truth frame map comes for free.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict, field
from pathlib import Path

import numpy as np
from scipy.ndimage import median_filter

from .curve import DEFAULT_HOP_SECONDS, HZ, PitchCurve, as_unit, load_json, save_json

#: C major, G3 to G5 (MIDI numbers)
C_MAJOR = (55, 57, 59, 60, 62, 64, 65, 67, 69, 71, 72, 74, 76, 77, 79)

# 10%-90% rise time of a logistic is 2*ln(9) time constants
LOGISTIC_RISE = 2 * np.log(9)


def midi_to_hz(midi):
    return 440.0 * 2.0 ** ((np.asarray(midi, dtype=np.float64) - 69.0) / 12.0)


@dataclass(frozen=True)
class TemplateParams:
    n_notes: int = 8
    note_len_range: tuple[int, int] = (30, 90)
    scale_set: tuple[int, ...] = C_MAJOR
    vibrato_depth_st: float = 0.3
    vibrato_rate_hz: float = 5.5
    transition_frames: int = 12
    #: largest interval between consecutive notes, in semitones
    max_leap_st: float = 7.0
    hop_seconds: float = DEFAULT_HOP_SECONDS


@dataclass(frozen=True)
class AmateurParams:
    warp_knots: int = 4
    #: maximum local tempo ratio; values <= 1 disable the time warp
    warp_strength: float = 1.6
    offkey_prob: float = 0.5
    offkey_range_st: float = 2.0
    jitter_st: float = 0.03
    drift_st: float = 0.45


@dataclass(frozen=True)
class NoteLayout:
    """Note targets (MIDI) and boundary positions (fractional frames)."""

    pitches: tuple[float, ...]
    boundaries: tuple[float, ...]
    transition_frames: float


@dataclass(eq=False)
class SynthPair:
    template: PitchCurve
    amateur: PitchCurve
    gt_map: np.ndarray
    seed: int
    meta: dict = field(default_factory=dict)


def _render_notes(t, layout: NoteLayout, offsets=None):
    """Semitone (MIDI) contour of ``layout`` evaluated at frame times ``t``."""
    pitches = np.asarray(layout.pitches, dtype=np.float64)
    if offsets is not None:
        pitches = pitches + np.asarray(offsets)
    out = np.full_like(t, pitches[0], dtype=np.float64)
    width = max(layout.transition_frames, 1e-9) / LOGISTIC_RISE
    for b, lo, hi in zip(layout.boundaries, pitches[:-1], pitches[1:]):
        z = np.clip((t - b) / width, -60.0, 60.0)
        out += (hi - lo) / (1.0 + np.exp(-z))
    return out


def _vibrato(t_seconds, depth, rate, phase):
    if depth == 0:
        return np.zeros_like(t_seconds)
    return depth * np.sin(2 * np.pi * rate * t_seconds + phase)


def gen_template_with_layout(params: TemplateParams, seed: int):
    """Like :func:`gen_template` but also return the note layout used."""
    rng = np.random.default_rng(seed)
    scale = np.asarray(params.scale_set, dtype=np.float64)
    lo_len, hi_len = params.note_len_range
    lengths = rng.integers(lo_len, hi_len + 1, size=params.n_notes)
    pitches = [float(rng.choice(scale))]
    for _ in range(params.n_notes - 1):
        step = np.abs(scale - pitches[-1])
        choices = scale[(step > 0) & (step <= params.max_leap_st)]
        if choices.size == 0:
            choices = scale
        pitches.append(float(rng.choice(choices)))
    boundaries = np.cumsum(lengths)[:-1] - 0.5
    layout = NoteLayout(tuple(pitches), tuple(float(b) for b in boundaries),
                        float(params.transition_frames))
    n_frames = int(lengths.sum())
    t = np.arange(n_frames, dtype=np.float64)
    phase = float(rng.uniform(0, 2 * np.pi))
    midi = _render_notes(t, layout) + _vibrato(
        t * params.hop_seconds, params.vibrato_depth_st, params.vibrato_rate_hz, phase
    )
    curve = PitchCurve(midi_to_hz(midi), np.ones(n_frames, dtype=bool), params.hop_seconds, HZ)
    return curve, layout, {"vibrato_phase": phase}


def gen_template(params: TemplateParams | None = None, seed: int = 0) -> PitchCurve:
    """Random note-sequence pitch curve in Hz, deterministic per seed."""
    return gen_template_with_layout(params or TemplateParams(), seed)[0]


def detect_layout(template: PitchCurve, transition_frames: float = 12.0) -> NoteLayout:
    """Rough note segmentation of a curve without a known layout.

    The semitone contour is median filtered over ~180 ms to suppress vibrato
    and rounded to whole semitones. Runs shorter than half that window are
    treated as glide residue; a boundary sits midway between surviving runs.
    """
    midi = 69.0 + 12.0 * np.log2(np.maximum(template.values, 1e-9) / 440.0)
    win = max(1, int(round(0.18 / template.hop_seconds)))
    levels = np.round(median_filter(midi, size=win, mode="nearest"))
    starts = np.concatenate([[0], np.flatnonzero(np.diff(levels) != 0) + 1])
    ends = np.append(starts[1:], levels.size)
    # runs shorter than the smoothing window are glide residue, not notes
    notes = [(a, b) for a, b in zip(starts, ends) if b - a >= win // 2] or [(0, levels.size)]
    pitches, bounds = [float(levels[notes[0][0]])], []
    prev_end = notes[0][1]
    for a, b in notes[1:]:
        if levels[a] != pitches[-1]:
            bounds.append((prev_end + a) / 2.0 - 0.5)
            pitches.append(float(levels[a]))
        prev_end = b
    return NoteLayout(tuple(pitches), tuple(bounds), transition_frames)


def sample_warp(n_template: int, params: AmateurParams, rng):
    """Knots of a random monotone warp, as (amateur_times, template_times)."""
    span = float(n_template - 1)
    if params.warp_strength <= 1 or n_template < 2:
        return np.array([0.0, span]), np.array([0.0, span])
    inner = np.sort(rng.uniform(0.0, span, size=params.warp_knots))
    t_knots = np.concatenate([[0.0], inner, [span]])
    log_s = np.log(params.warp_strength)
    # amateur duration per template duration; its inverse is the warp slope
    ratio = np.exp(rng.uniform(-log_s, log_s, size=t_knots.size - 1))
    ratio = np.clip(ratio, 1 / params.warp_strength, params.warp_strength)
    a_knots = np.concatenate([[0.0], np.cumsum(np.diff(t_knots) * ratio)])
    return a_knots, t_knots


def gen_amateur(
    template: PitchCurve,
    params: AmateurParams | None = None,
    seed: int = 0,
    layout: NoteLayout | None = None,
) -> SynthPair:
    """Synthesize an amateur rendition of ``template`` with known alignment."""
    params = params or AmateurParams()
    if len(template) == 0:
        raise ValueError("template must be nonempty")
    rng = np.random.default_rng(seed)
    n_p = len(template)
    if layout is None:
        layout = detect_layout(template)

    a_knots, t_knots = sample_warp(n_p, params, rng)
    if params.warp_strength <= 1 or n_p < 2:
        n_a = n_p
        tau = np.arange(n_p, dtype=np.float64)
    else:
        n_a = max(2, int(round(a_knots[-1])) + 1)
        tau = np.interp(np.linspace(0.0, a_knots[-1], n_a), a_knots, t_knots)
    gt_map = np.clip(np.rint(tau).astype(np.int64), 0, n_p - 1)

    n_notes = len(layout.pitches)
    offsets = np.zeros(n_notes)
    for k in range(n_notes):
        if params.offkey_prob > 0 and rng.uniform() < params.offkey_prob:
            off = rng.uniform(-params.offkey_range_st, params.offkey_range_st)
            if rng.uniform() < 0.5:
                off = float(np.round(off))
            offsets[k] = off
    frames = np.arange(n_p, dtype=np.float64)
    hz = np.interp(tau, frames, template.values)
    delta = np.zeros(n_a)
    if np.any(offsets):
        delta += _render_notes(tau, NoteLayout(tuple(offsets), layout.boundaries,
                                               layout.transition_frames))

    drift_cycles = rng.uniform(0.5, 1.5)
    drift_phase = rng.uniform(0, 2 * np.pi)
    if params.drift_st > 0:
        u = np.linspace(0.0, 1.0, n_a)
        delta += params.drift_st * np.sin(2 * np.pi * drift_cycles * u + drift_phase)
    if params.jitter_st > 0:
        delta += rng.normal(0.0, params.jitter_st, size=n_a)

    amateur = PitchCurve(hz * 2.0 ** (delta / 12.0), np.ones(n_a, dtype=bool), template.hop_seconds, HZ)
    meta = {
        "warp_amateur_knots": a_knots.tolist(),
        "warp_template_knots": t_knots.tolist(),
        "offsets_st": offsets.tolist(),
        "params": asdict(params),
    }
    return SynthPair(template, amateur, gt_map, seed, meta)


@dataclass(frozen=True)
class CorpusParams:
    template: TemplateParams = TemplateParams()
    amateur: AmateurParams = AmateurParams()

    def as_dict(self) -> dict:
        return {"template": asdict(self.template), "amateur": asdict(self.amateur)}

    @classmethod
    def from_dict(cls, data: dict) -> "CorpusParams":
        t = dict(data.get("template", {}))
        for key in ("note_len_range", "scale_set"):
            if key in t:
                t[key] = tuple(t[key])
        return cls(TemplateParams(**t), AmateurParams(**data.get("amateur", {})))


def pair_seed(master_seed: int, index: int) -> int:
    """Seed of pair ``index``, derived from the master seed by counter."""
    return int(np.random.SeedSequence([master_seed, index]).generate_state(1)[0])


def gen_pair(corpus: CorpusParams, seed: int) -> SynthPair:
    template, layout, tmeta = gen_template_with_layout(corpus.template, seed)
    amateur_seed = int(np.random.SeedSequence([seed, 1]).generate_state(1)[0])
    pair = gen_amateur(template, corpus.amateur, amateur_seed, layout=layout)
    pair.seed = seed
    pair.meta.update(tmeta)
    pair.meta["note_pitches"] = list(layout.pitches)
    pair.meta["note_boundaries"] = list(layout.boundaries)
    return pair


def gen_corpus(corpus: CorpusParams, n_pairs: int, master_seed: int) -> list[SynthPair]:
    return [gen_pair(corpus, pair_seed(master_seed, i)) for i in range(n_pairs)]


def pair_in_unit(pair: SynthPair, unit: str):
    """(amateur, template) converted to ``unit``."""
    return as_unit(pair.amateur, unit), as_unit(pair.template, unit)


# -- corpus directory format -----------------------------------------------


def save_corpus(pairs, out_dir, corpus: CorpusParams | None = None, master_seed=None) -> None:
    """Write ``pair_XXXX/{template,amateur,gt}.json`` plus a manifest."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    names = []
    for k, pair in enumerate(pairs):
        d = out / f"pair_{k:04d}"
        d.mkdir(exist_ok=True)
        save_json(pair.template, d / "template.json")
        save_json(pair.amateur, d / "amateur.json")
        gt = {"gt_map": pair.gt_map.tolist(), "seed": pair.seed, "meta": pair.meta}
        (d / "gt.json").write_text(json.dumps(gt), encoding="utf-8")
        names.append(d.name)
    manifest = {"pairs": names, "master_seed": master_seed,
                "corpus": corpus.as_dict() if corpus else None}
    (out / "manifest.json").write_text(json.dumps(manifest, indent=2), encoding="utf-8")


def load_gt(fname) -> np.ndarray:
    data = json.loads(Path(fname).read_text(encoding="utf-8"))
    if isinstance(data, dict):
        data = data["gt_map"]
    return np.asarray(data, dtype=np.int64)


def load_corpus(in_dir) -> list[SynthPair]:
    """Read a corpus directory; also accepts externally produced pairs."""
    root = Path(in_dir)
    manifest = root / "manifest.json"
    if manifest.exists():
        names = json.loads(manifest.read_text(encoding="utf-8"))["pairs"]
        dirs = [root / n for n in names]
    else:
        dirs = sorted(p for p in root.iterdir() if (p / "gt.json").exists())
    pairs = []
    for d in dirs:
        gt = json.loads((d / "gt.json").read_text(encoding="utf-8"))
        pairs.append(SynthPair(
            template=load_json(d / "template.json"),
            amateur=load_json(d / "amateur.json"),
            gt_map=np.asarray(gt["gt_map"], dtype=np.int64),
            seed=int(gt.get("seed", 0)),
            meta=gt.get("meta", {}),
        ))
    return pairs
