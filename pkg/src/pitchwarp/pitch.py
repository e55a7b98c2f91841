"""YIN fundamental-frequency estimation and 16-bit PCM WAV I/O."""

from __future__ import annotations

import wave
from dataclasses import dataclass

import numpy as np

from .curve import HZ, PitchCurve

FRAME_SIZE = 1024
HOP_SIZE = 128
F0_MIN = 65.0
F0_MAX = 1000.0
VOICING_THRESHOLD = 0.15


class PitchError(ValueError):
    pass


class WavFormatError(PitchError):
    pass


@dataclass(frozen=True, eq=False)
class Waveform:
    samples: np.ndarray
    sample_rate: int

    def __post_init__(self):
        samples = np.asarray(self.samples, dtype=np.float64).reshape(-1)
        if int(self.sample_rate) != self.sample_rate or self.sample_rate <= 0:
            raise PitchError("sample_rate must be a positive integer")
        if not np.all(np.isfinite(samples)):
            raise PitchError("samples must be finite")
        object.__setattr__(self, "samples", samples)
        object.__setattr__(self, "sample_rate", int(self.sample_rate))

    @property
    def duration(self) -> float:
        return self.samples.size / self.sample_rate


def frame_count(n_samples: int, frame_size: int, hop_size: int) -> int:
    if n_samples < frame_size:
        return 0
    return (n_samples - frame_size) // hop_size + 1


def cmndf(frames: np.ndarray, max_lag: int) -> np.ndarray:
    """Cumulative-mean-normalized difference for every row of ``frames``.

    Returns shape ``(n_frames, max_lag + 1)``; lag 0 is defined as 1.
    The difference function integrates over the first ``frame_size - max_lag``
    samples of each frame.
    """
    n, size = frames.shape
    win = size - max_lag
    nfft = 1 << int(np.ceil(np.log2(2 * size)))
    spec_full = np.fft.rfft(frames, nfft, axis=1)
    spec_head = np.fft.rfft(frames[:, :win], nfft, axis=1)
    # cross[t] = sum_j x[j] * x[j + t] for j < win
    cross = np.fft.irfft(spec_full * np.conj(spec_head), nfft, axis=1)[:, : max_lag + 1]
    sq = np.concatenate([np.zeros((n, 1)), np.cumsum(frames * frames, axis=1)], axis=1)
    lags = np.arange(max_lag + 1)
    energy_head = sq[:, win][:, None]
    energy_shift = sq[:, lags + win] - sq[:, lags]
    diff = np.maximum(energy_head + energy_shift - 2.0 * cross, 0.0)
    diff[:, 0] = 0.0

    out = np.ones_like(diff)
    running = np.cumsum(diff[:, 1:], axis=1)
    with np.errstate(invalid="ignore", divide="ignore"):
        norm = diff[:, 1:] * lags[1:] / running
    out[:, 1:] = np.where(running > 0, norm, 1.0)
    return out


def _pick_lag(d, lo, hi, threshold):
    """Index of the chosen dip of ``d`` within [lo, hi] and its refined lag."""
    seg = d[lo : hi + 1]
    below = np.flatnonzero(seg < threshold)
    if below.size:
        tau = lo + int(below[0])
        # walk to the bottom of the dip that first crossed the threshold
        while tau < hi and d[tau + 1] < d[tau]:
            tau += 1
    else:
        tau = lo + int(np.argmin(seg))
    best = d[tau]
    refined = float(tau)
    if lo < tau < hi:
        a, b, c = d[tau - 1], d[tau], d[tau + 1]
        denom = a - 2.0 * b + c
        if denom > 0:
            refined = tau + 0.5 * (a - c) / denom
    return best, refined


def extract_f0(
    wav: Waveform,
    frame_size: int = FRAME_SIZE,
    hop_size: int = HOP_SIZE,
    f0_min: float = F0_MIN,
    f0_max: float = F0_MAX,
    voicing_threshold: float = VOICING_THRESHOLD,
) -> PitchCurve:
    """Frame-wise YIN pitch of ``wav``.

    Frames whose best normalized difference exceeds ``voicing_threshold``,
    or whose estimate falls outside [f0_min, f0_max], are unvoiced (0 Hz).
    """
    if wav.samples.size == 0:
        raise PitchError("empty waveform")
    if not 0 < f0_min < f0_max:
        raise PitchError("need 0 < f0_min < f0_max")
    if frame_size < 4 or hop_size < 1:
        raise PitchError("frame_size must be >= 4 and hop_size >= 1")
    sr = wav.sample_rate
    hop_seconds = hop_size / sr
    n_frames = frame_count(wav.samples.size, frame_size, hop_size)
    if n_frames == 0:
        return PitchCurve(np.zeros(0), np.zeros(0, dtype=bool), hop_seconds, HZ)

    max_lag = frame_size // 2
    lo = max(2, int(np.floor(sr / f0_max)))
    hi = min(max_lag - 1, int(np.ceil(sr / f0_min)))
    if lo >= hi:
        raise PitchError("lag search range is empty for these f0 bounds and frame size")

    frames = np.lib.stride_tricks.sliding_window_view(wav.samples, frame_size)[::hop_size]
    d = cmndf(np.ascontiguousarray(frames), max_lag)

    f0 = np.zeros(n_frames)
    voiced = np.zeros(n_frames, dtype=bool)
    for t in range(n_frames):
        best, lag = _pick_lag(d[t], lo, hi, voicing_threshold)
        if best > voicing_threshold:
            continue
        freq = sr / lag
        if f0_min <= freq <= f0_max:
            f0[t] = freq
            voiced[t] = True
    return PitchCurve(f0, voiced, hop_seconds, HZ)


def read_wav(path) -> Waveform:
    """Read a 16-bit PCM mono WAV file into samples in [-1, 1)."""
    try:
        with wave.open(str(path), "rb") as fh:
            channels = fh.getnchannels()
            width = fh.getsampwidth()
            rate = fh.getframerate()
            raw = fh.readframes(fh.getnframes())
    except (wave.Error, EOFError) as exc:
        raise WavFormatError(f"{path}: not a readable WAV file ({exc})") from None
    if channels != 1:
        raise WavFormatError(f"{path}: mono required, file has {channels} channels")
    if width != 2:
        raise WavFormatError(f"{path}: 16-bit PCM required, file has {8 * width}-bit samples")
    samples = np.frombuffer(raw, dtype="<i2").astype(np.float64) / 32768.0
    return Waveform(samples, rate)


def write_wav(wav: Waveform, path, channels: int = 1) -> None:
    """Write 16-bit PCM; ``channels > 1`` duplicates the signal (for tests)."""
    pcm = np.clip(np.round(wav.samples * 32767.0), -32768, 32767).astype("<i2")
    if channels > 1:
        pcm = np.repeat(pcm, channels)
    with wave.open(str(path), "wb") as fh:
        fh.setnchannels(channels)
        fh.setsampwidth(2)
        fh.setframerate(wav.sample_rate)
        fh.writeframes(pcm.tobytes())


def sine(freq: float, seconds: float = 1.0, sample_rate: int = 22050, amp: float = 0.5) -> Waveform:
    t = np.arange(int(round(seconds * sample_rate))) / sample_rate
    return Waveform(amp * np.sin(2 * np.pi * freq * t), sample_rate)
