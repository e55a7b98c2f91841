"""Move per-frame features between the amateur and template timelines."""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .curve import PitchCurve
from .dtw import AlignmentPath, AlignmentError, path_to_map

FEATURE_MAGIC = b"PWFT"
_HEADER = struct.Struct("<4sII")


def warp_features(features, path: AlignmentPath, target_len: int, mode: str = "mean") -> np.ndarray:
    """Resample amateur-frame features onto the template timeline.

    Template frame j receives the mean of the amateur frames paired with it
    (``mode="mean"``), or only the first of them (``mode="nearest"``).
    1-D input is treated as a single feature dimension and returned 1-D.
    """
    feats = np.asarray(features, dtype=np.float64)
    squeeze = feats.ndim == 1
    if squeeze:
        feats = feats[:, None]
    if feats.ndim != 2 or feats.shape[1] < 1:
        raise AlignmentError("features must be an (N_a, D) array")
    n_a, n_p = path.shape
    if n_a != feats.shape[0] or n_p != target_len or tuple(path.pairs[0]) != (0, 0):
        raise AlignmentError(
            f"path spans {n_a}x{n_p} frames but features have {feats.shape[0]} rows "
            f"and target_len is {target_len}"
        )
    i, j = path.pairs[:, 0], path.pairs[:, 1]
    if mode == "mean":
        out = np.zeros((target_len, feats.shape[1]))
        np.add.at(out, j, feats[i])
        counts = np.bincount(j, minlength=target_len)
        if np.any(counts == 0):
            raise AlignmentError("path leaves template frames uncovered")
        out /= counts[:, None]
    elif mode == "nearest":
        first = np.searchsorted(j, np.arange(target_len), side="left")
        out = feats[i[first]].copy()
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return out[:, 0] if squeeze else out


def warp_pitch_to_amateur_timeline(template: PitchCurve, path: AlignmentPath) -> PitchCurve:
    """Template pitch read back on the amateur timeline via the a->p map."""
    index = path_to_map(path, "a->p")
    if index.max() >= len(template):
        raise AlignmentError("path refers to template frames beyond the curve")
    return PitchCurve(
        template.values[index], template.voiced[index], template.hop_seconds, template.unit
    )


# -- feature files ---------------------------------------------------------


def save_features(features, fname) -> None:
    """``.csv`` writes one frame per row; anything else uses the binary layout."""
    feats = np.asarray(features, dtype=np.float64)
    if feats.ndim == 1:
        feats = feats[:, None]
    if str(fname).lower().endswith(".csv"):
        np.savetxt(fname, feats, delimiter=",", fmt="%.9g")
        return
    with open(fname, "wb") as fh:
        fh.write(_HEADER.pack(FEATURE_MAGIC, feats.shape[0], feats.shape[1]))
        fh.write(feats.astype("<f4").tobytes(order="C"))


def load_features(fname) -> np.ndarray:
    path = Path(fname)
    if path.suffix.lower() == ".csv":
        data = np.loadtxt(path, delimiter=",", ndmin=2)
        return data
    blob = path.read_bytes()
    if len(blob) < _HEADER.size:
        raise ValueError(f"{fname}: truncated feature file")
    magic, n, d = _HEADER.unpack_from(blob)
    if magic != FEATURE_MAGIC:
        raise ValueError(f"{fname}: bad magic {magic!r}")
    body = blob[_HEADER.size :]
    if len(body) != 4 * n * d:
        raise ValueError(f"{fname}: expected {n}x{d} float32 values")
    return np.frombuffer(body, dtype="<f4").reshape(n, d).astype(np.float64)
