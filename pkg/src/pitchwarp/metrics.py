"""Alignment and pitch-accuracy metrics."""

from __future__ import annotations

import numpy as np

from .curve import HZ, PitchCurve
from .dtw import AlignmentPath, path_to_map

DEFAULT_TOLERANCE = 5


class MetricError(ValueError):
    pass


def paa(pred, gt_map, tolerance: int = DEFAULT_TOLERANCE) -> float:
    """Pitch alignment accuracy in percent.

    Share of amateur frames whose predicted template index lies within
    ``tolerance`` frames of the ground truth. ``pred`` is either an
    :class:`AlignmentPath` (reduced with the lower-median a->p map) or an
    already computed per-frame index map.
    """
    gt_map = np.asarray(gt_map, dtype=np.int64)
    if tolerance < 0:
        raise MetricError("tolerance must be non-negative")
    if isinstance(pred, AlignmentPath):
        pred_map = path_to_map(pred, "a->p")
    else:
        pred_map = np.asarray(pred, dtype=np.int64)
    if pred_map.size != gt_map.size:
        raise MetricError(
            f"path covers {pred_map.size} amateur frames, ground truth has {gt_map.size}"
        )
    if gt_map.size == 0:
        raise MetricError("empty ground truth")
    hits = np.abs(pred_map - gt_map) <= tolerance
    return 100.0 * hits.sum() / gt_map.size


def f0_rmse(a: PitchCurve, b: PitchCurve) -> float:
    """RMSE in Hz over frames voiced in both curves."""
    if len(a) != len(b):
        raise MetricError(f"length mismatch: {len(a)} vs {len(b)}")
    if a.unit != HZ or b.unit != HZ:
        raise MetricError("f0_rmse needs Hz curves")
    both = a.voiced & b.voiced
    if not both.any():
        raise MetricError("curves share no voiced frames")
    d = a.values[both] - b.values[both]
    return float(np.sqrt(np.mean(d * d)))
