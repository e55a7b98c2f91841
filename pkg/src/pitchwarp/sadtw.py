"""Shape-aware DTW: align pitch curves by local contour shape.

Every frame is described by a histogram of where its neighbours sit
relative to it, split into ``m`` time windows and ``n`` angle sectors.
Frames of the two curves are compared with the chi-square statistic of
their histograms, and plain DTW runs on the resulting cost matrix.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, asdict
from pathlib import Path

import numba
import numpy as np

from .curve import PitchCurve
from .dtw import AlignmentPath, dtw

MAD_TO_STD = 1.4826


class DescriptorError(ValueError):
    pass


@dataclass(frozen=True)
class SADTWParams:
    m: int = 4
    n: int = 6
    half_width: int = 32
    #: ``"robust_std"`` or a positive number used as a fixed frequency scale
    freq_scale: str | float = "robust_std"

    def as_dict(self) -> dict:
        return asdict(self)


def robust_scale(values) -> float:
    """1.4826 x MAD of the frame-to-frame differences."""
    d = np.diff(np.asarray(values, dtype=np.float64))
    if d.size == 0:
        return 0.0
    return float(MAD_TO_STD * np.median(np.abs(d - np.median(d))))


def resolve_scale(curve: PitchCurve, freq_scale) -> float:
    if isinstance(freq_scale, str):
        if freq_scale != "robust_std":
            raise DescriptorError(f"unknown freq_scale {freq_scale!r}")
        s = robust_scale(curve.values)
        if not s > 0:
            raise DescriptorError(
                "robust frequency scale is zero (curve is piecewise constant); "
                "pass a fixed freq_scale instead"
            )
        return s
    s = float(freq_scale)
    if not s > 0:
        raise DescriptorError("fixed freq_scale must be positive")
    return s


def shape_descriptors(
    curve: PitchCurve,
    m: int = 4,
    n: int = 6,
    half_width: int = 32,
    freq_scale="robust_std",
) -> np.ndarray:
    """Per-frame shape histograms, shape ``(len(curve), m * n)``.

    Bin ``w * n + a`` counts neighbours in time window ``w`` and angle
    sector ``a``. Sectors split the full circle starting at -pi; an angle
    on a sector edge belongs to the higher sector, and pi wraps to sector 0.
    Rows are L1-normalized (all-zero for a single-frame curve).
    """
    if m < 1 or n < 2 or half_width < 1:
        raise DescriptorError("need m >= 1, n >= 2 and half_width >= 1")
    f = curve.values
    size = f.size
    scale = resolve_scale(curve, freq_scale) if size > 1 else 1.0
    hist = np.zeros((size, m * n))
    rows = np.arange(size)
    for off in range(-half_width, half_width + 1):
        if off == 0 or abs(off) >= size:
            continue
        i = rows[max(0, -off) : size - max(0, off)]
        # + 0.0 turns -0.0 into +0.0 so flat neighbours get angle 0 or pi
        df = (f[i + off] - f[i]) / scale + 0.0
        theta = np.arctan2(df, off / half_width)
        sector = np.floor((theta + np.pi) / (2 * np.pi) * n).astype(np.int64) % n
        window = min(m - 1, max(0, (m * (off + half_width)) // (2 * half_width + 1)))
        np.add.at(hist, (i, window * n + sector), 1.0)
    total = hist.sum(axis=1, keepdims=True)
    np.divide(hist, total, out=hist, where=total > 0)
    return hist


def chi_square_cost(h_a, h_p) -> float:
    """Half the chi-square statistic between two normalized histograms."""
    h_a = np.asarray(h_a, dtype=np.float64)
    h_p = np.asarray(h_p, dtype=np.float64)
    if h_a.shape != h_p.shape:
        raise DescriptorError(f"histogram sizes differ: {h_a.shape} vs {h_p.shape}")
    num = (h_a - h_p) ** 2
    den = h_a + h_p
    terms = np.divide(num, den, out=np.zeros_like(num), where=den > 0)
    return float(np.clip(0.5 * terms.sum(), 0.0, 1.0))


def chi_square_matrix(desc_a: np.ndarray, desc_p: np.ndarray) -> np.ndarray:
    """Chi-square cost between every row of ``desc_a`` and every row of ``desc_p``."""
    desc_a = np.ascontiguousarray(desc_a, dtype=np.float64)
    desc_p = np.ascontiguousarray(desc_p, dtype=np.float64)
    if desc_a.shape[1] != desc_p.shape[1]:
        raise DescriptorError("descriptor sizes differ")
    return _chi_square_matrix(desc_a, desc_p)


@numba.njit(cache=True)
def _chi_square_matrix(A, P):
    n, m, bins = A.shape[0], P.shape[0], A.shape[1]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(bins):
                den = A[i, k] + P[j, k]
                if den > 0:
                    diff = A[i, k] - P[j, k]
                    acc += diff * diff / den
            out[i, j] = min(max(0.5 * acc, 0.0), 1.0)
    return out


def sadtw_cost(amateur: PitchCurve, template: PitchCurve, params: SADTWParams | None = None):
    params = params or SADTWParams()
    kw = dict(m=params.m, n=params.n, half_width=params.half_width, freq_scale=params.freq_scale)
    return chi_square_matrix(shape_descriptors(amateur, **kw), shape_descriptors(template, **kw))


def sadtw(
    amateur: PitchCurve,
    template: PitchCurve,
    params: SADTWParams | None = None,
    band: float | None = None,
) -> AlignmentPath:
    """Align ``amateur`` to ``template`` by DTW over descriptor chi-square costs."""
    params = params or SADTWParams()
    if len(amateur) == 0 or len(template) == 0:
        raise DescriptorError("curves must be nonempty")
    path = dtw(sadtw_cost(amateur, template, params), band=band)
    path.meta = {"algo": "sadtw", **params.as_dict()}
    return path


def dump_descriptors(desc: np.ndarray, fname) -> None:
    Path(fname).write_text(json.dumps(np.asarray(desc).tolist()), encoding="utf-8")
