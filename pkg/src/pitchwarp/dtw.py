"""Dynamic time warping over a precomputed cost matrix.

Steps are the symmetric set {(1,0), (0,1), (1,1)} with no slope weights.
When several predecessors are co-optimal the backtrace prefers the diagonal,
then the vertical step (i-1, j), then the horizontal step (i, j-1).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path

import numba
import numpy as np

from .curve import PitchCurve

DIAGONAL, VERTICAL, HORIZONTAL = (1, 1), (1, 0), (0, 1)
#: step preference used by every backtrace in this module
STEP_ORDER = (DIAGONAL, VERTICAL, HORIZONTAL)

BRUTE_FORCE_MAX = 8


class AlignmentError(ValueError):
    pass


def validate_cost(cost) -> np.ndarray:
    cost = np.asarray(cost, dtype=np.float64)
    if cost.ndim != 2 or cost.shape[0] < 1 or cost.shape[1] < 1:
        raise AlignmentError(f"cost matrix must be 2-D and nonempty, got shape {cost.shape}")
    if not np.all(np.isfinite(cost)):
        raise AlignmentError("cost matrix entries must be finite")
    if np.any(cost < 0):
        raise AlignmentError("cost matrix entries must be non-negative")
    return cost


@dataclass(eq=False)
class AlignmentPath:
    """Monotone, continuous warping path from (0, 0) to (N_a-1, N_p-1)."""

    pairs: np.ndarray
    total_cost: float = 0.0
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.pairs = np.asarray(self.pairs, dtype=np.int64).reshape(-1, 2)

    def __len__(self):
        return len(self.pairs)

    @property
    def shape(self) -> tuple[int, int]:
        """(N_a, N_p) implied by the path end point."""
        return int(self.pairs[-1, 0]) + 1, int(self.pairs[-1, 1]) + 1

    def same_pairs(self, other: "AlignmentPath") -> bool:
        return np.array_equal(self.pairs, other.pairs)

    def to_dict(self) -> dict:
        out = {"pairs": self.pairs.tolist(), "total_cost": float(self.total_cost)}
        if self.meta:
            out["meta"] = self.meta
        return out

    @classmethod
    def from_dict(cls, data: dict) -> "AlignmentPath":
        path = cls(
            pairs=np.asarray(data["pairs"], dtype=np.int64),
            total_cost=float(data.get("total_cost", 0.0)),
            meta=dict(data.get("meta", {})),
        )
        check_path(path)
        return path


def check_path(path: AlignmentPath, shape: tuple[int, int] | None = None) -> None:
    """Raise AlignmentError unless ``path`` is a valid warping path."""
    pairs = path.pairs
    if len(pairs) == 0:
        raise AlignmentError("empty path")
    if tuple(pairs[0]) != (0, 0):
        raise AlignmentError(f"path must start at (0, 0), starts at {tuple(pairs[0])}")
    if shape is not None and tuple(pairs[-1]) != (shape[0] - 1, shape[1] - 1):
        raise AlignmentError(
            f"path must end at {(shape[0] - 1, shape[1] - 1)}, ends at {tuple(pairs[-1])}"
        )
    steps = np.diff(pairs, axis=0)
    ok = ((steps == 0) | (steps == 1)).all(axis=1) & (steps.sum(axis=1) > 0)
    if not ok.all():
        bad = int(np.argmin(ok))
        raise AlignmentError(
            f"invalid step {tuple(steps[bad])} after pair {tuple(pairs[bad])}"
        )


def is_valid_path(path: AlignmentPath, shape: tuple[int, int] | None = None) -> bool:
    try:
        check_path(path, shape)
    except AlignmentError:
        return False
    return True


@numba.njit(cache=True)
def _path_cost(cost, pairs):
    total = 0.0
    for k in range(pairs.shape[0]):
        total += cost[pairs[k, 0], pairs[k, 1]]
    return total


def path_cost(cost, pairs) -> float:
    """Sum of ``cost`` along ``pairs``, accumulated in path order."""
    return float(_path_cost(np.asarray(cost, dtype=np.float64),
                            np.asarray(pairs, dtype=np.int64).reshape(-1, 2)))


@numba.njit(cache=True)
def _accumulate(cost, radius):
    n, m = cost.shape
    acc = np.full((n, m), np.inf)
    for i in range(n):
        if radius >= 0:
            # band centred on the straight line between the corners
            centre = i * (m - 1) / max(n - 1, 1)
            lo = max(0, int(np.floor(centre - radius)))
            hi = min(m, int(np.ceil(centre + radius)) + 1)
        else:
            lo, hi = 0, m
        for j in range(lo, hi):
            c = cost[i, j]
            if i == 0 and j == 0:
                acc[i, j] = c
                continue
            best = np.inf
            if i > 0 and j > 0:
                best = acc[i - 1, j - 1]
            if i > 0 and acc[i - 1, j] < best:
                best = acc[i - 1, j]
            if j > 0 and acc[i, j - 1] < best:
                best = acc[i, j - 1]
            acc[i, j] = c + best
    return acc


@numba.njit(cache=True)
def _backtrace(acc):
    n, m = acc.shape
    i, j = n - 1, m - 1
    out = np.empty((n + m - 1, 2), dtype=np.int64)
    k = 0
    out[k, 0] = i
    out[k, 1] = j
    while i > 0 or j > 0:
        if i > 0 and j > 0:
            best = acc[i - 1, j - 1]
            di, dj = 1, 1
            if acc[i - 1, j] < best:
                best = acc[i - 1, j]
                di, dj = 1, 0
            if acc[i, j - 1] < best:
                di, dj = 0, 1
        elif i > 0:
            di, dj = 1, 0
        else:
            di, dj = 0, 1
        i -= di
        j -= dj
        k += 1
        out[k, 0] = i
        out[k, 1] = j
    return out[: k + 1][::-1].copy()


def accumulated_cost(cost, band: float | None = None) -> np.ndarray:
    """Accumulated-cost matrix of the DTW recurrence.

    ``band`` is an optional Sakoe-Chiba radius given as a fraction of
    max(N_a, N_p); cells outside the band stay at +inf.
    """
    cost = validate_cost(cost)
    return _accumulate(cost, _band_radius(cost.shape, band))


def _band_radius(shape, band):
    radius = -1.0
    if band is not None:
        if band <= 0:
            raise AlignmentError("band must be a positive fraction")
        n, m = shape
        # the band must always contain a path between the corners
        radius = max(band * max(n, m), abs(n - m) / 2 + 1.0)
    return radius


def dtw(cost, band: float | None = None) -> AlignmentPath:
    """Minimum-cost warping path through ``cost``."""
    cost = validate_cost(cost)
    acc = _accumulate(cost, _band_radius(cost.shape, band))
    pairs = _backtrace(acc)
    return AlignmentPath(pairs, path_cost(cost, pairs))


def _step_rank(step) -> int:
    return STEP_ORDER.index(step)


def brute_force_dtw(cost) -> AlignmentPath:
    """Exhaustive search over every warping path; test oracle for :func:`dtw`.

    Co-optimal paths are ranked by their steps read backwards from the end
    point, using the same preference order as the backtrace.
    """
    cost = validate_cost(cost)
    n, m = cost.shape
    if n > BRUTE_FORCE_MAX or m > BRUTE_FORCE_MAX:
        raise AlignmentError(
            f"brute_force_dtw is limited to {BRUTE_FORCE_MAX}x{BRUTE_FORCE_MAX}, got {n}x{m}"
        )

    best = {"cost": np.inf, "key": None, "pairs": None}
    pairs = [(0, 0)]

    def walk(i, j, total):
        if (i, j) == (n - 1, m - 1):
            key = tuple(
                _step_rank((a[0] - b[0], a[1] - b[1]))
                for a, b in zip(pairs[:0:-1], pairs[-2::-1])
            )
            if total < best["cost"] or (total == best["cost"] and key < best["key"]):
                best.update(cost=total, key=key, pairs=list(pairs))
            return
        for di, dj in STEP_ORDER:
            a, b = i + di, j + dj
            if a < n and b < m:
                pairs.append((a, b))
                walk(a, b, total + cost[a, b])
                pairs.pop()

    walk(0, 0, 0.0 + cost[0, 0])
    return AlignmentPath(np.array(best["pairs"]), best["cost"])


def euclidean_cost(x: PitchCurve, y: PitchCurve) -> np.ndarray:
    """Pairwise |x_i - y_j| between the frames of two same-unit curves."""
    if x.unit != y.unit:
        raise AlignmentError(f"unit mismatch: {x.unit} vs {y.unit}")
    if len(x) == 0 or len(y) == 0:
        raise AlignmentError("curves must be nonempty")
    return np.abs(x.values[:, None] - y.values[None, :])


def sq_euclidean_cost(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    """Pairwise squared Euclidean distance between the rows of ``x`` and ``y``."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    y = np.ascontiguousarray(y, dtype=np.float64)
    if x.ndim != 2 or y.ndim != 2 or x.shape[1] != y.shape[1]:
        raise AlignmentError("feature sequences must be 2-D with equal dimension")
    return _sq_euclidean(x, y)


@numba.njit(cache=True)
def _sq_euclidean(x, y):
    n, m, d = x.shape[0], y.shape[0], x.shape[1]
    out = np.empty((n, m))
    for i in range(n):
        for j in range(m):
            acc = 0.0
            for k in range(d):
                diff = x[i, k] - y[j, k]
                acc += diff * diff
            out[i, j] = acc
    return out


def path_to_map(path: AlignmentPath, direction: str = "a->p") -> np.ndarray:
    """Collapse a path into one partner index per frame.

    With ``direction="a->p"`` entry i is the lower median of the template
    indices paired with amateur frame i; ``"p->a"`` is the mirror image.
    """
    pairs = path.pairs
    if direction in ("a->p", "a2p"):
        src, dst = pairs[:, 0], pairs[:, 1]
    elif direction in ("p->a", "p2a"):
        src, dst = pairs[:, 1], pairs[:, 0]
    else:
        raise AlignmentError(f"unknown direction {direction!r}")
    n = int(src.max()) + 1
    # pairs of a valid path are sorted along both axes, so each frame's
    # partners form one contiguous, already-sorted run
    starts = np.searchsorted(src, np.arange(n), side="left")
    ends = np.searchsorted(src, np.arange(n), side="right")
    return dst[starts + (ends - starts - 1) // 2].copy()


def map_to_path(index_map, n_target: int) -> AlignmentPath:
    """Valid path through the points (i, index_map[i]).

    A jump of more than one target frame is bridged by horizontal steps;
    each bridged target frame is paired with whichever of the two source
    frames maps nearer to it, or with both when it sits exactly midway.
    """
    index_map = np.asarray(index_map, dtype=np.int64)
    if index_map.size == 0:
        raise AlignmentError("empty map")
    if index_map[0] != 0 or index_map[-1] != n_target - 1:
        raise AlignmentError("map must start at 0 and end at n_target - 1")
    if np.any(np.diff(index_map) < 0):
        raise AlignmentError("map must be non-decreasing")
    pairs = [(0, int(index_map[0]))]
    for i in range(1, index_map.size):
        lo, hi = int(index_map[i - 1]), int(index_map[i])
        for k in range(lo + 1, hi):
            if k - lo < hi - k:
                pairs.append((i - 1, k))
            elif k - lo > hi - k:
                pairs.append((i, k))
            else:
                pairs.extend([(i - 1, k), (i, k)])
        pairs.append((i, hi))
    return AlignmentPath(np.array(pairs))


def save_path(path: AlignmentPath, fname) -> None:
    Path(fname).write_text(json.dumps(path.to_dict()), encoding="utf-8")


def load_path(fname) -> AlignmentPath:
    return AlignmentPath.from_dict(json.loads(Path(fname).read_text(encoding="utf-8")))
