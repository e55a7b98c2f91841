"""Canonical time warping baseline.

Scalar pitch curves are lifted to vectors by delay embedding, then CCA
projection and DTW alternate until the warping path stops changing.
"""

from __future__ import annotations

from dataclasses import dataclass, asdict

import numpy as np
import scipy.linalg

from .curve import PitchCurve, z_normalize
from .dtw import AlignmentPath, dtw, euclidean_cost, sq_euclidean_cost


class CTWError(ValueError):
    pass


def delay_embed(curve, d: int = 5, lag: int = 2) -> np.ndarray:
    """Rows ``(x_t, x_{t+lag}, ..., x_{t+(d-1)lag})``, shape ``(N - (d-1)lag, d)``."""
    x = curve.values if isinstance(curve, PitchCurve) else np.asarray(curve, dtype=np.float64)
    if d < 1 or lag < 1:
        raise CTWError("need d >= 1 and lag >= 1")
    span = (d - 1) * lag
    if x.size < span + 1:
        raise CTWError(f"curve of {x.size} frames is too short for d={d}, lag={lag}")
    n = x.size - span
    return np.stack([x[k * lag : k * lag + n] for k in range(d)], axis=1)


@dataclass
class CCAResult:
    proj_x: np.ndarray
    proj_y: np.ndarray
    corr: np.ndarray
    mean_x: np.ndarray
    mean_y: np.ndarray

    def transform(self, X, Y):
        return (X - self.mean_x) @ self.proj_x, (Y - self.mean_y) @ self.proj_y


def _sign_fix(w):
    for col in range(w.shape[1]):
        nz = np.flatnonzero(np.abs(w[:, col]) > 1e-12 * np.abs(w[:, col]).max(initial=0.0))
        if nz.size and w[nz[0], col] < 0:
            w[:, col] = -w[:, col]
    return w


def cca_fit(X, Y, pairs, reg: float = 1e-4, k: int = 1) -> CCAResult:
    """Regularized CCA on the rows of ``X`` and ``Y`` matched by ``pairs``.

    Solves ``Sxy (Syy + reg I)^-1 Syx w = rho^2 (Sxx + reg I) w``. Columns of
    ``proj_x`` have unit canonical variance and a positive first nonzero
    entry; ``proj_y`` is derived from ``proj_x`` so that each canonical pair
    is positively correlated.
    """
    X = np.asarray(X, dtype=np.float64)
    Y = np.asarray(Y, dtype=np.float64)
    idx = pairs.pairs if isinstance(pairs, AlignmentPath) else np.asarray(pairs)
    if idx.size == 0:
        raise CTWError("no correspondences")
    if idx[:, 0].max() >= len(X) or idx[:, 1].max() >= len(Y) or idx.min() < 0:
        raise CTWError("correspondences fall outside the sequences")
    dx, dy = X.shape[1], Y.shape[1]
    if not 1 <= k <= min(dx, dy):
        raise CTWError(f"k must be in [1, {min(dx, dy)}]")
    if reg < 0:
        raise CTWError("reg must be non-negative")

    A, B = X[idx[:, 0]], Y[idx[:, 1]]
    mean_x, mean_y = A.mean(axis=0), B.mean(axis=0)
    A = A - mean_x
    B = B - mean_y
    n = len(A)
    Sxx = A.T @ A / n + reg * np.eye(dx)
    Syy = B.T @ B / n + reg * np.eye(dy)
    Sxy = A.T @ B / n
    try:
        Ly = scipy.linalg.cho_factor(Syy)
        scipy.linalg.cho_factor(Sxx)
    except np.linalg.LinAlgError:
        raise CTWError("covariance is singular; use reg > 0") from None
    if min(np.linalg.eigvalsh(Sxx).min(), np.linalg.eigvalsh(Syy).min()) <= 1e-12 * max(
        np.trace(Sxx), np.trace(Syy), 1e-300
    ):
        raise CTWError("covariance is singular; use reg > 0")

    M = Sxy @ scipy.linalg.cho_solve(Ly, Sxy.T)
    M = 0.5 * (M + M.T)
    evals, evecs = scipy.linalg.eigh(M, Sxx)
    order = np.argsort(evals)[::-1][:k]
    rho = np.sqrt(np.clip(evals[order], 0.0, None))
    wx = _sign_fix(evecs[:, order].copy())
    wy = scipy.linalg.cho_solve(Ly, Sxy.T @ wx)
    # scale so every y projection has unit canonical variance
    var_y = np.einsum("ij,ij->j", wy, Syy @ wy)
    wy = wy / np.sqrt(np.where(var_y > 0, var_y, 1.0))
    return CCAResult(wx, wy, rho, mean_x, mean_y)


@dataclass(frozen=True)
class CTWParams:
    d: int = 5
    lag: int = 2
    k: int = 2
    reg: float = 1e-4
    max_iter: int = 20

    def as_dict(self) -> dict:
        return asdict(self)


def _extend_tail(pairs, shape):
    """Continue an embedded-index path to the last original frames."""
    pairs = [tuple(p) for p in pairs]
    i, j = pairs[-1]
    n, m = shape
    while i < n - 1 or j < m - 1:
        i, j = min(i + 1, n - 1), min(j + 1, m - 1)
        pairs.append((i, j))
    return np.array(pairs)


def ctw_align(
    x: PitchCurve,
    y: PitchCurve,
    params: CTWParams | None = None,
    band: float | None = None,
) -> AlignmentPath:
    """Align ``x`` to ``y`` with canonical time warping.

    ``meta`` records the iterations used and whether the path converged
    before ``max_iter``.
    """
    params = params or CTWParams()
    X = delay_embed(x, params.d, params.lag)
    Y = delay_embed(y, params.d, params.lag)
    n_x, n_y = len(X), len(Y)

    path = dtw(euclidean_cost(z_normalize(x), z_normalize(y)), band=band)
    pairs = path.pairs[(path.pairs[:, 0] < n_x) & (path.pairs[:, 1] < n_y)]
    k = min(params.k, params.d)
    converged = False
    iterations = 0
    history = []
    for iterations in range(1, params.max_iter + 1):
        fit = cca_fit(X, Y, pairs, reg=params.reg, k=k)
        px, py = fit.transform(X, Y)
        inner = dtw(sq_euclidean_cost(px, py), band=band)
        history.append(inner)
        if np.array_equal(inner.pairs, pairs):
            converged = True
            break
        pairs = inner.pairs

    full = _extend_tail(pairs, (len(x), len(y)))
    meta = {"algo": "ctw", **params.as_dict(), "iterations": iterations, "converged": converged}
    result = AlignmentPath(full, float(inner.total_cost), meta)
    result.history = history
    return result
