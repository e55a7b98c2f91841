"""Figures for alignments and benchmark reports, plus a PGM cost-matrix dump."""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

# stable element ids so repeated SVG renders are byte-identical
matplotlib.rcParams["svg.hashsalt"] = "pitchwarp"
matplotlib.rcParams["svg.fonttype"] = "none"

_NO_DATE = {"svg": {"Date": None}, "pdf": {"CreationDate": None}, "png": {}}


def _save(fig, fname):
    fmt = str(fname).rsplit(".", 1)[-1].lower()
    fig.savefig(fname, bbox_inches="tight", metadata=_NO_DATE.get(fmt))
    plt.close(fig)


def plot_alignment(amateur, template, path, fname, gt_map=None, title=None, max_links=60):
    """Both curves with warp links (top) and the path in the index plane (bottom)."""
    fig, (top, bottom) = plt.subplots(2, 1, figsize=(8, 6.5), gridspec_kw={"height_ratios": [3, 2]})
    t_a = np.arange(len(amateur))
    t_p = np.arange(len(template))
    # lift the template so links are visible even when the curves overlap
    span = np.ptp(np.concatenate([amateur.values, template.values])) or 1.0
    lift = 1.2 * span
    top.plot(t_p, template.values + lift, color="tab:blue", lw=1.2, label="template (shifted up)")
    top.plot(t_a, amateur.values, color="tab:orange", lw=1.2, label="amateur")
    step = max(1, len(path.pairs) // max_links)
    for i, j in path.pairs[::step]:
        top.plot([i, j], [amateur.values[i], template.values[j] + lift],
                 color="0.6", lw=0.5, zorder=0)
    top.set_xlabel("frame")
    top.set_ylabel(f"F0 ({amateur.unit})")
    top.legend(loc="upper right", fontsize=8, frameon=False)
    if title:
        top.set_title(title)

    bottom.plot(path.pairs[:, 1], path.pairs[:, 0], color="tab:red", lw=1.2, label="path")
    if gt_map is not None:
        bottom.plot(np.asarray(gt_map), t_a, color="k", lw=0.8, ls="--", label="ground truth")
    bottom.set_xlabel("template frame")
    bottom.set_ylabel("amateur frame")
    bottom.legend(loc="lower right", fontsize=8, frameon=False)
    fig.tight_layout()
    _save(fig, fname)


def plot_benchmark(report, fname):
    """Mean PAA per algorithm with std error bars, one bar group per unit."""
    units = report["params"]["units"]
    algos = report["params"]["algorithms"]
    x = np.arange(len(algos))
    width = 0.8 / max(len(units), 1)
    fig, ax = plt.subplots(figsize=(1.6 + 1.3 * len(algos), 3.6))
    for k, unit in enumerate(units):
        means = [report["summary"][unit][a]["mean"] for a in algos]
        stds = [report["summary"][unit][a]["std"] for a in algos]
        ax.bar(x + (k - (len(units) - 1) / 2) * width, means, width, yerr=stds,
               capsize=3, label=unit)
    ax.set_xticks(x)
    ax.set_xticklabels(algos, rotation=20 if max(map(len, algos)) > 8 else 0)
    ax.set_ylabel("PAA (%)")
    ax.set_ylim(0, 105)
    ax.set_title(f"{report['params']['n_pairs']} pairs, tolerance "
                 f"{report['params']['tolerance_frames']} frames", fontsize=9)
    ax.legend(fontsize=8, frameon=False)
    fig.tight_layout()
    _save(fig, fname)


def write_pgm(matrix, fname) -> None:
    """Binary PGM of ``matrix`` scaled to 0..255 (0 = lowest cost)."""
    m = np.asarray(matrix, dtype=np.float64)
    lo, hi = m.min(), m.max()
    scaled = np.zeros_like(m) if hi == lo else (m - lo) / (hi - lo)
    pixels = np.round(255 * scaled).astype(np.uint8)
    with open(fname, "wb") as fh:
        fh.write(f"P5\n{m.shape[1]} {m.shape[0]}\n255\n".encode("ascii"))
        fh.write(pixels.tobytes())
