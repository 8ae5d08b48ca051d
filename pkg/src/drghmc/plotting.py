"""Figure rendering for the report commands.

Every report CSV gets a matplotlib rendering written next to it; the CSV
stays the primary artifact.  PNG metadata is stripped so reruns produce
byte-identical image files.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

PNG_METADATA = {"Software": None}
DPI = 140


def _save(fig, path) -> None:
    fig.savefig(path, dpi=DPI, metadata=PNG_METADATA)
    plt.close(fig)


def plot_error_curves(curves: dict, path, ylabel: str = "standardized error") -> None:
    """curves: label -> (budgets, values); log-log axes."""
    fig, ax = plt.subplots(figsize=(6.0, 4.0))
    for label, (budgets, values) in curves.items():
        ax.plot(budgets, values, label=label, linewidth=1.4)
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("gradient evaluations")
    ax.set_ylabel(ylabel)
    ax.legend(frameon=False, fontsize=8)
    ax.grid(alpha=0.3, linewidth=0.4)
    fig.tight_layout()
    _save(fig, path)


def plot_histogram(counts, edges, path, overlay_cdf=None, xlabel: str = "x") -> None:
    """Bar rendering of a precomputed histogram, optional density overlay."""
    fig, ax = plt.subplots(figsize=(6.0, 3.6))
    widths = np.diff(edges)
    ax.bar(edges[:-1], counts, width=widths, align="edge", alpha=0.7, edgecolor="none")
    if overlay_cdf is not None:
        total = float(np.sum(counts))
        expected = np.diff(overlay_cdf(np.asarray(edges))) * total
        centers = 0.5 * (edges[:-1] + edges[1:])
        ax.plot(centers, expected, color="black", linewidth=1.2, label="reference")
        ax.legend(frameon=False, fontsize=8)
    ax.set_xlabel(xlabel)
    ax.set_ylabel("count")
    fig.tight_layout()
    _save(fig, path)


def plot_stepsize_map(rows, path) -> None:
    """Heat map of mean accepted step size over the (x, y) probe grid."""
    xs = sorted({r[0] for r in rows})
    ys = sorted({r[1] for r in rows})
    grid = np.full((len(ys), len(xs)), np.nan)
    for x, y, eps, *_ in rows:
        grid[ys.index(y), xs.index(x)] = math.log10(eps) if eps > 0 else np.nan
    fig, ax = plt.subplots(figsize=(5.4, 4.2))
    mesh = ax.pcolormesh(xs, ys, grid, shading="nearest")
    fig.colorbar(mesh, ax=ax, label="log10 mean accepted step size")
    ax.set_xlabel("x (log scale coordinate)")
    ax.set_ylabel("y")
    fig.tight_layout()
    _save(fig, path)


def plot_condition_field(rows, path) -> None:
    """Side-by-side negative log density and log10 condition number."""
    xs = sorted({r[0] for r in rows})
    ys = sorted({r[1] for r in rows})
    neg = np.full((len(ys), len(xs)), np.nan)
    cond = np.full((len(ys), len(xs)), np.nan)
    for x, y, nld, cnd in rows:
        neg[ys.index(y), xs.index(x)] = math.log10(max(nld, 1e-300)) if nld > 0 else np.nan
        cond[ys.index(y), xs.index(x)] = math.log10(cnd) if math.isfinite(cnd) else np.nan
    fig, axes = plt.subplots(1, 2, figsize=(9.2, 3.8))
    for ax, data, label in ((axes[0], neg, "log10 -log density"),
                            (axes[1], cond, "log10 condition number")):
        mesh = ax.pcolormesh(xs, ys, data, shading="nearest")
        fig.colorbar(mesh, ax=ax, label=label)
        ax.set_xlabel("x")
        ax.set_ylabel("y")
    fig.tight_layout()
    _save(fig, path)


def plot_box_table(summaries: dict, path, ylabel: str = "standardized error") -> None:
    """Box-style rendering of per-group error summaries.

    summaries: group label -> box_summary dict.  Mean dashed, median solid,
    box between the quartiles, whiskers at 1.5 IQR, outliers as dots.
    """
    fig, ax = plt.subplots(figsize=(1.2 + 1.1 * len(summaries), 3.8))
    for i, (label, s) in enumerate(summaries.items()):
        ax.add_patch(plt.Rectangle((i - 0.3, s["q25"]), 0.6, s["q75"] - s["q25"],
                                   alpha=0.4, edgecolor="black", linewidth=0.6))
        ax.hlines(s["median"], i - 0.3, i + 0.3, color="gray", linewidth=1.6)
        ax.hlines(s["mean"], i - 0.3, i + 0.3, color="black", linestyle="--", linewidth=1.0)
        ax.vlines(i, s["whisker_lo"], s["q25"], color="black", linewidth=0.8)
        ax.vlines(i, s["q75"], s["whisker_hi"], color="black", linewidth=0.8)
        if s["outliers"]:
            ax.plot([i] * len(s["outliers"]), s["outliers"], "o",
                    markersize=3, alpha=0.6, color="tab:blue")
    ax.set_xticks(range(len(summaries)))
    ax.set_xticklabels(list(summaries.keys()), fontsize=8)
    ax.set_yscale("log")
    ax.set_ylabel(ylabel)
    fig.tight_layout()
    _save(fig, path)
