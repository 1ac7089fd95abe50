"""Figure builders: model-distance scaling curves and field-profile panels.

Rendering is strictly read-only and deterministic: fixed figure geometry,
fixed ordering (legend sorted by eps, panels sorted by field name), no
timestamps in the output files.
"""

from __future__ import annotations

import math
from pathlib import Path

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .bundleio import BundleError, load_profiles, load_scaling, load_summary

plt.rcParams["svg.hashsalt"] = "mixbgk-plot"

_COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e",
           "#8c564b", "#17becf", "#7f7f7f"]

# profile panels in display order; first match wins
_FIELD_ORDER = ("n", "n_norm", "rho", "u", "u_norm", "T", "T_norm")


def _save(fig, out_file):
    out = Path(out_file)
    out.parent.mkdir(parents=True, exist_ok=True)
    meta = {"Date": None} if out.suffix == ".svg" else None
    fig.savefig(out, metadata=meta)
    plt.close(fig)


def plot_scaling(in_dir, out_file, dpi: int = 130):
    """Distance-vs-time curves, one panel per model pair, one curve per eps
    (log ordinate), with fitted slopes annotated from the summary."""
    tables = load_scaling(in_dir)
    summary = load_summary(in_dir)
    pairs = sorted(tables)
    fig, axes = plt.subplots(1, len(pairs),
                             figsize=(5.2 * len(pairs), 4.0), dpi=dpi,
                             squeeze=False)
    for ax, pair in zip(axes[0], pairs):
        by_eps = tables[pair]
        for i, eps in enumerate(sorted(by_eps, reverse=True)):
            t, d = by_eps[eps]
            ax.semilogy(t, np.maximum(d, 1e-300), color=_COLORS[i % len(_COLORS)],
                        label=f"eps={eps:g}")
        ax.set_xlabel("t")
        ax.set_ylabel("relative L1 distance")
        ax.set_title(pair)
        ax.legend(fontsize=8)
        slopes = summary.get("pairs", {}).get(pair, {}).get("slopes", {})
        if slopes:
            text = "\n".join(f"slope {w}: {v:.2f}" for w, v in
                             sorted(slopes.items()))
            ax.text(0.02, 0.02, text, transform=ax.transAxes, fontsize=8,
                    va="bottom")
    fig.tight_layout()
    _save(fig, out_file)


def _panel_key(field: str) -> tuple:
    for rank, name in enumerate(_FIELD_ORDER):
        if field == name:
            return rank, field
    return len(_FIELD_ORDER), field


def plot_profiles(in_dir, out_file, fields=None, normalized=False,
                  dpi: int = 130):
    """Field profile panels: solid kinetic curves, black dashed references.

    Within one run label the x-grids of all series must agree; reference
    runs may live on their own (finer) grid.
    """
    series = load_profiles(in_dir)
    if normalized:
        series = [s for s in series if s.field.endswith("_norm")]
    if fields:
        series = [s for s in series if s.field in fields]
    if not series:
        raise BundleError("no matching profile series to plot")
    by_label = {}
    for s in series:
        by_label.setdefault(s.label, []).append(s)
    for label, group in by_label.items():
        ref = group[0].x
        for s in group[1:]:
            if s.x.shape != ref.shape or not np.array_equal(s.x, ref):
                raise BundleError(
                    f"x-grid mismatch inside run {label!r} "
                    f"({s.field} s{s.species})")
    panel_fields = sorted({s.field for s in series},
                          key=_panel_key)
    ncols = min(2, len(panel_fields))
    nrows = math.ceil(len(panel_fields) / ncols)
    fig, axes = plt.subplots(nrows, ncols,
                             figsize=(5.6 * ncols, 3.6 * nrows), dpi=dpi,
                             squeeze=False)
    flat = axes.ravel()
    for ax in flat[len(panel_fields):]:
        ax.axis("off")
    for ax, field in zip(flat, panel_fields):
        chosen = [s for s in series if s.field == field]
        color_idx = 0
        for s in sorted(chosen, key=lambda q: (q.label, q.species)):
            if s.is_reference:
                ax.plot(s.x, s.value, "k--", lw=1.2,
                        label=f"{s.label} s{s.species}")
            else:
                ax.plot(s.x, s.value, color=_COLORS[color_idx % len(_COLORS)],
                        lw=1.4, label=f"{s.label} s{s.species}")
                color_idx += 1
        ax.set_xlabel("x")
        ax.set_ylabel(field)
        ax.legend(fontsize=7)
    fig.tight_layout()
    _save(fig, out_file)


FIGURE_KINDS = {"scaling": plot_scaling, "profiles": plot_profiles}
