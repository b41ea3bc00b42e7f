"""Figure rendering: grouped or stacked bars per workload panel, one series
color per cache configuration, deterministic ordering throughout."""

import math

import matplotlib
matplotlib.use("Agg")
import matplotlib.pyplot as plt

from bcview.data import (BREAKDOWN_SEGMENTS, SERIES_ORDER, FigureSpec,
                         breakdown_table, load_rows, metric_table,
                         speedup_table)

_COLORS = {
    "WC": "#9e9e9e",
    "BC W/O": "#4878cf",
    "BC PF": "#e8a33d",
    "BC IDL": "#6acc65",
}
_SEGMENT_COLORS = {
    "native_hits": "#4878cf",
    "cross_hits": "#6acc65",
    "wb_restores": "#e8a33d",
    "misses": "#d65f5f",
}
_TITLES = {
    "speedup": "Speedup over the conventional cache",
    "amat": "Average memory access time",
    "breakdown": "Reference breakdown",
    "row_openings": "DRAM row openings",
}
_YLABELS = {
    "speedup": "speedup (x)",
    "amat": "cycles",
    "breakdown": "references",
    "row_openings": "row activations",
}


def _panels(n):
    cols = min(3, n)
    rows = math.ceil(n / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(4.2 * cols, 3.2 * rows),
                             squeeze=False)
    return fig, [ax for row in axes for ax in row]


def _grouped_bars(ax, vls, series_values, unit=1.0):
    present = [s for s in SERIES_ORDER
               if any(s in series_values[vl] for vl in vls)]
    width = 0.8 / max(1, len(present))
    for k, series in enumerate(present):
        xs, ys = [], []
        for i, vl in enumerate(vls):
            if series in series_values[vl]:
                xs.append(i + (k - (len(present) - 1) / 2) * width)
                ys.append(series_values[vl][series] / unit)
        ax.bar(xs, ys, width=width, label=series, color=_COLORS[series])
    ax.set_xticks(range(len(vls)))
    ax.set_xticklabels([str(vl) for vl in vls])
    ax.set_xlabel("vector length (bits)")


def _stacked_bars(ax, vls, series_segments):
    labels, positions = [], []
    pos = 0
    for vl in vls:
        for series in SERIES_ORDER:
            if series not in series_segments[vl]:
                continue
            bottom = 0
            for seg in BREAKDOWN_SEGMENTS:
                value = series_segments[vl][series][seg]
                ax.bar(pos, value, bottom=bottom, width=0.8,
                       color=_SEGMENT_COLORS[seg], label=seg)
                bottom += value
            labels.append(f"{series}\n{vl}")
            positions.append(pos)
            pos += 1
        pos += 0.6  # gap between vl groups
    ax.set_xticks(positions)
    ax.set_xticklabels(labels, fontsize=6)


def render(spec: FigureSpec) -> str:
    """Build the requested figure and write it to spec.out; returns the path."""
    rows = load_rows(spec.csv_paths)
    if spec.kind == "speedup":
        table = speedup_table(rows)
    elif spec.kind == "amat":
        table = metric_table(rows, "amat")
    elif spec.kind == "row_openings":
        table = metric_table(rows, "ras")
    else:
        table = breakdown_table(rows)

    workloads = sorted(table)
    fig, axes = _panels(len(workloads))
    for ax, workload in zip(axes, workloads):
        vls = sorted(table[workload])
        if spec.kind == "breakdown":
            _stacked_bars(ax, vls, table[workload])
        else:
            _grouped_bars(ax, vls, table[workload])
        if spec.kind == "speedup":
            ax.axhline(1.0, color="black", linewidth=0.8, linestyle="--")
        ax.set_title(workload)
        ax.set_ylabel(_YLABELS[spec.kind])
    for ax in axes[len(workloads):]:
        ax.set_visible(False)

    handles, labels = axes[0].get_legend_handles_labels()
    seen = dict(zip(labels, handles))  # dedupe stacked-bar repeats
    fig.legend(seen.values(), seen.keys(), loc="upper right", fontsize=7)
    fig.suptitle(_TITLES[spec.kind])
    fig.tight_layout(rect=(0, 0, 1, 0.95))
    fig.savefig(spec.out, dpi=110)
    plt.close(fig)
    return spec.out
