"""The six figure kinds.

Every builder takes already-validated reader output plus an options dict
and returns a matplotlib Figure; saving (fixed dpi, stripped metadata so
reruns are byte-identical) happens in one place.  Fitted overlay curves are
drawn from the fit parameters the analysis CLI wrote; nothing is re-fitted
here.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.patches import Rectangle

from .readers import Matrix, ViolationRow

# pinned style so a rendered file depends only on its inputs
STYLE = {
    "figure.dpi": 100,
    "savefig.dpi": 100,
    "font.family": "DejaVu Sans",
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "svg.hashsalt": "figrender",
}

FLAG_COLORS = {"consistent": "#4daf4a", "fluctuation": "#ff7f00", "violation": "#e41a1c"}


def save_figure(fig, path, dpi: int = 100) -> None:
    suffix = str(path).rsplit(".", 1)[-1].lower()
    # scrub the writer-identification fields; PNG otherwise embeds the
    # matplotlib version and SVG a creation date
    if suffix == "png":
        metadata = {"Software": None}
    else:
        metadata = {"Creator": None, "Date": None}
    fig.savefig(path, dpi=dpi, metadata=metadata)
    plt.close(fig)


def heatmap_fft(ramsey: Matrix, fft: Matrix, options: dict):
    """Repeated-Ramsey map with the per-row fringe spectrum beside it."""
    fig, (ax_map, ax_fft) = plt.subplots(
        1, 2, figsize=(7.0, 4.2), width_ratios=[2.4, 1.0], sharey=True, layout="constrained"
    )
    im = ax_map.pcolormesh(
        ramsey.col_values * 1e6, ramsey.row_values, ramsey.values, cmap="viridis", shading="nearest"
    )
    ax_map.set_xlabel("evolution time (us)")
    ax_map.set_ylabel("row start (s)")
    fig.colorbar(im, ax=ax_map, label="P(up)", location="left", pad=0.12)
    im2 = ax_fft.pcolormesh(
        fft.col_values / 1e6, fft.row_values, fft.values, cmap="magma", shading="nearest"
    )
    ax_fft.set_xlabel("fringe frequency (MHz)")
    fig.colorbar(im2, ax=ax_fft, label="|FFT|")
    fig.suptitle(options.get("title", ""))
    return fig


def loglog_psd(series: list[dict], options: dict):
    """PSD curves on log-log axes with dashed power-law overlays."""
    fig, ax = plt.subplots(figsize=(5.2, 4.0), layout="constrained")
    for entry in series:
        freqs = entry["psd"]["freq_hz"]
        power = entry["psd"]["psd_hz2_per_hz"]
        keep = freqs > 0
        (line,) = ax.loglog(freqs[keep], power[keep], label=entry.get("label"), alpha=0.85)
        fit = entry.get("fit")
        if fit is not None:
            f_lo = float(fit["f_lo_hz"][0])
            f_hi = float(fit["f_hi_hz"][0])
            amplitude = float(fit["amplitude_hz2_per_hz"][0])
            exponent = float(fit["exponent"][0])
            band = np.geomspace(f_lo, f_hi, 64)
            ax.loglog(
                band,
                amplitude * band**-exponent,
                "--",
                color=line.get_color(),
                label=f"fit: beta = {exponent:.2f}",
            )
    ax.set_xlabel("frequency (Hz)")
    ax.set_ylabel("PSD (Hz^2/Hz)")
    ax.grid(True, which="both", alpha=0.25)
    if any(entry.get("label") or entry.get("fit") is not None for entry in series):
        ax.legend()
    ax.set_title(options.get("title", ""))
    return fig


def histogram(series: list[dict], options: dict):
    """Overlaid estimate histograms, annotated with the runs' own stds."""
    fig, ax = plt.subplots(figsize=(5.2, 4.0), layout="constrained")
    bins = int(options.get("bins", 40))
    finite = [entry["values"][np.isfinite(entry["values"])] for entry in series]
    lo = min(values.min() for values in finite)
    hi = max(values.max() for values in finite)
    edges = np.linspace(lo, hi, bins + 1) if hi > lo else bins
    for entry, values in zip(series, finite):
        label = entry.get("label") or ""
        if entry.get("std_hz") is not None:
            label = f"{label}: std = {entry['std_hz'] / 1e3:.1f} kHz".lstrip(": ")
        ax.hist(values / 1e6, bins=np.asarray(edges) / 1e6, alpha=0.55, label=label or None)
    ax.set_xlabel("estimated frequency (MHz)")
    ax.set_ylabel("cycles")
    if any(entry.get("label") or entry.get("std_hz") is not None for entry in series):
        ax.legend()
    ax.set_title(options.get("title", ""))
    return fig


def chevron(data: Matrix, options: dict):
    fig, ax = plt.subplots(figsize=(5.6, 4.0), layout="constrained")
    im = ax.pcolormesh(
        data.col_values * 1e6, data.row_values / 1e6, data.values, cmap="RdBu_r", shading="nearest"
    )
    ax.set_xlabel("burst time (us)")
    ax.set_ylabel("detuning (MHz)")
    fig.colorbar(im, ax=ax, label="P(up)")
    ax.set_title(options.get("title", ""))
    return fig


def diffusion(points: dict, fit: dict | None, options: dict):
    """Increment variance vs interval on log-log axes with the fitted law."""
    fig, ax = plt.subplots(figsize=(5.2, 4.0), layout="constrained")
    intervals = points["interval_s"]
    ax.loglog(intervals, points["variance_hz2"], "o", label="measured")
    if fit is not None:
        alpha = float(fit["alpha"][0])
        d_alpha = float(fit["d_alpha_hz2_per_s_alpha"][0])
        span = np.geomspace(intervals.min(), intervals.max(), 64)
        ax.loglog(
            span, 2.0 * d_alpha * span**alpha, "--", label=f"fit: alpha = {alpha:.2f}"
        )
    ax.set_xlabel("interval (s)")
    ax.set_ylabel("variance (Hz^2)")
    ax.grid(True, which="both", alpha=0.25)
    ax.legend()
    ax.set_title(options.get("title", ""))
    return fig


def violation_grid(rows: list[ViolationRow], options: dict):
    """Circuits on a germ-by-length grid, colored by statistic, framed by flag."""
    germs = sorted({row.germ for row in rows})
    lengths = sorted({row.max_length for row in rows})
    grid = np.full((len(germs), len(lengths)), np.nan)
    flags = np.empty((len(germs), len(lengths)), dtype=object)
    for row in rows:
        i = germs.index(row.germ)
        j = lengths.index(row.max_length)
        grid[i, j] = row.statistic
        flags[i, j] = row.flag
    fig, ax = plt.subplots(figsize=(1.2 + 0.9 * len(lengths), 1.2 + 0.7 * len(germs)),
                           layout="constrained")
    masked = np.ma.masked_invalid(grid)
    im = ax.pcolormesh(masked, cmap="cividis", shading="flat")
    for i in range(len(germs)):
        for j in range(len(lengths)):
            if flags[i, j] is None:
                continue
            ax.add_patch(
                Rectangle((j, i), 1, 1, fill=False, lw=2.0, edgecolor=FLAG_COLORS[flags[i, j]])
            )
    ax.set_xticks(np.arange(len(lengths)) + 0.5, [str(length) for length in lengths])
    ax.set_yticks(np.arange(len(germs)) + 0.5, germs)
    ax.set_xlabel("circuit length L")
    ax.set_ylabel("germ")
    fig.colorbar(im, ax=ax, label="2 delta log-likelihood")
    handles = [
        Rectangle((0, 0), 1, 1, fill=False, lw=2.0, edgecolor=FLAG_COLORS[flag], label=flag)
        for flag in FLAG_COLORS
        if any(row.flag == flag for row in rows)
    ]
    ax.legend(handles=handles, loc="upper left", bbox_to_anchor=(1.25, 1.0))
    ax.set_title(options.get("title", ""))
    return fig
