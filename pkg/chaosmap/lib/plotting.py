# chaosmap/lib/plotting.py
"""
SVG figures for the four study views:

  section     θ1–p1 scatter of an ensemble, coloured by label
  curve       chaotic fraction vs. energy, dotted verticals at H1..H4
  histogram   log10 indicator histogram, threshold as a red vertical
  surface     max chaotic fraction as an alpha × sigma heat table

Output bytes depend only on the input: fixed svg hash salt, no date.
"""
from __future__ import annotations

import logging
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import numpy as np  # noqa: E402
import polars as pl  # noqa: E402
from matplotlib.figure import Figure  # noqa: E402

from chaosmap.lib.classify import IndicatorHistogram, Label  # noqa: E402
from chaosmap.lib.dynamics import ModelParams, equilibrium_energies  # noqa: E402
from chaosmap.lib.errors import EmptyInput  # noqa: E402
from chaosmap.lib.frames import require_columns  # noqa: E402
from chaosmap.lib.sweep import ChaoticFractionCurve, surface_matrix  # noqa: E402

log = logging.getLogger(__name__)

SVG_HASH_SALT = "chaosmap"
SECTION_COLUMNS = ["theta1", "p1", "label"]

LABEL_COLORS = {
    Label.CHAOTIC.value: "tab:red",
    Label.REGULAR.value: "tab:blue",
    Label.UNCLASSIFIABLE.value: "0.6",
}


def save_svg(fig: Figure, path: str | Path) -> Path:
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    with matplotlib.rc_context({"svg.hashsalt": SVG_HASH_SALT, "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata={"Date": None})
    log.info("figure → %s", path)
    return path


# ---- section ---- #

def section_figure(points: pl.DataFrame) -> Figure:
    require_columns(points, SECTION_COLUMNS, "section table")
    if points.height == 0:
        raise EmptyInput("section table has no rows")
    fig = Figure(figsize=(6, 5))
    ax = fig.add_subplot()
    for label, color in LABEL_COLORS.items():
        part = points.filter(pl.col("label") == label)
        if part.height == 0:
            continue
        sc = ax.scatter(part["theta1"].to_numpy(), part["p1"].to_numpy(), s=2, c=color, label=label, linewidths=0)
        sc.set_gid(f"label-{label.lower()}")
    ax.set_xlabel(r"$\theta_1$")
    ax.set_ylabel(r"$p_1$")
    ax.legend(loc="upper right", markerscale=4, frameon=False)
    return fig


# ---- curve ---- #

def curve_figure(curve: ChaoticFractionCurve) -> Figure:
    if len(curve) == 0:
        raise EmptyInput(f"curve alpha={curve.alpha:g} sigma={curve.sigma:g} has no points")
    params = ModelParams(curve.alpha, curve.sigma)
    fig = Figure(figsize=(7, 4))
    ax = fig.add_subplot()
    (line,) = ax.plot(curve.energies, 100.0 * np.asarray(curve.fractions), "-o", ms=2, lw=1, color="tab:red")
    line.set_gid("chaotic-fraction")
    for n, energy in enumerate(equilibrium_energies(params), start=1):
        ax.axvline(energy, color="black", ls=":", lw=1, gid=f"equilibrium-energy-{n}")
    ax.set_xlabel(r"$H_0$")
    ax.set_ylabel("chaotic fraction (%)")
    ax.set_ylim(0, 100)
    ax.set_title(rf"$\alpha$ = {curve.alpha:g}, $\sigma$ = {curve.sigma:g}")
    return fig


# ---- histogram ---- #

def histogram_figure(hist: IndicatorHistogram, threshold: float | None) -> Figure:
    if hist.total == 0:
        raise EmptyInput("histogram has no counts")
    fig = Figure(figsize=(6, 4))
    ax = fig.add_subplot()
    widths = np.diff(hist.bin_edges)
    ax.bar(hist.bin_edges[:-1], hist.counts, width=widths, align="edge", color="0.7", edgecolor="none")
    ax.plot(hist.centers, hist.smoothed, color="black", lw=1, gid="smoothed")
    if threshold is not None:
        ax.axvline(threshold, color="red", lw=1.5, gid="threshold")
    ax.set_xlabel("log10 indicator")
    ax.set_ylabel("count")
    return fig


# ---- surface ---- #

def surface_figure(surface: pl.DataFrame) -> Figure:
    if surface.height == 0:
        raise EmptyInput("surface table has no rows")
    alphas, sigmas, matrix = surface_matrix(surface)
    fig = Figure(figsize=(1.2 * len(sigmas) + 2, 0.8 * len(alphas) + 1.5))
    ax = fig.add_subplot()
    image = ax.imshow(100.0 * matrix, origin="lower", cmap="magma", vmin=0, vmax=100, aspect="auto")
    for a, row in enumerate(matrix):
        for s, value in enumerate(row):
            if np.isfinite(value):
                ax.text(s, a, f"{100 * value:.0f}", ha="center", va="center", fontsize=7, color="white")
    ax.set_xticks(range(len(sigmas)), [f"{s:g}" for s in sigmas])
    ax.set_yticks(range(len(alphas)), [f"{a:g}" for a in alphas])
    ax.set_xlabel(r"$\sigma$")
    ax.set_ylabel(r"$\alpha$")
    fig.colorbar(image, ax=ax, label="max chaotic fraction (%)")
    return fig

