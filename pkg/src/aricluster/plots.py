"""Matplotlib renderings of the delimited outputs.

Each CLI report command can drop a figure next to its CSV/raw output: a
slice mosaic of the threshold map (brighter = higher threshold), the
cluster-size-versus-threshold line chart with dashed split connectors, and
the log-log scaling chart for benchmark runs.
"""

from __future__ import annotations

import math

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = ["plot_gamma_map_slices", "plot_size_curve", "plot_bench"]


def plot_gamma_map_slices(volume: np.ndarray, dims, out_path, max_slices: int = 12) -> None:
    """Axial slice mosaic of a per-voxel threshold volume (NaN = background)."""
    nx, ny, nz = dims
    vol3 = np.asarray(volume, dtype=np.float64).reshape(nz, ny, nx)
    picks = np.unique(np.linspace(0, nz - 1, min(nz, max_slices)).astype(int))
    cols = min(4, picks.size)
    rows = math.ceil(picks.size / cols)
    fig, axes = plt.subplots(rows, cols, figsize=(3 * cols, 3 * rows), squeeze=False)
    cmap = plt.get_cmap("inferno").copy()
    cmap.set_bad("black")
    im = None
    for ax in axes.ravel():
        ax.axis("off")
    for ax, z in zip(axes.ravel(), picks):
        im = ax.imshow(vol3[z], cmap=cmap, vmin=0.0, vmax=1.0, origin="lower")
        ax.set_title(f"z = {z}", fontsize=8)
        ax.axis("on")
        ax.set_xticks([])
        ax.set_yticks([])
    if im is not None:
        fig.colorbar(im, ax=axes.ravel().tolist(), shrink=0.8, label="max threshold")
    fig.suptitle("Largest qualifying TDP threshold per voxel")
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_size_curve(rows: list[dict], out_path) -> None:
    """Cluster size (log scale) against the TDP threshold, one line per label.

    Dashed connectors join a parent cluster to the pieces it splits into at
    the next grid point.
    """
    by_label: dict[int, list[tuple[float, int]]] = {}
    point: dict[tuple[float, int], int] = {}
    for row in rows:
        by_label.setdefault(row["label"], []).append((row["gamma"], row["size"]))
        point[(row["gamma"], row["label"])] = row["size"]
    gammas = sorted({row["gamma"] for row in rows})
    prev_of = {g1: g0 for g0, g1 in zip(gammas, gammas[1:])}

    fig, ax = plt.subplots(figsize=(7, 4.5))
    colors = plt.get_cmap("tab10")
    for i, (label, pts) in enumerate(sorted(by_label.items())):
        pts.sort()
        ax.plot(
            [g for g, _ in pts],
            [s for _, s in pts],
            marker=".",
            markersize=3,
            linewidth=1.2,
            color=colors(i % 10),
            label=f"cluster {label + 1}",
        )
    for row in rows:
        parent = row.get("parent_label")
        if parent is None or parent == row["label"]:
            continue
        g1 = row["gamma"]
        g0 = prev_of.get(g1)
        if g0 is None or (g0, parent) not in point:
            continue
        ax.plot(
            [g0, g1],
            [point[(g0, parent)], row["size"]],
            linestyle="--",
            linewidth=0.8,
            color="grey",
        )
    ax.set_yscale("log")
    ax.set_xlabel("TDP threshold")
    ax.set_ylabel("cluster size (vertices)")
    if len(by_label) <= 12:
        ax.legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)


def plot_bench(rows: list[dict], out_path) -> None:
    """Log-log scaling chart: construction phases and mean query time vs m."""
    phases = ("forest", "bounds", "index")
    phase_pts: dict[str, dict[int, float]] = {p: {} for p in phases}
    query_pts: dict[int, list[float]] = {}
    for row in rows:
        m = int(row["m"])
        tag = str(row["phase_or_gamma"])
        sec = float(row["seconds"])
        if tag in phases:
            phase_pts[tag][m] = sec
        else:
            query_pts.setdefault(m, []).append(sec)

    fig, ax = plt.subplots(figsize=(6.5, 4.5))
    for phase in phases:
        pts = sorted(phase_pts[phase].items())
        if pts:
            ax.plot([m for m, _ in pts], [s for _, s in pts], marker="o", label=phase)
    qpts = sorted((m, float(np.mean(ts))) for m, ts in query_pts.items())
    if qpts:
        ax.plot([m for m, _ in qpts], [s for _, s in qpts], marker="s", label="query (mean)")
    ax.set_xscale("log")
    ax.set_yscale("log")
    ax.set_xlabel("vertices m")
    ax.set_ylabel("seconds")
    ax.grid(True, which="both", linewidth=0.3, alpha=0.5)
    ax.legend()
    fig.tight_layout()
    fig.savefig(out_path, dpi=150)
    plt.close(fig)
