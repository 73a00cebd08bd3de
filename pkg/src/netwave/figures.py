"""Matplotlib renderings of the exported data, written next to the files.

Each function takes the already-computed data object and an output path
and writes one PNG. Rendering is headless (Agg) and byte-deterministic:
figures carry no timestamps or version strings, so repeated runs produce
identical files.
"""

from __future__ import annotations

import math
from pathlib import Path
from typing import Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt

from .arrivals import ArrivalTable
from .dynamics import Trajectory
from .effective import RadialLayout, StageHistogram

_RC = {
    "figure.dpi": 150,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.titlesize": 10,
    "axes.labelsize": 9,
    "legend.fontsize": 8,
    "axes.linewidth": 0.6,
    "lines.linewidth": 1.0,
}

_SAVE = {"metadata": {"Software": None}}


def _save(fig, path: str | Path) -> None:
    fig.savefig(path, **_SAVE)
    plt.close(fig)


def plot_radial_tree(layout: RadialLayout, path: str | Path) -> None:
    """Shortest-path tree wheel: radius = effective distance."""
    pos = {n.id: (n.r * math.cos(n.theta), n.r * math.sin(n.theta))
           for n in layout.nodes}
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6, 6))
        for parent, child in layout.edges:
            (x0, y0), (x1, y1) = pos[parent], pos[child]
            ax.plot([x0, x1], [y0, y1], color="0.65", lw=0.6, zorder=1)
        xs = [p[0] for p in pos.values()]
        ys = [p[1] for p in pos.values()]
        ax.scatter(xs, ys, s=14, c="tab:blue", zorder=2)
        ax.scatter([0], [0], s=60, c="tab:red", zorder=3, label=f"source {layout.source}")
        rmax = max((n.r for n in layout.nodes), default=1.0) or 1.0
        for frac in (0.25, 0.5, 0.75, 1.0):
            circ = plt.Circle((0, 0), frac * rmax, fill=False,
                              color="0.85", lw=0.5, zorder=0)
            ax.add_patch(circ)
        ax.set_aspect("equal")
        ax.set_axis_off()
        ax.legend(loc="upper right")
        ax.set_title("shortest-path tree, radius = effective distance")
        _save(fig, path)


def plot_stage_histogram(sh: StageHistogram, path: str | Path) -> None:
    """One panel per stage: histogram of effective distances just reached."""
    k = len(sh.stages)
    with plt.rc_context(_RC):
        fig, axes = plt.subplots(k, 1, figsize=(6, 1.8 * k), sharex=True,
                                 squeeze=False)
        centers = (sh.bin_edges[:-1] + sh.bin_edges[1:]) / 2.0
        for ax, stage in zip(axes[:, 0], sh.stages):
            ax.bar(centers, stage.counts, width=sh.bin_width * 0.9,
                   color="tab:blue")
            ax.set_ylabel("regions")
            ax.set_title(
                f"stage {stage.index + 1}: t in [{stage.t_start:.6g}, {stage.t_end:.6g}]"
                f"  ({len(stage.members)} regions)",
                loc="left")
        axes[-1, 0].set_xlabel("effective distance from source")
        fig.suptitle(f"propagation stages from {sh.source}")
        fig.tight_layout()
        _save(fig, path)


def plot_wavefront(
    rows: Sequence[tuple[str, float, float, float]], path: str | Path
) -> None:
    """Arrival time against geographic vs. effective distance, side by side.

    rows: (region_id, geographic_km, effective_distance, arrival_time).
    """
    geo = [r[1] for r in rows]
    eff = [r[2] for r in rows]
    t = [r[3] for r in rows]
    with plt.rc_context(_RC):
        fig, (ax1, ax2) = plt.subplots(1, 2, figsize=(8, 3.6), sharey=True)
        ax1.scatter(geo, t, s=12, c="tab:blue")
        ax1.set_xlabel("geographic distance (km)")
        ax1.set_ylabel("arrival time")
        ax2.scatter(eff, t, s=12, c="tab:red")
        ax2.set_xlabel("effective distance")
        fig.suptitle("arrival wavefront: geographic vs. effective embedding")
        fig.tight_layout()
        _save(fig, path)


def plot_trajectory(traj: Trajectory, path: str | Path) -> None:
    """Infected fraction per region over time."""
    N = traj.S[0] + traj.I[0]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(6.5, 4))
        for j in range(traj.I.shape[1]):
            ax.plot(traj.times, traj.I[:, j] / N[j], lw=0.8)
        ax.set_xlabel("time")
        ax.set_ylabel("infected fraction I/N")
        ax.set_title(f"meta-population SI run ({traj.I.shape[1]} regions)")
        fig.tight_layout()
        _save(fig, path)


def plot_comparison(a: ArrivalTable, b: ArrivalTable, rho: float,
                    path: str | Path) -> None:
    """Scatter of arrival times for the regions present in both tables."""
    common = sorted(set(a.entries) & set(b.entries))
    xs = [a.entries[r] for r in common]
    ys = [b.entries[r] for r in common]
    with plt.rc_context(_RC):
        fig, ax = plt.subplots(figsize=(4.5, 4.2))
        ax.scatter(xs, ys, s=14, c="tab:blue")
        lo, hi = min(xs + ys), max(xs + ys)
        ax.plot([lo, hi], [lo, hi], color="0.7", lw=0.8, ls="--")
        ax.set_xlabel(f"arrival time ({a.provenance})")
        ax.set_ylabel(f"arrival time ({b.provenance})")
        ax.set_title(f"{len(common)} common regions, Spearman rho = {rho:.3f}")
        fig.tight_layout()
        _save(fig, path)
