"""SVG figures for histograms, landscapes, registers and optimisation traces.

Output is byte-reproducible: no creation date and a fixed hash salt for ids.
"""
from __future__ import annotations

import matplotlib as mpl
import numpy as np
from matplotlib.figure import Figure

from .constants import MHZ, US

WINNER_COLOR = "tab:orange"
BAR_COLOR = "tab:blue"
MAX_BARS = 40


def _save(fig: Figure, path, description: str | None = None) -> None:
    meta = {"Date": None, "Creator": "q3p"}
    if description:
        meta["Description"] = description
    with mpl.rc_context({"svg.hashsalt": "q3p", "svg.fonttype": "none"}):
        fig.savefig(path, format="svg", metadata=meta)


def plot_histogram(hist, path, winner: str | None = None, max_bars: int = MAX_BARS) -> None:
    """Bar chart of the most frequent bitstrings; the winner bar is orange.

    The winner is always drawn even when it falls outside the top ``max_bars``.
    """
    winner = winner if winner is not None else hist.winner
    entries = hist.ordered()[:max_bars]
    if winner is not None and winner not in dict(entries):
        entries.append((winner, hist.counts.get(winner, 0)))
    labels = [b for b, _ in entries]
    freq = np.array([c for _, c in entries], dtype=float) / hist.shots
    fig = Figure(figsize=(max(4.0, 0.3 * len(labels) + 1.5), 3.5))
    ax = fig.add_subplot()
    bars = ax.bar(range(len(labels)), freq, color=BAR_COLOR)
    for bar, b in zip(bars, labels):
        if b == winner:
            bar.set_color(WINNER_COLOR)
            bar.set_gid("winner")
    ax.set_xticks(range(len(labels)), labels, rotation=90, fontsize=7, family="monospace")
    ax.set_ylabel("frequency")
    ax.set_title(f"{hist.shots} shots")
    fig.tight_layout()
    _save(fig, path, None if winner is None else f"winner={winner}")


def plot_landscape(matrix, deltas, durations, path, bitstring: str | None = None) -> None:
    """Heat map of a landscape scan; axes in MHz (detuning / 2pi) and us."""
    matrix = np.asarray(matrix)
    fig = Figure(figsize=(5.0, 4.0))
    ax = fig.add_subplot()
    mesh = ax.pcolormesh(
        np.asarray(durations) / US,
        np.asarray(deltas) / MHZ,
        matrix,
        shading="nearest",
        vmin=0.0,
        vmax=max(1e-12, float(matrix.max())),
    )
    fig.colorbar(mesh, ax=ax, label="probability")
    ax.set_xlabel("duration (us)")
    ax.set_ylabel("detuning / 2pi (MHz)")
    if bitstring:
        ax.set_title(bitstring, family="monospace")
    fig.tight_layout()
    _save(fig, path, None if bitstring is None else f"bitstring={bitstring}")


def plot_register(register, path, field=None, bitstring: str | None = None) -> None:
    """Sites over the density they were drawn from (if given); occupied sites filled."""
    fig = Figure(figsize=(4.5, 4.5))
    ax = fig.add_subplot()
    pts = register.field_sites if field is not None else register.sites
    if field is not None:
        x, y = field.axes()
        ax.pcolormesh(x, y, field.values.T, shading="nearest", cmap="Greys")
    on = np.zeros(len(pts), dtype=bool)
    if bitstring:
        on = np.array([c == "1" for c in bitstring])
    ax.scatter(*pts[~on].T, facecolors="none", edgecolors=BAR_COLOR, s=60)
    if on.any():
        ax.scatter(*pts[on].T, color=WINNER_COLOR, s=60)
    for i, p in enumerate(pts):
        ax.annotate(str(i), p, fontsize=7, ha="center", va="bottom", xytext=(0, 5),
                    textcoords="offset points")
    ax.set_aspect("equal")
    ax.set_xlabel("x (grid units)" if field is not None else "x (um)")
    ax.set_ylabel("y (grid units)" if field is not None else "y (um)")
    fig.tight_layout()
    _save(fig, path, None if bitstring is None else f"bitstring={bitstring}")


def plot_trace(costs, path) -> None:
    """Sampled cost per optimisation cycle with the running minimum."""
    costs = np.asarray(costs, dtype=float)
    fig = Figure(figsize=(5.0, 3.5))
    ax = fig.add_subplot()
    k = np.arange(len(costs))
    ax.plot(k, costs, ".", color=BAR_COLOR, label="J_k")
    ax.plot(k, np.minimum.accumulate(costs), color=WINNER_COLOR, label="best so far")
    ax.set_xlabel("cycle")
    ax.set_ylabel("estimated cost")
    ax.legend()
    fig.tight_layout()
    _save(fig, path)
