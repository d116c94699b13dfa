"""Matplotlib renderings written next to the delimited outputs.

Every figure is a PNG with pinned metadata so repeated runs on the same
inputs produce identical bytes.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import matplotlib.tri as mtri
import numpy as np

_SAVE_KWARGS = {"dpi": 130, "metadata": {"Software": "markov-dirichlet"}}


def _save(fig, path):
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fig.savefig(path, **_SAVE_KWARGS)
    plt.close(fig)


def save_field_figure(domain, values, path, title="solution", label="Re value"):
    """Triangulated pseudocolor of the real part over the node cloud."""
    real = np.asarray(values, dtype=np.float64)
    x, y = domain.coords[:, 0], domain.coords[:, 1]
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    if domain.n_points >= 4:
        tri = mtri.Triangulation(x, y)
        pc = ax.tripcolor(tri, real, shading="gouraud", cmap="viridis")
        fig.colorbar(pc, ax=ax, label=label)
    ax.plot(
        x[domain.boundary_ids], y[domain.boundary_ids], ".", color="k", markersize=2
    )
    ax.set_aspect("equal")
    ax.set_title(title)
    _save(fig, path)


def save_residuals_figure(residuals, path, title="residual decay"):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.semilogy(np.arange(1, len(residuals) + 1), residuals, lw=1.2)
    ax.set_xlabel("iteration")
    ax.set_ylabel("sup residual")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def save_profile_figure(pairs, path, title="boundary deviation profile"):
    pairs = list(pairs)
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    if pairs:
        d = [p[0] for p in pairs]
        v = [p[1] for p in pairs]
        ax.plot(d, v, ".", markersize=4)
    ax.set_xlabel("distance to anchor")
    ax.set_ylabel("sup deviation over iterates")
    ax.set_title(title)
    ax.grid(True, alpha=0.3)
    _save(fig, path)


def save_refinement_figure(ns, errors, path, title="refinement", label="sup error"):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.loglog(ns, errors, "o-", lw=1.2)
    ax.set_xlabel("resolution n")
    ax.set_ylabel(label)
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    _save(fig, path)


def save_bar_figure(labels, heights, path, title, ylabel):
    fig, ax = plt.subplots(figsize=(5.2, 3.6))
    ax.bar(range(len(labels)), heights)
    ax.set_xticks(range(len(labels)))
    ax.set_xticklabels(labels, rotation=20, ha="right", fontsize=8)
    ax.set_ylabel(ylabel)
    ax.set_title(title)
    _save(fig, path)
