"""Matplotlib renderings written next to the delimited outputs.

All figures use the Agg backend with pinned size, dpi, and metadata so
repeated runs produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

__all__ = [
    "save_region_png",
    "save_solution_png",
    "save_trace_png",
    "save_spectrum_png",
]

_SAVE_KW = {"dpi": 150, "metadata": {"Software": "fracle"}}


def save_region_png(region, path) -> None:
    codes = np.zeros_like(region.pq0, dtype=float)
    admissible = region.pq0 & region.pq1
    codes[admissible] = 1.0
    codes[admissible & region.corollary] = 2.0
    fig, ax = plt.subplots(figsize=(5.0, 4.2))
    extent = [
        region.p_values[0],
        region.p_values[-1],
        region.q_values[0],
        region.q_values[-1],
    ]
    im = ax.imshow(
        codes.T,
        origin="lower",
        extent=extent,
        aspect="auto",
        cmap="OrRd",
        vmin=0.0,
        vmax=2.0,
        interpolation="nearest",
    )
    ax.set_xlabel("p")
    ax.set_ylabel("q")
    ax.set_title(f"admissible exponents, n={region.n}, s={region.s:g}")
    cbar = fig.colorbar(im, ax=ax, ticks=[0, 1, 2])
    cbar.ax.set_yticklabels(["outside", "admissible", "regularity region"])
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_solution_png(grid, u, v, path) -> None:
    if grid.dim == 1:
        x = grid.coords()
        fig, ax = plt.subplots(figsize=(5.6, 3.6))
        ax.plot(x, u, label="u", lw=1.5)
        ax.plot(x, v, label="v", lw=1.2, ls="--")
        ax.set_xlabel("x")
        ax.axhline(0.0, color="0.7", lw=0.6)
        ax.legend(frameon=False)
        fig.tight_layout()
    else:
        nx, ny = grid.n_interior
        fig, axes = plt.subplots(1, 2, figsize=(8.0, 3.4))
        for ax, vals, label in ((axes[0], u, "u"), (axes[1], v, "v")):
            im = ax.imshow(
                np.asarray(vals).reshape(nx, ny).T,
                origin="lower",
                extent=[*grid.extent[0], *grid.extent[1]],
                aspect="auto",
                interpolation="nearest",
            )
            ax.set_title(label)
            fig.colorbar(im, ax=ax)
        fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_trace_png(trace, path) -> None:
    its = np.arange(len(trace))
    # floor at a tiny positive value so exactly-converged traces still log-plot
    grads = np.maximum([t.grad_norm for t in trace], 1e-18)
    energies = [t.energy for t in trace]
    fig, ax = plt.subplots(figsize=(5.6, 3.6))
    ax.semilogy(its, grads, lw=1.2, color="tab:red", label="gradient norm")
    ax.set_xlabel("iteration")
    ax.set_ylabel("gradient norm")
    ax2 = ax.twinx()
    ax2.plot(its, energies, lw=1.0, color="tab:blue", label="energy")
    ax2.set_ylabel("energy")
    ax.legend(loc="upper right", frameon=False)
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)


def save_spectrum_png(eigenvalues, path) -> None:
    k = np.arange(1, len(eigenvalues) + 1)
    fig, ax = plt.subplots(figsize=(5.0, 3.6))
    ax.loglog(k, eigenvalues, ".", ms=3)
    ax.set_xlabel("mode k")
    ax.set_ylabel("eigenvalue")
    fig.tight_layout()
    fig.savefig(path, **_SAVE_KW)
    plt.close(fig)
