"""Matplotlib figures for the report command.

All functions draw onto a fresh figure, save it and close it; nothing is
shown interactively.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np
from matplotlib.collections import PolyCollection

STYLE = {
    "figure.dpi": 120,
    "savefig.dpi": 150,
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "legend.frameon": False,
    "lines.linewidth": 1.4,
}

LOZENGE_COLORS = {"left": "#d95f02", "right": "#1b9e77", "vertical": "#7570b3"}


def _save(fig, path):
    fig.tight_layout()
    fig.savefig(path)
    plt.close(fig)
    return path


def tiling_figure(polys: list[tuple[str, list[tuple[float, float]]]], path, title: str = ""):
    """Filled lozenges colored by type; polygons are in (X, level) coordinates."""
    polys = [(k, [(x, y * np.sqrt(3) / 2) for x, y in p]) for k, p in polys]
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 5))
        for kind, color in LOZENGE_COLORS.items():
            verts = [p for k, p in polys if k == kind]
            if verts:
                ax.add_collection(PolyCollection(verts, facecolors=color, edgecolors="k",
                                                 linewidths=0.3, label=kind))
        pts = np.array([v for _, p in polys for v in p]) if polys else np.zeros((1, 2))
        ax.set_xlim(pts[:, 0].min() - 0.2, pts[:, 0].max() + 0.2)
        ax.set_ylim(pts[:, 1].min() - 0.2, pts[:, 1].max() + 0.2)
        ax.set_aspect("equal")
        ax.axis("off")
        if title:
            ax.set_title(title)
        return _save(fig, path)


def shape_figure(nu, eta, rho, path, tau: float = 1.0):
    """Limiting density at sampled (nu, eta) points with the frozen boundary."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 4))
        sc = ax.scatter(nu, eta, c=rho, cmap="viridis", vmin=0, vmax=1, s=18)
        e = np.linspace(0, max(np.max(eta), 1e-9) * 1.05, 200)
        for sign in (-1, 1):
            ax.plot((np.sqrt(tau) + sign * np.sqrt(e)) ** 2, e, "k--", lw=0.8)
        ax.set_xlabel(r"$\nu$")
        ax.set_ylabel(r"$\eta$")
        fig.colorbar(sc, ax=ax, label=r"$\rho$")
        return _save(fig, path)


def cdf_figure(r, F, path, label: str = "series"):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        order = np.argsort(r)
        ax.plot(np.asarray(r)[order], np.asarray(F)[order], "o-", ms=3, label=label)
        ax.set_xlabel("r")
        ax.set_ylabel("F(r)")
        ax.set_ylim(-0.02, 1.02)
        ax.legend()
        return _save(fig, path)


def lln_figure(kappa, mean, stderr, target, path):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        order = np.argsort(kappa)
        k = np.asarray(kappa)[order]
        ax.errorbar(k, np.asarray(mean)[order], yerr=4 * np.asarray(stderr)[order], fmt="o",
                    ms=4, capsize=2, label="log Z / N")
        ax.plot(k, np.asarray(target)[order], "k--", lw=0.9, label=r"$f_\kappa$")
        ax.set_xlabel(r"$\kappa$")
        ax.legend()
        return _save(fig, path)


def series_figure(x, y, path, xlabel: str, ylabel: str, logy: bool = False):
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(4.5, 3.2))
        order = np.argsort(x)
        ax.plot(np.asarray(x)[order], np.asarray(y)[order], "o-", ms=3)
        if logy:
            ax.set_yscale("log")
        ax.set_xlabel(xlabel)
        ax.set_ylabel(ylabel)
        return _save(fig, path)
