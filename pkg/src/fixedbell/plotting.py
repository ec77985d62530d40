"""Figures written next to the JSON/CSV outputs.

All figures use the non-interactive Agg backend and carry the producing
configuration in the PNG ``Description`` metadata.
"""

from __future__ import annotations

import json
from typing import Sequence

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .correlations import JointDistribution  # noqa: E402

RC = {
    "font.size": 9,
    "axes.labelsize": 9,
    "axes.titlesize": 10,
    "legend.fontsize": 8,
    "xtick.labelsize": 8,
    "ytick.labelsize": 8,
    "figure.dpi": 100,
    "savefig.dpi": 150,
}


def _save(fig, path, config):
    meta = {"Software": "fixedbell"}
    if config is not None:
        meta["Description"] = json.dumps(config, sort_keys=True)
    fig.savefig(path, metadata=meta, bbox_inches="tight")
    plt.close(fig)


def _labels(idx: np.ndarray, n: int, limit: int = 16):
    if idx.size > limit:
        return None
    return [format(int(v), f"0{n}b") for v in idx]


def plot_distribution(dist: JointDistribution, path, title: str = "", config: dict | None = None):
    """Heat map of the distribution's block (rows = X, columns = Y)."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(4.2, 3.6))
        im = ax.imshow(dist.block, cmap="viridis", interpolation="nearest", origin="upper")
        fig.colorbar(im, ax=ax, label="probability")
        rl, cl = _labels(dist.rows, dist.n), _labels(dist.cols, dist.n)
        if rl is not None:
            ax.set_yticks(range(len(rl)), rl)
        if cl is not None:
            ax.set_xticks(range(len(cl)), cl, rotation=90)
        ax.set_xlabel("y")
        ax.set_ylabel("x")
        if title:
            ax.set_title(title)
        _save(fig, path, config)


def plot_spectrum(eigenvalues: np.ndarray, K: int, epsilon: float, path, config: dict | None = None):
    """Squared eigenvalues in truncation order with the cumulative kept mass."""
    sq = np.asarray(eigenvalues) ** 2
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.2))
        idx = np.arange(sq.size)
        ax.bar(idx, sq, width=1.0, color=np.where(idx <= K, "C0", "0.75"), linewidth=0)
        ax.set_xlabel("eigenpair index i")
        ax.set_ylabel(r"$\lambda_i^2$")
        ax2 = ax.twinx()
        ax2.plot(idx, np.cumsum(sq), color="C3", lw=1.2)
        ax2.axhline(1 - epsilon**2 / 8, color="C3", ls="--", lw=0.8)
        ax2.axvline(K, color="k", ls=":", lw=0.8)
        ax2.set_ylabel("cumulative mass")
        ax2.set_ylim(0, 1.02)
        ax.set_title(f"K = {K}, eps = {epsilon:g}")
        _save(fig, path, config)


def plot_curve(rows: Sequence, epsilon: float, path, config: dict | None = None):
    """Best achieved distance against component budget, one line per n."""
    with plt.rc_context(RC):
        fig, ax = plt.subplots(figsize=(5.0, 3.4))
        for n in sorted({r.n for r in rows}):
            pts = sorted((r.k, r.distance) for r in rows if r.n == n)
            ks, ds = zip(*pts)
            ax.plot(ks, ds, marker="o", ms=3, lw=1.2, label=f"n = {n}")
        ax.axhline(2 * epsilon, color="k", ls="--", lw=0.8, label=r"$2\epsilon$")
        ax.set_xscale("log", base=2)
        ax.set_xlabel("components |S|")
        ax.set_ylabel(r"$\|P_c - P_u\|_1$")
        ax.set_ylim(bottom=0)
        ax.legend(frameon=False)
        _save(fig, path, config)
