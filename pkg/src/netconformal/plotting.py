"""Figure rendering for the CLI report paths.

Every report that writes a CSV can also render a matplotlib figure next to
it. Rendering is headless (Agg) and deterministic for fixed inputs.
"""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np

from .simulation import CoverageReport
from .spectral import SpectralReport

__all__ = ["save_coverage_figure", "save_spectral_figure"]


def save_coverage_figure(report: CoverageReport, path: str | Path) -> None:
    """Per-cell coverage with 1-SE error bars against the nominal level."""
    cells = report.cells
    alpha = report.config.get("alpha", 0.1)
    labels = [f"{c.scheme}\n{c.target}/{c.model}" for c in cells]
    coverage = [c.coverage for c in cells]
    err = [c.se for c in cells]
    xs = np.arange(len(cells))

    fig, ax = plt.subplots(figsize=(max(6.0, 1.1 * len(cells)), 4.0))
    ax.errorbar(xs, coverage, yerr=err, fmt="o", capsize=3, color="tab:blue")
    ax.axhline(1.0 - alpha, color="tab:red", linestyle="--", linewidth=1, label=f"nominal {1 - alpha:g}")
    ax.set_xticks(xs)
    ax.set_xticklabels(labels, fontsize=8)
    ax.set_ylabel("empirical coverage")
    ax.set_title(f"{report.kind} experiment ({cells[0].n_reps} replicates)")
    ax.legend(loc="best", fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)


def save_spectral_figure(report: SpectralReport, path: str | Path) -> None:
    """TV mixing curve with the spectral bound and fitted geometric envelope."""
    ts = np.arange(report.tv_curve.size)
    fig, axes = plt.subplots(1, 2, figsize=(9.0, 3.6))

    ax = axes[0]
    ax.plot(report.eigenvalues, marker=".", linestyle="none", markersize=3)
    ax.axhline(0.0, color="gray", linewidth=0.5)
    ax.set_xlabel("rank")
    ax.set_ylabel("eigenvalue")
    ax.set_title(f"normalized adjacency spectrum (gamma = {report.gamma:.3f})")

    ax = axes[1]
    positive = report.tv_curve > 0
    ax.semilogy(ts[positive], report.tv_curve[positive], label="TV(t)", color="tab:blue")
    ax.semilogy(ts, np.maximum(report.tv_bound, 1e-300), label="spectral bound", color="tab:red", linestyle="--")
    k_hat, gamma_hat = report.envelope
    if k_hat > 0 and gamma_hat > 0:
        ax.semilogy(ts, k_hat * gamma_hat**ts, label=f"fit {k_hat:.2g} * {gamma_hat:.3f}^t",
                    color="tab:green", linestyle=":")
    ax.set_xlabel("t")
    ax.set_ylabel("total variation")
    title = "mixing" if not report.bipartite else "mixing (bipartite: no convergence)"
    ax.set_title(title)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
