"""Figure rendering for benchmark and convergence reports.

Figures are written next to the CSV output (same stem, .png suffix) when
the CLI is invoked with --plot.  Matplotlib's Agg backend is forced so the
report path works headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np


def plot_scores(rows, path: str) -> str:
    """Error and calibration score vs N, one line per (kernel, sampler)."""
    fig, axes = plt.subplots(1, 2, figsize=(10, 4), sharex=True)
    combos = sorted({(r.kernel, r.sampler) for r in rows})
    for kernel, sampler in combos:
        sub = sorted((r for r in rows
                      if r.kernel == kernel and r.sampler == sampler),
                     key=lambda r: r.N)
        n = [r.N for r in sub]
        label = f"{kernel}/{sampler}"
        axes[0].plot(n, [r.error_score for r in sub], marker=".", label=label)
        axes[1].plot(n, [r.calibration_score for r in sub], marker=".",
                     label=label)
    for ax, title in zip(axes, ("relative error", "calibration")):
        ax.set_xlabel("N")
        ax.set_yscale("log")
        ax.set_title(title)
        ax.grid(True, which="both", alpha=0.3)
    axes[1].axhline(1.0, color="k", lw=0.8, ls="--")
    axes[0].legend(fontsize=7)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path


def plot_convergence(report, path: str, title: str = "") -> str:
    """log-log error vs N with the fitted rate line."""
    fig, ax = plt.subplots(figsize=(5, 4))
    n = np.asarray(report.n_list, dtype=float)
    e = np.asarray(report.errors, dtype=float)
    ax.loglog(n, np.maximum(e, 1e-17), marker="o", label="|error|")
    if np.isfinite(report.slope):
        fit = np.exp(report.intercept) * n ** report.slope
        ax.loglog(n, fit, "--", label=f"slope {report.slope:.2f}")
    if report.floor_n is not None:
        ax.axhline(report.floor_error, color="r", lw=0.8, ls=":",
                   label=f"floor at N={report.floor_n}")
    ax.set_xlabel("N")
    ax.set_ylabel("absolute error")
    if title:
        ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return path
