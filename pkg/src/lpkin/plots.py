"""Figure rendering for the CLI report path (written next to the CSVs)."""

from __future__ import annotations

import os

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt
import numpy as np

from .diagnostics import ConvergenceReport
from .grid import Distribution
from .steppers import RunRecord

__all__ = ["render_run_figures", "render_order_figure"]


def render_run_figures(rec: RunRecord, final: Distribution, outdir: str) -> list[str]:
    written = []
    t = np.array(rec.times)
    mass = np.array([m.mass for m in rec.moments])
    energy = np.array([m.energy for m in rec.moments])
    entropy = np.array(
        [m.entropy if m.entropy is not None else np.nan for m in rec.moments]
    )

    fig, axes = plt.subplots(2, 2, figsize=(9, 7))
    ax = axes[0, 0]
    denom = max(abs(mass[0]), 1e-14)
    ax.plot(t, (mass - mass[0]) / denom, "o-", ms=3)
    ax.set_title("relative mass drift")
    ax.set_xlabel("t")

    ax = axes[0, 1]
    ax.plot(t, energy, "o-", ms=3)
    ax.set_title("energy")
    ax.set_xlabel("t")

    ax = axes[1, 0]
    if np.any(np.isfinite(entropy)):
        ax.plot(t, entropy, "o-", ms=3)
        ax.set_title("entropy")
    else:
        ax.set_title("entropy (undefined: non-positive iterates)")
    ax.set_xlabel("t")

    ax = axes[1, 1]
    ax.plot(t, rec.l1_norms, "o-", ms=3)
    ax.set_title("L1 norm")
    ax.set_xlabel("t")
    if rec.blowup_step is not None:
        ax.axvline(rec.times[rec.blowup_step], color="r", ls="--", label="blow-up")
        ax.legend()

    fig.tight_layout()
    path = os.path.join(outdir, "evolution.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    written.append(path)

    written.append(_render_slice(final, os.path.join(outdir, "final_slice.png")))
    return written


def _render_slice(f: Distribution, path: str) -> str:
    g = f.grid
    ax1d = g.axis()
    if g.dim == 3:
        k0 = int(np.argmin(np.abs(ax1d)))  # layer nearest v_z = 0
        plane = f.values.reshape(g.n, g.n, g.n)[:, :, k0].T
        title = f"f at v_z = {ax1d[k0]:.3g}"
    else:
        plane = f.values.reshape(g.n, g.n).T
        title = "f"
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    im = ax.imshow(
        plane,
        origin="lower",
        extent=(-g.extent, g.extent, -g.extent, g.extent),
        cmap="viridis",
    )
    fig.colorbar(im, ax=ax)
    ax.set_title(title)
    ax.set_xlabel("v_x")
    ax.set_ylabel("v_y")
    fig.tight_layout()
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path


def render_order_figure(report: ConvergenceReport, outdir: str) -> str:
    dts = np.array(report.dt_values)
    errs = np.array(report.errors)
    fig, ax = plt.subplots(figsize=(5.2, 4.4))
    ax.loglog(dts, errs, "o-", label="observed error")
    guide = errs[0] * dts / dts[0]
    ax.loglog(dts, guide, "k--", lw=1, label="slope 1")
    ax.set_xlabel("dt")
    ax.set_ylabel("L1 error")
    ax.set_title(f"convergence ({report.reference} reference)")
    ax.legend()
    ax.grid(True, which="both", alpha=0.3)
    fig.tight_layout()
    path = os.path.join(outdir, "order.png")
    fig.savefig(path, dpi=130)
    plt.close(fig)
    return path
