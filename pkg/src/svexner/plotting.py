"""Figures written next to the CSV outputs. Uses the non-interactive Agg backend."""

from __future__ import annotations

from pathlib import Path

import matplotlib

matplotlib.use("Agg")
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

STYLE = {
    "figure.dpi": 110,
    "axes.grid": True,
    "grid.alpha": 0.3,
    "axes.spines.top": False,
    "axes.spines.right": False,
    "font.size": 9,
    "legend.frameon": False,
}


def plot_snapshots(snapshots, path: Path, initial=None, title: str | None = None) -> Path:
    """Free surface and bed on top, discharge below, one line per snapshot."""
    with plt.rc_context(STYLE):
        fig, (ax_s, ax_q) = plt.subplots(2, 1, sharex=True, figsize=(7, 5.5))
        if initial is not None:
            ax_s.plot(initial.x, initial.eta, color="0.6", lw=0.8, ls="--", label="bed t=0")
        for f in snapshots:
            line, = ax_s.plot(f.x, f.h + f.eta, lw=1.0, label=f"h+eta t={f.t:g}")
            ax_s.plot(f.x, f.eta, lw=1.0, color=line.get_color(), alpha=0.6)
            ax_q.plot(f.x, f.q, lw=1.0, color=line.get_color(), label=f"t={f.t:g}")
        ax_s.set_ylabel("elevation [m]")
        ax_q.set_ylabel("q [m$^2$/s]")
        ax_q.set_xlabel("x [m]")
        ax_s.legend(fontsize=7)
        if title:
            ax_s.set_title(title)
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)


def plot_convergence(report, path: Path) -> Path:
    """Log-log L1 error against M for every reported variable."""
    with plt.rc_context(STYLE):
        fig, ax = plt.subplots(figsize=(5, 4))
        M = np.array([r.M for r in report.rows], dtype=float)
        for v in report.variables:
            e = np.array([r.l1[v] for r in report.rows], dtype=float)
            ok = np.isfinite(e) & (e > 0)
            if np.any(ok):
                ax.loglog(M[ok], e[ok], "o-", ms=3, label=f"L1({v})")
        if len(M) > 1:
            ref = M[0] ** 2 / M ** 2
            ax.loglog(M, ref * ax.get_ylim()[1] * 0.5, "k:", lw=0.8, label="slope -2")
        ax.set_xlabel("M")
        ax.set_ylabel("error")
        ax.legend()
        fig.tight_layout()
        fig.savefig(path)
        plt.close(fig)
    return Path(path)
