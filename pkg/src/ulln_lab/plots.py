"""Figure rendering for simulation reports.

Figures are written as SVG with a fixed hash salt and no date metadata, so
repeated runs of the same plan produce byte-identical files.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402

from .engine import L1Curve  # noqa: E402

_SVG_SALT = "ulln-lab"


def render_curve_svg(curve: L1Curve, title: str, path) -> None:
    """Log-log plot of the per-n grid sup (plus the v = 0 and v = 1 slices)."""
    plt.rcParams["svg.hashsalt"] = _SVG_SALT
    ns = [s.n for s in curve.sups]
    fig, ax = plt.subplots(figsize=(6.0, 4.2))
    ax.loglog(ns, [s.sup for s in curve.sups], "o-", color="#1f6fb4",
              label="sup over v grid")
    for v, style in ((0.0, "s--"), (1.0, "^:")):
        series = [(p.n, p.estimate) for p in curve.points if p.v == v]
        if series:
            ax.loglog([n for n, _ in series], [e for _, e in series], style,
                      alpha=0.7, label=f"v = {v:g}")
    ax.set_xlabel("sample size n")
    ax.set_ylabel("mean absolute deviation")
    ax.set_title(title)
    ax.grid(True, which="both", alpha=0.3)
    ax.legend(fontsize=8)
    fig.tight_layout()
    fig.savefig(path, format="svg", metadata={"Date": None})
    plt.close(fig)
