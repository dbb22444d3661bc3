"""Figure rendering for the report runner.

Imported lazily so the analysis modules stay free of matplotlib; the
Agg backend keeps rendering headless.
"""

from __future__ import annotations

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt  # noqa: E402


def region_overlay(regions: dict, path: str) -> str:
    """Overlay the rate-region hulls of several schemes in one axes.

    regions maps scheme name to a RateRegion; hull vertices are drawn
    as a closed polygon with the swept maximizers as faint dots.
    """
    fig, ax = plt.subplots(figsize=(6.4, 5.2))
    for scheme, region in regions.items():
        hull = region.hull
        if len(hull) >= 2:
            xs = [p[0] for p in hull] + [hull[0][0]]
            ys = [p[1] for p in hull] + [hull[0][1]]
        else:
            xs = [p[0] for p in hull]
            ys = [p[1] for p in hull]
        (line,) = ax.plot(xs, ys, label=scheme, linewidth=1.6)
        ax.plot([p.r12 for p in region.points], [p.r21 for p in region.points],
                ".", markersize=2.5, alpha=0.45, color=line.get_color())
    ax.set_xlabel("$R_{12}$ (bits/use)")
    ax.set_ylabel("$R_{21}$ (bits/use)")
    ax.set_xlim(left=0.0)
    ax.set_ylim(bottom=0.0)
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)


def curve_plot(series: dict, xlabel: str, ylabel: str, path: str,
               logy: bool = False) -> str:
    """Line plot of several named (x, y) series on shared axes."""
    fig, ax = plt.subplots(figsize=(6.4, 4.4))
    for label, (xs, ys) in series.items():
        if logy:
            pairs = [(x, y) for x, y in zip(xs, ys) if y > 0]
            if not pairs:
                continue
            xs = [p[0] for p in pairs]
            ys = [p[1] for p in pairs]
        ax.plot(xs, ys, label=label, linewidth=1.6)
    if logy:
        ax.set_yscale("log")
    ax.set_xlabel(xlabel)
    ax.set_ylabel(ylabel)
    ax.grid(alpha=0.3)
    ax.legend(loc="best")
    fig.tight_layout()
    fig.savefig(path, dpi=150)
    plt.close(fig)
    return str(path)
