"""Figures for reachable-state clouds: a dependency-free SVG and a matplotlib figure."""

from __future__ import annotations

from pathlib import Path

from .sampler import RegionResult

SVG_SIZE = 600
SVG_MARGIN = 40


def _to_px(x: float, z: float) -> tuple:
    span = SVG_SIZE - 2 * SVG_MARGIN
    return SVG_MARGIN + (x + 1) / 2 * span, SVG_MARGIN + (1 - z) / 2 * span


def region_svg(result: RegionResult) -> str:
    """Static SVG 1.1 scatter of the x-z projection on axes [-1, 1]^2.

    Output points are 1-px red circles; the initial state is a larger blue
    dot; the unit circle marks the Bloch-ball boundary.
    """
    cx, cy = _to_px(0.0, 0.0)
    radius = (SVG_SIZE - 2 * SVG_MARGIN) / 2
    lo, hi = SVG_MARGIN, SVG_SIZE - SVG_MARGIN
    lines = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{SVG_SIZE}" height="{SVG_SIZE}" '
        f'viewBox="0 0 {SVG_SIZE} {SVG_SIZE}">',
        f'<rect x="0" y="0" width="{SVG_SIZE}" height="{SVG_SIZE}" fill="white"/>',
        f'<rect x="{lo}" y="{lo}" width="{hi - lo}" height="{hi - lo}" fill="none" stroke="black"/>',
        f'<line x1="{lo}" y1="{cy:.2f}" x2="{hi}" y2="{cy:.2f}" stroke="gray" stroke-width="0.5"/>',
        f'<line x1="{cx:.2f}" y1="{lo}" x2="{cx:.2f}" y2="{hi}" stroke="gray" stroke-width="0.5"/>',
        f'<circle cx="{cx:.2f}" cy="{cy:.2f}" r="{radius:.2f}" fill="none" stroke="black" stroke-width="0.75"/>',
        f'<text x="{hi}" y="{cy - 6:.2f}" font-size="14" text-anchor="end">x</text>',
        f'<text x="{cx + 6:.2f}" y="{lo + 14}" font-size="14">z</text>',
        f'<text x="{lo}" y="{hi + 16}" font-size="12">-1</text>',
        f'<text x="{hi}" y="{hi + 16}" font-size="12" text-anchor="end">1</text>',
        '<g fill="red">',
    ]
    for x, _, z in result.points:
        px, py = _to_px(x, z)
        lines.append(f'<circle cx="{px:.2f}" cy="{py:.2f}" r="1"/>')
    lines.append("</g>")
    ix, iy = _to_px(result.initial.x, result.initial.z)
    lines.append(f'<circle cx="{ix:.2f}" cy="{iy:.2f}" r="5" fill="blue"/>')
    lines.append("</svg>")
    return "\n".join(lines) + "\n"


def write_region_svg(result: RegionResult, path) -> None:
    Path(path).write_text(region_svg(result))


def plot_region(result: RegionResult, path, dpi: int = 150, title: str | None = None) -> None:
    """Render the x-z projection with matplotlib; format follows the file suffix."""
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
    import numpy as np

    fig, ax = plt.subplots(figsize=(5, 5))
    pts = result.points
    ax.scatter(pts[:, 0], pts[:, 2], s=0.5, c="tab:red", alpha=0.4, linewidths=0, rasterized=True)
    t = np.linspace(0, 2 * np.pi, 400)
    ax.plot(np.cos(t), np.sin(t), color="black", lw=0.8)
    ax.plot([result.initial.x], [result.initial.z], "o", color="tab:blue", ms=6)
    ax.set_xlim(-1, 1)
    ax.set_ylim(-1, 1)
    ax.set_aspect("equal")
    ax.set_xlabel("x")
    ax.set_ylabel("z")
    if title:
        ax.set_title(title)
    fig.tight_layout()
    fig.savefig(path, dpi=dpi)
    plt.close(fig)
