"""Minimal SVG line plots of posterior densities with HPD markers.

Plotting proper is out of process; this exists so a run can be eyeballed
without loading the density grids into other tooling.  Output is plain
deterministic SVG text.
"""

from __future__ import annotations

from pathlib import Path
from typing import Optional

from .summaries import HpdSet, PointMass

_W, _H, _PAD = 640, 360, 45


def _x(v, lo, hi):
    return _PAD + (v - lo) / (hi - lo) * (_W - 2 * _PAD)


def density_svg(
    path: str | Path,
    title: str,
    estimate,
    hpd_set: Optional[HpdSet] = None,
    truth: Optional[float] = None,
    meta: Optional[dict] = None,
) -> None:
    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{_W}" height="{_H}" '
        f'viewBox="0 0 {_W} {_H}">',
    ]
    if meta:
        joined = " ".join(f"{k}={v}" for k, v in meta.items())
        parts.append(f"<!-- {joined} -->")
    parts += [
        f'<rect width="{_W}" height="{_H}" fill="white"/>',
        f'<text x="{_W / 2}" y="20" text-anchor="middle" font-family="monospace" '
        f'font-size="14">{title}</text>',
    ]
    if isinstance(estimate, PointMass):
        x = _W / 2
        parts.append(
            f'<line x1="{x}" y1="{_PAD}" x2="{x}" y2="{_H - _PAD}" stroke="black" stroke-width="2"/>'
        )
        parts.append(
            f'<text x="{x}" y="{_H - _PAD + 20}" text-anchor="middle" font-family="monospace" '
            f'font-size="12">point mass at {estimate.location:g}</text>'
        )
    else:
        grid, dens = estimate.grid, estimate.density
        lo, hi = float(grid[0]), float(grid[-1])
        peak = float(dens.max()) or 1.0
        pts = " ".join(
            f"{_x(g, lo, hi):.2f},{_H - _PAD - (d / peak) * (_H - 2 * _PAD):.2f}"
            for g, d in zip(grid, dens)
        )
        parts.append(f'<polyline points="{pts}" fill="none" stroke="steelblue" stroke-width="1.5"/>')
        parts.append(
            f'<line x1="{_PAD}" y1="{_H - _PAD}" x2="{_W - _PAD}" y2="{_H - _PAD}" stroke="black"/>'
        )
        for label, v in ((f"{lo:.4g}", lo), (f"{hi:.4g}", hi)):
            parts.append(
                f'<text x="{_x(v, lo, hi):.2f}" y="{_H - _PAD + 18}" text-anchor="middle" '
                f'font-family="monospace" font-size="11">{label}</text>'
            )
        if hpd_set is not None:
            for a, b in hpd_set.intervals:
                for v in (a, b):
                    if lo <= v <= hi:
                        parts.append(
                            f'<line x1="{_x(v, lo, hi):.2f}" y1="{_PAD}" x2="{_x(v, lo, hi):.2f}" '
                            f'y2="{_H - _PAD}" stroke="gray" stroke-dasharray="4,3"/>'
                        )
        if truth is not None and lo <= truth <= hi:
            parts.append(
                f'<line x1="{_x(truth, lo, hi):.2f}" y1="{_PAD}" x2="{_x(truth, lo, hi):.2f}" '
                f'y2="{_H - _PAD}" stroke="crimson" stroke-width="1.5"/>'
            )
    parts.append("</svg>")
    Path(path).write_text("\n".join(parts) + "\n")
