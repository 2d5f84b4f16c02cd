"""Deterministic SVG drawing of a two-dimensional atlas."""
from __future__ import annotations

import numpy as np

from .errors import DimensionNot2D
from .geom import bounding_box, vertices2d

SIZE = 600
MARGIN = 40
FILL = {"persistent": "#ffffff", "transient": "#9a9a9a", "degenerate": "#d04040"}


def _fmt(v: float) -> str:
    return f"{v:.3f}"


def region_class(region, persistent=None) -> str:
    if not region.full_dim:
        return "degenerate"
    if persistent is not None:
        return "persistent" if region.active_set in persistent else "transient"
    return "persistent" if region.persistent_form else "transient"


def atlas_svg(atlas, persistent=None, show_terminal: bool = True) -> str:
    """One polygon per region, coloured by persistence, with the terminal set outlined.

    ``persistent`` is an optional set of tuples; without it the persistent
    form of each tuple decides its colour.
    """
    if atlas.setup.spec.n != 2:
        raise DimensionNot2D(f"cannot draw a {atlas.setup.spec.n}-dimensional atlas")
    lo, hi = bounding_box(atlas.setup.spec.X)
    span = np.maximum(hi - lo, 1e-12)
    scale = (SIZE - 2 * MARGIN) / span

    def px(p):
        return (MARGIN + (p[0] - lo[0]) * scale[0], SIZE - MARGIN - (p[1] - lo[1]) * scale[1])

    def points(P):
        return " ".join(f"{_fmt(a)},{_fmt(b)}" for a, b in map(px, vertices2d(P)))

    out = [f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" '
           f'viewBox="0 0 {SIZE} {SIZE}">',
           f'<rect x="0" y="0" width="{SIZE}" height="{SIZE}" fill="#ffffff"/>']
    ox, oy = px(np.zeros(2))
    out.append(f'<g class="axes" stroke="#000000" stroke-width="0.5">'
               f'<line x1="{MARGIN}" y1="{_fmt(oy)}" x2="{SIZE - MARGIN}" y2="{_fmt(oy)}"/>'
               f'<line x1="{_fmt(ox)}" y1="{MARGIN}" x2="{_fmt(ox)}" y2="{SIZE - MARGIN}"/></g>')
    out.append('<g class="regions" stroke="#000000" stroke-width="0.8">')
    for r in atlas.regions:
        if not r.full_dim:
            continue
        cls = region_class(r, persistent)
        out.append(f'<polygon class="{cls}" data-tuple="{r.active_set}" fill="{FILL[cls]}" '
                   f'points="{points(r.region)}"/>')
    out.append("</g>")
    if show_terminal:
        out.append(f'<polygon class="terminal" fill="none" stroke="#c00000" stroke-width="1.5" '
                   f'stroke-dasharray="6,3" points="{points(atlas.setup.terminal.T)}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"
