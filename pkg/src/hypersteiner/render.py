"""SVG drawings of trees in the Klein disk."""

from __future__ import annotations

import numpy as np

from .triangulation import delaunay

SIZE = 512
MARGIN = 16


def _xy(p):
    # disk [-1, 1]^2 to pixels, y up
    half = (SIZE - 2 * MARGIN) / 2.0
    return MARGIN + half * (1.0 + p[0]), MARGIN + half * (1.0 - p[1])


def _f(v):
    return f"{v:.3f}"


def render_svg(terminals, steiner, edges, show_dt=False):
    """SVG text for a tree; geodesics in the Klein model are straight chords.

    Terminals are drawn red and Steiner points blue.  ``show_dt`` adds a
    dashed Delaunay triangulation of all vertices.  Output depends only on
    the input.
    """
    terminals = np.asarray(terminals, dtype=float).reshape(-1, 2)
    steiner = np.asarray(steiner, dtype=float).reshape(-1, 2)
    edges = np.asarray(edges, dtype=int).reshape(-1, 2)
    pts = np.vstack([terminals, steiner])
    c = SIZE / 2.0
    r = (SIZE - 2 * MARGIN) / 2.0
    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{SIZE}" height="{SIZE}" viewBox="0 0 {SIZE} {SIZE}">',
        f'<circle class="disk" cx="{_f(c)}" cy="{_f(c)}" r="{_f(r)}" fill="none" stroke="black" stroke-width="1"/>',
    ]
    if show_dt and len(pts) >= 3:
        tri = delaunay(pts)
        out.append('<g class="dt" stroke="#999999" stroke-width="0.5" stroke-dasharray="3,3">')
        for i, j in tri.edges.tolist():
            (x1, y1), (x2, y2) = _xy(pts[i]), _xy(pts[j])
            out.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}"/>')
        out.append("</g>")
    out.append('<g class="edges" stroke="black" stroke-width="1.2">')
    for i, j in edges.tolist():
        (x1, y1), (x2, y2) = _xy(pts[i]), _xy(pts[j])
        out.append(f'<line x1="{_f(x1)}" y1="{_f(y1)}" x2="{_f(x2)}" y2="{_f(y2)}"/>')
    out.append("</g>")
    for cls, color, group in (("terminal", "red", terminals), ("steiner", "blue", steiner)):
        for p in group:
            x, y = _xy(p)
            out.append(f'<circle class="{cls}" cx="{_f(x)}" cy="{_f(y)}" r="3" fill="{color}"/>')
    out.append("</svg>")
    return "\n".join(out) + "\n"


def render_result(result, show_dt=False):
    """Render a result dict with ``terminals``, ``steiner`` and ``edges`` keys."""
    for key in ("terminals", "steiner", "edges"):
        if key not in result:
            raise ValueError(f"result is missing {key!r}")
    terminals = np.asarray(result["terminals"], dtype=float).reshape(-1, 2)
    steiner = np.asarray(result["steiner"], dtype=float).reshape(-1, 2)
    edges = np.asarray(result["edges"], dtype=int).reshape(-1, 2)
    n = len(terminals) + len(steiner)
    if len(edges) and (edges.min() < 0 or edges.max() >= n):
        raise ValueError("edge index out of range")
    return render_svg(terminals, steiner, edges, show_dt=show_dt)
