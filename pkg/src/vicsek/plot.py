"""Static SVG rendering of a function on V_m.

Colour map: a linear blue-white-red diverging scale. A value v is mapped to
t = v / max|u| in [-1, 1]; t = -1 is BLUE, t = 0 is WHITE, t = +1 is RED,
and intermediate t interpolate linearly in RGB. The zero function is drawn
entirely in WHITE. Output is byte-identical for identical inputs.
"""

from __future__ import annotations

import numpy as np

from . import __version__
from .graph import LevelGraph

BLUE = (33, 102, 172)
WHITE = (247, 247, 247)
RED = (178, 24, 43)
VIEW = 1000
MARGIN = 40


def diverging_color(t: float) -> str:
    t = float(np.clip(t, -1.0, 1.0))
    end = RED if t > 0 else BLUE
    s = abs(t)
    rgb = [round(w + s * (e - w)) for w, e in zip(WHITE, end)]
    return "#{:02x}{:02x}{:02x}".format(*rgb)


def _xy(g: LevelGraph, v: int):
    # y grows downward in SVG
    span = VIEW - 2 * MARGIN
    x, y = g.coords[v]
    return (MARGIN + span * int(x) / g.scale, MARGIN + span * (1 - int(y) / g.scale))


def render_svg(g: LevelGraph, values, title: str = "") -> str:
    values = np.asarray(values, dtype=float)
    if values.shape != (g.n_vertices,):
        raise ValueError(f"expected {g.n_vertices} values, got shape {values.shape}")
    vmax = float(np.max(np.abs(values))) if len(values) else 0.0
    t = values / vmax if vmax > 0 else np.zeros_like(values)
    radius = max(1.5, 12.0 / 2 ** g.level)

    out = [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" viewBox="0 0 {VIEW} {VIEW}" '
        f'width="{VIEW}" height="{VIEW}">',
        f'<!-- vicsek {__version__}; level {g.level}; vertices {g.n_vertices}; edges {g.n_edges}; '
        f'max|u| {vmax:.12g} -->',
    ]
    if title:
        out.append(f"<title>{_escape(title)}</title>")
    out.append('<g id="edges" stroke="#888888" stroke-width="1">')
    for a, b in g.edges:
        (x1, y1), (x2, y2) = _xy(g, a), _xy(g, b)
        out.append(f'<line x1="{x1:.4f}" y1="{y1:.4f}" x2="{x2:.4f}" y2="{y2:.4f}"/>')
    out.append("</g>")
    out.append('<g id="vertices" stroke="#222222" stroke-width="0.5">')
    for v in range(g.n_vertices):
        x, y = _xy(g, v)
        out.append(f'<circle cx="{x:.4f}" cy="{y:.4f}" r="{radius:.4f}" fill="{diverging_color(t[v])}">'
                   f"<title>{v}: {values[v]:.12g}</title></circle>")
    out.append("</g>")
    out.append("</svg>")
    return "\n".join(out) + "\n"


def _escape(s: str) -> str:
    return s.replace("&", "&amp;").replace("<", "&lt;").replace(">", "&gt;")
