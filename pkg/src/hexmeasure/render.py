"""SVG pictures of supports and puzzles.  Floats appear only here."""

from __future__ import annotations

from typing import List

from . import hexgeom as hg
from .measure import M, Measure
from .puzzle import Puzzle

SCALE = 60.0
PAD = 40.0
FILL = {"white": "#ffffff", "parallelogram": "#555555", "branch": "#bbbbbb"}
RAY_LEN = 0.6


def _xy(p, height: float) -> str:
    x, y = hg.to_cartesian(p)
    return f"{PAD + SCALE * x:.4f},{height - PAD - SCALE * y:.4f}"


def _frame(size: float) -> tuple:
    # triangle spans x in [0, size], y in [0, size*sqrt(3)/2]
    w = 2 * PAD + SCALE * size * 1.0
    h = 2 * PAD + SCALE * size * 0.8660254037844386
    return w, h


def _header(w: float, h: float) -> List[str]:
    return [
        '<?xml version="1.0" encoding="UTF-8"?>',
        f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{w:.2f}" height="{h:.2f}" '
        f'viewBox="0 0 {w:.2f} {h:.2f}">',
    ]


def _triangle(r, h: float, dotted: bool, shaded: bool) -> str:
    pts = " ".join(_xy(p, h) for p in hg.corners(r).values())
    fill = "#eeeeee" if shaded else "none"
    dash = ' stroke-dasharray="4,4"' if dotted else ""
    return f'<polygon id="triangle" points="{pts}" fill="{fill}" stroke="#000000" stroke-width="1"{dash}/>'


def measure_svg(m: Measure) -> str:
    r = float(m.r)
    w, h = _frame(r)
    out = _header(w, h)
    out.append(
        '<defs><marker id="arrow" viewBox="0 0 10 10" refX="10" refY="5" markerWidth="6" '
        'markerHeight="6" orient="auto"><path d="M 0 0 L 10 5 L 0 10 z" fill="#000000"/></marker></defs>'
    )
    out.append(_triangle(m.r, h, dotted=m.variant == M, shaded=m.variant != M))
    for i, e in enumerate(m.edges):
        p, q = m.vertices[e.u], m.vertices[e.v]
        (x1, y1), (x2, y2) = (_xy(p, h).split(","), _xy(q, h).split(","))
        out.append(
            f'<line id="edge-{i}" class="edge" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
            f'stroke="#000000" stroke-width="{1.5 * float(e.density):.3f}"/>'
        )
    for i, ray in enumerate(m.rays):
        p = m.vertices[ray.base]
        k = m.ray_dir(ray)
        d = hg.DIRS[k]
        q = (float(p[0]) + RAY_LEN * float(d[0]), float(p[1]) + RAY_LEN * float(d[1]))
        (x1, y1), (x2, y2) = (_xy(p, h).split(","), _xy(q, h).split(","))
        out.append(
            f'<line id="ray-{i}" class="ray" x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" '
            f'stroke="#000000" stroke-width="{1.5 * float(ray.density):.3f}" marker-end="url(#arrow)"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"


def puzzle_svg(pz: Puzzle) -> str:
    allpts = [x for pc in pz.pieces for x in pc.polygon]
    beta = min(x[1] for x in allpts)
    gamma = min(x[0] - x[1] for x in allpts)
    shift = (-beta - gamma, -beta)
    w, h = _frame(float(pz.size))
    out = _header(w, h)
    for i, pc in enumerate(pz.pieces):
        pts = " ".join(_xy(hg.add(x, shift), h) for x in pc.polygon)
        out.append(
            f'<polygon id="piece-{i}" class="{pc.kind}" points="{pts}" fill="{FILL[pc.kind]}" '
            'stroke="#000000" stroke-width="0.5"/>'
        )
    out.append("</svg>")
    return "\n".join(out) + "\n"
