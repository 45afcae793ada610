"""Deterministic SVG figures: Voronoi colorings in the disk, the triangle tiling,
rectangles with crossing witnesses, subdivision chains.

Hyperbolic Voronoi cells are built in the Klein model, where hyperbolic
bisectors are straight chords and every cell is a convex polygon; each chord
is then drawn in the Poincare disk as an arc of the circle orthogonal to the
unit circle through the same two ideal points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import List, Optional, Sequence

import numpy as np

from .geometry import Rect
from .pointprocess import MarkedConfiguration
from .voronoi import SiteIndex, VoronoiComplex, cell_clip, clip_halfplane

PALETTE = {"black": "#9ecae1", "white": "#ffffff", "edge": "#303030", "disk": "#000000",
           "tile": "#606060", "highlight": "#fdd49e", "rect": "#d62728", "witness": "#2ca02c"}


@dataclass
class RenderOptions:
    size: int = 600
    colors: dict = field(default_factory=lambda: dict(PALETTE))
    metric: str = "hyperbolic"  # cell boundaries: "hyperbolic" arcs or "euclidean" segments
    stroke: float = 0.6
    disk_stroke: float = 1.2
    clip: bool = True
    margin: int = 8
    boundary_segments: int = 256

    def __post_init__(self):
        if self.size < 64:
            raise ValueError("canvas size must be at least 64 px")
        for k, v in self.colors.items():
            if not (isinstance(v, str) and len(v) == 7 and v[0] == "#" and all(c in "0123456789abcdefABCDEF"
                                                                               for c in v[1:])):
                raise ValueError(f"invalid color for {k!r}: {v!r}")
        if self.metric not in ("hyperbolic", "euclidean"):
            raise ValueError("metric must be 'hyperbolic' or 'euclidean'")

    @property
    def scale(self) -> float:
        return (self.size - 2 * self.margin) / 2.0

    def to_canvas(self, pts) -> np.ndarray:
        p = np.asarray(pts, dtype=float).reshape(-1, 2)
        c = self.size / 2.0
        return np.stack([c + p[:, 0] * self.scale, c - p[:, 1] * self.scale], axis=-1)


def _fmt(x: float) -> str:
    s = f"{x:.6f}".rstrip("0").rstrip(".")
    return "0" if s in ("-0", "") else s


def _pt(p) -> str:
    return f"{_fmt(p[0])},{_fmt(p[1])}"


class _Doc:
    def __init__(self, opt: RenderOptions):
        self.opt = opt
        self.parts: List[str] = []

    def add(self, s: str):
        self.parts.append(s)

    def text(self) -> str:
        n = self.opt.size
        head = (f'<?xml version="1.0" encoding="UTF-8"?>\n'
                f'<svg xmlns="http://www.w3.org/2000/svg" version="1.1" width="{n}" height="{n}" '
                f'viewBox="0 0 {n} {n}">\n')
        return head + "\n".join(self.parts) + ("\n" if self.parts else "") + "</svg>\n"

    def disk(self):
        o = self.opt
        self.add(f'<circle class="disk" cx="{_fmt(o.size / 2)}" cy="{_fmt(o.size / 2)}" r="{_fmt(o.scale)}" '
                 f'fill="none" stroke="{o.colors["disk"]}" stroke-width="{_fmt(o.disk_stroke)}"/>')


# --------------------------------------------------------------------------
# Klein / Poincare conversions and geodesic arcs


def poincare_to_klein(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    return 2.0 * p / (1.0 + np.sum(p * p, axis=-1, keepdims=True))


def klein_to_poincare(k) -> np.ndarray:
    k = np.asarray(k, dtype=float)
    return k / (1.0 + np.sqrt(np.maximum(0.0, 1.0 - np.sum(k * k, axis=-1, keepdims=True))))


def _ideal_ends(k1, k2):
    """Where the Klein line through k1, k2 meets the unit circle."""
    d = k2 - k1
    a = d @ d
    b = 2 * (k1 @ d)
    c = k1 @ k1 - 1.0
    disc = math.sqrt(max(0.0, b * b - 4 * a * c))
    return k1 + (-b - disc) / (2 * a) * d, k1 + (-b + disc) / (2 * a) * d


def carrier_circle(k1, k2):
    """(center, radius) of the Poincare geodesic through Klein points k1, k2; None for a diameter."""
    e1, e2 = _ideal_ends(np.asarray(k1, float), np.asarray(k2, float))
    c = e1 @ e2
    if 1.0 + c < 1e-15 or abs(e1[0] * e2[1] - e1[1] * e2[0]) < 1e-13:
        return None
    center = (e1 + e2) / (1.0 + c)
    return center, math.sqrt(max(0.0, center @ center - 1.0))


def _arc_cmd(opt: RenderOptions, k1, k2, attrs: list) -> str:
    """SVG path command drawing the geodesic from Klein k1 to k2 (start point excluded)."""
    p2 = klein_to_poincare(k2)
    end = opt.to_canvas(p2)[0]
    if np.allclose(k1, k2, atol=1e-15):
        return ""
    cc = carrier_circle(k1, k2)
    if cc is None:
        return f"L{_pt(end)}"
    center, R = cc
    p1 = klein_to_poincare(k1)
    a, b = p1 - center, p2 - center
    cross = a[0] * b[1] - a[1] * b[0]
    sweep = 0 if cross > 0 else 1  # canvas y points down
    attrs.append((float(center[0]), float(center[1]), float(R)))
    r = R * opt.scale
    return f"A{_fmt(r)},{_fmt(r)} 0 0 {sweep} {_pt(end)}"


def _geodesic_path(opt: RenderOptions, klein: np.ndarray, straight: Optional[np.ndarray] = None):
    """Closed path through Klein vertices; edges flagged in ``straight`` are drawn as segments."""
    n = len(klein)
    start = opt.to_canvas(klein_to_poincare(klein[0]))[0]
    cmds = [f"M{_pt(start)}"]
    arcs: list = []
    for i in range(n):
        a, b = klein[i], klein[(i + 1) % n]
        if straight is not None and straight[i]:
            cmds.append(f"L{_pt(opt.to_canvas(klein_to_poincare(b))[0])}")
        else:
            c = _arc_cmd(opt, a, b, arcs)
            if c:
                cmds.append(c)
    cmds.append("Z")
    return " ".join(cmds), arcs


def _arc_data(arcs) -> str:
    if not arcs:
        return ""
    return ' data-arcs="' + ";".join(f"{_fmt(x)},{_fmt(y)},{_fmt(r)}" for x, y, r in arcs) + '"'


# --------------------------------------------------------------------------
# cells


def _disk_polygon(n: int, radius: float) -> np.ndarray:
    t = 2 * np.pi * np.arange(n) / n
    return radius * np.stack([np.cos(t), np.sin(t)], axis=-1)


def klein_cell(z: int, sites: np.ndarray, candidates, boundary: np.ndarray) -> np.ndarray:
    """Hyperbolic Voronoi cell of site z, in Klein coordinates, clipped to a boundary polygon.

    cosh d(x, s) is proportional to (1 - k(s).x) / sqrt(1 - |k(s)|^2) for Klein
    points x, which is affine in x; each competing site gives a half-plane.
    """
    k = poincare_to_klein(sites)
    g = 1.0 / np.sqrt(1.0 - np.sum(k * k, axis=1))
    poly = boundary
    for w in candidates:
        if w == z:
            continue
        # g_z (1 - k_z.x) <= g_w (1 - k_w.x)  <=>  (g_w k_w - g_z k_z).x <= g_w - g_z
        poly = clip_halfplane(poly, g[w] * k[w] - g[z] * k[z], g[w] - g[z])
        if len(poly) == 0:
            break
    return poly


def _boundary_flags(poly: np.ndarray, radius: float) -> np.ndarray:
    """Edge i (poly[i] -> poly[i+1]) lies on the boundary polygon."""
    r = np.hypot(*poly.T)
    on = np.abs(r - radius) < 1e-9
    nxt = np.roll(on, -1)
    mid = 0.5 * (poly + np.roll(poly, -1, axis=0))
    return on & nxt & (np.hypot(*mid.T) > radius * math.cos(math.pi / 64) - 1e-12)


def _hyp_candidates(sites: np.ndarray, k: int = 32):
    n = len(sites)
    if n <= k + 1:
        return [list(range(n))] * n
    kl = poincare_to_klein(sites)
    idx = SiteIndex(kl)
    _, nb = idx.tree.query(kl, k=min(n, k + 1))
    return [list(r) for r in nb]


def render_voronoi(config: MarkedConfiguration, complex_: Optional[VoronoiComplex] = None,
                   options: Optional[RenderOptions] = None, rectangles: Sequence[Rect] = (),
                   witness=None) -> str:
    """Voronoi coloring of a configuration in the disk; black cells in light blue."""
    opt = options or RenderOptions()
    doc = _Doc(opt)
    pts = np.asarray(config.points, dtype=float).reshape(-1, 2)
    if complex_ is not None and (complex_.n_sites != len(pts) or not np.array_equal(complex_.sites, pts)):
        raise ValueError("complex does not match the configuration")
    black = np.asarray(config.black, dtype=bool)
    col = opt.colors
    if len(pts):
        doc.add('<g class="cells" stroke="{}" stroke-width="{}" stroke-linejoin="round">'.format(
            col["edge"], _fmt(opt.stroke)))
        if opt.metric == "hyperbolic":
            _hyperbolic_cells(doc, pts, black)
        else:
            _euclidean_cells(doc, pts, black, complex_)
        doc.add("</g>")
    doc.disk()
    for R in rectangles:
        _rect(doc, R)
    if witness is not None:
        _polyline(doc, pts[np.asarray(witness.sites if hasattr(witness, "sites") else witness, dtype=int)])
    return doc.text()


def _hyperbolic_cells(doc: _Doc, pts, black):
    opt = doc.opt
    # the boundary polygon sits at Poincare radius 1 - 1e-4 so arcs stay well conditioned
    rad = float(poincare_to_klein(np.array([1.0 - 1e-4, 0.0]))[0])
    boundary = _disk_polygon(opt.boundary_segments, rad)
    cands = _hyp_candidates(pts)
    for z in range(len(pts)):
        poly = klein_cell(z, pts, cands[z], boundary)
        if len(poly) < 3:
            continue
        flags = _boundary_flags(poly, rad)
        d, arcs = _geodesic_path(opt, poly, flags)
        fill = opt.colors["black"] if black[z] else opt.colors["white"]
        doc.add(f'<path class="cell" data-site="{z}" fill="{fill}" d="{d}"{_arc_data(arcs)}/>')


def _euclidean_cells(doc: _Doc, pts, black, complex_):
    from .voronoi import voronoi_complex

    opt = doc.opt
    vc = complex_ if complex_ is not None else voronoi_complex(pts)
    view = Rect((-1.0, -1.0), 2.0, 2.0, 0.0, "x")
    disk = _disk_polygon(opt.boundary_segments, 1.0)
    nrm = np.roll(disk, -1, axis=0) - disk
    nrm = np.stack([nrm[:, 1], -nrm[:, 0]], axis=-1)
    for z in range(len(pts)):
        poly = cell_clip(z, view, vc)
        if opt.clip:
            for a, nv in zip(disk, nrm):
                if len(poly) == 0:
                    break
                poly = clip_halfplane(poly, nv, nv @ a)
        if len(poly) < 3:
            continue
        c = opt.to_canvas(poly)
        d = "M" + " L".join(_pt(p) for p in c) + f" L{_pt(c[0])} Z"
        fill = opt.colors["black"] if black[z] else opt.colors["white"]
        doc.add(f'<path class="cell" data-site="{z}" fill="{fill}" d="{d}"/>')


def _rect(doc: _Doc, R: Rect, cls: str = "rect"):
    c = doc.opt.to_canvas(R.corners())
    d = "M" + " L".join(_pt(p) for p in c) + f" L{_pt(c[0])} Z"
    doc.add(f'<path class="{cls}" fill="none" stroke="{doc.opt.colors["rect"]}" '
            f'stroke-width="{_fmt(doc.opt.stroke * 2)}" d="{d}"/>')


def _polyline(doc: _Doc, pts):
    c = doc.opt.to_canvas(pts)
    doc.add(f'<polyline class="witness" fill="none" stroke="{doc.opt.colors["witness"]}" '
            f'stroke-width="{_fmt(doc.opt.stroke * 2.5)}" points="{" ".join(_pt(p) for p in c)}"/>')


# --------------------------------------------------------------------------
# tilings, rectangles, subdivisions


def render_tiling(tiling, highlighted: Sequence[int] = (), rectangles: Sequence[Rect] = (),
                  options: Optional[RenderOptions] = None, witnesses: Sequence = ()) -> str:
    """Triangle tiles with geodesic sides; optional highlighted tiles, rectangles and witness paths."""
    opt = options or RenderOptions()
    doc = _Doc(opt)
    hl = set(int(h) for h in highlighted)
    doc.add(f'<g class="tiles" stroke="{opt.colors["tile"]}" stroke-width="{_fmt(opt.stroke)}">')
    for tile in tiling.tiles:
        kv = poincare_to_klein(np.asarray(tile.vertices, dtype=float))
        d, arcs = _geodesic_path(opt, kv)
        fill = opt.colors["highlight"] if tile.id in hl else "none"
        doc.add(f'<path class="tile" data-tile="{tile.id}" fill="{fill}" d="{d}"{_arc_data(arcs)}/>')
    doc.add("</g>")
    doc.disk()
    for R in rectangles:
        _rect(doc, R)
    for w in witnesses:
        _polyline(doc, np.asarray(w, dtype=float))
    return doc.text()


def render_rectangles(rectangles: Sequence[Rect], options: Optional[RenderOptions] = None,
                      outline: Optional[Rect] = None) -> str:
    """Rectangles in their own bounding frame (subdivision schematics)."""
    opt = options or RenderOptions()
    allc = np.concatenate([R.corners() for R in rectangles] + ([outline.corners()] if outline else []))
    lo, hi = allc.min(axis=0), allc.max(axis=0)
    span = float(max(hi - lo)) or 1.0
    mid = (lo + hi) / 2
    doc = _Doc(opt)

    def norm(R):
        return Rect(tuple((np.asarray(R.corner) - mid) * 1.9 / span), R.width * 1.9 / span,
                    R.height * 1.9 / span, R.angle, R.axis)

    if outline is not None:
        c = opt.to_canvas(norm(outline).corners())
        d = "M" + " L".join(_pt(p) for p in c) + f" L{_pt(c[0])} Z"
        doc.add(f'<path class="outline" fill="none" stroke="{opt.colors["edge"]}" '
                f'stroke-width="{_fmt(opt.stroke * 3)}" d="{d}"/>')
    for R in rectangles:
        _rect(doc, norm(R))
    return doc.text()


def figure_filename(experiment_id: str, kind: str) -> str:
    return f"{experiment_id}_{kind}.svg"


def write_svg(svg: str, path: str) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(svg)
