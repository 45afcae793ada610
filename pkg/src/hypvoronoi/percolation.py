"""Coloring of the plane by a marked configuration: crossings, clusters, local control.

The coloring is always that of the Euclidean Voronoi tessellation of the
points, whatever intensity produced them. Two same-colored cells are joined
inside a rectangle when their shared Voronoi edge meets the closed rectangle.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import List, Optional, Union

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components

from .geometry import Circle, DomainError, HypDisk, Rect
from .pointprocess import MarkedConfiguration
from .voronoi import SiteIndex, VoronoiComplex, voronoi_complex

DEFAULT_DIVISOR = 1000


class MarginError(ValueError):
    """The sampling window does not contain the dilated rectangle."""


@dataclass
class CrossingWitness:
    sites: List[int]
    color: str

    def __len__(self):
        return len(self.sites)


@dataclass
class CrossingResult:
    decision: bool
    witness: Optional[CrossingWitness] = None
    rect: Optional[Rect] = None
    color: str = "black"

    def __bool__(self):
        return self.decision

    def to_record(self) -> dict:
        r = self.rect
        return {
            "decision": bool(self.decision),
            "color": self.color,
            "rect": None if r is None else {
                "corner": [float(r.corner[0]), float(r.corner[1])],
                "width": r.width, "height": r.height, "angle": r.angle,
                "axis": r.crossing_direction(),
            },
            "witness": None if self.witness is None else [int(i) for i in self.witness.sites],
        }

    def to_json(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def _normalize_color(color) -> str:
    if color in ("black", "B", True):
        return "black"
    if color in ("white", "W", False):
        return "white"
    raise ValueError(f"unknown color {color!r}")


# --------------------------------------------------------------------------
# clipping Voronoi edges to a rectangle


def clip_edges(rect: Rect, complex_: VoronoiComplex):
    """Liang-Barsky clip of every Voronoi edge against the closed rectangle.

    Returns (meets, a, b) with a, b the clipped endpoints in rectangle-local
    coordinates (x along the width, y along the height).
    """
    P, D, t0, t1 = complex_.voronoi_edges()
    if len(P) == 0:
        return np.zeros(0, dtype=bool), np.zeros((0, 2)), np.zeros((0, 2))
    p = rect.local_coords(P)
    d = np.stack([D @ rect.u, D @ rect.v], axis=-1)
    lo = t0.copy()
    hi = t1.copy()
    ok = np.ones(len(P), dtype=bool)
    for axis, size in ((0, rect.width), (1, rect.height)):
        px, dx = p[:, axis], d[:, axis]
        flat = dx == 0
        ok &= ~(flat & ((px < 0) | (px > size)))
        with np.errstate(divide="ignore", invalid="ignore"):
            ta = -px / dx
            tb = (size - px) / dx
        enter = np.where(dx > 0, ta, tb)
        leave = np.where(dx > 0, tb, ta)
        lo = np.where(flat, lo, np.maximum(lo, enter))
        hi = np.where(flat, hi, np.minimum(hi, leave))
    meets = ok & (lo <= hi)
    lo_f = np.where(meets, lo, 0.0)
    hi_f = np.where(meets, hi, 0.0)
    a = p + lo_f[:, None] * d
    b = p + hi_f[:, None] * d
    return meets, a, b


def _side_touch(a, b, meets, rect: Rect, which: int) -> np.ndarray:
    """Clipped edges with an endpoint on side ``which`` (0: x=0, 1: x=W, 2: y=0, 3: y=H)."""
    tol = 1e-12 * max(rect.width, rect.height)
    axis = 0 if which < 2 else 1
    target = 0.0 if which % 2 == 0 else (rect.width if axis == 0 else rect.height)
    near = (np.abs(a[:, axis] - target) <= tol) | (np.abs(b[:, axis] - target) <= tol)
    return meets & near


def _nearest(sites, u) -> int:
    d = sites - np.asarray(u)
    return int(np.argmin(np.einsum("ij,ij->i", d, d)))


def cells_meeting_side(rect: Rect, complex_: VoronoiComplex, which: int, clipped=None) -> np.ndarray:
    """Sites whose closed cells meet one side of the rectangle.

    Walking along the side, the cell changes only where a Voronoi edge crosses
    it, so the cells met are the one at the starting corner plus both cells
    of every Voronoi edge reaching that side.
    """
    meets, a, b = clipped if clipped is not None else clip_edges(rect, complex_)
    c = rect.corners()
    start = {0: c[0], 1: c[1], 2: c[0], 3: c[3]}[which]
    hit = _side_touch(a, b, meets, rect, which)
    ids = np.concatenate([[_nearest(complex_.sites, start)], complex_.edges[hit].ravel()])
    return np.unique(ids)


def _side_ids(rect: Rect):
    return (0, 1) if rect.crossing_direction() == "x" else (2, 3)


def _check_margin(rect: Rect, window, margin: float):
    if window is None:
        return
    corners = rect.corners()
    if isinstance(window, Rect):
        inside = window.contains(corners, tol=-margin * (1 - 1e-12)) if margin > 0 else window.contains(corners)
        if not np.all(inside):
            raise MarginError("window does not contain the rectangle with the requested margin")
        return
    circ = window.euclid() if isinstance(window, HypDisk) else window
    if np.max(np.hypot(*(corners - np.asarray(circ.center)).T)) + margin > circ.radius:
        raise MarginError("window does not contain the rectangle with the requested margin")


def cross(rect: Rect, config: MarkedConfiguration, color="black", complex_: Optional[VoronoiComplex] = None,
          witness: bool = False, margin: float = 0.0) -> Union[bool, CrossingResult]:
    """Does the closed union of cells of ``color`` cross ``rect`` between its designated sides?

    Returns a bool, or a :class:`CrossingResult` carrying a witness chain of
    site indices when ``witness`` is set.
    """
    color = _normalize_color(color)
    if len(config) == 0:
        raise ValueError("empty configuration: the coloring is undefined")
    _check_margin(rect, config.window, margin)
    if complex_ is None:
        complex_ = voronoi_complex(config.points)
    mask = config.color_mask(color)
    n = len(config)
    if mask.all() or not mask.any():
        decision = bool(mask.all())
        if not witness:
            return decision
        w = None
        if decision:
            c = rect.corners()
            first, last = rect.crossing_sides()
            i0 = _nearest(complex_.sites, first[0])
            w = CrossingWitness([i0], color)
        return CrossingResult(decision, w if decision else None, rect, color)

    clipped = clip_edges(rect, complex_)
    meets = clipped[0]
    e = complex_.edges[meets]
    same = mask[e[:, 0]] & mask[e[:, 1]]
    e = e[same]
    g = coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()
    ncomp, label = connected_components(g, directed=False)
    s0, s1 = _side_ids(rect)
    side_a = cells_meeting_side(rect, complex_, s0, clipped)
    side_b = cells_meeting_side(rect, complex_, s1, clipped)
    side_a = side_a[mask[side_a]]
    side_b = side_b[mask[side_b]]
    common = np.intersect1d(label[side_a], label[side_b])
    decision = len(common) > 0
    if not witness:
        return decision
    if not decision:
        return CrossingResult(False, None, rect, color)
    return CrossingResult(True, CrossingWitness(_witness_path(g, side_a, side_b, n), color), rect, color)


def _witness_path(g, side_a, side_b, n) -> List[int]:
    """Shortest chain of adjacent cells from side_a to side_b (BFS from a super source)."""
    src = n
    rows = np.concatenate([g.tocoo().row, g.tocoo().col, np.full(len(side_a), src)])
    cols = np.concatenate([g.tocoo().col, g.tocoo().row, side_a])
    h = coo_matrix((np.ones(len(rows)), (rows, cols)), shape=(n + 1, n + 1)).tocsr()
    order, pred = breadth_first_order(h, src, directed=True, return_predecessors=True)
    reached = [s for s in order if s in set(side_b.tolist())]
    node = int(reached[0])
    path = [node]
    while pred[node] != src:
        node = int(pred[node])
        path.append(node)
    return path[::-1]


def crossing_duality(square: Rect, config: MarkedConfiguration, complex_: Optional[VoronoiComplex] = None):
    """(black crossing in the square's axis, white crossing in the other axis)."""
    other = "y" if square.crossing_direction() == "x" else "x"
    perp = Rect(square.corner, square.width, square.height, square.angle, other)
    if complex_ is None:
        complex_ = voronoi_complex(config.points)
    return cross(square, config, "black", complex_), cross(perp, config, "white", complex_)


# --------------------------------------------------------------------------
# clusters


def color_graph(config: MarkedConfiguration, complex_: VoronoiComplex, color):
    mask = config.color_mask(_normalize_color(color))
    e = complex_.edges
    e = e[mask[e[:, 0]] & mask[e[:, 1]]]
    n = len(config)
    return coo_matrix((np.ones(len(e)), (e[:, 0], e[:, 1])), shape=(n, n)).tocsr()


def cluster_labels(config: MarkedConfiguration, complex_: VoronoiComplex, color) -> np.ndarray:
    """Component label per site (-1 for sites of the other color)."""
    mask = config.color_mask(_normalize_color(color))
    _, label = connected_components(color_graph(config, complex_, color), directed=False)
    label = label.astype(np.int64)
    label[~mask] = -1
    return label


def cluster(config: MarkedConfiguration, complex_: VoronoiComplex, color, start: int) -> np.ndarray:
    """Sorted site indices of the same-color component containing ``start``."""
    color = _normalize_color(color)
    if not config.color_mask(color)[start]:
        raise ValueError(f"site {start} is not {color}")
    order = breadth_first_order(color_graph(config, complex_, color), start, directed=False,
                                return_predecessors=False)
    return np.sort(order)


# --------------------------------------------------------------------------
# the dilated region and the local-control event


@dataclass
class DilatedRegion:
    """A convex base region A (Rect, Circle, HypDisk or convex polygon) and its delta-dilation."""

    base: object
    delta: float
    _poly: Optional[np.ndarray] = field(default=None, repr=False)

    def __post_init__(self):
        if not self.delta > 0:
            raise ValueError("delta must be positive")
        b = self.base
        if isinstance(b, HypDisk):
            self.base = b.euclid()
        elif isinstance(b, Rect):
            self._poly = b.corners()
        elif not isinstance(b, Circle):
            poly = np.asarray(b, dtype=float).reshape(-1, 2)
            if len(poly) < 3:
                raise ValueError("polygon needs at least 3 vertices")
            self._poly = poly

    def base_distance(self, pts) -> np.ndarray:
        """Euclidean distance from each point to the base region (0 inside)."""
        pts = np.asarray(pts, dtype=float)
        if self._poly is None:
            c = self.base
            return np.maximum(np.hypot(*(pts - np.asarray(c.center)).T) - c.radius, 0.0)
        poly = self._poly
        q = np.roll(poly, -1, axis=0)
        e = q - poly
        rel = pts[..., None, :] - poly
        t = np.clip(np.einsum("...ki,ki->...k", rel, e) / np.einsum("ki,ki->k", e, e), 0.0, 1.0)
        near = rel - t[..., None] * e
        dist = np.min(np.hypot(near[..., 0], near[..., 1]), axis=-1)
        cr = e[:, 0] * rel[..., 1] - e[:, 1] * rel[..., 0]
        area = np.sum(poly[:, 0] * q[:, 1] - poly[:, 1] * q[:, 0])
        inside = np.all(cr * np.sign(area) >= 0, axis=-1)
        return np.where(inside, 0.0, dist)

    def contains(self, pts) -> np.ndarray:
        pts = np.asarray(pts, dtype=float)
        x0, y0, x1, y1 = self.bounds()
        box = (pts[..., 0] >= x0) & (pts[..., 0] <= x1) & (pts[..., 1] >= y0) & (pts[..., 1] <= y1)
        out = np.zeros(box.shape, dtype=bool)
        out[box] = self.base_distance(pts[box]) <= self.delta
        return out

    def max_norm(self) -> float:
        if self._poly is None:
            return math.hypot(*self.base.center) + self.base.radius + self.delta
        return float(np.max(np.hypot(*self._poly.T))) + self.delta

    def bounds(self):
        if self._poly is None:
            (cx, cy), r = self.base.center, self.base.radius + self.delta
            return cx - r, cy - r, cx + r, cy + r
        lo = self._poly.min(axis=0) - self.delta
        hi = self._poly.max(axis=0) + self.delta
        return lo[0], lo[1], hi[0], hi[1]

    def chords(self, y: np.ndarray):
        """x-interval [l, r] of the dilated region on each horizontal line (nan if empty)."""
        y = np.asarray(y, dtype=float)
        if self._poly is None:
            (cx, cy), r = self.base.center, self.base.radius + self.delta
            h = r * r - (y - cy) ** 2
            w = np.sqrt(np.where(h >= 0, h, np.nan))
            return cx - w, cx + w
        x0 = self._base_chord_mid(y)
        lo = np.full(len(y), np.nan)
        hi = np.full(len(y), np.nan)
        pts = np.stack([x0, y], axis=-1)
        ok = self.base_distance(pts) <= self.delta
        span = self.bounds()
        width = span[2] - span[0] + 1.0
        for sign, out in ((-1.0, lo), (1.0, hi)):
            a = np.zeros(len(y))
            b = np.full(len(y), width)
            for _ in range(80):
                m = 0.5 * (a + b)
                inside = self.base_distance(np.stack([x0 + sign * m, y], axis=-1)) <= self.delta
                a = np.where(inside, m, a)
                b = np.where(inside, b, m)
            out[:] = np.where(ok, x0 + sign * a, np.nan)
        return lo, hi

    def _base_chord_mid(self, y):
        """A point of each line y = const nearest the base polygon."""
        poly = self._poly
        yc = np.clip(y, poly[:, 1].min(), poly[:, 1].max())
        q = np.roll(poly, -1, axis=0)
        xs = []
        for (ax, ay), (bx, by) in zip(poly, q):
            with np.errstate(divide="ignore", invalid="ignore"):
                t = (yc - ay) / (by - ay)
            hit = (t >= 0) & (t <= 1) & (by != ay)
            x = np.where(hit, ax + t * (bx - ax), np.nan)
            flat = (by == ay) & (yc == ay)
            x = np.where(flat, 0.5 * (ax + bx), x)
            xs.append(x)
        xs = np.array(xs)
        return 0.5 * (np.nanmin(xs, axis=0) + np.nanmax(xs, axis=0))


def grid_squares(region: DilatedRegion, divisor: int = DEFAULT_DIVISOR):
    """Grid squares (pitch delta/divisor, anchored at the origin) inside the dilated region.

    Returns (pitch, rows, first, last): for row index ``rows[k]`` the squares
    with column indices first[k]..last[k] are fully inside. A convex region
    contains a square iff it contains its four corners, so each row reduces
    to intersecting the chords at the row's two edges.
    """
    s = region.delta / divisor
    x0, y0, x1, y1 = region.bounds()
    j = np.arange(math.floor(y0 / s), math.ceil(y1 / s) + 1)
    l0, r0 = region.chords(j * s)
    lo = np.fmax(l0[:-1], l0[1:])
    hi = np.fmin(r0[:-1], r0[1:])
    valid = ~(np.isnan(l0[:-1]) | np.isnan(l0[1:]))
    first = np.ceil(np.where(valid, lo, 0.0) / s).astype(np.int64)
    last = np.floor(np.where(valid, hi, 0.0) / s).astype(np.int64) - 1
    keep = valid & (last >= first)
    return s, j[:-1][keep], first[keep], last[keep]


def count_squares(region: DilatedRegion, divisor: int = DEFAULT_DIVISOR) -> int:
    _, _, first, last = grid_squares(region, divisor)
    return int(np.sum(last - first + 1))


def _as_region(A, delta) -> DilatedRegion:
    return A if isinstance(A, DilatedRegion) else DilatedRegion(A, delta)


def local_event(A, delta: float, points, divisor: int = DEFAULT_DIVISOR, hyperbolic: bool = True) -> bool:
    """Every grid square of pitch delta/divisor inside A_delta holds at least one point."""
    region = _as_region(A, delta)
    if hyperbolic and region.max_norm() >= 1.0:
        raise DomainError("the dilated region leaves the disk")
    s, rows, first, last = grid_squares(region, divisor)
    total = int(np.sum(last - first + 1))
    if total == 0:
        raise ValueError("no grid square fits inside the dilated region")
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) < total:
        return False
    ix = np.floor(pts[:, 0] / s).astype(np.int64)
    iy = np.floor(pts[:, 1] / s).astype(np.int64)
    k = np.searchsorted(rows, iy)
    k = np.clip(k, 0, len(rows) - 1)
    inside = (rows[k] == iy) & (ix >= first[k]) & (ix <= last[k])
    offsets = np.concatenate([[0], np.cumsum(last - first + 1)])
    flat = offsets[k[inside]] + ix[inside] - first[k[inside]]
    return len(np.unique(flat)) == total


def probe_grid(A, pitch: float) -> np.ndarray:
    """Grid points of the given pitch (anchored at the origin) inside the base region."""
    region = _as_region(A, 1.0)
    x0, y0, x1, y1 = region.bounds()
    d = region.delta
    xs = np.arange(math.ceil((x0 + d) / pitch), math.floor((x1 - d) / pitch) + 1) * pitch
    ys = np.arange(math.ceil((y0 + d) / pitch), math.floor((y1 - d) / pitch) + 1) * pitch
    g = np.stack(np.meshgrid(xs, ys), axis=-1).reshape(-1, 2)
    return g[region.base_distance(g) <= 0.0]


def coverage_check(A, delta: float, points, pitch: Optional[float] = None) -> bool:
    """Every probe of A has a point within Euclidean distance delta."""
    pitch = delta / 100 if pitch is None else pitch
    probes = probe_grid(A, pitch)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(pts) == 0:
        return len(probes) == 0
    d, _ = SiteIndex(pts).tree.query(probes)
    return bool(np.all(d < delta))


def locality_radius_check(A, delta: float, points, pitch: Optional[float] = None) -> bool:
    """Every probe of A has its hyperbolic nearest point within Euclidean distance delta."""
    pitch = delta / 100 if pitch is None else pitch
    probes = probe_grid(A, pitch)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    if len(probes) == 0:
        return True
    if len(pts) == 0:
        return False
    idx = SiteIndex(pts).query(probes, "hyp")
    return bool(np.all(np.hypot(*(probes - pts[idx]).T) < delta))


# --------------------------------------------------------------------------
# is the coloring of a rectangle decided by the sampled window?


def _gap_to_outside(window, pts) -> np.ndarray:
    if isinstance(window, Rect):
        q = window.local_coords(pts)
        return np.min(np.stack([q[:, 0], window.width - q[:, 0], q[:, 1], window.height - q[:, 1]]), axis=0)
    circ = window.euclid() if isinstance(window, HypDisk) else window
    return circ.radius - np.hypot(*(pts - np.asarray(circ.center)).T)


def coloring_determined(rect: Rect, complex_: VoronoiComplex, window) -> bool:
    """Certificate that no point outside ``window`` could change the cells inside ``rect``.

    A point outside the window can only claim u from site z if |u - z| exceeds
    the distance from u to the window's complement. That excess is convex over
    each clipped cell, so it suffices to check the cell polygons' vertices.
    """
    from .voronoi import cell_clip

    meets, _, _ = clip_edges(rect, complex_)
    c = rect.corners()
    ids = np.unique(np.concatenate([complex_.edges[meets].ravel(), [_nearest(complex_.sites, c[0])]]))
    for z in ids:
        poly = cell_clip(int(z), rect, complex_)
        if len(poly) == 0:
            continue
        if np.any(np.hypot(*(poly - complex_.sites[z]).T) > _gap_to_outside(window, poly)):
            return False
    return True


# --------------------------------------------------------------------------
# subdivision of a long rectangle into overlapping 2:1 pieces


def subdivide_rectangle(rect: Rect, s: float) -> List[Rect]:
    """Chain of 2s x s and s x 2s rectangles whose long crossings imply a crossing of ``rect``.

    Requires an axis-parallel rectangle whose crossing length is a multiple of
    s and whose other side is at least 2s. Horizontal pieces alternate between
    the rows [0, s] and [s, 2s] of the strip; consecutive horizontal pieces
    are linked by s x 2s vertical pieces spanning both rows.
    """
    if not rect.is_axis_parallel:
        raise ValueError("subdivision needs an axis-parallel rectangle")
    along_x = rect.crossing_direction() == "x"
    L = rect.width if along_x else rect.height
    H = rect.height if along_x else rect.width
    k = L / s
    if abs(k - round(k)) > 1e-9 or round(k) < 2 or H < 2 * s - 1e-12:
        raise ValueError("crossing length must be an integer multiple (>= 2) of s and the width >= 2s")
    k = int(round(k))
    x0, y0 = rect.corner
    pieces: List[Rect] = []

    def make(a, b, w, h, axis):
        if along_x:
            return Rect((x0 + a, y0 + b), w, h, 0.0, axis)
        return Rect((x0 + b, y0 + a), h, w, 0.0, axis)

    for i in range(k - 1):
        row = (i % 2) * s
        pieces.append(make(i * s, row, 2 * s, s, "long"))
        if i < k - 2:
            pieces.append(make((i + 1) * s, 0.0, s, 2 * s, "long"))
    return pieces
