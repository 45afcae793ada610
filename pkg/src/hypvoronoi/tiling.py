"""The (7,7,7) triangle tessellation and the six-rectangle event closed(T).

Tiles are generated from the canonical triangle T_o by reflecting in sides,
deduplicating by center. Two tiles are adjacent when they share a vertex, so
every interior tile has 15 neighbors.

closed(T_o) asks for long black crossings of six thin rectangles around T_o,
plus local control on B(o, r) with margin delta; closed(T) is closed(T_o)
seen through the isometry taking T to T_o.
"""
from __future__ import annotations

import json
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import breadth_first_order, connected_components
from scipy.spatial import cKDTree

from .geometry import (
    Circle,
    DiskIsometry,
    HypDisk,
    Rect,
    geodesic_through,
    hyp_distance,
    triangle_777,
    triangle_circumradius,
    triangle_inradius,
)
from .percolation import DEFAULT_DIVISOR, DilatedRegion, MarginError, cross, local_event
from .pointprocess import MarkedConfiguration
from .rng import make_rng
from .voronoi import voronoi_complex

CENTER_TOL = 1e-6  # hyperbolic; distinct tile centers are >= 2 * inradius apart
T_O = triangle_777()
T_O_EUCLID_RADIUS = float(np.hypot(*T_O[0]))


class GeometryError(ValueError):
    """A six-rectangle geometry violates one of its constraints."""


# --------------------------------------------------------------------------
# tiles


@dataclass
class TriangleTile:
    id: int
    vertices: np.ndarray
    center: np.ndarray
    iso: DiskIsometry
    address: str = ""

    @property
    def depth(self) -> int:
        return len(self.address)


def centering_isometry(center, v0) -> DiskIsometry:
    """Direct isometry sending ``center`` to o and ``v0`` onto T_o's vertex on the +x axis."""
    m = DiskIsometry.to_origin(center)
    w = m(np.asarray(v0, dtype=float))
    return DiskIsometry.to_origin(center, theta=-math.atan2(w[1], w[0]))


def _make_tile(i, verts, center, address) -> TriangleTile:
    return TriangleTile(i, np.asarray(verts, dtype=float), np.asarray(center, dtype=float),
                        centering_isometry(center, verts[0]), address)


@dataclass
class Tiling:
    tiles: List[TriangleTile]
    vertex_ids: np.ndarray
    vertices: np.ndarray
    adjacency: np.ndarray
    complete_depth: Optional[int] = None
    _nbrs: list = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.tiles)
        nb = [[] for _ in range(n)]
        for a, b in self.adjacency:
            nb[a].append(b)
            nb[b].append(a)
        self._nbrs = [np.array(sorted(x), dtype=np.int64) for x in nb]

    def __len__(self):
        return len(self.tiles)

    @property
    def centers(self) -> np.ndarray:
        return np.array([t.center for t in self.tiles]).reshape(-1, 2)

    def neighbors(self, i: int) -> np.ndarray:
        return self._nbrs[i]

    def degree(self, i: int) -> int:
        return len(self._nbrs[i])

    def vertex_tile_counts(self) -> np.ndarray:
        return np.bincount(self.vertex_ids.ravel(), minlength=len(self.vertices))

    def interior_vertices(self) -> np.ndarray:
        """Vertices with their full turn of tiles generated (seven triangles)."""
        return np.flatnonzero(self.vertex_tile_counts() == 7)

    def interior_tiles(self) -> np.ndarray:
        full = self.vertex_tile_counts() == 7
        return np.flatnonzero(np.all(full[self.vertex_ids], axis=1))

    def graph(self):
        n = len(self)
        a = self.adjacency
        return coo_matrix((np.ones(len(a)), (a[:, 0], a[:, 1])), shape=(n, n)).tocsr()

    def locate(self, pts) -> np.ndarray:
        """Tile containing each point (-1 if none generated); boundary points go to one tile."""
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        out = np.full(len(pts), -1, dtype=np.int64)
        tree = cKDTree(self.centers)
        k = min(8, len(self))
        _, cand = tree.query(pts, k=k)
        cand = np.asarray(cand).reshape(len(pts), k)
        sides = [geodesic_through(T_O[(j + 1) % 3], T_O[(j + 2) % 3]) for j in range(3)]
        ref = [s.side(T_O[j]) for j, s in enumerate(sides)]
        for col in range(k):
            todo = out < 0
            if not np.any(todo):
                break
            for t in np.unique(cand[todo, col]):
                if t >= len(self):
                    continue
                sel = np.flatnonzero(todo & (cand[:, col] == t))
                q = self.tiles[t].iso(pts[sel])
                ok = np.ones(len(sel), dtype=bool)
                for s, r in zip(sides, ref):
                    ok &= s.side(q) * r >= 0
                out[sel[ok]] = t
        return out

    def to_record(self) -> dict:
        return {
            "tiles": [
                {
                    "id": t.id,
                    "address": t.address,
                    "vertices": t.vertices.tolist(),
                    "center": t.center.tolist(),
                    "isometry": {"theta": t.iso.theta, "anchor": list(t.iso.anchor),
                                 "reflective": t.iso.reflective},
                }
                for t in self.tiles
            ],
            "adjacency": self.adjacency.tolist(),
        }

    def to_json(self, fh=None) -> str:
        text = json.dumps(self.to_record())
        if fh is not None:
            if isinstance(fh, str) or hasattr(fh, "__fspath__"):
                with open(fh, "w") as f:
                    f.write(text)
            else:
                fh.write(text)
        return text


def _merge_ids(pts: np.ndarray, tol: float) -> tuple:
    """Cluster points closer than ``tol`` hyperbolically; returns (ids per point, representatives)."""
    n = len(pts)
    # a hyperbolic ball of small radius tol has Euclidean radius below tol
    reach = tol * (1.0 + tol)
    pairs = cKDTree(pts).query_pairs(reach, output_type="ndarray")
    if len(pairs):
        d = hyp_distance(pts[pairs[:, 0]], pts[pairs[:, 1]])
        pairs = pairs[d < tol]
    g = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(n, n)) if len(pairs) else \
        coo_matrix((n, n))
    _, lab = connected_components(g, directed=False)
    first = np.full(lab.max() + 1, -1)
    for i in range(n - 1, -1, -1):
        first[lab[i]] = i
    return lab, pts[first]


def _side_reflection(k: int) -> tuple:
    """SU(1,1) form (a, b) of the reflection of T_o in its side opposite vertex k.

    Inversion in the orthogonal circle |z - c| = R reads z -> (c zbar - 1) / (zbar - cbar),
    i.e. w -> (a w + b) / (conj(b) w + conj(a)) on w = zbar with a = i c / R, b = -i / R.
    """
    geo = geodesic_through(T_O[(k + 1) % 3], T_O[(k + 2) % 3])
    c = complex(*geo.center)
    return np.array([[1j * c / geo.radius, -1j / geo.radius],
                     [np.conj(-1j / geo.radius), np.conj(1j * c / geo.radius)]])


_REFLECTIONS = [_side_reflection(k) for k in range(3)]


def _apply(mat: np.ndarray, refl: bool, pts) -> np.ndarray:
    z = np.asarray(pts, dtype=float)
    w = z[..., 0] + 1j * z[..., 1]
    if refl:
        w = np.conj(w)
    out = (mat[0, 0] * w + mat[0, 1]) / (mat[1, 0] * w + mat[1, 1])
    return np.stack([out.real, out.imag], axis=-1)


def _compose(g: np.ndarray, g_refl: bool, h: np.ndarray, h_refl: bool):
    """Matrix of g o h; an anti-holomorphic g conjugates h's coefficients."""
    m = g @ (np.conj(h) if g_refl else h)
    m /= np.sqrt(abs(m[0, 0]) ** 2 - abs(m[0, 1]) ** 2)
    return m, g_refl != h_refl


def generate_tiling(depth: int, max_radius: Optional[float] = None) -> Tiling:
    """Tiles reachable from T_o by at most ``depth`` side reflections.

    Each tile is g(T_o) for a word g in the three side reflections of T_o;
    the child across side k is g s_k (T_o). Words are carried as SU(1,1)
    matrices, which keeps deep tiles accurate. With ``max_radius`` set, tiles
    whose center is farther than that (hyperbolically) from o are neither
    kept nor expanded; ``depth`` may then be None to run until no new tile
    appears.
    """
    if depth is not None and depth < 0:
        raise ValueError("depth must be nonnegative")
    origin = np.zeros(2)
    tiles = [_make_tile(0, T_O.copy(), origin, "")]
    words = [(np.eye(2, dtype=complex), False)]
    centers = [origin]
    frontier = [0]
    level = 0
    while frontier and (depth is None or level < depth):
        level += 1
        cand = []
        for ti in frontier:
            g, refl = words[ti]
            for k in range(3):
                m, r = _compose(g, refl, _REFLECTIONS[k], True)
                c = _apply(m, r, origin)
                if max_radius is not None and hyp_distance(origin, c) > max_radius:
                    continue
                cand.append((c, m, r, tiles[ti].address + str(k)))
        if not cand:
            break
        C = np.array([x[0] for x in cand])
        lab, _ = _merge_ids(C, CENTER_TOL)
        first = {}
        for j, l in enumerate(lab):
            first.setdefault(l, j)
        old_c = np.array(centers)
        _, near = cKDTree(old_c).query(C)
        known = hyp_distance(C, old_c[near]) < CENTER_TOL
        frontier = []
        for j in sorted(first.values()):
            if known[j]:
                continue
            c, m, r, addr = cand[j]
            tiles.append(_make_tile(len(tiles), _apply(m, r, T_O), c, addr))
            words.append((m, r))
            centers.append(c)
            frontier.append(len(tiles) - 1)
    allv = np.concatenate([t.vertices for t in tiles])
    ids, verts = _merge_ids(allv, CENTER_TOL)
    vid = ids.reshape(-1, 3)
    pairs = set()
    by_vertex: Dict[int, list] = {}
    for ti, row in enumerate(vid):
        for v in row:
            by_vertex.setdefault(int(v), []).append(ti)
    for ts in by_vertex.values():
        for i in range(len(ts)):
            for j in range(i + 1, len(ts)):
                a, b = sorted((ts[i], ts[j]))
                pairs.add((a, b))
    adj = np.array(sorted(pairs), dtype=np.int64).reshape(-1, 2)
    return Tiling(tiles, vid, verts, adj, depth)


# --------------------------------------------------------------------------
# six rectangles around T_o


@dataclass
class ClosedEventGeometry:
    r: float
    delta: float
    rects: List[Rect]

    @property
    def rho(self) -> float:
        """Hyperbolic radius of B(o, r + delta)."""
        return 2.0 * math.atanh(self.r + self.delta)

    def rotated(self, theta: float) -> "ClosedEventGeometry":
        return ClosedEventGeometry(self.r, self.delta, [R.rotated(theta) for R in self.rects])


def six_rectangles(apothem: float = 0.5, width: float = 0.1, length: float = 0.8,
                   r: float = 0.75, delta: float = 0.05, rotation: float = 0.0,
                   validate: bool = True) -> ClosedEventGeometry:
    """Six congruent rectangles on the sides of a hexagon around T_o.

    Rectangle i is centered on the ray at angle rotation + i * 60 degrees,
    spans the radial band [apothem - width/2, apothem + width/2] and has
    length ``length`` along the hexagon side.
    """
    rects = []
    for i in range(6):
        th = rotation + i * math.pi / 3.0
        n = np.array([math.cos(th), math.sin(th)])
        t = np.array([-math.sin(th), math.cos(th)])
        corner = (apothem + width / 2.0) * n - (length / 2.0) * t
        rects.append(Rect((float(corner[0]), float(corner[1])), length, width, th + math.pi / 2.0, "x"))
    geom = ClosedEventGeometry(r, delta, rects)
    if validate:
        ok, why = validate_separation(geom, explain=True)
        if not ok:
            raise GeometryError(why)
    return geom


def _strip_overlap(Ra: Rect, Rb: Rect) -> Optional[np.ndarray]:
    """Parallelogram where the long strips of two rectangles cross, or None if parallel."""
    M = np.array([Ra.v, Rb.v])
    if abs(np.linalg.det(M)) < 1e-12:
        return None
    ca, cb = np.asarray(Ra.corner), np.asarray(Rb.corner)
    out = []
    for sa in (0.0, Ra.height):
        for sb in (0.0, Rb.height):
            rhs = np.array([ca @ Ra.v + sa, cb @ Rb.v + sb])
            out.append(np.linalg.solve(M, rhs))
    return np.array(out)[[0, 1, 3, 2]]


def _spans_between_long_sides(R: Rect, poly: np.ndarray) -> bool:
    q = R.local_coords(poly)
    tol = 1e-12
    return bool(np.all((q[:, 0] > tol) & (q[:, 0] < R.width - tol)))


def validate_separation(geom: ClosedEventGeometry, explain: bool = False):
    """Do long crossings of the six rectangles always chain into a loop around T_o?

    Checks, for each consecutive pair, that the parallelogram where their long
    strips cross lies inside both rectangles away from their short sides (so
    each crossing must traverse it), that the six overlaps wind once around
    the origin, and the margin constraints r + delta < 1, R_i inside B(o, r)
    and dist(R_i, T_o) > delta.
    """
    def fail(msg):
        return (False, msg) if explain else False

    rects = geom.rects
    if len(rects) != 6:
        return fail("need exactly six rectangles")
    if not (geom.delta > 0 and geom.r > 0 and geom.r + geom.delta < 1.0):
        return fail("need r, delta > 0 and r + delta < 1")
    for i, R in enumerate(rects):
        if R.width <= R.height:
            return fail(f"rectangle {i} must be longer along its crossing axis")
        if R.max_norm() > geom.r:
            return fail(f"rectangle {i} leaves B(o, r)")
        if R.min_norm() - T_O_EUCLID_RADIUS <= geom.delta:
            return fail(f"rectangle {i} is within delta of T_o")
    angles = []
    for i in range(6):
        Ra, Rb = rects[i], rects[(i + 1) % 6]
        P = _strip_overlap(Ra, Rb)
        if P is None or not (_spans_between_long_sides(Ra, P) and _spans_between_long_sides(Rb, P)):
            return fail(f"no separating annulus: rectangles {i} and {(i + 1) % 6} do not overlap across")
        angles.append(np.arctan2(P[:, 1], P[:, 0]))
    total = 0.0
    for i in range(6):
        a, b = angles[i], angles[(i + 1) % 6]
        d = np.mod(b[:, None] - a[None, :], 2 * math.pi)
        if not (np.all(d > 0) and np.all(d < 2 * math.pi / 3)):
            return fail("no separating annulus: overlaps are not in cyclic order around T_o")
        total += float(np.mod(np.angle(np.exp(1j * b.mean())) - np.angle(np.exp(1j * a.mean())), 2 * math.pi))
    if abs(total - 2 * math.pi) > 1e-9:
        return fail("no separating annulus: overlaps do not wind once around T_o")
    return (True, "ok") if explain else True


# --------------------------------------------------------------------------
# the event closed(T)


@dataclass
class ClosedEventResult:
    decision: bool
    local: bool
    crossings: List[Optional[bool]]
    points: np.ndarray
    black: np.ndarray

    def __bool__(self):
        return self.decision


def _covers(window, center, rho) -> bool:
    if window is None:
        return True
    if isinstance(window, HypDisk):
        return hyp_distance(window.center, center) + rho <= window.radius * (1 + 1e-12)
    circ = HypDisk(tuple(center), rho).euclid()
    t = np.linspace(0, 2 * math.pi, 256, endpoint=False)
    ring = np.asarray(circ.center) + circ.radius * np.stack([np.cos(t), np.sin(t)], axis=-1)
    if isinstance(window, Rect):
        return bool(np.all(window.contains(ring)))
    w = window
    return math.hypot(*(np.asarray(circ.center) - np.asarray(w.center))) + circ.radius <= w.radius


def closed_event(tile: TriangleTile, config: MarkedConfiguration, geom: ClosedEventGeometry,
                 divisor: int = DEFAULT_DIVISOR, detail: bool = False):
    """closed(T) for the tile, evaluated on the image of the configuration under phi_T.

    Only points landing in the closed disk B(o, r + delta) are used. When the
    local event holds every u in B(o, r) has a point in its own grid square,
    hence within the square's diagonal, so the coloring of R_i is decided by
    the points that close to R_i and each crossing is computed on that subset.
    """
    if not _covers(config.window, tile.center, geom.rho):
        raise MarginError("configuration window does not cover the dependency disk of the tile")
    if len(config):
        pts = tile.iso(config.points)
    else:
        pts = np.zeros((0, 2))
    keep = np.hypot(*pts.T) <= geom.r + geom.delta if len(pts) else np.zeros(0, dtype=bool)
    pts, black = pts[keep], config.black[keep]
    loc = local_event(Circle((0.0, 0.0), geom.r), geom.delta, pts, divisor)
    crossings: List[Optional[bool]] = [None] * 6
    decision = loc
    reach = coverage_radius(geom.delta, divisor)
    if loc:
        for i, R in enumerate(geom.rects):
            near = DilatedRegion(R, reach).contains(pts)
            sub = MarkedConfiguration(pts[near], black[near])
            crossings[i] = bool(cross(R, sub, "black"))
            if not crossings[i]:
                decision = False
                break
    if detail:
        return ClosedEventResult(bool(decision), bool(loc), crossings, pts, black)
    return bool(decision)


def coverage_radius(delta: float, divisor: int) -> float:
    """Distance within which the local event guarantees a point: one grid-square diagonal."""
    return min(delta, math.sqrt(2.0) * delta / divisor) * (1.0 + 1e-9)


@dataclass
class BlockingResult:
    escaped: bool
    cluster_size: int
    radius_checked: float
    start_sites: int


def white_blocking_check(points, black, geom: ClosedEventGeometry, inner: float = 0.5,
                         divisor: int = DEFAULT_DIVISOR) -> BlockingResult:
    """Look for a white path of cells from T_o leaving the disk, given closed(T_o) holds.

    Under the local event every cell point lies within ``eta`` (one grid
    diagonal) of its site. The white cluster is grown from white sites
    within T_o's circumradius + eta of o (a superset of the cells meeting
    T_o), expanding only through sites closer than ``inner`` - eta; those
    cells lie inside B(o, inner) and are decided by the points of
    B(o, inner + eta), so the search runs on that subset. Reaching a site at
    distance >= inner - eta counts as an escape candidate and triggers a
    rerun with inner = r; a candidate that survives the rerun is reported.
    """
    eta = coverage_radius(geom.delta, divisor)
    pts = np.asarray(points, dtype=float).reshape(-1, 2)
    black = np.asarray(black, dtype=bool)
    radii = [inner, geom.r] if inner < geom.r else [geom.r]
    norms = np.hypot(*pts.T)
    for s in radii:
        sel = np.flatnonzero(norms <= s + eta)
        sub = pts[sel]
        white = ~black[sel]
        nrm = norms[sel]
        start = np.flatnonzero(white & (nrm < T_O_EUCLID_RADIUS + eta))
        if len(start) == 0:
            return BlockingResult(False, 0, s, 0)
        vc = voronoi_complex(sub)
        e = vc.edges
        inner_site = nrm < s - eta
        use = white[e[:, 0]] & white[e[:, 1]] & (inner_site[e[:, 0]] | inner_site[e[:, 1]])
        e = e[use]
        n = len(sub)
        src = n
        rows = np.concatenate([e[:, 0], e[:, 1], np.full(len(start), src)])
        cols = np.concatenate([e[:, 1], e[:, 0], start])
        # edges leave only from sites whose cells are certified
        ok = (rows == src) | inner_site[np.minimum(rows, n - 1)]
        g = coo_matrix((np.ones(ok.sum()), (rows[ok], cols[ok])), shape=(n + 1, n + 1)).tocsr()
        reached = breadth_first_order(g, src, directed=True, return_predecessors=False)
        reached = reached[reached != src]
        escaped = bool(np.any(nrm[reached] >= s - eta))
        if not escaped:
            return BlockingResult(False, len(reached), s, len(start))
    return BlockingResult(True, len(reached), radii[-1], len(start))


# --------------------------------------------------------------------------
# dependency radius and k-independent percolation


def dependency_radius(geom: ClosedEventGeometry):
    """(rho, k): B(o, r + delta) = B_H(o, rho); k tiles have centers within 2 rho of o.

    Tiles are generated out to 2 rho + 2R (R the circumradius): any tile with
    center inside 2 rho is reached through tiles whose centers stay within
    2 rho + R, since a geodesic from o passes only through tiles whose
    centers lie within R of it.
    """
    rho = geom.rho
    R = triangle_circumradius()
    tiling = generate_tiling(None, max_radius=2 * rho + 2 * R)
    d = hyp_distance(np.zeros(2), tiling.centers)
    ring = d[(d >= 2 * rho) & (d <= 2 * rho + R)]
    if len(ring) == 0:
        raise RuntimeError("tiling not deep enough to certify the count")
    return rho, int(np.sum(d < 2 * rho))


def p1_threshold(k: int, d: int) -> float:
    """d^-(1 + d^k), evaluated through logarithms."""
    return 10.0 ** log10_p1_threshold(k, d)


def _one_plus_pow(d: int, k: int) -> float:
    """1 + d^k as a float, inf when it overflows."""
    if k * math.log(d) > 700.0:
        return math.inf
    return 1.0 + float(d) ** k


def log10_p1_threshold(k: int, d: int) -> float:
    """log10 of d^-(1 + d^k); -inf once d^k overflows a double."""
    if k < 1 or d < 1:
        raise ValueError("need k >= 1 and d >= 1")
    if d == 1:
        return 0.0
    return -_one_plus_pow(d, k) * math.log10(d)


def path_bound(length: int, d: int, k: int, p1: float) -> float:
    """Union bound d^l * p1^(l / (1 + d^k)) on an open path of the given length from a tile."""
    return math.exp(length * math.log(d) + length / _one_plus_pow(d, k) * math.log(p1))


@dataclass
class OpenClusters:
    labels: np.ndarray
    sizes: np.ndarray
    largest: int
    touches_boundary: bool


def dependent_percolation_run(tiling: Tiling, states) -> OpenClusters:
    """Open clusters of tiles under tile adjacency."""
    states = np.asarray(states, dtype=bool)
    if len(states) != len(tiling):
        raise ValueError("one state per tile required")
    a = tiling.adjacency
    a = a[states[a[:, 0]] & states[a[:, 1]]]
    n = len(tiling)
    g = coo_matrix((np.ones(len(a)), (a[:, 0], a[:, 1])), shape=(n, n))
    _, lab = connected_components(g, directed=False)
    lab = np.where(states, lab, -1)
    if not np.any(states):
        return OpenClusters(lab, np.zeros(0, dtype=np.int64), 0, False)
    _, inv, sizes = np.unique(lab[states], return_inverse=True, return_counts=True)
    big = int(np.argmax(sizes))
    boundary = np.ones(n, dtype=bool)
    boundary[tiling.interior_tiles()] = False
    members = np.flatnonzero(states)[inv == big]
    return OpenClusters(lab, sizes, int(sizes[big]), bool(np.any(boundary[members])))


def tile_blocks(tiling: Tiling, m: int) -> np.ndarray:
    """Greedy partition of tiles into blocks of graph radius <= m (block id per tile)."""
    n = len(tiling)
    block = np.full(n, -1, dtype=np.int64)
    nb = [tiling.neighbors(i) for i in range(n)]
    nxt = 0
    for seed in range(n):
        if block[seed] >= 0:
            continue
        block[seed] = nxt
        layer = [seed]
        for _ in range(m):
            new = []
            for u in layer:
                for w in nb[u]:
                    if block[w] < 0:
                        block[w] = nxt
                        new.append(w)
            layer = new
        nxt += 1
    return block


def block_field(tiling: Tiling, p1: float, m: int, seed, blocks: Optional[np.ndarray] = None) -> np.ndarray:
    """k-independent open/closed states with k = 2m + 1: one Bernoulli(p1) coin per block.

    Tiles in one block are within graph distance 2m, so tiles at distance
    >= 2m + 1 read different coins.
    """
    blocks = tile_blocks(tiling, m) if blocks is None else blocks
    coins = make_rng(seed).random(blocks.max() + 1) < p1
    return coins[blocks]
