"""Delaunay/Voronoi structure of a finite site set.

The Euclidean triangulation comes from Qhull and is then certified edge by
edge with the exact in-circle predicate; any edge that fails is flipped.
Exactly cocircular quadruples keep the diagonal incident to the smallest site
index of the four (the outcome of lowering that site's paraboloid lift by an
infinitesimal amount, so flips always terminate).

Hyperbolic adjacency is decided independently of the triangulation, on the
hyperbolic bisector of the two sites.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np
from scipy.spatial import Delaunay, QhullError, cKDTree

from .geometry import (Circle, DiskIsometry, DomainError, HypDisk, Rect, as_points, hyp_circle_to_euclid,
                       repeated_rows)
from .predicates import incircle, orient2d

EUCLIDEAN = "euclidean"
HYPERBOLIC = "hyperbolic"


class DegenerateInputError(ValueError):
    """Too few sites, all sites collinear, or repeated sites."""


@dataclass
class VoronoiComplex:
    """Delaunay graph and Voronoi geometry of ``sites`` under the Euclidean metric.

    ``edge_faces[k]`` holds the (up to two) faces bordering ``edges[k]``,
    ``-1`` marking the outside of the hull. ``degenerate`` complexes (fewer
    than three sites, or all collinear) have no faces; their Voronoi edges are
    full lines.
    """

    sites: np.ndarray
    edges: np.ndarray
    faces: np.ndarray
    edge_faces: np.ndarray
    circumcenters: np.ndarray
    circumradii: np.ndarray
    degenerate: bool = False
    metric: str = EUCLIDEAN
    _indptr: np.ndarray = field(default=None, repr=False)
    _indices: np.ndarray = field(default=None, repr=False)
    _keys: np.ndarray = field(default=None, repr=False)

    def __post_init__(self):
        n = len(self.sites)
        e = self.edges
        both = np.concatenate([e, e[:, ::-1]]) if len(e) else np.zeros((0, 2), dtype=np.int64)
        both = both[np.argsort(both[:, 0].astype(np.int64) * max(n, 1) + both[:, 1], kind="stable")]
        self._indices = both[:, 1].astype(np.int64)
        self._indptr = np.searchsorted(both[:, 0], np.arange(n + 1)).astype(np.int64)
        self._keys = e[:, 0].astype(np.int64) * n + e[:, 1] if len(e) else np.zeros(0, dtype=np.int64)

    @property
    def n_sites(self) -> int:
        return len(self.sites)

    def neighbors(self, i: int) -> np.ndarray:
        return self._indices[self._indptr[i]:self._indptr[i + 1]]

    def edge_index(self, i: int, j: int) -> int:
        """Index of the Delaunay edge {i, j}, or -1."""
        a, b = (i, j) if i < j else (j, i)
        key = a * self.n_sites + b
        k = np.searchsorted(self._keys, key)
        if k < len(self._keys) and self._keys[k] == key:
            return int(k)
        return -1

    def hull_edges(self) -> np.ndarray:
        return self.edges[self.edge_faces[:, 1] < 0] if not self.degenerate else self.edges

    def voronoi_edges(self):
        """Voronoi edge dual to each Delaunay edge as origin, direction, t0, t1.

        The edge is {origin + t * direction : t0 <= t <= t1}; t bounds may be
        infinite for rays and lines.
        """
        m = len(self.edges)
        P = np.zeros((m, 2))
        D = np.zeros((m, 2))
        t0 = np.zeros(m)
        t1 = np.ones(m)
        if m == 0:
            return P, D, t0, t1
        a = self.sites[self.edges[:, 0]]
        b = self.sites[self.edges[:, 1]]
        normal = np.stack([-(b - a)[:, 1], (b - a)[:, 0]], axis=-1)
        normal /= np.hypot(normal[:, 0], normal[:, 1])[:, None]
        if self.degenerate:
            P[:] = (a + b) / 2.0
            D[:] = normal
            t0[:] = -np.inf
            t1[:] = np.inf
            return P, D, t0, t1
        f1 = self.edge_faces[:, 0]
        f2 = self.edge_faces[:, 1]
        internal = f2 >= 0
        P[:] = self.circumcenters[f1]
        D[internal] = self.circumcenters[f2[internal]] - P[internal]
        hull = ~internal
        if np.any(hull):
            # ray away from the third vertex of the single bordering face
            tri = self.faces[f1[hull]]
            ea = self.edges[hull, 0][:, None]
            eb = self.edges[hull, 1][:, None]
            third = tri[(tri != ea) & (tri != eb)]
            c = self.sites[third]
            nh = normal[hull]
            flip = np.einsum("ij,ij->i", nh, c - a[hull]) > 0
            nh[flip] *= -1
            D[hull] = nh
            t1[hull] = np.inf
        return P, D, t0, t1

    def euler_ok(self) -> bool:
        """V - E + F = 1 for a triangulated point set (outer face excluded)."""
        if self.degenerate:
            return True
        used = np.unique(self.faces)
        return len(used) - len(self.edges) + len(self.faces) == 1


def _edge_face_table(faces: np.ndarray, n: int):
    """Unique edges (i < j) of a triangulation and their bordering faces."""
    F = len(faces)
    e = np.concatenate([faces[:, [0, 1]], faces[:, [1, 2]], faces[:, [2, 0]]])
    fid = np.tile(np.arange(F), 3)
    lo = np.minimum(e[:, 0], e[:, 1])
    hi = np.maximum(e[:, 0], e[:, 1])
    key = lo.astype(np.int64) * n + hi
    order = np.argsort(key, kind="stable")
    key, fid, lo, hi = key[order], fid[order], lo[order], hi[order]
    first = np.ones(len(key), dtype=bool)
    first[1:] = key[1:] != key[:-1]
    starts = np.flatnonzero(first)
    counts = np.diff(np.append(starts, len(key)))
    if np.any(counts > 2):
        raise RuntimeError("non-manifold triangulation")
    edges = np.stack([lo[starts], hi[starts]], axis=-1)
    ef = np.full((len(starts), 2), -1, dtype=np.int64)
    ef[:, 0] = fid[starts]
    two = counts == 2
    ef[two, 1] = fid[starts[two] + 1]
    return edges, ef


def _opposite(faces, f, a, b):
    tri = faces[f]
    return tri[(tri != a[:, None]) & (tri != b[:, None])]


def _illegal_edges(sites, faces, edges, ef) -> np.ndarray:
    internal = np.flatnonzero(ef[:, 1] >= 0)
    if len(internal) == 0:
        return internal
    a = edges[internal, 0]
    b = edges[internal, 1]
    f1 = ef[internal, 0]
    f2 = ef[internal, 1]
    c = _opposite(faces, f1, a, b)
    d = _opposite(faces, f2, a, b)
    t = faces[f1]
    s = incircle(sites[t[:, 0]], sites[t[:, 1]], sites[t[:, 2]], sites[d])
    lowest = np.minimum(np.minimum(a, b), np.minimum(c, d))
    tie_flip = (s == 0) & (lowest != np.minimum(a, b))
    return internal[(s > 0) | tie_flip]


def _legalize(sites: np.ndarray, faces: np.ndarray, max_rounds: int = 10000):
    n = len(sites)
    for _ in range(max_rounds):
        edges, ef = _edge_face_table(faces, n)
        bad = _illegal_edges(sites, faces, edges, ef)
        if len(bad) == 0:
            return faces, edges, ef
        faces = faces.copy()
        touched = np.zeros(len(faces), dtype=bool)
        for k in bad:
            f1, f2 = ef[k]
            if touched[f1] or touched[f2]:
                continue
            a, b = edges[k]
            t1 = list(faces[f1])
            # rotate so face1 reads (a, b, c) counterclockwise
            i = t1.index(a)
            if t1[(i + 1) % 3] != b:
                a, b = b, a
                i = t1.index(a)
            c = t1[(i + 2) % 3]
            d = [v for v in faces[f2] if v != a and v != b][0]
            faces[f1] = (a, d, c)
            faces[f2] = (d, b, c)
            touched[f1] = touched[f2] = True
    raise RuntimeError("edge flipping did not converge")


def _collinear(sites: np.ndarray) -> bool:
    if len(sites) < 3:
        return True
    a = sites[0]
    far = np.argmax(np.hypot(*(sites - a).T))
    b = sites[far]
    return bool(np.all(orient2d(a, b, sites) == 0))


def _check_sites(sites) -> np.ndarray:
    s = np.asarray(sites, dtype=float).reshape(-1, 2)
    if len(repeated_rows(s)):
        raise DegenerateInputError("repeated sites")
    return s


def delaunay(sites, metric: str = EUCLIDEAN) -> VoronoiComplex:
    """Delaunay triangulation with exact predicates.

    Raises DegenerateInputError for fewer than three sites or collinear input.
    """
    s = _check_sites(sites)
    if len(s) < 3:
        raise DegenerateInputError(f"need at least 3 sites, got {len(s)}")
    if _collinear(s):
        raise DegenerateInputError("all sites are collinear")
    try:
        tri = Delaunay(s)
    except QhullError as exc:  # pragma: no cover - exercised only on pathological input
        raise DegenerateInputError(f"qhull failed: {exc}") from exc
    if len(tri.coplanar):
        raise DegenerateInputError("qhull dropped near-coincident sites")
    faces = tri.simplices.astype(np.int64)
    o = orient2d(s[faces[:, 0]], s[faces[:, 1]], s[faces[:, 2]])
    faces = faces[o != 0]
    o = o[o != 0]
    faces[o < 0] = faces[o < 0][:, [0, 2, 1]]
    faces, edges, ef = _legalize(s, faces)
    return _assemble(s, faces, edges, ef, metric)


def _assemble(s, faces, edges, ef, metric) -> VoronoiComplex:
    a, b, c = s[faces[:, 0]], s[faces[:, 1]], s[faces[:, 2]]
    # circumcenters relative to a for accuracy
    bx, by = (b - a).T
    cx, cy = (c - a).T
    d = 2.0 * (bx * cy - by * cx)
    b2 = bx * bx + by * by
    c2 = cx * cx + cy * cy
    ux = (cy * b2 - by * c2) / d
    uy = (bx * c2 - cx * b2) / d
    cc = a + np.stack([ux, uy], axis=-1)
    cr = np.hypot(ux, uy)
    return VoronoiComplex(s, edges, faces, ef, cc, cr, False, metric)


def voronoi_complex(sites) -> VoronoiComplex:
    """Like :func:`delaunay` but also accepts 1-2 sites or collinear sites."""
    s = _check_sites(sites)
    if len(s) == 0:
        raise DegenerateInputError("no sites")
    if len(s) >= 3 and not _collinear(s):
        return delaunay(s)
    if len(s) == 1:
        edges = np.zeros((0, 2), dtype=np.int64)
    else:
        a = s[0]
        far = np.argmax(np.hypot(*(s - a).T))
        direction = s[far] - a
        order = np.argsort(s @ direction, kind="stable")
        pairs = np.stack([order[:-1], order[1:]], axis=-1)
        edges = np.sort(pairs, axis=1)
        edges = edges[np.lexsort((edges[:, 1], edges[:, 0]))]
    empty = np.zeros((0, 3), dtype=np.int64)
    return VoronoiComplex(s, edges, empty, np.full((len(edges), 2), -1, dtype=np.int64),
                          np.zeros((0, 2)), np.zeros(0), True)


def euclid_adjacent(i: int, j: int, complex_: VoronoiComplex) -> bool:
    n = complex_.n_sites
    if not (0 <= i < n and 0 <= j < n):
        raise IndexError("unknown site")
    if i == j:
        raise ValueError("a site is not adjacent to itself")
    return complex_.edge_index(i, j) >= 0


# --------------------------------------------------------------------------
# hyperbolic adjacency


def _pair_frame(z1, z2):
    """Isometry putting z1, z2 at (-a, 0), (a, 0); returns (iso, a)."""
    m1 = DiskIsometry.to_origin(z1)
    w = complex(*m1(z2))
    dist = 2.0 * math.atanh(abs(w))
    a = math.tanh(dist / 4.0)
    mid_local = (w / abs(w)) * a
    mid = m1.inverse()(np.array([mid_local.real, mid_local.imag]))
    to_mid = DiskIsometry.to_origin(mid)
    w2 = complex(*to_mid(z2))
    return DiskIsometry.to_origin(mid, theta=-math.atan2(w2.imag, w2.real)), a


def hyp_bisector_interval(i: int, j: int, sites):
    """Part of the hyperbolic bisector of sites i, j where both are nearest.

    In the frame where the sites sit at (-a, 0) and (a, 0) the bisector is the
    vertical diameter, parameterized by y in (-1, 1). A third site z is closer
    than the pair exactly where c (y^2 + 1) - 2 b y < 0 with c = |z|^2 - a^2
    and b = z_y (1 - a^2); the product of the roots is 1, so at most one root
    lies in (-1, 1) and each site removes a half-line, the whole line, or
    nothing. Returns ``(lo, hi, iso)``; the pair is adjacent iff lo <= hi.
    """
    s = as_points(sites)
    if i == j:
        raise ValueError("need two distinct sites")
    iso, a = _pair_frame(s[i], s[j])
    others = np.delete(np.arange(len(s)), [i, j])
    lo, hi = -1.0, 1.0
    if len(others):
        q = iso(s[others])
        c = q[:, 0] ** 2 + q[:, 1] ** 2 - a * a
        b = q[:, 1] * (1.0 - a * a)
        disc = b * b - c * c
        if np.any((disc <= 0) & (c < 0)):
            return 1.0, -1.0, iso
        has_root = disc > 0
        bb = b[has_root]
        root = c[has_root] / (bb + np.sign(bb) * np.sqrt(disc[has_root]))
        up = bb > 0
        if np.any(up):
            hi = min(hi, float(root[up].min()))
        if np.any(~up):
            lo = max(lo, float(root[~up].max()))
    return lo, hi, iso


def hyp_adjacent(i: int, j: int, sites) -> bool:
    """Whether the hyperbolic Voronoi cells of sites i and j touch."""
    lo, hi, _ = hyp_bisector_interval(i, j, sites)
    return lo <= hi


def hyp_voronoi_edge(i: int, j: int, sites):
    """Endpoints (2, 2) of the hyperbolic Voronoi edge between i and j, or None.

    Endpoints on the unit circle are ideal points (unbounded edge).
    """
    lo, hi, iso = hyp_bisector_interval(i, j, sites)
    if lo > hi:
        return None
    local = np.array([[0.0, lo], [0.0, hi]])
    inv = iso.inverse()
    return np.array([_apply_closed(inv, p) for p in local])


def _apply_closed(iso: DiskIsometry, p) -> np.ndarray:
    """Apply an isometry to a point of the closed disk (boundary allowed)."""
    z = complex(p[0], p[1])
    w = iso.apply_complex(np.complex128(z))
    return np.array([w.real, w.imag])


def hyp_adjacency_graph(sites) -> set:
    """All hyperbolically adjacent pairs (i < j), by brute force over pairs."""
    s = as_points(sites)
    n = len(s)
    return {(i, j) for i in range(n) for j in range(i + 1, n) if hyp_adjacent(i, j, s)}


# --------------------------------------------------------------------------
# finite-window witness check


def _containment_excess(centers, radii, window) -> np.ndarray:
    """How far disks (center, radius) stick out of the window (<= 0 means inside)."""
    if isinstance(window, Rect):
        q = window.local_coords(centers)
        gaps = np.stack([q[:, 0], window.width - q[:, 0], q[:, 1], window.height - q[:, 1]], axis=-1)
        return radii - gaps.min(axis=-1)
    circ = window.euclid() if isinstance(window, HypDisk) else window
    return np.hypot(*(centers - np.asarray(circ.center)).T) + radii - circ.radius


def witness_inside(k: int, complex_: VoronoiComplex, window, samples: int = 0) -> bool:
    """Is some empty disk through the endpoints of Delaunay edge k inside ``window``?

    Centers of empty disks through both sites fill the dual Voronoi edge; the
    containment excess is convex along it, so a bounded scalar minimization
    decides the question.
    """
    from scipy.optimize import minimize_scalar

    P, D, t0, t1 = (x[k] for x in complex_.voronoi_edges())
    z = complex_.sites[complex_.edges[k, 0]]
    scale = 4.0 * (1.0 + np.hypot(*P) + np.hypot(*z))
    lo = t0 if np.isfinite(t0) else -scale / max(np.hypot(*D), 1e-300)
    hi = t1 if np.isfinite(t1) else scale / max(np.hypot(*D), 1e-300)

    def excess(t):
        c = (P + t * D)[None, :]
        return float(_containment_excess(c, np.hypot(*(c - z).T), window)[0])

    best = min(excess(lo), excess(hi))
    if hi > lo:
        res = minimize_scalar(excess, bounds=(lo, hi), method="bounded", options={"xatol": 1e-12})
        best = min(best, res.fun)
    return best < 0.0


def boundary_uncertain(i: int, j: int, complex_: VoronoiComplex, window) -> bool:
    """True for Delaunay edges whose every empty witness disk exits the window."""
    k = complex_.edge_index(i, j)
    if k < 0:
        return False
    return not witness_inside(k, complex_, window)


# --------------------------------------------------------------------------
# cells and nearest sites


def clip_halfplane(poly: np.ndarray, normal, offset: float) -> np.ndarray:
    """Part of a convex polygon with normal . x <= offset."""
    if len(poly) == 0:
        return poly
    val = poly @ np.asarray(normal) - offset
    out = []
    n = len(poly)
    for k in range(n):
        p, q = poly[k], poly[(k + 1) % n]
        vp, vq = val[k], val[(k + 1) % n]
        if vp <= 0:
            out.append(p)
        if (vp < 0 < vq) or (vq < 0 < vp):
            t = vp / (vp - vq)
            out.append(p + t * (q - p))
    return np.array(out).reshape(-1, 2)


def cell_clip(z: int, rect: Rect, complex_: VoronoiComplex) -> np.ndarray:
    """The Euclidean cell of site z intersected with rect, as a convex polygon."""
    s = complex_.sites
    poly = rect.corners()
    pz = s[z]
    for w in complex_.neighbors(z):
        pw = s[w]
        poly = clip_halfplane(poly, pw - pz, (pw @ pw - pz @ pz) / 2.0)
        if len(poly) == 0:
            break
    return poly


def polygon_area(poly) -> float:
    p = np.asarray(poly, dtype=float)
    if len(p) < 3:
        return 0.0
    q = np.roll(p, -1, axis=0)
    return float(abs(np.sum(p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0])) / 2.0)


def _hyp_key(u, sites):
    """Monotone surrogate of the hyperbolic distance from u to each site."""
    d = sites - u
    return np.einsum("...i,...i->...", d, d) / (1.0 - np.einsum("...i,...i->...", sites, sites))


def hyp_distance_rows(u, v) -> np.ndarray:
    """Row-wise hyperbolic distance between two (n, 2) arrays."""
    d2 = np.einsum("ij,ij->i", u - v, u - v)
    den = (1.0 - np.einsum("ij,ij->i", u, u)) * (1.0 - np.einsum("ij,ij->i", v, v))
    return 2.0 * np.arcsinh(np.sqrt(d2 / den))


def nearest_site(u, sites, metric: str = EUCLIDEAN) -> int:
    """Index of the nearest site (lowest index on ties)."""
    s = np.asarray(sites, dtype=float).reshape(-1, 2)
    if len(s) == 0:
        raise ValueError("no sites")
    u = np.asarray(u, dtype=float)
    if metric in (HYPERBOLIC, "hyp"):
        as_points(s)
        return int(np.argmin(_hyp_key(u, s)))
    d = s - u
    return int(np.argmin(np.einsum("ij,ij->i", d, d)))


class SiteIndex:
    """KD-tree nearest-site queries under either metric.

    Hyperbolic queries take the Euclidean nearest site as a first candidate,
    then search the Euclidean image of the hyperbolic ball through it.
    """

    def __init__(self, sites):
        self.sites = np.asarray(sites, dtype=float).reshape(-1, 2)
        if len(self.sites) == 0:
            raise ValueError("no sites")
        self.tree = cKDTree(self.sites)

    def query(self, pts, metric: str = EUCLIDEAN, k: int = 12) -> np.ndarray:
        pts = np.asarray(pts, dtype=float).reshape(-1, 2)
        _, idx = self.tree.query(pts)
        idx = np.asarray(idx)
        if metric not in (HYPERBOLIC, "hyp"):
            return self._break_ties_euclid(pts, idx)
        as_points(self.sites)
        as_points(pts)
        k = min(k, len(self.sites))
        dk, cand = self.tree.query(pts, k=k)
        dk = dk.reshape(len(pts), k)
        cand = cand.reshape(len(pts), k)
        # stable on ties: lowest index among equal keys
        order = np.argsort(cand, axis=1, kind="stable")
        cand = np.take_along_axis(cand, order, axis=1)
        keys = _hyp_key(pts[:, None, :], self.sites[cand])
        best = cand[np.arange(len(pts)), np.argmin(keys, axis=1)]
        if k == len(self.sites):
            return best
        # the hyperbolic ball through the best candidate must lie inside the
        # Euclidean ball already searched, else fall back to a full search
        rho = hyp_distance_rows(pts, self.sites[best])
        s = np.hypot(*pts.T)
        a = np.arctanh(s)
        hi = np.tanh(a + rho / 2.0)
        lo = np.tanh(a - rho / 2.0)
        reach = np.maximum(hi - s, s - lo)
        unsure = np.flatnonzero(reach * (1 + 1e-9) + 1e-15 >= dk.max(axis=1))
        for j in unsure:
            u = pts[j]
            circ = hyp_circle_to_euclid(u, float(rho[j]))
            c = np.sort(np.array(self.tree.query_ball_point(circ.center, circ.radius * (1 + 1e-9) + 1e-15)))
            best[j] = c[np.argmin(_hyp_key(u, self.sites[c]))]
        return best

    def _break_ties_euclid(self, pts, idx):
        d = np.hypot(*(pts - self.sites[idx]).T)
        out = idx.astype(np.int64)
        for k in range(len(pts)):
            cand = np.sort(np.array(self.tree.query_ball_point(pts[k], d[k] * (1 + 1e-12) + 1e-300)))
            if len(cand) > 1:
                dd = np.einsum("ij,ij->i", self.sites[cand] - pts[k], self.sites[cand] - pts[k])
                out[k] = cand[np.argmin(dd)]
        return out
