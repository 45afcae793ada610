"""Independent slow oracles used to cross-check the fast routines.

None of these share code paths with the routines they check beyond array
handling: crossings are decided on a pixel raster, Delaunay faces by brute
force empty-circle tests, clusters by transitive closure of a dense matrix.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np
from scipy import ndimage
from scipy.spatial import cKDTree

from .geometry import Rect


def raster_labels(rect: Rect, sites, res: int = 2000) -> np.ndarray:
    """Nearest-site index at the centers of a res x res pixel grid over the rectangle.

    Row k of the result is the k-th pixel row along the height direction.
    """
    t = (np.arange(res) + 0.5) / res
    xs, ys = np.meshgrid(t * rect.width, t * rect.height)
    pts = (np.asarray(rect.corner) + xs.reshape(-1, 1) * rect.u + ys.reshape(-1, 1) * rect.v)
    _, idx = cKDTree(np.asarray(sites, dtype=float)).query(pts)
    return idx.reshape(res, res)


def raster_cross(rect: Rect, points, black, color: str = "black", res: int = 2000) -> bool:
    """Crossing decided by 4-connected pixel components of the given color."""
    black = np.asarray(black, dtype=bool)
    lab = raster_labels(rect, points, res)
    want = black if color == "black" else ~black
    img = want[lab]
    comp, _ = ndimage.label(img)
    if rect.crossing_direction() == "x":
        a, b = comp[:, 0], comp[:, -1]
    else:
        a, b = comp[0, :], comp[-1, :]
    return bool(np.intersect1d(a[a > 0], b[b > 0]).size)


def _circumcircle_exact(a, b, c):
    ax, ay, bx, by, cx, cy = (Fraction(v) for v in (*a, *b, *c))
    d = 2 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    ux = ((ax * ax + ay * ay) * (by - cy) + (bx * bx + by * by) * (cy - ay) + (cx * cx + cy * cy) * (ay - by)) / d
    uy = ((ax * ax + ay * ay) * (cx - bx) + (bx * bx + by * by) * (ax - cx) + (cx * cx + cy * cy) * (bx - ax)) / d
    return ux, uy, (ax - ux) ** 2 + (ay - uy) ** 2


def empty_circumcircle(sites, face) -> bool:
    """No site lies strictly inside the circumcircle of the face (exact arithmetic)."""
    s = np.asarray(sites, dtype=float)
    ux, uy, r2 = _circumcircle_exact(*(s[i] for i in face))
    # float prefilter with a generous margin, exact check only near the circle
    fu = np.array([float(ux), float(uy)])
    d2 = np.einsum("ij,ij->i", s - fu, s - fu)
    close = np.flatnonzero(d2 < float(r2) * (1 + 1e-9) + 1e-300)
    for k in close:
        if k in face:
            continue
        x, y = Fraction(s[k, 0]), Fraction(s[k, 1])
        if (x - ux) ** 2 + (y - uy) ** 2 < r2:
            return False
    return True


def brute_delaunay_faces(sites) -> set:
    """All triangles with an empty circumcircle and no site on it other than their corners.

    For sites in general position this is exactly the Delaunay triangulation.
    """
    s = np.asarray(sites, dtype=float)
    n = len(s)
    out = set()
    for i in range(n):
        for j in range(i + 1, n):
            for k in range(j + 1, n):
                a, b, c = s[i], s[j], s[k]
                if (b[0] - a[0]) * (c[1] - a[1]) == (b[1] - a[1]) * (c[0] - a[0]):
                    continue
                ux, uy, r2 = _circumcircle_exact(a, b, c)
                ok = True
                for m in range(n):
                    if m in (i, j, k):
                        continue
                    x, y = Fraction(s[m, 0]), Fraction(s[m, 1])
                    if (x - ux) ** 2 + (y - uy) ** 2 <= r2:
                        ok = False
                        break
                if ok:
                    out.add((i, j, k))
    return out


def closure_components(n: int, edges, mask) -> list:
    """Components of the subgraph on ``mask`` by Warshall transitive closure."""
    mask = np.asarray(mask, dtype=bool)
    reach = np.eye(n, dtype=bool)
    for i, j in edges:
        if mask[i] and mask[j]:
            reach[i, j] = reach[j, i] = True
    for k in range(n):
        reach |= reach[:, k:k + 1] & reach[k:k + 1, :]
    comps = {frozenset(np.flatnonzero(reach[i]).tolist()) for i in range(n) if mask[i]}
    return sorted(sorted(c) for c in comps)
