"""Orientation and in-circle predicates with a float filter and exact fallback.

The float results are trusted only when their magnitude exceeds a forward
error bound (Shewchuk's static bounds); otherwise the sign is recomputed with
exact rational arithmetic.
"""
from __future__ import annotations

from fractions import Fraction

import numpy as np

_EPS = np.finfo(float).eps / 2.0
CCW_BOUND = (3.0 + 16.0 * _EPS) * _EPS
ICC_BOUND = (10.0 + 96.0 * _EPS) * _EPS


def _orient_exact(a, b, c) -> int:
    ax, ay = Fraction(a[0]), Fraction(a[1])
    bx, by = Fraction(b[0]), Fraction(b[1])
    cx, cy = Fraction(c[0]), Fraction(c[1])
    det = (ax - cx) * (by - cy) - (ay - cy) * (bx - cx)
    return (det > 0) - (det < 0)


def _incircle_exact(a, b, c, d) -> int:
    dx, dy = Fraction(d[0]), Fraction(d[1])
    rows = []
    for p in (a, b, c):
        x = Fraction(p[0]) - dx
        y = Fraction(p[1]) - dy
        rows.append((x, y, x * x + y * y))
    (a0, a1, a2), (b0, b1, b2), (c0, c1, c2) = rows
    det = a0 * (b1 * c2 - b2 * c1) - a1 * (b0 * c2 - b2 * c0) + a2 * (b0 * c1 - b1 * c0)
    return (det > 0) - (det < 0)


def orient2d(a, b, c) -> np.ndarray:
    """Sign of the orientation of (a, b, c): +1 counterclockwise, -1 clockwise, 0 collinear.

    Accepts arrays of shape (..., 2) and returns int signs of the broadcast shape.
    """
    a, b, c = (np.asarray(x, dtype=float) for x in (a, b, c))
    a, b, c = np.broadcast_arrays(a, b, c)
    detleft = (a[..., 0] - c[..., 0]) * (b[..., 1] - c[..., 1])
    detright = (a[..., 1] - c[..., 1]) * (b[..., 0] - c[..., 0])
    det = detleft - detright
    bound = CCW_BOUND * (np.abs(detleft) + np.abs(detright))
    sign = np.array(np.sign(det), dtype=int)
    unsure = np.abs(det) <= bound
    if np.any(unsure):
        idx = np.argwhere(unsure)
        for ix in map(tuple, idx):
            sign[ix] = _orient_exact(a[ix], b[ix], c[ix])
    return sign if sign.ndim else int(sign)


def incircle(a, b, c, d) -> np.ndarray:
    """Sign of the in-circle determinant.

    Positive when d lies inside the circle through a, b, c (given counterclockwise),
    negative outside, zero when the four points are cocircular.
    """
    a, b, c, d = (np.asarray(x, dtype=float) for x in (a, b, c, d))
    a, b, c, d = np.broadcast_arrays(a, b, c, d)
    adx, ady = a[..., 0] - d[..., 0], a[..., 1] - d[..., 1]
    bdx, bdy = b[..., 0] - d[..., 0], b[..., 1] - d[..., 1]
    cdx, cdy = c[..., 0] - d[..., 0], c[..., 1] - d[..., 1]
    alift = adx * adx + ady * ady
    blift = bdx * bdx + bdy * bdy
    clift = cdx * cdx + cdy * cdy
    bc = bdx * cdy - bdy * cdx
    ca = cdx * ady - cdy * adx
    ab = adx * bdy - ady * bdx
    det = alift * bc + blift * ca + clift * ab
    permanent = (
        (np.abs(bdx * cdy) + np.abs(bdy * cdx)) * alift
        + (np.abs(cdx * ady) + np.abs(cdy * adx)) * blift
        + (np.abs(adx * bdy) + np.abs(ady * bdx)) * clift
    )
    sign = np.array(np.sign(det), dtype=int)
    unsure = np.abs(det) <= ICC_BOUND * permanent
    if np.any(unsure):
        for ix in map(tuple, np.argwhere(unsure)):
            sign[ix] = _incircle_exact(a[ix], b[ix], c[ix], d[ix])
    return sign if sign.ndim else int(sign)
