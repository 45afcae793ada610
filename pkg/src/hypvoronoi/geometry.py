"""Poincare disk primitives: distances, areas, circles, geodesics, isometries.

Points are handled as numpy arrays of shape ``(..., 2)`` holding Euclidean
coordinates in the open unit disk. Isometries work on complex numbers
internally.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional, Sequence, Union

import numpy as np

#: points closer than this to the unit circle are rejected
BOUNDARY_EPS = 1e-12


class DomainError(ValueError):
    """Raised when a point or region leaves the open unit disk."""


@dataclass(frozen=True)
class PoincarePoint:
    x: float
    y: float

    def __post_init__(self):
        if not (self.x * self.x + self.y * self.y < (1.0 - BOUNDARY_EPS) ** 2):
            raise DomainError(f"({self.x}, {self.y}) is not inside the open unit disk")

    def __array__(self, dtype=None, copy=None):
        return np.array([self.x, self.y], dtype=dtype or float)

    def __iter__(self):
        yield self.x
        yield self.y

    @property
    def norm(self) -> float:
        return math.hypot(self.x, self.y)


def as_points(pts, check: bool = True) -> np.ndarray:
    """Coerce to a float array of shape (..., 2); optionally check disk membership."""
    arr = np.asarray(pts, dtype=float)
    if arr.shape[-1:] != (2,):
        raise ValueError(f"expected trailing dimension 2, got shape {arr.shape}")
    if check and arr.size:
        r2 = np.einsum("...i,...i->...", arr, arr)
        if np.any(r2 >= (1.0 - BOUNDARY_EPS) ** 2):
            raise DomainError("point(s) outside the open unit disk")
    return arr


def repeated_rows(pts) -> np.ndarray:
    """Indices of rows equal to an earlier row (first occurrences are kept)."""
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    if len(pts) < 2:
        return np.zeros(0, dtype=np.int64)
    xs = np.sort(pts[:, 0])
    if not np.any(xs[1:] == xs[:-1]):
        return np.zeros(0, dtype=np.int64)
    order = np.lexsort((np.arange(len(pts)), pts[:, 1], pts[:, 0]))
    q = pts[order]
    same = np.all(q[1:] == q[:-1], axis=1)
    return np.sort(order[1:][same])


def density(pts) -> np.ndarray:
    """Hyperbolic area density 4 / (1 - |u|^2)^2 relative to Lebesgue measure."""
    arr = np.asarray(pts, dtype=float)
    r2 = np.einsum("...i,...i->...", arr, arr)
    return 4.0 / (1.0 - r2) ** 2


def density_lipschitz(r: float) -> float:
    """Largest |grad f| of the area density on the closed Euclidean disk of radius r."""
    return 16.0 * r / (1.0 - r * r) ** 3


def hyp_distance(u, v) -> np.ndarray:
    """2 asinh(|u - v| / sqrt((1 - |u|^2)(1 - |v|^2))), broadcasting over leading axes."""
    u = as_points(u)
    v = as_points(v)
    d = u - v
    num = np.sqrt(np.einsum("...i,...i->...", d, d))
    den = np.sqrt((1.0 - np.einsum("...i,...i->...", u, u)) * (1.0 - np.einsum("...i,...i->...", v, v)))
    out = 2.0 * np.arcsinh(num / den)
    return out if out.ndim else float(out)


def hyp_radius_to_euclid(rho):
    """Euclidean radius of the hyperbolic disk B_H(o, rho)."""
    return np.tanh(np.asarray(rho, dtype=float) / 2.0)


def euclid_radius_to_hyp(s):
    """Hyperbolic distance from the origin to a point of Euclidean norm s."""
    return 2.0 * np.arctanh(np.asarray(s, dtype=float))


# --------------------------------------------------------------------------
# circles


@dataclass(frozen=True)
class Circle:
    """Euclidean circle, with its hyperbolic center/radius when it lies inside the disk."""

    center: tuple
    radius: float
    hyp_center: Optional[tuple] = None
    hyp_radius: Optional[float] = None

    def __post_init__(self):
        if self.radius < 0:
            raise ValueError("radius must be nonnegative")
        if self.hyp_center is not None:
            if math.hypot(*self.center) + self.radius >= 1.0:
                raise DomainError("hyperbolic descriptor on a circle that leaves the disk")

    def contains(self, pts, strict: bool = True) -> np.ndarray:
        d = np.asarray(pts, dtype=float) - np.asarray(self.center)
        r2 = np.einsum("...i,...i->...", d, d)
        return r2 < self.radius**2 if strict else r2 <= self.radius**2


def hyp_circle_to_euclid(center, rho: float) -> Circle:
    """Euclidean description of the hyperbolic circle of radius rho around center."""
    if rho < 0:
        raise ValueError("hyperbolic radius must be nonnegative")
    c = as_points(center)
    s = float(np.hypot(*c))
    direction = c / s if s > 0 else np.array([1.0, 0.0])
    dc = 2.0 * math.atanh(s)
    far = math.tanh((dc + rho) / 2.0)
    near = math.tanh((dc - rho) / 2.0)
    ecenter = direction * (far + near) / 2.0
    radius = (far - near) / 2.0
    return Circle(
        center=(float(ecenter[0]), float(ecenter[1])),
        radius=float(radius),
        hyp_center=(float(c[0]), float(c[1])),
        hyp_radius=float(rho),
    )


def euclid_circle_to_hyp(center, radius: float) -> Circle:
    """Attach hyperbolic center and radius to a Euclidean circle strictly inside the disk."""
    c = np.asarray(center, dtype=float)
    s = float(np.hypot(*c))
    if s + radius >= 1.0:
        raise DomainError("circle is not contained in the open unit disk")
    direction = c / s if s > 0 else np.array([1.0, 0.0])
    h_near = 2.0 * math.atanh(s - radius)
    h_far = 2.0 * math.atanh(s + radius)
    hc = math.tanh((h_near + h_far) / 4.0)
    return Circle(
        center=(float(c[0]), float(c[1])),
        radius=float(radius),
        hyp_center=(float(direction[0] * hc), float(direction[1] * hc)),
        hyp_radius=(h_far - h_near) / 2.0,
    )


def circle_through(a, b, c):
    """Euclidean circumcircle (center, radius) of three points; None if collinear."""
    ax, ay = a
    bx, by = b
    cx, cy = c
    d = 2.0 * (ax * (by - cy) + bx * (cy - ay) + cx * (ay - by))
    if d == 0.0:
        return None
    a2, b2, c2 = ax * ax + ay * ay, bx * bx + by * by, cx * cx + cy * cy
    ux = (a2 * (by - cy) + b2 * (cy - ay) + c2 * (ay - by)) / d
    uy = (a2 * (cx - bx) + b2 * (ax - cx) + c2 * (bx - ax)) / d
    return (ux, uy), math.hypot(ax - ux, ay - uy)


# --------------------------------------------------------------------------
# geodesics


@dataclass(frozen=True)
class Geodesic:
    """Complete geodesic, stored by its two ideal endpoints on the unit circle.

    ``center``/``radius`` describe the carrier circle; both are None for a
    diameter.
    """

    end_a: tuple
    end_b: tuple
    center: Optional[tuple] = None
    radius: Optional[float] = None

    @property
    def is_diameter(self) -> bool:
        return self.center is None

    def reflect(self, pts) -> np.ndarray:
        """Hyperbolic reflection (inversion in the carrier circle)."""
        z = _to_complex(pts)
        if self.is_diameter:
            e = complex(*self.end_a)
            w = e * e * np.conj(z)
        else:
            c = complex(*self.center)
            w = c + self.radius**2 / np.conj(z - c)
        return _to_points(w)

    def side(self, pts) -> np.ndarray:
        """+1/-1 depending on which side of the geodesic each point lies (0 on it)."""
        p = np.asarray(pts, dtype=float)
        if self.is_diameter:
            ax, ay = self.end_a
            return np.sign(ax * p[..., 1] - ay * p[..., 0])
        d = p - np.asarray(self.center)
        return np.sign(np.einsum("...i,...i->...", d, d) - self.radius**2)


def geodesic_through(u, v) -> Geodesic:
    """The complete geodesic through two distinct points of the disk."""
    u = as_points(u)
    v = as_points(v)
    cross = u[0] * v[1] - u[1] * v[0]
    scale = max(np.hypot(*u), np.hypot(*v), 1e-300)
    if abs(cross) <= 1e-14 * scale * max(np.hypot(*(u - v)), 1e-300):
        d = (v - u) if np.any(v != u) else u
        d = d / np.hypot(*d)
        return Geodesic(end_a=(float(d[0]), float(d[1])), end_b=(float(-d[0]), float(-d[1])))
    # carrier circle passes through u, v and the inverse of u
    ui = u / np.dot(u, u) if np.dot(u, u) > 0 else None
    if ui is None:
        ui = v / np.dot(v, v)
    (cx, cy), r = circle_through(u, v, ui)
    c = np.array([cx, cy])
    ends = _circle_unit_intersections(c, r)
    return Geodesic(end_a=ends[0], end_b=ends[1], center=(cx, cy), radius=r)


def _circle_unit_intersections(c, r):
    dist = float(np.hypot(*c))
    # orthogonal circle: |c|^2 = 1 + r^2; intersection points along c rotated by +-angle
    cos_t = 1.0 / dist
    ang = math.atan2(c[1], c[0])
    t = math.acos(min(1.0, cos_t))
    return (
        (math.cos(ang + t), math.sin(ang + t)),
        (math.cos(ang - t), math.sin(ang - t)),
    )


def geodesic_from_ideal(a_angle: float, b_angle: float) -> Geodesic:
    """Geodesic with ideal endpoints at the two given polar angles."""
    a = (math.cos(a_angle), math.sin(a_angle))
    b = (math.cos(b_angle), math.sin(b_angle))
    diff = (b_angle - a_angle) % (2 * math.pi)
    if abs(diff - math.pi) < 1e-15:
        return Geodesic(end_a=a, end_b=b)
    mid = (a_angle + diff / 2.0)
    half = diff / 2.0
    dist = 1.0 / math.cos(half)
    c = (dist * math.cos(mid), dist * math.sin(mid))
    r = abs(math.tan(half))
    return Geodesic(end_a=a, end_b=b, center=c, radius=r)


def tangent_angle(geo: Geodesic, at, toward) -> float:
    """Direction angle of the geodesic ``geo`` at point ``at``, oriented toward ``toward``."""
    at = np.asarray(at, dtype=float)
    toward = np.asarray(toward, dtype=float)
    if geo.is_diameter:
        d = toward - at
        return math.atan2(d[1], d[0])
    c = np.asarray(geo.center)
    radial = at - c
    tang = np.array([-radial[1], radial[0]])
    if np.dot(tang, toward - at) < 0:
        tang = -tang
    return math.atan2(tang[1], tang[0])


def interior_angle(vertex, p, q) -> float:
    """Angle at ``vertex`` between the geodesic sides toward p and q."""
    a = tangent_angle(geodesic_through(vertex, p), vertex, p)
    b = tangent_angle(geodesic_through(vertex, q), vertex, q)
    ang = abs(a - b) % (2 * math.pi)
    return min(ang, 2 * math.pi - ang)


# --------------------------------------------------------------------------
# isometries


def _to_complex(pts) -> np.ndarray:
    a = np.asarray(pts, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def _to_points(z) -> np.ndarray:
    z = np.asarray(z)
    return np.stack([z.real, z.imag], axis=-1)


def _mobius(a: complex, z):
    return (z - a) / (1.0 - np.conj(a) * z)


def _mobius_inv(a: complex, w):
    return (w + a) / (1.0 + np.conj(a) * w)


@dataclass(frozen=True)
class DiskIsometry:
    """Isometry of the disk, u -> e^{i theta} M_a(u) (direct) or e^{i theta} conj(M_a(u)).

    ``M_a(u) = (u - a) / (1 - conj(a) u)`` sends the anchor ``a`` to the origin.
    """

    theta: float = 0.0
    anchor: tuple = (0.0, 0.0)
    reflective: bool = False

    def __post_init__(self):
        if math.hypot(*self.anchor) >= 1.0 - BOUNDARY_EPS:
            raise DomainError("isometry anchor outside the disk")

    @property
    def _a(self) -> complex:
        return complex(self.anchor[0], self.anchor[1])

    def apply_complex(self, z):
        w = _mobius(self._a, z)
        if self.reflective:
            w = np.conj(w)
        return np.exp(1j * self.theta) * w

    def inverse_complex(self, w):
        v = np.exp(-1j * self.theta) * w
        if self.reflective:
            v = np.conj(v)
        return _mobius_inv(self._a, v)

    def __call__(self, pts) -> np.ndarray:
        return _to_points(self.apply_complex(_to_complex(pts)))

    def inverse(self) -> "DiskIsometry":
        return _fit(self.inverse_complex, self.apply_complex, self.reflective)

    def compose(self, other: "DiskIsometry") -> "DiskIsometry":
        """self o other (apply ``other`` first)."""
        return _fit(
            lambda z: self.apply_complex(other.apply_complex(z)),
            lambda w: other.inverse_complex(self.inverse_complex(w)),
            self.reflective != other.reflective,
        )

    @classmethod
    def identity(cls) -> "DiskIsometry":
        return cls()

    @classmethod
    def rotation(cls, theta: float) -> "DiskIsometry":
        return cls(theta=theta)

    @classmethod
    def to_origin(cls, a, theta: float = 0.0) -> "DiskIsometry":
        a = np.asarray(a, dtype=float)
        return cls(theta=theta, anchor=(float(a[0]), float(a[1])))

    @classmethod
    def reflection(cls, geo: Geodesic) -> "DiskIsometry":
        def fwd(z):
            return _to_complex(geo.reflect(_to_points(z)))

        return _fit(fwd, fwd, True)


def _fit(fwd, inv, reflective: bool) -> DiskIsometry:
    """Recover (theta, anchor, orientation) of an isometry given as a pair of maps."""
    a = complex(inv(np.complex128(0.0)))
    probe = _mobius_inv(a, 0.5)
    theta = float(np.angle(fwd(np.complex128(probe)) / 0.5))
    return DiskIsometry(theta=theta, anchor=(a.real, a.imag), reflective=reflective)


# --------------------------------------------------------------------------
# regions and hyperbolic area


@dataclass(frozen=True)
class HypDisk:
    center: tuple
    radius: float  # hyperbolic

    def euclid(self) -> Circle:
        return hyp_circle_to_euclid(self.center, self.radius)


@dataclass(frozen=True)
class Rect:
    """Euclidean rectangle: corner, width along ``angle``, height across it.

    ``axis`` names the pair of sides a crossing must join: ``"long"`` joins the
    two short sides (the default, undefined for squares), ``"x"`` joins the
    sides at the start and end of the width direction, ``"y"`` the other pair.
    """

    corner: tuple
    width: float
    height: float
    angle: float = 0.0
    axis: str = "long"

    def __post_init__(self):
        if self.width <= 0 or self.height <= 0:
            raise ValueError("rectangle must have positive width and height")
        if self.axis not in ("long", "x", "y"):
            raise ValueError(f"unknown crossing axis {self.axis!r}")
        if self.axis == "long" and self.width == self.height:
            raise ValueError("a square has no long crossing; pass axis='x' or 'y'")

    @classmethod
    def from_bounds(cls, x0, y0, x1, y1, axis: str = "long") -> "Rect":
        return cls((float(x0), float(y0)), float(x1 - x0), float(y1 - y0), 0.0, axis)

    @property
    def u(self) -> np.ndarray:
        return np.array([math.cos(self.angle), math.sin(self.angle)])

    @property
    def v(self) -> np.ndarray:
        return np.array([-math.sin(self.angle), math.cos(self.angle)])

    def corners(self) -> np.ndarray:
        """Counterclockwise corners starting at ``corner``."""
        c = np.asarray(self.corner, dtype=float)
        u = self.u * self.width
        v = self.v * self.height
        return np.array([c, c + u, c + u + v, c + v])

    @property
    def center(self) -> np.ndarray:
        return self.corners().mean(axis=0)

    @property
    def is_axis_parallel(self) -> bool:
        return self.angle == 0.0

    def bounds(self):
        c = self.corners()
        return c[:, 0].min(), c[:, 1].min(), c[:, 0].max(), c[:, 1].max()

    def crossing_direction(self) -> str:
        if self.axis == "long":
            return "x" if self.width > self.height else "y"
        return self.axis

    def crossing_sides(self):
        """The two sides (pairs of endpoints) a crossing must connect."""
        c = self.corners()
        if self.crossing_direction() == "x":
            return (c[3], c[0]), (c[1], c[2])
        return (c[0], c[1]), (c[2], c[3])

    def local_coords(self, pts) -> np.ndarray:
        d = np.asarray(pts, dtype=float) - np.asarray(self.corner, dtype=float)
        return np.stack([d @ self.u, d @ self.v], axis=-1)

    def contains(self, pts, tol: float = 0.0) -> np.ndarray:
        q = self.local_coords(pts)
        return (
            (q[..., 0] >= -tol)
            & (q[..., 0] <= self.width + tol)
            & (q[..., 1] >= -tol)
            & (q[..., 1] <= self.height + tol)
        )

    def area(self) -> float:
        return self.width * self.height

    def dilate(self, margin: float) -> "Rect":
        """Bounding rectangle of the margin-dilation (same orientation)."""
        c = np.asarray(self.corner) - margin * (self.u + self.v)
        return Rect((float(c[0]), float(c[1])), self.width + 2 * margin,
                    self.height + 2 * margin, self.angle, self.axis)

    def rotated(self, theta: float) -> "Rect":
        """Image under the rotation about the origin by ``theta``."""
        cs, sn = math.cos(theta), math.sin(theta)
        x, y = self.corner
        return Rect((cs * x - sn * y, sn * x + cs * y), self.width, self.height,
                    self.angle + theta, self.axis)

    def max_norm(self) -> float:
        return float(np.max(np.hypot(*self.corners().T)))

    def min_norm(self) -> float:
        """Euclidean distance from the origin to the rectangle."""
        q = self.local_coords(np.zeros(2))
        cx = min(max(q[0], 0.0), self.width)
        cy = min(max(q[1], 0.0), self.height)
        return float(math.hypot(q[0] - cx, q[1] - cy))

    def nearest_to_origin(self) -> np.ndarray:
        q = self.local_coords(np.zeros(2))
        cx = min(max(q[0], 0.0), self.width)
        cy = min(max(q[1], 0.0), self.height)
        return np.asarray(self.corner) + cx * self.u + cy * self.v

    def diameter(self) -> float:
        return math.hypot(self.width, self.height)


Region = Union[HypDisk, Rect, Circle, np.ndarray, Sequence, None]


def _edge_integral(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """int_0^1 dt / (1 - |a + t (b - a)|^2) for each segment, in closed form."""
    d = b - a
    qa = np.einsum("...i,...i->...", d, d)
    qb = np.einsum("...i,...i->...", a, d)
    qc = 1.0 - np.einsum("...i,...i->...", a, a)
    root = np.sqrt(qa * qc + qb * qb)
    with np.errstate(divide="ignore", invalid="ignore"):
        D = root / qa
        s0 = qb / qa
        s1 = 1.0 + qb / qa
        val = (np.arctanh(s1 / D) - np.arctanh(s0 / D)) / root
    return np.where(qa > 0, val, 0.0)


def polygon_hyp_area(poly) -> float:
    """Hyperbolic area of a simple polygon inside the disk (exact line integral).

    Uses area = contour integral of 2 (x dy - y dx) / (1 - x^2 - y^2).
    """
    p = np.asarray(poly, dtype=float)
    if len(p) < 3:
        return 0.0
    if np.any(np.hypot(p[:, 0], p[:, 1]) >= 1.0):
        raise DomainError("polygon is not contained in the open unit disk")
    q = np.roll(p, -1, axis=0)
    cross = p[:, 0] * q[:, 1] - p[:, 1] * q[:, 0]
    return float(abs(np.sum(2.0 * cross * _edge_integral(p, q))))


def hyp_area(region: Region) -> float:
    """Hyperbolic area of a hyperbolic disk, Euclidean circle, rectangle or polygon."""
    if region is None:
        return 0.0
    if isinstance(region, HypDisk):
        as_points(region.center)
        return 4.0 * math.pi * math.sinh(region.radius / 2.0) ** 2
    if isinstance(region, Circle):
        if region.radius == 0:
            return 0.0
        h = region if region.hyp_radius is not None else euclid_circle_to_hyp(region.center, region.radius)
        return 4.0 * math.pi * math.sinh(h.hyp_radius / 2.0) ** 2
    if isinstance(region, Rect):
        if region.max_norm() >= 1.0:
            raise DomainError("rectangle is not contained in the open unit disk")
        return polygon_hyp_area(region.corners())
    pts = np.asarray(region, dtype=float)
    if pts.size == 0:
        return 0.0
    return polygon_hyp_area(pts)


def hyp_area_quad(region: Region, epsabs: float = 1e-10) -> float:
    """Adaptive-quadrature hyperbolic area, for regions given as rectangles or disks."""
    from scipy import integrate

    if isinstance(region, Rect):
        if region.max_norm() >= 1.0:
            raise DomainError("rectangle is not contained in the open unit disk")
        c = np.asarray(region.corner)
        u, v = region.u, region.v

        def integrand(t, s):
            p = c + s * u + t * v
            return 4.0 / (1.0 - p[0] ** 2 - p[1] ** 2) ** 2

        val, _ = integrate.dblquad(integrand, 0, region.width, 0, region.height, epsabs=epsabs, epsrel=1e-12)
        return float(val)
    if isinstance(region, (HypDisk, Circle)):
        circ = region.euclid() if isinstance(region, HypDisk) else region
        cx, cy = circ.center
        R = circ.radius
        if math.hypot(cx, cy) + R >= 1.0:
            raise DomainError("disk is not contained in the open unit disk")

        def integrand(r, t):
            x = cx + r * math.cos(t)
            y = cy + r * math.sin(t)
            return r * 4.0 / (1.0 - x * x - y * y) ** 2

        val, _ = integrate.dblquad(integrand, 0, 2 * math.pi, 0, R, epsabs=epsabs, epsrel=1e-12)
        return float(val)
    raise TypeError(f"unsupported region {type(region).__name__}")


# --------------------------------------------------------------------------
# the (7,7,7) triangle

TRIANGLE_ANGLE = 2.0 * math.pi / 7.0


def triangle_side_length(angle: float = TRIANGLE_ANGLE) -> float:
    """Side of the equilateral hyperbolic triangle with the given interior angle."""
    c = math.cos(angle)
    return math.acosh(c / (1.0 - c))


def triangle_circumradius(angle: float = TRIANGLE_ANGLE) -> float:
    """Hyperbolic distance from the center of the equilateral triangle to a vertex."""
    return math.acosh(1.0 / (math.tan(math.pi / 3.0) * math.tan(angle / 2.0)))


def triangle_inradius(angle: float = TRIANGLE_ANGLE) -> float:
    return math.acosh(math.cos(angle / 2.0) / math.sin(math.pi / 3.0))


def triangle_777() -> np.ndarray:
    """Vertices (3, 2) of the canonical (7,7,7) triangle: centered at o, vertex on +x."""
    s = math.tanh(triangle_circumradius() / 2.0)
    ang = np.array([0.0, 2.0 * math.pi / 3.0, 4.0 * math.pi / 3.0])
    return np.stack([s * np.cos(ang), s * np.sin(ang)], axis=-1)


def triangle_angles(verts) -> np.ndarray:
    v = np.asarray(verts, dtype=float)
    return np.array([interior_angle(v[i], v[(i + 1) % 3], v[(i + 2) % 3]) for i in range(3)])


def geodesic_polygon(verts, samples_per_side: int = 32) -> np.ndarray:
    """Polyline approximation of a geodesic polygon (for containment tests and drawing)."""
    v = np.asarray(verts, dtype=float)
    out = []
    n = len(v)
    for i in range(n):
        a, b = v[i], v[(i + 1) % n]
        out.append(geodesic_segment_points(a, b, samples_per_side)[:-1])
    return np.concatenate(out, axis=0)


def geodesic_segment_points(a, b, n: int = 32) -> np.ndarray:
    """n+1 points along the geodesic segment from a to b (equally spaced in hyperbolic length)."""
    iso = DiskIsometry.to_origin(a)
    bb = iso(b)
    d = float(np.hypot(*bb))
    t = np.linspace(0.0, 1.0, n + 1)
    # along a diameter, hyperbolic length is 2 atanh(s)
    h = 2.0 * math.atanh(d)
    s = np.tanh(t * h / 2.0)
    local = np.outer(s, bb / d) if d > 0 else np.zeros((n + 1, 2))
    return iso.inverse()(local)
