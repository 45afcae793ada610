import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from hypvoronoi.geometry import (
    Circle,
    DiskIsometry,
    DomainError,
    HypDisk,
    PoincarePoint,
    Rect,
    density,
    density_lipschitz,
    geodesic_through,
    hyp_area,
    hyp_area_quad,
    hyp_circle_to_euclid,
    hyp_distance,
    interior_angle,
    repeated_rows,
    triangle_777,
    triangle_angles,
    triangle_side_length,
)

# values frozen from mpmath at 30 digits (quadrature / closed forms)
LN3 = 1.09861228866810958037
D_DIAMETER = 1.23807841681244686190
SQUARE_01_AREA = 0.04054091142805529212
RECT_AREA = 0.68259645489184836677  # [0.2, 0.5] x [-0.1, 0.3]
SIDE_777 = 1.09054966350708617446


def disk_point(r=0.95):
    return st.tuples(st.floats(0, r), st.floats(0, 2 * math.pi)).map(
        lambda t: (t[0] * math.cos(t[1]), t[0] * math.sin(t[1])))


def test_distance_examples():
    assert hyp_distance((0, 0), (0, 0)) == 0
    assert hyp_distance((0, 0), (0.5, 0)) == pytest.approx(LN3, abs=1e-12)
    assert hyp_distance((0.3, 0), (-0.3, 0)) == pytest.approx(D_DIAMETER, abs=1e-12)
    assert hyp_distance((0.3, 0), (-0.3, 0)) == pytest.approx(2 * hyp_distance((0, 0), (0.3, 0)), abs=1e-14)


def test_point_outside_disk_rejected():
    with pytest.raises(DomainError):
        PoincarePoint(1.0, 0.0)
    with pytest.raises(DomainError):
        hyp_distance((0, 0), (0.6, 0.8))


@settings(max_examples=200, deadline=None)
@given(disk_point(), disk_point(), disk_point())
def test_distance_metric_axioms(u, v, w):
    duv = hyp_distance(u, v)
    assert duv >= 0
    assert duv == pytest.approx(hyp_distance(v, u), abs=1e-12)
    assert hyp_distance(u, w) <= duv + hyp_distance(v, w) + 1e-9


def test_areas_against_quadrature():
    assert hyp_area(None) == 0
    assert hyp_area(HypDisk((0, 0), math.log(3))) == pytest.approx(4 * math.pi / 3, rel=1e-12)
    sq = Rect((0, 0), 0.1, 0.1, 0.0, "x")
    assert hyp_area(sq) == pytest.approx(SQUARE_01_AREA, abs=1e-9)
    assert hyp_area_quad(sq) == pytest.approx(SQUARE_01_AREA, abs=1e-9)
    R = Rect.from_bounds(0.2, -0.1, 0.5, 0.3)
    assert hyp_area(R) == pytest.approx(RECT_AREA, abs=1e-9)


def test_area_riemann_oracle():
    n = 2000
    t = (np.arange(n) + 0.5) / n * 0.1
    x, y = np.meshgrid(t, t)
    riemann = float(np.sum(density(np.stack([x, y], -1)))) * (0.1 / n) ** 2
    assert hyp_area(Rect((0, 0), 0.1, 0.1, 0.0, "x")) == pytest.approx(riemann, abs=1e-8)


def test_hyp_circle_to_euclid():
    c = hyp_circle_to_euclid((0, 0), math.log(3))
    assert c.center == pytest.approx((0, 0), abs=1e-15) and c.radius == pytest.approx(0.5, abs=1e-14)
    assert hyp_circle_to_euclid((0.2, 0.1), 0.0).radius == 0.0
    # least-squares circle fit through points generated at distance 0.5 from (0.5, 0)
    ang = np.linspace(0, 2 * np.pi, 100, endpoint=False)
    pts = []
    for a in ang:
        d = np.array([math.cos(a), math.sin(a)])
        lo, hi = 0.0, 0.5
        for _ in range(200):
            mid = 0.5 * (lo + hi)
            lo, hi = (mid, hi) if hyp_distance((0.5, 0), np.array([0.5, 0]) + mid * d) < 0.5 else (lo, mid)
        pts.append(np.array([0.5, 0]) + lo * d)
    pts = np.array(pts)
    A = np.c_[2 * pts, np.ones(len(pts))]
    sol, *_ = np.linalg.lstsq(A, np.sum(pts**2, axis=1), rcond=None)
    cx, cy = sol[:2]
    r = math.sqrt(sol[2] + cx * cx + cy * cy)
    got = hyp_circle_to_euclid((0.5, 0), 0.5)
    assert got.center == pytest.approx((cx, cy), abs=1e-9)
    assert got.radius == pytest.approx(r, abs=1e-9)


def test_isometry_basics():
    I = DiskIsometry.identity()
    u = np.array([[0.3, -0.2]])
    assert np.allclose(I(u), u)
    phi = DiskIsometry.to_origin((0.4, 0.1), theta=0.7)
    assert np.allclose(phi(np.array([[0.4, 0.1]])), 0, atol=1e-15)
    assert np.allclose(phi.inverse()(phi(u)), u, atol=1e-13)


def test_isometry_preserves_distance_random():
    rng = np.random.default_rng(11)
    n = 10_000
    r = 0.95 * np.sqrt(rng.random((n, 3)))
    a = rng.uniform(0, 2 * np.pi, (n, 3))
    pts = np.stack([r * np.cos(a), r * np.sin(a)], -1)
    worst = 0.0
    for k in range(0, n, 500):
        phi = DiskIsometry(theta=float(rng.uniform(0, 6.3)), anchor=tuple(pts[k, 2]), reflective=bool(k % 2))
        u, v = pts[k:k + 500, 0], pts[k:k + 500, 1]
        worst = max(worst, float(np.max(np.abs(hyp_distance(phi(u), phi(v)) - hyp_distance(u, v)))))
    assert worst < 1e-9


def test_triangle_777():
    T = triangle_777()
    ang = triangle_angles(T)
    assert np.allclose(ang, 2 * math.pi / 7, atol=1e-10)
    assert ang.sum() < math.pi
    for i in range(3):
        assert hyp_distance(T[i], T[(i + 1) % 3]) == pytest.approx(SIDE_777, abs=1e-10)
    assert triangle_side_length() == pytest.approx(SIDE_777, abs=1e-12)
    assert np.allclose(T.mean(axis=0), 0, atol=1e-12)


def test_geodesics_orthogonal_to_boundary():
    rng = np.random.default_rng(3)
    for _ in range(50):
        u, v = 0.9 * (rng.random((2, 2)) - 0.5)
        g = geodesic_through(u, v)
        if g.is_diameter:
            continue
        c = np.asarray(g.center)
        assert c @ c == pytest.approx(g.radius**2 + 1, rel=1e-9)
        assert np.hypot(*(u - c)) == pytest.approx(g.radius, rel=1e-9)
        assert np.allclose(g.reflect(g.reflect(u[None]))[0], u, atol=1e-12)


def test_density_lipschitz():
    # numeric maximum of |f'(s)| on [0, 0.5]
    s = np.linspace(0, 0.5, 100_001)
    fprime = 16 * s / (1 - s * s) ** 3
    assert density_lipschitz(0.5) == pytest.approx(fprime.max(), rel=1e-12)
    assert density_lipschitz(0.5) == pytest.approx(8 / 0.421875, rel=1e-14)


def test_rect_helpers():
    R = Rect((0, 0), 2, 1)
    assert R.crossing_direction() == "x"
    assert Rect((0, 0), 1, 2).crossing_direction() == "y"
    with pytest.raises(ValueError):
        Rect((0, 0), 1, 1)
    assert R.contains(np.array([[1, 0.5], [3, 0.5]])).tolist() == [True, False]
    assert interior_angle((0, 0), (0.1, 0), (0, 0.1)) == pytest.approx(math.pi / 2)
    assert Circle((0, 0), 0.5).contains(np.array([[0.1, 0.1]]))[0]


def test_repeated_rows():
    pts = np.array([[0, 1], [0, 1], [1, 2], [0, 2], [1, 2], [0, 1.0]])
    assert repeated_rows(pts).tolist() == [1, 4, 5]
    assert len(repeated_rows(np.random.default_rng(0).random((1000, 2)))) == 0
    same_x = np.array([[0.5, 0.1], [0.5, 0.2], [0.5, 0.1]])
    assert repeated_rows(same_x).tolist() == [2]
