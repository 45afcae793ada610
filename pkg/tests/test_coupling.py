import math

import numpy as np
import pytest

from hypvoronoi.coupling import (
    CoupledSample,
    CouplingSpec,
    build_coupling,
    continuity_scale,
    coupling_intensities,
    coupling_mu,
    region_contains,
    verify_domination,
)
from hypvoronoi.geometry import Circle, Rect, density
from hypvoronoi.rng import make_rng


def _spec(lam=2000.0, r=0.5, p=0.6, q=0.55, corner=(0.2, 0.1)):
    t, _ = continuity_scale(r, p, q)
    return CouplingSpec(r, p, q, Rect(corner, 0.6 * t, 0.6 * t, 0.0, "x"), lam)


def test_continuity_scale_values():
    t, d = continuity_scale(0.5, 0.6, 0.55)
    assert d == pytest.approx(0.25, abs=1e-14)
    assert t == pytest.approx(0.25 / (8 / 0.421875), rel=1e-12)
    assert t == pytest.approx(0.013184, abs=5e-7)
    ts = [continuity_scale(0.5, 0.6, 0.6 - e)[0] for e in (1e-1, 1e-3, 1e-6)]
    assert ts[0] > ts[1] > ts[2] and ts[2] < 1e-6
    with pytest.raises(ValueError):
        continuity_scale(0.5, 0.5, 0.6)


def test_continuity_stress():
    t, d = continuity_scale(0.5, 0.6, 0.55)
    rng = np.random.default_rng(0)
    n = 1_000_000
    r = 0.5 * np.sqrt(rng.random(n))
    a = rng.uniform(0, 2 * np.pi, n)
    u = np.c_[r * np.cos(a), r * np.sin(a)]
    step = rng.uniform(0, 0.999 * t, n)[:, None] * np.c_[np.cos(b := rng.uniform(0, 2 * np.pi, n)), np.sin(b)]
    v = u + step
    keep = np.hypot(*v.T) <= 0.5
    assert np.all(np.abs(density(u[keep]) - density(v[keep])) < d)


def test_coupling_mu():
    assert coupling_mu(Rect((-0.1, -0.1), 0.2, 0.2, 0.0, "x"), 3.0) == pytest.approx(12.0)
    A = Rect((0.3, -0.05), 0.1, 0.1, 0.0, "x")
    assert coupling_mu(A, 1.0) == pytest.approx(4 / 0.91**2, rel=1e-12)
    # dense sampling of f over A
    g = np.stack(np.meshgrid(np.linspace(0.3, 0.4, 201), np.linspace(-0.05, 0.05, 201)), -1).reshape(-1, 2)
    assert coupling_mu(A, 1.0) == pytest.approx(density(g).min(), rel=1e-12)
    assert coupling_mu(A, 2.0) == pytest.approx(2 * coupling_mu(A, 1.0))
    assert coupling_mu(Circle((0.5, 0.0), 0.2), 1.0) == pytest.approx(4 / 0.91**2)


def test_mu_grows_with_lambda():
    A = Rect((0.3, -0.05), 0.1, 0.1, 0.0, "x")
    mus = [coupling_mu(A, lam) for lam in (1, 10, 100, 1000)]
    assert all(b > a for a, b in zip(mus, mus[1:])) and mus[-1] > 1000


def test_spec_validation():
    t, _ = continuity_scale(0.5, 0.6, 0.55)
    with pytest.raises(ValueError):
        CouplingSpec(0.5, 0.6, 0.55, Rect((0, 0), 2 * t, 2 * t, 0.0, "x"), 1.0)
    with pytest.raises(ValueError):
        CouplingSpec(0.5, 0.6, 0.55, Rect((0.496, 0), 0.5 * t, 0.5 * t, 0.0, "x"), 1.0)


def test_phi1_and_psi1_vanish_on_A():
    for i in range(50):
        spec = CouplingSpec.random(make_rng(1, i))
        x0, y0, x1, y1 = spec.A.bounds()
        g = np.stack(np.meshgrid(np.linspace(x0, x1, 41), np.linspace(y0, y1, 41)), -1).reshape(-1, 2)
        I = coupling_intensities(spec, g)
        assert np.all(I["P1"] == 0.0)
        assert np.all(I["P1w"] == 0.0)
        assert all(np.all(v >= 0) for v in I.values())


def test_marginal_intensities_sum():
    spec = _spec()
    pts = np.random.default_rng(2).random((200, 2)) * 0.5
    I = coupling_intensities(spec, pts)
    f = density(pts)
    assert np.allclose(I["P0"] + I["P2"], spec.p * spec.lam * f)
    assert np.allclose(I["P0"] + I["P1"], spec.p_new * spec.mu)
    assert np.allclose(I["P0w"] + I["P1w"], (1 - spec.p) * spec.lam * f)
    assert np.allclose(I["P0w"] + I["P2w"], (1 - spec.p_new) * spec.mu)


def test_domination_and_negative_control():
    spec = _spec()
    W = spec.A.dilate(0.3 * spec.A.width)
    s = build_coupling(spec, W, 5)
    assert verify_domination(s, spec.A)
    assert len(s.Z_tilde_b) > 0
    bad = dict(s.processes)
    bad["P1"] = np.vstack([bad["P1"], spec.A.center[None]])
    assert not verify_domination(CoupledSample(bad, spec, W), spec.A)
    assert "process" in s.to_csv().splitlines()[0]


def test_random_specs_dominate():
    for i in range(200):
        spec = CouplingSpec.random(make_rng(3, i))
        assert verify_domination(build_coupling(spec, spec.A.dilate(0.1 * spec.A.width), make_rng(4, i)), spec.A)


def test_count_means():
    spec = _spec(lam=3000.0)
    A = spec.A
    counts = {"tb": [], "b": [], "w": [], "tw": []}
    for i in range(10_000):
        s = build_coupling(spec, A.dilate(0.01 * A.width), make_rng(6, i))
        for key, pts in (("tb", s.Z_tilde_b), ("b", s.Z_b), ("w", s.Z_w), ("tw", s.Z_tilde_w)):
            counts[key].append(int(np.sum(region_contains(A, pts))) if len(pts) else 0)
    area = A.width * A.height
    from hypvoronoi.geometry import hyp_area
    hyp = hyp_area(A)
    expect = {"tb": spec.p_new * spec.mu * area, "tw": (1 - spec.p_new) * spec.mu * area,
              "b": spec.p * spec.lam * hyp, "w": (1 - spec.p) * spec.lam * hyp}
    for k, m in expect.items():
        c = np.array(counts[k])
        assert abs(c.mean() - m) < 3 * math.sqrt(m / len(c)), k


def test_coupling_deterministic():
    spec = _spec()
    W = spec.A.dilate(0.2 * spec.A.width)
    a, b = build_coupling(spec, W, 9), build_coupling(spec, W, 9)
    assert all(np.array_equal(a.processes[k], b.processes[k]) for k in a.processes)
