"""Coupling of the hyperbolic (lam, p) marked process with a Euclidean (mu, p_new) one.

On a small region A the two are built from three independent inhomogeneous
Poisson processes per color so that, deterministically on A, the Euclidean
black points are a subset of the hyperbolic black points and the hyperbolic
white points are a subset of the Euclidean white points.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Optional

import numpy as np

from .geometry import Circle, HypDisk, Rect, density, density_lipschitz
from .pointprocess import (
    MarkedConfiguration,
    _max_density,
    check_inside_disk,
    sample_inhomogeneous,
    window_contains,
    write_points_csv,
)
from .rng import make_rng

PROCESS_NAMES = ("P0", "P1", "P2", "P0w", "P1w", "P2w")


def continuity_scale(r: float, p: float, p_new: float):
    """(t, delta_abs): points of B(o, r) closer than t have densities within delta_abs.

    delta_abs is half of the largest tolerance the white-side inequality allows
    when the density is at least 4, and t divides it by the Lipschitz constant
    of the density on B(o, r).
    """
    if not 0.0 < r < 1.0:
        raise ValueError("r must lie in (0, 1)")
    if not 0.0 < p_new < p < 1.0:
        raise ValueError("need 0 < p_new < p < 1")
    delta_abs = 2.0 * (p - p_new) / (1.0 - p)
    return delta_abs / density_lipschitz(r), delta_abs


def region_min_norm_point(A) -> np.ndarray:
    """Point of the closed region nearest the origin."""
    if isinstance(A, Rect):
        return A.nearest_to_origin()
    if isinstance(A, (Circle, HypDisk)):
        c = A.euclid() if isinstance(A, HypDisk) else A
        center = np.asarray(c.center, dtype=float)
        n = math.hypot(*center)
        if n <= c.radius:
            return np.zeros(2)
        return center * (1.0 - c.radius / n)
    poly = np.asarray(A, dtype=float).reshape(-1, 2)
    q = np.roll(poly, -1, axis=0)
    cr = poly[:, 0] * q[:, 1] - poly[:, 1] * q[:, 0]
    if np.all(cr >= 0) or np.all(cr <= 0):
        return np.zeros(2)
    e = q - poly
    t = np.clip(-np.einsum("ij,ij->i", poly, e) / np.einsum("ij,ij->i", e, e), 0.0, 1.0)
    near = poly + t[:, None] * e
    return near[np.argmin(np.hypot(*near.T))]


def region_max_norm(A) -> float:
    if isinstance(A, Rect):
        return A.max_norm()
    if isinstance(A, (Circle, HypDisk)):
        c = A.euclid() if isinstance(A, HypDisk) else A
        return math.hypot(*c.center) + c.radius
    return float(np.max(np.hypot(*np.asarray(A, dtype=float).reshape(-1, 2).T)))


def region_diameter(A) -> float:
    if isinstance(A, Rect):
        return A.diameter()
    if isinstance(A, (Circle, HypDisk)):
        c = A.euclid() if isinstance(A, HypDisk) else A
        return 2.0 * c.radius
    poly = np.asarray(A, dtype=float).reshape(-1, 2)
    d = poly[:, None, :] - poly[None, :, :]
    return float(np.max(np.hypot(d[..., 0], d[..., 1])))


def region_contains(A, pts) -> np.ndarray:
    pts = np.asarray(pts, dtype=float).reshape(-1, 2)
    if isinstance(A, (Rect, Circle, HypDisk)):
        return window_contains(A, pts)
    poly = np.asarray(A, dtype=float).reshape(-1, 2)
    q = np.roll(poly, -1, axis=0)
    e = q - poly
    rel = pts[:, None, :] - poly[None, :, :]
    cr = e[None, :, 0] * rel[..., 1] - e[None, :, 1] * rel[..., 0]
    return np.all(cr >= 0, axis=1) | np.all(cr <= 0, axis=1)


def coupling_mu(A, lam: float) -> float:
    """lam times the smallest density over A (attained at the point nearest the origin)."""
    return float(lam * density(region_min_norm_point(A)))


@dataclass
class CouplingSpec:
    r: float
    p: float
    p_new: float
    A: object
    lam: float
    t: Optional[float] = None
    delta_abs: Optional[float] = None
    mu: float = field(init=False)

    def __post_init__(self):
        t, d = continuity_scale(self.r, self.p, self.p_new)
        if self.t is None:
            self.t = t
        if self.delta_abs is None:
            self.delta_abs = d
        if not self.t > 0:
            raise ValueError("t must be positive")
        if not self.lam > 0:
            raise ValueError("lam must be positive")
        if region_diameter(self.A) > self.t:
            raise ValueError("region diameter exceeds t")
        if region_max_norm(self.A) > self.r:
            raise ValueError("region leaves B(o, r)")
        self.mu = coupling_mu(self.A, self.lam)

    @classmethod
    def random(cls, rng, lam_range=(0.5, 200.0)) -> "CouplingSpec":
        """A random admissible spec: square A of diameter t placed inside B(o, r)."""
        rng = make_rng(rng)
        r = rng.uniform(0.05, 0.95)
        p = rng.uniform(0.05, 0.95)
        p_new = rng.uniform(0.01, 0.99) * p
        t, _ = continuity_scale(r, p, p_new)
        side = min(t, r) / math.sqrt(2) * rng.uniform(0.2, 1.0)
        reach = r - side * math.sqrt(2)
        rad = reach * math.sqrt(rng.random())
        ang = rng.uniform(0, 2 * math.pi)
        corner = (rad * math.cos(ang) - side / 2, rad * math.sin(ang) - side / 2)
        A = Rect(corner, side, side, 0.0, "x")
        lam = math.exp(rng.uniform(*np.log(lam_range)))
        return cls(r, p, p_new, A, lam)


def coupling_intensities(spec: CouplingSpec, pts) -> dict:
    """The six intensities at the given points, keyed by process name."""
    f = density(np.asarray(pts, dtype=float))
    lam, mu, p, q = spec.lam, spec.mu, spec.p, spec.p_new
    phi0 = np.minimum(q * mu, p * lam * f)
    psi0 = np.minimum((1 - p) * lam * f, (1 - q) * mu)
    return {
        "P0": phi0,
        "P1": q * mu - phi0,
        "P2": p * lam * f - phi0,
        "P0w": psi0,
        "P1w": (1 - p) * lam * f - psi0,
        "P2w": (1 - q) * mu - psi0,
    }


@dataclass
class CoupledSample:
    processes: dict
    spec: CouplingSpec
    window: object = None

    @property
    def Z_b(self):
        """Hyperbolic black points, intensity p lam f."""
        return np.concatenate([self.processes["P0"], self.processes["P2"]])

    @property
    def Z_tilde_b(self):
        """Euclidean black points, intensity p_new mu."""
        return np.concatenate([self.processes["P0"], self.processes["P1"]])

    @property
    def Z_w(self):
        """Hyperbolic white points, intensity (1 - p) lam f."""
        return np.concatenate([self.processes["P0w"], self.processes["P1w"]])

    @property
    def Z_tilde_w(self):
        """Euclidean white points, intensity (1 - p_new) mu."""
        return np.concatenate([self.processes["P0w"], self.processes["P2w"]])

    def hyperbolic_config(self) -> MarkedConfiguration:
        b, w = self.Z_b, self.Z_w
        return MarkedConfiguration(np.concatenate([b, w]), np.r_[np.ones(len(b), bool), np.zeros(len(w), bool)],
                                   self.window)

    def euclidean_config(self) -> MarkedConfiguration:
        b, w = self.Z_tilde_b, self.Z_tilde_w
        return MarkedConfiguration(np.concatenate([b, w]), np.r_[np.ones(len(b), bool), np.zeros(len(w), bool)],
                                   self.window)

    def to_csv(self, fh=None) -> str:
        pts, black, names = [], [], []
        for name in PROCESS_NAMES:
            x = self.processes[name]
            pts.append(x)
            black += [not name.endswith("w")] * len(x)
            names += [name] * len(x)
        cfg = MarkedConfiguration(np.concatenate(pts), np.array(black, dtype=bool))
        return write_points_csv(cfg, fh, extra={"process": names})


def build_coupling(spec: CouplingSpec, window, seed) -> CoupledSample:
    """Sample the six processes on ``window`` (which must contain A) by thinning."""
    check_inside_disk(window)
    if not np.all(window_contains(window, _region_outline(spec.A))):
        raise ValueError("window must contain A")
    fmax = spec.lam * _max_density(window)
    bounds = {
        "P0": spec.p_new * spec.mu,
        "P1": spec.p_new * spec.mu,
        "P2": spec.p * fmax,
        "P0w": (1 - spec.p_new) * spec.mu,
        "P1w": (1 - spec.p) * fmax,
        "P2w": (1 - spec.p_new) * spec.mu,
    }
    procs = {}
    for k, name in enumerate(PROCESS_NAMES):
        rng = make_rng(seed, k)
        procs[name] = sample_inhomogeneous(lambda u, nm=name: coupling_intensities(spec, u)[nm],
                                           bounds[name], window, rng)
    return CoupledSample(procs, spec, window)


def _region_outline(A) -> np.ndarray:
    if isinstance(A, Rect):
        return A.corners()
    if isinstance(A, (Circle, HypDisk)):
        c = A.euclid() if isinstance(A, HypDisk) else A
        t = np.linspace(0, 2 * np.pi, 64, endpoint=False)
        return np.asarray(c.center) + c.radius * np.stack([np.cos(t), np.sin(t)], axis=-1) * (1 - 1e-12)
    return np.asarray(A, dtype=float).reshape(-1, 2)


def _rows(x) -> set:
    return {(float(a), float(b)) for a, b in np.asarray(x).reshape(-1, 2)}


def verify_domination(sample: CoupledSample, A) -> bool:
    """Exact set inclusions on A: Z~_b in Z_b and Z_w in Z~_w."""
    def on_a(x):
        x = np.asarray(x).reshape(-1, 2)
        return x[region_contains(A, x)] if len(x) else x

    return (_rows(on_a(sample.Z_tilde_b)) <= _rows(on_a(sample.Z_b))
            and _rows(on_a(sample.Z_w)) <= _rows(on_a(sample.Z_tilde_w)))
