"""Coupling a hyperbolic and a Euclidean marked process on a small square.

On a square A of diameter below the continuity scale t, the hyperbolic black
points contain the Euclidean black points of intensity p_new * mu and the
hyperbolic white points are contained in the Euclidean white points.
"""
from _common import say
from hypvoronoi import CouplingSpec, Rect, build_coupling, continuity_scale, verify_domination

r, p, q = 0.5, 0.6, 0.55
t, delta = continuity_scale(r, p, q)
say(f"density changes by less than {delta:.3f} over distances below t = {t:.5f}")
spec = CouplingSpec(r, p, q, Rect((0.2, 0.1), 0.6 * t, 0.6 * t, 0.0, "x"), lam=2.0e6)
say(f"mu = {spec.mu:.1f}, the smallest hyperbolic density on A times lam")
s = build_coupling(spec, spec.A.dilate(0.2 * spec.A.width), seed=1)
for name, pts in s.processes.items():
    say(f"  {name}: {len(pts)} points")
say("domination holds on A:", verify_domination(s, spec.A))
