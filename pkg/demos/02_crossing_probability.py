"""Crossing probabilities grow with the intensity once p exceeds 1/2.

Estimates the probability of a black long crossing of a 2x1 rectangle at
p = 0.6 for increasing intensity, first in the Euclidean plane, then for a
hyperbolic rectangle near the origin.
"""
from _common import say
from hypvoronoi import Rect, estimate_crossing

euc = Rect((0.0, 0.0), 2.0, 1.0)
hyp = Rect((-0.5, -0.25), 1.0, 0.5)
for metric, R, margin in (("euc", euc, 0.25), ("hyp", hyp, 0.15)):
    say(f"{metric}:")
    for lam in (1, 4, 16, 64):
        rec = estimate_crossing(lam, 0.6, metric, R, margin, n=100, seed=lam)
        say(f"  lam={lam:>3}  P(cross) ~ {rec.estimate:.2f}  95% CI [{rec.ci[0]:.2f}, {rec.ci[1]:.2f}]")
