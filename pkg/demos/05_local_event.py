"""How much intensity makes every small grid square near A occupied.

Compares the Monte Carlo frequency of the local event with the product
formula over grid squares and finds the intensity where it reaches 0.99.
"""
from _common import say
from hypvoronoi import Rect
from hypvoronoi.experiments import estimate_local_prob, local_threshold_lambda

A = Rect((-0.1, -0.1), 0.2, 0.2, 0.0, "x")
delta, divisor = 0.05, 20
lam99 = local_threshold_lambda(A, delta, 0.99, "hyp", divisor)
say(f"grid pitch delta/{divisor}; the product formula reaches 0.99 at lam = {lam99:.0f}")
for lam in (0.5 * lam99, 0.75 * lam99, lam99):
    est = estimate_local_prob(A, delta, lam, "hyp", n=400, seed=2, divisor=divisor)
    say(f"  lam={lam:9.0f}  Monte Carlo {est.record.estimate:.3f}  formula {est.analytic:.3f}")
