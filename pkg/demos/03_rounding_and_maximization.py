"""Continuous greedy, swap rounding, and the full maximization pipeline.

    python3 demos/03_rounding_and_maximization.py
"""
from fractions import Fraction

import numpy as np

from negdep.core import coverage, marginals, multilinear
from negdep.dependence import check_ncd, check_wnr
from negdep.dominance import check_dominance
from negdep.optimize import (Matroid, basis_decomposition, brute_force_max, continuous_greedy,
                             fractional_from_decomposition, maximize_submodular,
                             swap_round_distribution)

F = Fraction

# Five elements covering a five-item universe (weights 4, 4, 3, 3, 2), choose two.
# The first three overlap, so the gradient leader changes during the run and
# the fractional point is not a vertex.
f = coverage(5, [0b00011, 0b00111, 0b00110, 0b01000, 0b10000], [4, 4, 3, 3, 2])
M = Matroid.uniform(5, 2)
best, opt = brute_force_max(f, M)
print(f"OPT = {opt} at {bin(best)}")

sol = continuous_greedy(f, M, 1, steps=100)
print("continuous greedy point:", [f"{float(v):.3f}" for v in sol.x])
print(f"F(x) = {float(multilinear(f, sol.x)):.3f}, decomposition identity holds: {sol.check()}")

vals = [float(f(maximize_submodular(f, M, 100, seed=s))) for s in range(2000)]
print(f"mean over 2000 rounded draws: {np.mean(vals):.3f} ({np.mean(vals) / float(opt):.3f} of OPT)")

# Swap rounding is exact to enumerate. On small base points it comes out WNR ...
x = [F(3, 4), F(1, 2), F(1, 2), F(1, 4)]
D = swap_round_distribution(Matroid.uniform(4, 2),
                            fractional_from_decomposition(4, basis_decomposition(Matroid.uniform(4, 2), x)))
print(f"\nswap rounding of {[str(v) for v in x]} on uniform(4,2): WNR {check_wnr(D).holds}")

# ... but not always. This point on uniform(5,2) gives a law that is NCD and
# dominant, yet fails weak negative regression.
x = [F(13, 27), F(13, 27), F(8, 27), F(4, 9), F(8, 27)]
U = Matroid.uniform(5, 2)
D = swap_round_distribution(U, fractional_from_decomposition(5, basis_decomposition(U, x)))
w = check_wnr(D)
print(f"swap rounding of {[str(v) for v in x]} on uniform(5,2):")
print(f"  marginals preserved: {list(marginals(D)) == x}")
print(f"  WNR {w.holds} (element {w.witness.data['element']}, margin {w.witness.margin}), "
      f"NCD {check_ncd(D).holds}, dominance {check_dominance(D).holds}")
