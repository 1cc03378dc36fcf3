"""
Support function of a box section
=================================

The section of the box by Alice's hyperplane is never built explicitly. Its
support in a direction d is a continuous knapsack, which here is compared
with a linear-programming solve.
"""

import numpy as np
from scipy.optimize import linprog

from qsteer import geometry

rng = np.random.default_rng(0)
t = rng.uniform(0.05, 0.5, 8)
v = rng.normal(size=(8, 3))
d = np.array([0.0, 0.6, 0.8])

section = geometry.PulledBackSection(t, v)
value, beta = geometry.section_support(section, d, want_beta=True)
print("knapsack:", value)
print("beta:", np.round(beta, 4))  # at most one fractional entry

lp = linprog(-(v @ d), A_eq=[t], b_eq=[1.0], bounds=[(0, 1)] * 8, method="highs")
print("linprog :", -lp.fun)
