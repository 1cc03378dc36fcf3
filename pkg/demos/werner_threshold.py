"""
Werner states and the radius-one threshold
==========================================

A Werner state mixes the singlet with white noise. Its critical radius has
the closed form 1/(2p), so the verdict flips at p = 1/2.
"""

import numpy as np

from qsteer import qstate, radius

# Pauli coordinates of a Werner state: Theta = diag(1, -p, -p, -p)
state = qstate.werner(0.4)
print(np.round(state.theta, 3))

# the EPR map sends Alice's projector (1, x) to Bob's conditional state
emap = qstate.epr_map(state)
print("outcome for x = e_z:", qstate.steering_outcome(emap, [0, 0, 1]))

for p in (0.3, 0.45, 0.5, 0.55, 0.8):
    r = radius.critical_radius(qstate.werner(p))
    print(f"p = {p:.2f}  R = {r.value:.6f}  {r.verdict}")
