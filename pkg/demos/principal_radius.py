"""
Principal radius of a discretized ansatz
========================================

The closed form for T-states comes from the Jevtic density. Putting that
density on a spiral grid and measuring the box section numerically gives
the same number, up to discretization.
"""

import numpy as np

from qsteer import ansatz, qstate, radius

t = np.array([-0.9, -0.8, -0.7])
emap = qstate.epr_map(qstate.tstate(*t))

density = ansatz.normalize_jevtic(t)
print(f"N_T = {density.n_t:.12f}  (quadrature error {density.error_estimate:.1e})")
exact = radius.tstate_critical_radius(t)
print(f"closed form 2 pi N_T |det T| = {exact.value:.6f}")

for count in (256, 1024, 4096):
    r = radius.principal_radius(ansatz.jevtic_grid(t, count), emap)
    print(f"{count:5d} atoms: r = {r.value:.6f}  gap {exact.value - r.value:.2e}")

# a flat box (one antipodal pair) cannot hold a solid ellipsoid
print("antipodal pair:", radius.principal_radius(ansatz.antipodal_pair(), emap).value)
