"""
Playing the local hidden state strategy
=======================================

When every steering outcome fits in the box, Alice can fake the quantum
statistics: she draws a hidden atom, sends Bob its pure state and answers
from the response matrix G. The simulation compares the resulting
frequencies and conditional Bloch vectors with the quantum prediction.
"""

from qsteer import ansatz, lhs_sim, qstate
from qsteer.errors import OutcomeOutsideBox

emap = qstate.epr_map(qstate.werner(0.45))
measure = ansatz.fibonacci_grid(4096)
models = [lhs_sim.build_response(measure, emap, x) for x in lhs_sim.random_axes(5, seed=1)]
report = lhs_sim.simulate(models, emap, shots=200_000, seed=1)
for entry in report["measurements"]:
    print(entry["predicted_probability"][0], entry["simulated_probability"][0],
          f"z = {entry['z_probability']:+.2f}")
print("max |z|:", round(report["max_abs_z"], 2), " max residual:", report["max_residual"])

# a steerable Werner state leaves the box
try:
    lhs_sim.build_response(measure, qstate.epr_map(qstate.werner(0.8)), [0, 0, 1])
except OutcomeOutsideBox as exc:
    print("p = 0.8:", exc)
