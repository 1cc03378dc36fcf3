"""
Searching for a better ansatz
=============================

For states without a closed form the package ascends the principal radius
over the weights of a fixed grid. On a T-state the optimum is known, which
shows how close the ascent gets.
"""

from qsteer import qstate, radius

t = (0.3, 0.25, -0.9)
emap = qstate.epr_map(qstate.tstate(*t))
trace = []
measure, r = radius.optimize_ansatz(emap, grid=1024, iters=100, seed=0,
                                    log=lambda it, val: trace.append(val))
print("radius every 20 iterations:", [round(x, 4) for x in trace[::20]])
print(r.notes)
print(f"final {r.value:.5f} vs closed form {radius.closed_form_value(t):.5f}")

# a state that is not a T-state only ever gets a lower bound
state = qstate.from_theta([[1, 0, 0, 0.2], [0, -0.5, 0, 0], [0, 0, -0.5, 0], [0, 0, 0, -0.5]])
budget = radius.OptimizerBudget(grid=512, iters=60)
print(radius.critical_radius(state, budget))
