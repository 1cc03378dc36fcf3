"""Steerability of two-qubit states under projective measurements.

The critical radius of local models decides steerability: a state is
unsteerable from Alice's side exactly when the radius is at least one.
"""

from .ansatz import (JevticDensity, SphereMeasure, evaluate_jevtic, fibonacci_grid,
                     jevtic_grid, normalize_jevtic)
from .geometry import (PulledBackSection, SteeringBox, boundary_point, box_membership,
                       build_box, pull_back, section_support, solve_lambda)
from .lhs_sim import ResponseModel, build_response, simulate, verify_response
from .qstate import (EprMap, TStateForm, TwoQubitState, canonicalize_tstate, epr_map,
                     from_matrix, from_theta, steering_outcome, werner)
from .radius import (OptimizerBudget, RadiusResult, critical_radius, optimize_ansatz,
                     perturbation_test, principal_radius, tstate_critical_radius)

__version__ = "0.1.0"
