"""
The Jevtic ansatz cannot be improved
====================================

Adding a centrally symmetric, zero-sum change to the Jevtic weights never
raises the principal radius beyond the discretization error.
"""

from qsteer import radius

report = radius.perturbation_test([-0.9, -0.8, -0.7], trials=20, seed=0)
print(report.to_dict())
print("largest radius after perturbation:", max(report.radii))
