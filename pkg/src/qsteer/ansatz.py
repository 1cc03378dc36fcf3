"""Probability measures on Bob's Bloch sphere.

An ansatz for the local hidden states is a measure ``mu`` on the unit sphere;
each atom ``(w, n)`` stands for the subnormalized pure state
``w (I + n.sigma) / 2``. The measures here are discrete (Fibonacci grids)
except for the Jevtic density, which is kept analytic so it can be evaluated
on any grid and normalized by quadrature.
"""

from dataclasses import dataclass, field

import numpy as np

from ._projection import project_affine_box
from .errors import BadCount, DegenerateT, EmptyMeasure, NotUnitVector, QuadratureNotConverged
from .qstate import check_unit

GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))
WEIGHT_SUM_TOL = 1e-10
BARYCENTER_TOL = 1e-3


@dataclass(frozen=True, eq=False)
class SphereMeasure:
    """Discrete measure: ``weights[i]`` sits at unit vector ``points[i]``.

    A symmetric measure of ``2h`` atoms stores its atoms so that atom ``i``
    and atom ``i + h`` are antipodal with equal weight.
    """

    weights: np.ndarray
    points: np.ndarray
    symmetric: bool = False
    barycenter_target: np.ndarray = field(default_factory=lambda: np.zeros(3))
    label: str = "custom"

    def __post_init__(self):
        w = np.asarray(self.weights, dtype=float)
        n = np.asarray(self.points, dtype=float)
        if w.size == 0:
            raise EmptyMeasure("measure has no atoms")
        if n.shape != (w.size, 3):
            raise ValueError(f"points must have shape ({w.size}, 3), got {n.shape}")
        if np.any(w < 0):
            raise ValueError(f"negative weight {w.min():.3e}")
        if np.abs(np.linalg.norm(n, axis=1) - 1).max() > 1e-12:
            raise NotUnitVector("every atom must sit on the unit sphere")
        object.__setattr__(self, "weights", w)
        object.__setattr__(self, "points", n)
        object.__setattr__(self, "barycenter_target", np.asarray(self.barycenter_target, dtype=float))

    @property
    def size(self):
        return self.weights.size

    @property
    def barycenter(self):
        return self.weights @ self.points

    def check(self, weight_tol=WEIGHT_SUM_TOL, barycenter_tol=BARYCENTER_TOL):
        total = self.weights.sum()
        if abs(total - 1.0) > weight_tol:
            raise ValueError(f"weights sum to {total!r}, not 1")
        gap = np.linalg.norm(self.barycenter - self.barycenter_target)
        if gap > barycenter_tol:
            raise ValueError(f"barycenter misses its target by {gap:.3e}")
        if self.symmetric:
            h = self.size // 2
            if self.size % 2 or not (np.array_equal(self.points[h:], -self.points[:h])
                                     and np.array_equal(self.weights[h:], self.weights[:h])):
                raise ValueError("symmetric measure must store antipodal pairs (i, i + m/2)")
        return self

    def with_weights(self, weights, label=None):
        return SphereMeasure(weights, self.points, self.symmetric, self.barycenter_target,
                             label=self.label if label is None else label)


def fibonacci_points(count):
    """``count`` quasi-uniform unit vectors on the full sphere (spiral lattice)."""
    k = np.arange(count)
    z = 1.0 - (2.0 * k + 1.0) / count
    r = np.sqrt(1.0 - z * z)
    phi = GOLDEN_ANGLE * k
    return np.column_stack([r * np.cos(phi), r * np.sin(phi), z])


def symmetric_fibonacci_points(count):
    """Upper half of a ``count``-point spiral lattice followed by its antipodes."""
    if count < 2 or count % 2:
        raise BadCount(f"symmetric grid needs an even count >= 2, got {count}")
    upper = fibonacci_points(count)[: count // 2]
    return np.vstack([upper, -upper])


def fibonacci_grid(count, density=None, symmetric=True, barycenter_target=None):
    """Discretize the uniform measure, or ``density``, on a spiral grid.

    Spiral cells have equal area, so weights are proportional to the density
    at the nodes. With ``symmetric=True`` the grid is built from antipodal
    pairs and the weights of each pair are averaged.
    """
    if count < 2:
        raise BadCount(f"count must be >= 2, got {count}")
    points = symmetric_fibonacci_points(count) if symmetric else fibonacci_points(count)
    if density is None:
        weights = np.full(count, 1.0 / count)
        label = f"uniform:{count}"
    else:
        weights = evaluate_jevtic(density, points, check=False)
        label = f"jevtic:{count}"
    if symmetric:
        h = count // 2
        pair = 0.5 * (weights[:h] + weights[h:])
        weights = np.concatenate([pair, pair])
    weights = weights / weights.sum()
    target = np.zeros(3) if barycenter_target is None else np.asarray(barycenter_target, dtype=float)
    return SphereMeasure(weights, points, symmetric, target, label=label)


def antipodal_pair(axis=(0.0, 0.0, 1.0)):
    n = check_unit(np.asarray(axis, dtype=float))
    return SphereMeasure(np.array([0.5, 0.5]), np.vstack([n, -n]), True, label="antipodal")


@dataclass(frozen=True, eq=False)
class JevticDensity:
    """``J(n) = n_t / (n^T T^-2 n)^2`` with ``T = diag(t_diag)``."""

    t_diag: np.ndarray
    n_t: float
    error_estimate: float = 0.0


def _quadratic_form(t_diag, n):
    inv2 = 1.0 / np.asarray(t_diag, dtype=float) ** 2
    return np.asarray(n) ** 2 @ inv2


def sphere_product_rule(order):
    """Gauss-Legendre in ``z`` times trapezoid in azimuth; weights sum to 4 pi."""
    z, wz = np.polynomial.legendre.leggauss(order)
    nphi = 2 * order
    phi = 2 * np.pi * np.arange(nphi) / nphi
    r = np.sqrt(1.0 - z * z)
    pts = np.stack([
        np.outer(r, np.cos(phi)),
        np.outer(r, np.sin(phi)),
        np.broadcast_to(z[:, None], (order, nphi)),
    ], axis=-1).reshape(-1, 3)
    w = np.outer(wz, np.full(nphi, 2 * np.pi / nphi)).ravel()
    return pts, w


def normalize_jevtic(t_diag, rel_tol=1e-8, start_order=16, max_order=4096):
    """Normalize the Jevtic density by nested spherical quadrature.

    The order of a product Gauss rule is doubled until two successive
    estimates of ``int dS (n^T T^-2 n)^-2`` agree to ``rel_tol``. The
    difference of the last two levels is kept as the error estimate.
    """
    t = np.asarray(t_diag, dtype=float)
    if t.shape != (3,):
        raise ValueError(f"t_diag must be a 3-vector, got shape {t.shape}")
    if np.any(np.abs(t) < 1e-9):
        raise DegenerateT(f"correlation entries {t} include |t| < 1e-9")
    previous = None
    order = start_order
    while order <= max_order:
        pts, w = sphere_product_rule(order)
        integral = w @ _quadratic_form(t, pts) ** -2
        if previous is not None and abs(integral - previous) <= rel_tol * abs(integral):
            rel_err = abs(integral - previous) / abs(integral)
            return JevticDensity(t_diag=t.copy(), n_t=float(1.0 / integral), error_estimate=float(rel_err))
        previous = integral
        order *= 2
    raise QuadratureNotConverged(f"normalization for t = {t} did not reach rel_tol {rel_tol:.1e}")


def evaluate_jevtic(density, n, check=True):
    n = np.asarray(n, dtype=float)
    if check:
        norms = np.linalg.norm(np.atleast_2d(n), axis=1)
        if np.abs(norms - 1).max() > 1e-12:
            raise NotUnitVector(f"|n| deviates from 1 by {np.abs(norms - 1).max():.3e}")
    return density.n_t / _quadratic_form(density.t_diag, n) ** 2


def jevtic_grid(t_diag, count=4096, rel_tol=1e-8):
    """Discretized Jevtic ansatz for a diagonal correlation matrix."""
    return fibonacci_grid(count, density=normalize_jevtic(t_diag, rel_tol))


def project_weights(weights, points, target, max_rounds=None):
    """Nearest weights (Euclidean) with ``sum w = 1``, ``w >= 0``, ``sum w n = target``.

    Returns ``(weights, residual)``; a residual above ~1e-12 means the
    constraint set is empty for these points.
    """
    A = np.vstack([np.ones(len(weights)), np.asarray(points, dtype=float).T])
    c = np.concatenate([[1.0], np.asarray(target, dtype=float)])
    return project_affine_box(np.asarray(weights, dtype=float), A, c, lo=0.0, hi=np.inf)


def perturb_symmetric(measure, v):
    """Add a centrally symmetric, zero-sum perturbation to a symmetric measure.

    ``v`` is indexed like the atoms. It is rejected unless it is symmetric under
    the antipodal pairing, sums to zero and keeps every weight non-negative.
    """
    v = np.asarray(v, dtype=float)
    if not measure.symmetric:
        raise ValueError("base measure must be symmetric")
    h = measure.size // 2
    if v.shape != measure.weights.shape or not np.allclose(v[:h], v[h:], atol=1e-15, rtol=0):
        raise ValueError("perturbation must be centrally symmetric")
    if abs(v.sum()) > 1e-12:
        raise ValueError(f"perturbation must sum to zero, sums to {v.sum():.3e}")
    w = measure.weights + v
    if np.any(w < 0):
        raise ValueError("perturbation drives a weight negative")
    return measure.with_weights(w, label=measure.label + "+v")


def measure_from_atoms(atoms, barycenter_target=None, symmetric=False):
    """Build a measure from rows ``(weight, x, y, z)``."""
    atoms = np.atleast_2d(np.asarray(atoms, dtype=float))
    if atoms.size == 0:
        raise EmptyMeasure("no atoms given")
    if atoms.shape[1] != 4:
        raise ValueError(f"atoms must be rows of (weight, x, y, z), got width {atoms.shape[1]}")
    target = np.zeros(3) if barycenter_target is None else barycenter_target
    return SphereMeasure(atoms[:, 0].copy(), atoms[:, 1:].copy(), symmetric, target, label="file")


def fit_barycenter(measure, target, tol=1e-10):
    """Return ``measure`` with weights projected onto the principal-vertex constraints.

    A measure that already meets them to 1e-13 is returned unchanged.
    """
    target = np.asarray(target, dtype=float)
    if (np.linalg.norm(measure.barycenter - target) <= 1e-13
            and abs(measure.weights.sum() - 1.0) <= 1e-14):
        return measure
    w, res = project_weights(measure.weights, measure.points, target)
    if res > tol:
        raise ValueError(f"no weights on this grid reach Bloch vector {target} (residual {res:.2e})")
    return SphereMeasure(w, measure.points, False, target, label=measure.label)


def kl_project_weights(weights, points, target, max_iter=100, tol=1e-14):
    """Closest weights in relative entropy with ``sum w = 1`` and ``sum w n = target``.

    The solution is an exponential tilt ``w_i ∝ q_i exp(lam . n_i)``; ``lam``
    comes from Newton's method on the convex dual. Positivity is preserved
    automatically, which suits multiplicative updates.
    """
    q = np.asarray(weights, dtype=float)
    points = np.asarray(points, dtype=float)
    target = np.asarray(target, dtype=float)
    lam = np.zeros(3)
    w = q / q.sum()
    for _ in range(max_iter):
        z = points @ lam
        e = q * np.exp(z - z.max())
        w = e / e.sum()
        mean = w @ points
        r = mean - target
        if np.abs(r).max() <= tol:
            break
        cov = (points * w[:, None]).T @ points - np.outer(mean, mean)
        lam -= np.linalg.lstsq(cov + 1e-15 * np.eye(3), r, rcond=None)[0]
    return w
