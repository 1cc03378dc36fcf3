"""Principal and critical radii of local models, and the steerability verdict.

A state is unsteerable (projective measurements, Alice's side) exactly when
its critical radius ``R = sup_u r_u`` is at least one. For T-states ``R`` has
a closed form; for every other non-degenerate state the package only
produces lower bounds from explicit ansatz measures, and lower bounds are
never allowed to certify steerability.
"""

from dataclasses import dataclass, field

import numpy as np

from . import ansatz, geometry
from .errors import DegenerateMap, DegenerateT, NotTState
from .qstate import EprMap, TStateForm, TwoQubitState, canonicalize_tstate, epr_map

TSTATE_TOL = 1e-8
DEFAULT_DIRECTIONS = 8192

STEERABLE = "steerable"
UNSTEERABLE = "unsteerable"
MARGINAL = "marginal"
INCONCLUSIVE = "inconclusive"

TSTATE_CLOSED_FORM = "tstate_closed_form"
DISCRETE_ANSATZ = "discrete_ansatz"
OPTIMIZED_LOWER_BOUND = "optimized_lower_bound"
DEGENERATE_SEPARABLE = "degenerate_separable"


@dataclass
class RadiusResult:
    value: float
    method: str
    error_estimate: float
    verdict: str
    direction: np.ndarray | None = None
    ansatz: str = ""
    notes: str = ""

    def to_dict(self):
        value = self.value if np.isfinite(self.value) else None
        return {
            "value": value,
            "method": self.method,
            "error_estimate": self.error_estimate,
            "verdict": self.verdict,
            "direction": None if self.direction is None else [float(x) for x in self.direction],
            "ansatz": self.ansatz,
            "notes": self.notes,
        }


def verdict_for(value, error, exact):
    """Apply the radius-one threshold with an explicit error band.

    Exact values can land on either side or inside the band; lower bounds
    can only certify unsteerability.
    """
    if value - error >= 1.0:
        return UNSTEERABLE
    if not exact:
        return INCONCLUSIVE
    return STEERABLE if value + error < 1.0 else MARGINAL


def _tangent_basis(d):
    a = np.eye(3)[np.argmin(np.abs(d))]
    e1 = np.cross(d, a)
    e1 /= np.linalg.norm(e1)
    return e1, np.cross(d, e1)


def _refine(section, starts, values, step=0.05, min_step=1e-7, max_rounds=200):
    """Compass search on the sphere, run for all starting directions at once."""
    cur = starts.copy()
    cur_val = values.copy()
    steps = np.full(len(cur), step)
    angles = np.linspace(0.0, 2 * np.pi, 8, endpoint=False)
    stencil = np.column_stack([np.cos(angles), np.sin(angles)])
    for _ in range(max_rounds):
        active = steps > min_step
        if not active.any():
            break
        idx = np.nonzero(active)[0]
        trial = []
        for i in idx:
            e1, e2 = _tangent_basis(cur[i])
            pts = cur[i] + steps[i] * (stencil[:, :1] * e1 + stencil[:, 1:] * e2)
            trial.append(pts / np.linalg.norm(pts, axis=1, keepdims=True))
        trial = np.concatenate(trial)
        vals = geometry.section_supports(section, trial).value.reshape(len(idx), -1)
        best = vals.argmin(axis=1)
        for row, i in enumerate(idx):
            if vals[row, best[row]] < cur_val[i] - 1e-15:
                cur[i] = trial[row * len(angles) + best[row]]
                cur_val[i] = vals[row, best[row]]
            else:
                steps[i] *= 0.5
    return cur, cur_val


def _flat_normal(t, v):
    """Spatial normal of the hyperplane holding all generators, or None.

    Generators spanning less than four dimensions give a section with empty
    interior, whose inscribed ball has radius exactly zero.
    """
    gens = np.column_stack([t, v])
    # singular values squared, from the 4x4 Gram matrix
    lam, vecs = np.linalg.eigh(gens.T @ gens)
    if lam[0] > 1e-24 * lam[-1]:
        return None
    u = vecs[1:, 0]
    norm = np.linalg.norm(u)
    return u / norm if norm > 0 else np.array([0.0, 0.0, 1.0])


def min_support(section, directions=DEFAULT_DIRECTIONS, candidates=10, rotation=None):
    """Minimum of the section's support function over unit directions.

    Returns ``(value, direction, coarse_value)``: a quasi-uniform sweep picks
    the ``candidates`` lowest directions, which are then polished locally.
    A flat section short-circuits to its normal direction.
    """
    normal = _flat_normal(section.gen_t, section.gen_v)
    if normal is not None:
        pair = np.vstack([normal, -normal])
        vals = geometry.section_supports(section, pair).value
        i = int(np.argmin(vals))
        value = min(float(vals[i]), 0.0)
        return value, pair[i], value
    dirs = ansatz.fibonacci_points(directions)
    if rotation is not None:
        dirs = dirs @ rotation.T
    coarse = geometry.section_supports(section, dirs).value
    k = min(candidates, len(coarse))
    best = np.argsort(coarse, kind="stable")[:k]
    if k == 0 or candidates == 0:
        i = int(np.argmin(coarse))
        return float(coarse[i]), dirs[i], float(coarse[i])
    polished, pvals = _refine(section, dirs[best], coarse[best])
    i = int(np.argmin(pvals))
    return float(pvals[i]), polished[i], float(coarse[best[0]])


def principal_radius(measure, emap, directions=DEFAULT_DIRECTIONS, candidates=10, project=True):
    """Largest scaling of the steering ellipsoid that fits in the box section.

    The measure's weights are first projected so that its principal vertex
    is exactly Bob's reduced state. The error estimate is the improvement
    made by local polishing over the coarse sweep.
    """
    emap = emap if isinstance(emap, EprMap) else epr_map(emap)
    if emap.degenerate:
        raise DegenerateMap("principal radius needs a non-degenerate EPR map")
    if project:
        measure = ansatz.fit_barycenter(measure, emap.bob_bloch)
    section = geometry.pull_back(geometry.build_box(measure, emap), emap)
    value, direction, coarse = min_support(section, directions, candidates)
    value = max(value, 0.0)
    error = max(coarse - value, 0.0)
    return RadiusResult(
        value=value,
        method=DISCRETE_ANSATZ,
        error_estimate=error,
        verdict=verdict_for(value, error, exact=False),
        direction=direction,
        ansatz=measure.label,
    )


def closed_form_value(t_diag, rel_tol=1e-8):
    density = ansatz.normalize_jevtic(t_diag, rel_tol)
    return 2 * np.pi * density.n_t * abs(float(np.prod(density.t_diag)))


def tstate_critical_radius(form, rel_tol=1e-8):
    """Exact critical radius ``2 pi N_T |det T|`` of a T-state.

    Accepts a ``TStateForm`` or the diagonal ``(t1, t2, t3)`` directly.
    """
    t = np.asarray(form.t_diag if isinstance(form, TStateForm) else form, dtype=float)
    if np.any(np.abs(t) < 1e-9):
        raise DegenerateT(f"correlation entries {t} include |t| < 1e-9")
    value = closed_form_value(t, rel_tol)
    error = rel_tol * value
    return RadiusResult(
        value=value,
        method=TSTATE_CLOSED_FORM,
        error_estimate=error,
        verdict=verdict_for(value, error, exact=True),
        ansatz="jevtic",
    )


@dataclass
class OptimizerBudget:
    grid: int = 1024
    iters: int = 200
    seed: int = 0
    directions: int = 2048
    final_directions: int = DEFAULT_DIRECTIONS
    tstate_tol: float = TSTATE_TOL


def critical_radius(state, budget=None):
    """Route a state to the degenerate, T-state or lower-bound computation."""
    budget = OptimizerBudget() if budget is None else budget
    emap = epr_map(state) if isinstance(state, TwoQubitState) else state
    if emap.degenerate:
        return RadiusResult(
            value=float("inf"),
            method=DEGENERATE_SEPARABLE,
            error_estimate=0.0,
            verdict=UNSTEERABLE,
            notes="degenerate EPR map: the state is separable, hence unsteerable",
        )
    try:
        form = canonicalize_tstate(emap, budget.tstate_tol)
    except NotTState:
        form = None
    if form is not None:
        return tstate_critical_radius(form)
    _, result = optimize_ansatz(emap, budget.grid, budget.iters, budget.seed,
                                directions=budget.directions,
                                final_directions=budget.final_directions)
    result.notes += "; lower bound only: a value below 1 does not certify steerability"
    return result


def _random_rotation(rng):
    q, r = np.linalg.qr(rng.normal(size=(3, 3)))
    q = q * np.sign(np.diag(r))
    if np.linalg.det(q) < 0:
        q[:, 0] *= -1
    return q


def _supergradient(section, unit, directions, near):
    """Average supergradient of ``min_d h_w(d)`` over the nearly-minimizing directions.

    For a fixed direction the support equals ``min_mu mu + sum_i w_i (c_i - mu tau_i)_+``
    where ``(tau_i, nu_i)`` is the pullback of atom ``i`` per unit weight, so a
    supergradient in ``w`` is ``(d . nu_i - mu tau_i)_+`` at the optimal ``mu``.
    """
    sel = directions[near]
    mu = geometry.section_supports(section, sel).mu
    g = np.maximum(sel @ unit[:, 1:].T - mu[:, None] * unit[None, :, 0], 0.0)
    return g.mean(axis=0)


def optimize_ansatz(emap, grid=1024, iters=200, seed=0, directions=2048,
                    final_directions=DEFAULT_DIRECTIONS, step=2.0, near=64, log=None):
    """Heuristic ascent of the principal radius over atom weights on a fixed grid.

    The objective is a minimum of functions linear in the weights, hence
    concave. Each iteration evaluates it on a freshly rotated direction set
    (rotations drawn from ``seed``), averages the supergradients of the
    directions within 0.1 % of the minimum, takes an exponentiated step of
    size ``step / sqrt(k + 1)`` and tilts the weights back onto
    ``{sum w = 1, sum w n = b}``. Starts from uniform weights; returns the
    best measure seen and its radius at full resolution.
    """
    emap = emap if isinstance(emap, EprMap) else epr_map(emap)
    if emap.degenerate:
        raise DegenerateMap("cannot optimize an ansatz for a degenerate EPR map")
    rng = np.random.default_rng(seed)
    points = ansatz.symmetric_fibonacci_points(grid)
    w = ansatz.kl_project_weights(np.full(grid, 1.0 / grid), points, emap.bob_bloch)
    if np.linalg.norm(w @ points - emap.bob_bloch) > 1e-10:
        raise ValueError(f"grid of {grid} atoms cannot reach Bob's Bloch vector")
    unit = np.column_stack([np.ones(grid), points]) @ np.linalg.inv(emap.phi).T
    dirs0 = ansatz.fibonacci_points(directions)

    best_w, best_val, first = w.copy(), -np.inf, None
    # positive weights never change the span, so a flat box stays flat
    flat = _flat_normal(unit[:, 0], unit[:, 1:]) is not None
    for it in range(0 if flat else iters):
        dirs = dirs0 @ _random_rotation(rng).T
        section = geometry.PulledBackSection(unit[:, 0] * w, unit[:, 1:] * w[:, None])
        vals = geometry.section_supports(section, dirs).value
        r = float(vals.min())
        first = r if first is None else first
        if r > best_val:
            best_val, best_w = r, w.copy()
        if log is not None:
            log(it, r)
        cand = np.argsort(vals, kind="stable")[:near]
        cand = cand[vals[cand] <= r + 1e-3 * abs(r)]
        g = _supergradient(section, unit, dirs, cand)
        scale = np.abs(g).max()
        if scale == 0:
            continue
        w = ansatz.kl_project_weights(w * np.exp(step / np.sqrt(it + 1.0) * g / scale),
                                      points, emap.bob_bloch)
    measure = ansatz.SphereMeasure(best_w, points, False, emap.bob_bloch, label=f"optimized:{grid}")
    result = principal_radius(measure, emap, directions=final_directions)
    result.method = OPTIMIZED_LOWER_BOUND
    result.verdict = verdict_for(result.value, result.error_estimate, exact=False)
    ascent = best_val - first if first is not None else 0.0
    result.notes = ("no ascent" if ascent <= 1e-12 else
                    f"ascent {first:.6g} -> {best_val:.6g} on sampled directions")
    return measure, result


@dataclass
class PerturbationReport:
    base_radius: float
    closed_form: float
    tolerance: float
    trials: int
    max_violation: float
    violations: int
    radii: list = field(default_factory=list)

    def to_dict(self):
        return {k: getattr(self, k) for k in
                ("base_radius", "closed_form", "tolerance", "trials", "max_violation", "violations")}


def random_symmetric_perturbation(measure, rng, amplitude=0.5):
    """Zero-sum, centrally symmetric weight change keeping every weight >= 0."""
    h = measure.size // 2
    u = rng.normal(size=h)
    u -= u.mean()
    base = measure.weights[:h]
    neg = u < 0
    limit = np.min(base[neg] / -u[neg]) if neg.any() else 1.0
    u *= amplitude * limit
    return np.concatenate([u, u])


def perturbation_test(form, trials=100, seed=0, count=4096, directions=2048, amplitude=0.9):
    """Check ``r_{J+v} <= r_J`` for random admissible perturbations ``v``.

    The tolerance is three times the discretization error of the gridded
    Jevtic measure, i.e. three times its distance to the closed form (floored
    by the direction-search error estimate). ``radii`` holds the coarse
    upper estimates, or the polished value for trials that needed one.
    """
    t = np.asarray(form.t_diag if isinstance(form, TStateForm) else form, dtype=float)
    emap = epr_map(np.diag(np.concatenate([[1.0], t])))
    base = ansatz.jevtic_grid(t, count)
    ref = principal_radius(base, emap, directions=directions)
    exact = closed_form_value(t)
    tol = 3.0 * max(abs(ref.value - exact), ref.error_estimate, 1e-12)
    rng = np.random.default_rng(seed)
    report = PerturbationReport(ref.value, exact, tol, trials, -np.inf, 0)
    for _ in range(trials):
        v = random_symmetric_perturbation(base, rng, amplitude)
        moved = ansatz.perturb_symmetric(base, v)
        # an unpolished sweep minimum bounds the radius from above, so it
        # settles every trial it already passes; only suspects are polished
        section = geometry.pull_back(geometry.build_box(moved, emap), emap)
        r = min_support(section, directions, candidates=0)[0]
        if r - ref.value > tol:
            r = principal_radius(moved, emap, directions=directions).value
        report.radii.append(r)
        excess = r - ref.value
        report.max_violation = max(report.max_violation, excess)
        if excess > tol:
            report.violations += 1
    return report


def hemisphere_radius(measure, t_diag, n0s):
    """``min_n0 2 n0.b(n0) / sqrt(n0^T T^2 n0)`` over the given unit vectors.

    ``b(n0)`` is the spatial part of the box boundary point that keeps the
    atoms in the open hemisphere around ``n0`` (half weight on the equator).
    """
    t = np.asarray(t_diag, dtype=float)
    n0s = np.atleast_2d(n0s)
    s = n0s @ measure.points.T
    sel = (s > geometry.SHELL_TOL) + 0.5 * (np.abs(s) <= geometry.SHELL_TOL)
    b = (sel * measure.weights) @ measure.points
    vals = 2 * np.einsum("ij,ij->i", n0s, b) / np.sqrt((n0s ** 2) @ (t ** 2))
    i = int(np.argmin(vals))
    return float(vals[i]), n0s[i]
