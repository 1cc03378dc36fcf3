"""The polyhedral box spanned by an ansatz, and its sections.

A discrete ansatz ``{(w_i, n_i)}`` generates the zonotope
``box = {sum_i beta_i w_i (1, n_i) : 0 <= beta_i <= 1}`` in Bob's Pauli
coordinates. Containment questions are asked in Alice's frame: pulling the
generators back through the inverse EPR map turns the steering image of
Alice's Bloch ball into the unit ball centred at ``(1, 0, 0, 0)`` and her
Bloch hyperplane into ``X_0 = 1``. The section ``box ∩ {X_0 = 1}`` is never
enumerated; it is handled through its support function, which reduces to
a continuous knapsack with one equality constraint.
"""

import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._projection import project_affine_box
from .errors import DegenerateMap, EmptyMeasure, EmptySection
from .qstate import EprMap, check_unit, epr_map

SHELL_TOL = 1e-12
MEMBERSHIP_TOL = 1e-9
_CHUNK_CELLS = 2_000_000


@dataclass(frozen=True, eq=False)
class SteeringBox:
    generators: np.ndarray  # (m, 4) rows w_i (1, n_i)
    principal_vertex: np.ndarray


@dataclass(frozen=True, eq=False)
class PulledBackSection:
    gen_t: np.ndarray  # (m,) X_0 coordinate of each pulled-back generator
    gen_v: np.ndarray  # (m, 3) spatial coordinates
    level: float = 1.0

    @property
    def size(self):
        return self.gen_t.size

    @property
    def all_positive(self):
        return bool(np.all(self.gen_t > 0))


def _as_map(emap):
    return emap if isinstance(emap, EprMap) else epr_map(emap)


def build_box(measure, emap=None):
    if measure.size == 0:
        raise EmptyMeasure("measure has no atoms")
    total = measure.weights.sum()
    if abs(total - 1.0) > 1e-10:
        raise ValueError(f"measure weights sum to {total!r}, not 1")
    gens = measure.weights[:, None] * np.column_stack([np.ones(measure.size), measure.points])
    return SteeringBox(generators=gens, principal_vertex=gens.sum(axis=0))


def pull_back(box, emap):
    emap = _as_map(emap)
    if emap.degenerate:
        raise DegenerateMap("EPR map is degenerate; its inverse does not exist")
    pulled = box.generators @ np.linalg.inv(emap.phi).T
    return PulledBackSection(gen_t=pulled[:, 0].copy(), gen_v=pulled[:, 1:].copy())


class Support(NamedTuple):
    """Support values plus the knapsack solution that attains them.

    ``mu`` is the multiplier of the level constraint (the split ratio), so
    ``value = mu * level + sum_i max(0, c_i - mu t_i)``.
    """

    value: np.ndarray
    mu: np.ndarray
    beta: np.ndarray | None


def _check_nonempty(section):
    t, level = section.gen_t, section.level
    if t[t > 0].sum() < level - 1e-12 or t[t < 0].sum() > level + 1e-12:
        raise EmptySection(
            f"level {level} outside the attainable range "
            f"[{t[t < 0].sum():.6g}, {t[t > 0].sum():.6g}]")


def _greedy(c, t, level, want_beta):
    """Continuous knapsack for positive ``t``: fill by descending ratio ``c/t``."""
    k, m = c.shape
    ratio = c / t
    # value is tie-independent; only a requested witness needs index order on ties
    order = np.argsort(-ratio, axis=1, kind="stable" if want_beta else None)
    ts = t[order]
    cs = np.take_along_axis(c, order, axis=1)
    cum_t = np.cumsum(ts, axis=1)
    cum_c = np.cumsum(cs, axis=1)
    split = np.minimum((cum_t < level).sum(axis=1), m - 1)
    rows = np.arange(k)
    t_before = np.where(split > 0, cum_t[rows, split - 1], 0.0)
    c_before = np.where(split > 0, cum_c[rows, split - 1], 0.0)
    frac = np.clip((level - t_before) / ts[rows, split], 0.0, 1.0)
    value = c_before + frac * cs[rows, split]
    mu = cs[rows, split] / ts[rows, split]
    beta = None
    if want_beta:
        sorted_beta = (np.arange(m)[None, :] < split[:, None]).astype(float)
        sorted_beta[rows, split] = frac
        beta = np.empty_like(sorted_beta)
        np.put_along_axis(beta, order, sorted_beta, axis=1)
    return value, mu, beta


def _breakpoint(c, t, level, want_beta):
    """Same knapsack for ``t`` of any sign, solved through its 1-D dual.

    The dual ``D(mu) = mu*level + sum_i max(0, c_i - mu t_i)`` is convex and
    piecewise linear with breakpoints at ``c_i / t_i``; its slope starts at
    ``level - sum_{t>0} t`` and grows by ``|t_i|`` at each breakpoint.
    """
    k, m = c.shape
    nz = t != 0
    tn = t[nz]
    ratio = c[:, nz] / tn
    order = np.argsort(ratio, axis=1, kind="stable" if want_beta else None)
    rs = np.take_along_axis(ratio, order, axis=1)
    slope = level - tn[tn > 0].sum() + np.cumsum(np.abs(tn)[order], axis=1)
    idx = np.minimum((slope < 0).sum(axis=1), tn.size - 1)
    mu = rs[np.arange(k), idx]
    reduced = c - mu[:, None] * t
    value = mu * level + np.maximum(reduced, 0.0).sum(axis=1)
    beta = None
    if want_beta:
        scale = np.maximum(np.abs(c), np.abs(mu[:, None] * t)).max(axis=1, keepdims=True) + 1e-300
        tie = np.abs(reduced) <= 1e-13 * scale
        beta = ((reduced > 0) & ~tie).astype(float)
        need = level - (beta * t).sum(axis=1)
        tie_mass = (tie * t).sum(axis=1)
        gamma = np.divide(need, tie_mass, out=np.zeros_like(need), where=tie_mass != 0)
        beta = np.where(tie, np.clip(gamma, 0.0, 1.0)[:, None], beta)
    return value, mu, beta


def _threads():
    try:
        return max(1, int(os.environ.get("STEER_THREADS", "1")))
    except ValueError:
        return 1


def section_supports(section, directions, want_beta=False):
    """Vectorized support function of the section, one value per direction row."""
    d = np.atleast_2d(np.asarray(directions, dtype=float))
    _check_nonempty(section)
    solver = _greedy if section.all_positive else _breakpoint
    t, v, level = section.gen_t, section.gen_v, section.level
    rows = max(1, _CHUNK_CELLS // max(1, section.size))
    chunks = [d[i:i + rows] for i in range(0, d.shape[0], rows)]

    def run(chunk):
        return solver(chunk @ v.T, t, level, want_beta)

    workers = _threads()
    if workers > 1 and len(chunks) > 1:
        with ThreadPoolExecutor(workers) as ex:
            parts = list(ex.map(run, chunks))  # map keeps chunk order
    else:
        parts = [run(ch) for ch in chunks]
    value = np.concatenate([p[0] for p in parts])
    mu = np.concatenate([p[1] for p in parts])
    beta = np.concatenate([p[2] for p in parts]) if want_beta else None
    return Support(value, mu, beta)


def section_support(section, direction, want_beta=False):
    """Support of the section relative to the ball centre, in one unit direction.

    Maximizes ``sum_i beta_i (d . v_i)`` over ``beta in [0, 1]^m`` subject to
    ``sum_i beta_i t_i = level``. Returns a float, or ``(value, beta)`` when
    ``want_beta`` is set.
    """
    d = check_unit(direction, tol=1e-9)
    s = section_supports(section, d[None, :], want_beta=want_beta)
    if want_beta:
        return float(s.value[0]), s.beta[0]
    return float(s.value[0])


class Membership(NamedTuple):
    feasible: bool
    beta: np.ndarray
    residual: float


def box_membership(box, point, tol=MEMBERSHIP_TOL):
    """Decide whether ``point`` is a box combination of the generators.

    The witness is the feasible ``beta`` closest to ``1/2`` (the centred
    minimum-norm solution); when infeasible, ``beta`` minimizes the residual.
    """
    point = np.asarray(point, dtype=float)
    g = box.generators.T
    beta, _ = project_affine_box(np.full(g.shape[1], 0.5), g, point, lo=0.0, hi=1.0, tol=1e-13)
    residual = float(np.linalg.norm(g @ beta - point))
    return Membership(residual <= tol, beta, residual)


def _g_weights(s, lam, g_policy):
    above = s > lam + SHELL_TOL
    shell = np.abs(s - lam) <= SHELL_TOL
    if g_policy in ("zero", 0):
        gamma = 0.0
    elif g_policy in ("one", 1):
        gamma = 1.0
    else:
        gamma = float(g_policy)
        if not 0.0 <= gamma <= 1.0:
            raise ValueError(f"tie fraction must lie in [0, 1], got {gamma}")
    return above + gamma * shell


def boundary_point(measure, n0, lam, g_policy="one"):
    """Box point selecting every atom with ``n0 . n > lam`` (ties weighted by ``g``).

    ``g_policy`` is ``"zero"``, ``"one"`` or a fraction in ``[0, 1]`` applied
    to the atoms within ``SHELL_TOL`` of the plane ``n0 . n = lam``.
    """
    n0 = check_unit(n0, tol=1e-9)
    s = measure.points @ n0
    sel = measure.weights * _g_weights(s, lam, g_policy)
    return np.concatenate([[sel.sum()], sel @ measure.points])


def solve_lambda(measure, n0, target):
    """Find ``(lam, gamma)`` so that the included mass equals ``target``.

    Atoms are sorted by ``n0 . n`` in descending order and grouped into
    shells of equal projection. The returned ``lam`` is the shell where the
    cumulative mass reaches ``target``, and ``gamma`` the fraction of that
    shell needed to land on it exactly.
    """
    if not 0.0 <= target <= 1.0:
        raise ValueError(f"target mass must lie in [0, 1], got {target}")
    n0 = check_unit(n0, tol=1e-9)
    s = measure.points @ n0
    order = np.argsort(-s, kind="stable")
    s_sorted, w_sorted = s[order], measure.weights[order]
    # shell boundaries: a new shell starts where the gap exceeds the tolerance
    starts = np.concatenate([[0], np.nonzero(np.diff(s_sorted) < -SHELL_TOL)[0] + 1])
    shell_mass = np.add.reduceat(w_sorted, starts)
    cum = np.cumsum(shell_mass)
    k = int(np.searchsorted(cum, target - 1e-15, side="left"))
    k = min(k, len(starts) - 1)
    before = cum[k - 1] if k > 0 else 0.0
    gamma = (target - before) / shell_mass[k] if shell_mass[k] > 0 else 0.0
    return float(s_sorted[starts[k]]), float(np.clip(gamma, 0.0, 1.0))
