"""Local hidden state models built from the box geometry, and their simulation.

If every steering outcome lies in the box of an ansatz, Alice can fake the
quantum correlations: a hidden atom ``j`` is drawn with probability ``w_j``,
Bob receives the pure state ``n_j``, and Alice answers outcome 1 with
probability ``beta_j``, where ``beta`` writes the steering outcome as a box
combination. The simulator below plays that strategy and compares the
statistics with the EPR-map predictions.
"""

from dataclasses import dataclass

import numpy as np

from . import ansatz, geometry
from .errors import OutcomeOutsideBox
from .qstate import check_unit, steering_outcome

_SHOT_BLOCK = 1 << 18


@dataclass(frozen=True, eq=False)
class ResponseModel:
    measure: ansatz.SphereMeasure
    beta: np.ndarray
    measurement: np.ndarray

    @property
    def G(self):
        """The 2 x m stochastic matrix of the response."""
        return np.vstack([self.beta, 1.0 - self.beta])


def hidden_states(measure):
    """Pauli coordinates ``w_j (1, n_j)`` of the hidden states, one row per atom."""
    return measure.weights[:, None] * np.column_stack([np.ones(measure.size), measure.points])


def build_response(measure, emap, measurement_bloch):
    """Response function reproducing the steering outcomes of one measurement.

    The measure's weights are first fitted so that the hidden states sum to
    Bob's reduced state. Raises ``OutcomeOutsideBox`` when the outcome for
    ``+x`` is not a box combination, with the best residual attached.
    """
    x = check_unit(measurement_bloch, tol=1e-9)
    measure = ansatz.fit_barycenter(measure, emap.bob_bloch)
    box = geometry.build_box(measure, emap)
    target = steering_outcome(emap, x)
    member = geometry.box_membership(box, target)
    if not member.feasible:
        raise OutcomeOutsideBox(
            f"steering outcome for x = {np.round(x, 6).tolist()} is outside the box "
            f"(best residual {member.residual:.3e})", member.residual)
    return ResponseModel(measure=measure, beta=member.beta, measurement=x)


def verify_response(model, emap, measurement_bloch=None):
    """Largest coordinate-norm residual of the two reconstructed outcomes."""
    x = model.measurement if measurement_bloch is None else check_unit(measurement_bloch, tol=1e-9)
    states = hidden_states(model.measure)
    outcomes = [steering_outcome(emap, x), steering_outcome(emap, -x)]
    return max(float(np.linalg.norm(row @ states - out))
               for row, out in zip(model.G, outcomes))


def _z(observed, expected, sigma):
    if sigma > 0:
        return (observed - expected) / sigma
    return 0.0 if abs(observed - expected) <= 1e-12 else np.inf


def simulate(models, emap, shots, seed=0):
    """Play the local strategy ``shots`` times per measurement.

    All models must share one hidden-state measure. Each shot draws one
    hidden atom by inverse-CDF sampling and Alice answers every measurement
    from it. Returns a JSON-ready report with z-scores of the outcome
    frequencies and of the conditional Bloch vectors Bob ends up with.
    """
    report = {"format": 1, "shots": int(shots), "measurements": []}
    if shots <= 0 or not models:
        return report
    measure = models[0].measure
    w, pts = measure.weights, measure.points
    betas = np.array([m.beta for m in models])
    cdf = np.cumsum(w)
    rng = np.random.default_rng(seed)
    k = len(models)
    count1 = np.zeros(k)
    sum1 = np.zeros((k, 3))
    sum_all = np.zeros(3)
    done = 0
    while done < shots:
        n = min(_SHOT_BLOCK, shots - done)
        atoms = np.minimum(np.searchsorted(cdf, rng.random(n) * cdf[-1], side="right"), w.size - 1)
        bob = pts[atoms]
        sum_all += bob.sum(axis=0)
        answers = rng.random((k, n)) < betas[:, atoms]
        count1 += answers.sum(axis=1)
        sum1 += answers @ bob
        done += n

    max_z = 0.0
    for i, model in enumerate(models):
        x = model.measurement
        entry = {"axis": x.tolist(), "residual": verify_response(model, emap)}
        predicted, simulated, z_bloch, z_prob = [], [], [], None
        counts = [count1[i], shots - count1[i]]
        sums = [sum1[i], sum_all - sum1[i]]
        for outcome, (sign, g) in enumerate(((1.0, model.beta), (-1.0, 1.0 - model.beta))):
            y = steering_outcome(emap, sign * x)
            p = y[0]
            bloch = y[1:] / p if p > 0 else np.zeros(3)
            if outcome == 0:
                freq = counts[0] / shots
                z_prob = _z(freq, p, np.sqrt(p * (1 - p) / shots))
                entry["predicted_probability"] = [float(p), float(1 - p)]
                entry["simulated_probability"] = [float(freq), float(1 - freq)]
            mass = g * w
            second = (mass @ pts ** 2) / mass.sum() if mass.sum() > 0 else np.zeros(3)
            var = np.maximum(second - bloch ** 2, 0.0)
            mean = sums[outcome] / counts[outcome] if counts[outcome] else np.full(3, np.nan)
            sig = np.sqrt(var / max(counts[outcome], 1))
            z = [_z(mean[c], bloch[c], sig[c]) if counts[outcome] else 0.0 for c in range(3)]
            predicted.append(bloch.tolist())
            simulated.append(mean.tolist())
            z_bloch.append([float(v) for v in z])
        entry["z_probability"] = float(z_prob)
        entry["predicted_bloch"] = predicted
        entry["simulated_bloch"] = simulated
        entry["z_bloch"] = z_bloch
        max_z = max(max_z, abs(z_prob), *(abs(v) for row in z_bloch for v in row))
        report["measurements"].append(entry)
    report["max_abs_z"] = float(max_z)
    report["max_residual"] = max(m["residual"] for m in report["measurements"])
    return report


def random_axes(count, seed=0):
    v = np.random.default_rng(seed).normal(size=(count, 3))
    return v / np.linalg.norm(v, axis=1, keepdims=True)
