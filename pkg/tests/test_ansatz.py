import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from numpy.testing import assert_allclose
from scipy.integrate import dblquad

from qsteer import ansatz
from qsteer.errors import BadCount, DegenerateT, EmptyMeasure, NotUnitVector

# recorded from the product rule at two refinement levels agreeing to 1e-8,
# and confirmed by the adaptive dblquad oracle below
N_T_987 = 0.19674946029118853


def n_t_oracle(t):
    """1 / int dS (n^T T^-2 n)^-2 by adaptive quadrature in (theta, phi)."""
    inv2 = 1.0 / np.asarray(t) ** 2

    def f(theta, phi):
        s = np.sin(theta)
        n2 = np.array([(s * np.cos(phi)) ** 2, (s * np.sin(phi)) ** 2, np.cos(theta) ** 2])
        return s / (n2 @ inv2) ** 2

    val, _ = dblquad(f, 0, 2 * np.pi, 0, np.pi, epsabs=1e-13, epsrel=1e-11)
    return 1.0 / val


def test_symmetric_pair():
    m = ansatz.fibonacci_grid(2)
    assert_allclose(m.weights, [0.5, 0.5])
    assert_allclose(m.points[0], -m.points[1])
    m.check()


def test_uniform_4096_barycenter():
    m = ansatz.fibonacci_grid(4096)
    assert np.linalg.norm(m.barycenter) <= 1e-3
    assert_allclose(m.weights.sum(), 1.0, atol=1e-12)
    m.check()
    plain = ansatz.fibonacci_grid(4096, symmetric=False)
    assert np.linalg.norm(plain.barycenter) <= 1e-3


@pytest.mark.parametrize("count", [0, 1, 3, 7])
def test_bad_counts(count):
    with pytest.raises(BadCount):
        ansatz.fibonacci_grid(count)


def test_werner_density_gives_uniform_weights():
    m = ansatz.jevtic_grid([-0.6, -0.6, -0.6], 4096)
    assert_allclose(m.weights, 1.0 / 4096, rtol=1e-12)
    assert m.label == "jevtic:4096"


def test_measure_validation():
    with pytest.raises(EmptyMeasure):
        ansatz.measure_from_atoms(np.zeros((0, 4)))
    with pytest.raises(NotUnitVector):
        ansatz.SphereMeasure(np.array([1.0]), np.array([[0, 0, 1.1]]))
    with pytest.raises(ValueError):
        ansatz.SphereMeasure(np.array([-1.0]), np.array([[0, 0, 1.0]]))
    with pytest.raises(ValueError, match="sum"):
        ansatz.SphereMeasure(np.array([0.4, 0.4]), np.array([[0, 0, 1.0], [0, 0, -1.0]])).check()
    with pytest.raises(ValueError, match="barycenter"):
        ansatz.SphereMeasure(np.array([1.0]), np.array([[0, 0, 1.0]])).check()


def test_n_t_regression_constant_and_oracle():
    d = ansatz.normalize_jevtic([0.9, 0.8, 0.7])
    assert_allclose(d.n_t, N_T_987, rtol=1e-12)
    assert d.error_estimate <= 1e-8
    assert_allclose(n_t_oracle([0.9, 0.8, 0.7]), N_T_987, rtol=1e-8)


def test_n_t_anisotropic_oracle():
    t = [0.2, -1.0, 0.6]
    assert_allclose(ansatz.normalize_jevtic(t).n_t, n_t_oracle(t), rtol=1e-8)


@pytest.mark.parametrize("p", [0.3, 0.5, 1.0])
def test_isotropic_n_t(p):
    # integrand is the constant p^4 over area 4 pi
    d = ansatz.normalize_jevtic([-p, -p, -p])
    assert_allclose(d.n_t, 1.0 / (4 * np.pi * p ** 4), rtol=1e-12)


def test_unit_isotropic_n_t():
    assert_allclose(ansatz.normalize_jevtic([1, 1, 1]).n_t, 1 / (4 * np.pi), rtol=1e-12)


def test_isotropic_density_is_flat(rng):
    d = ansatz.normalize_jevtic([-0.5, -0.5, -0.5])
    n = rng.normal(size=(50, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    assert_allclose(ansatz.evaluate_jevtic(d, n), 1 / (4 * np.pi), rtol=1e-12)


def test_density_on_axis():
    t = np.array([0.9, 0.8, 0.7])
    d = ansatz.normalize_jevtic(t)
    for i in range(3):
        assert_allclose(ansatz.evaluate_jevtic(d, np.eye(3)[i]), d.n_t * t[i] ** 4, rtol=1e-13)


def test_density_even_and_unit_checked(rng):
    d = ansatz.normalize_jevtic([0.9, -0.3, 0.5])
    n = rng.normal(size=(100, 3))
    n /= np.linalg.norm(n, axis=1, keepdims=True)
    assert_allclose(ansatz.evaluate_jevtic(d, n), ansatz.evaluate_jevtic(d, -n), rtol=1e-14)
    with pytest.raises(NotUnitVector):
        ansatz.evaluate_jevtic(d, [0, 0, 0.9])


def test_density_integrates_to_one():
    d = ansatz.normalize_jevtic([0.9, 0.3, 0.5])
    pts, w = ansatz.sphere_product_rule(256)
    assert_allclose(w.sum(), 4 * np.pi, rtol=1e-13)
    assert_allclose(w @ ansatz.evaluate_jevtic(d, pts, check=False), 1.0, atol=1e-8)


def test_degenerate_t_rejected():
    with pytest.raises(DegenerateT):
        ansatz.normalize_jevtic([0.5, 0.5, 0.0])


@settings(max_examples=25, deadline=None)
@given(st.lists(st.floats(0.15, 1.0), min_size=3, max_size=3),
       st.permutations([0, 1, 2]),
       st.lists(st.sampled_from([-1.0, 1.0]), min_size=3, max_size=3))
def test_permutation_and_sign_invariance(t, perm, signs):
    t = np.array(t)
    base = ansatz.normalize_jevtic(t)
    moved = ansatz.normalize_jevtic(t[perm] * signs)
    assert_allclose(moved.n_t, base.n_t, rtol=1e-8)
    n = np.array([0.48, -0.6, 0.64])
    assert_allclose(ansatz.evaluate_jevtic(moved, n[perm]), ansatz.evaluate_jevtic(base, n), rtol=1e-8)


def test_project_weights_hits_target(rng):
    m = ansatz.fibonacci_grid(512)
    target = np.array([0.1, -0.2, 0.05])
    w, res = ansatz.project_weights(m.weights, m.points, target)
    assert res <= 1e-12
    assert np.all(w >= 0)
    assert_allclose(w.sum(), 1.0, atol=1e-12)
    assert_allclose(w @ m.points, target, atol=1e-12)
    fitted = ansatz.fit_barycenter(m, target)
    assert_allclose(fitted.barycenter, target, atol=1e-12)


def test_project_weights_unreachable():
    m = ansatz.fibonacci_grid(64)
    with pytest.raises(ValueError, match="reach"):
        ansatz.fit_barycenter(m, [0, 0, 1.5])


def test_kl_projection_keeps_support_positive():
    m = ansatz.fibonacci_grid(256)
    w = ansatz.kl_project_weights(m.weights, m.points, [0.3, 0.0, -0.2])
    assert np.all(w > 0)
    assert_allclose(w @ m.points, [0.3, 0.0, -0.2], atol=1e-12)
    assert_allclose(w.sum(), 1.0, atol=1e-14)


def test_perturb_symmetric(rng):
    m = ansatz.fibonacci_grid(64)
    h = 32
    u = rng.normal(size=h) * 1e-3
    u -= u.mean()
    moved = ansatz.perturb_symmetric(m, np.concatenate([u, u]))
    moved.check()
    assert_allclose(moved.barycenter, 0, atol=1e-12)
    with pytest.raises(ValueError, match="centrally symmetric"):
        ansatz.perturb_symmetric(m, np.concatenate([u, -u]))
    with pytest.raises(ValueError, match="zero"):
        ansatz.perturb_symmetric(m, np.full(64, 1e-4))
    with pytest.raises(ValueError, match="negative"):
        big = np.concatenate([u, u]) * 1e3
        ansatz.perturb_symmetric(m, big)
