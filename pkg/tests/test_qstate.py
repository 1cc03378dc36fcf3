import numpy as np
import pytest
from numpy.testing import assert_allclose

from conftest import random_density, random_unitary
from qsteer import qstate
from qsteer.errors import BadTrace, DegenerateT, NotHermitian, NotPositive, NotTState, NotUnitVector

SX = np.array([[0, 1], [1, 0]], dtype=complex)
SY = np.array([[0, -1j], [1j, 0]])
SZ = np.array([[1, 0], [0, -1]], dtype=complex)
BASIS = [np.eye(2, dtype=complex), SX, SY, SZ]


def theta_oracle(rho):
    """16 explicit traces, no shared code with the package."""
    out = np.zeros((4, 4))
    for i in range(4):
        for j in range(4):
            out[i, j] = np.trace(rho @ np.kron(BASIS[i], BASIS[j])).real
    return out


def singlet():
    psi = np.array([0, 1, -1, 0]) / np.sqrt(2)
    return np.outer(psi, psi.conj())


def test_maximally_mixed_theta():
    s = qstate.from_matrix(np.eye(4) / 4)
    assert_allclose(s.theta, np.diag([1.0, 0, 0, 0]), atol=1e-15)


def test_singlet_theta_matches_oracle():
    s = qstate.from_matrix(singlet())
    assert_allclose(theta_oracle(singlet()), np.diag([1.0, -1, -1, -1]), atol=1e-15)
    assert_allclose(s.theta, theta_oracle(singlet()), atol=1e-14)


def test_werner_theta_is_linear():
    rho = 0.6 * singlet() + 0.4 * np.eye(4) / 4
    assert_allclose(theta_oracle(rho), np.diag([1.0, -0.6, -0.6, -0.6]), atol=1e-15)
    assert_allclose(qstate.from_matrix(rho).theta, theta_oracle(rho), atol=1e-14)


def test_random_states_match_oracle_and_round_trip(rng):
    for _ in range(50):
        rho = random_density(rng, rank=rng.integers(1, 5))
        s = qstate.from_matrix(rho)
        assert s.theta[0, 0] == 1.0
        assert_allclose(s.theta, theta_oracle(rho), atol=1e-12)
        assert_allclose(qstate.rho_from_theta(s.theta), rho, atol=1e-12)


@pytest.mark.parametrize("rho, exc", [
    (np.triu(np.ones((4, 4))) / 4, NotHermitian),
    (np.eye(4) / 2, BadTrace),
    (np.diag([0.6, 0.6, -0.1, -0.1]), NotPositive),
])
def test_invalid_inputs_are_named(rho, exc):
    with pytest.raises(exc) as info:
        qstate.from_matrix(rho)
    assert "e" in str(info.value)


def test_small_rounding_is_accepted():
    rho = np.diag([0.5, 0.5, 1e-11, -1e-11]).astype(complex)
    qstate.from_matrix(rho)


def test_epr_map_blocks(rng):
    s = qstate.from_matrix(random_density(rng))
    emap = qstate.epr_map(s)
    assert_allclose(emap.phi, 0.5 * s.theta.T)
    assert_allclose(emap.phi @ [1, 0, 0, 0], np.concatenate([[0.5], emap.bob_bloch / 2]))
    assert_allclose(emap.alice_bloch, s.theta[1:, 0])
    assert_allclose(emap.correlation, s.theta[1:, 1:])
    assert not emap.degenerate


def test_degenerate_flags():
    assert qstate.epr_map(qstate.from_matrix(np.eye(4) / 4)).degenerate
    assert not qstate.epr_map(qstate.werner(0.6)).degenerate
    assert qstate.epr_map(np.diag([1.0, 0.5, 0.5, 1e-12])).degenerate


def test_werner_map():
    emap = qstate.epr_map(qstate.werner(0.6))
    assert_allclose(emap.phi, np.diag([0.5, -0.3, -0.3, -0.3]), atol=1e-15)
    assert_allclose(emap.alice_bloch, 0, atol=1e-15)
    assert_allclose(emap.bob_bloch, 0, atol=1e-15)


def test_singlet_steers_to_antipode(rng):
    emap = qstate.epr_map(np.diag([1.0, -1, -1, -1]))
    for _ in range(5):
        x = rng.normal(size=3)
        x /= np.linalg.norm(x)
        assert_allclose(qstate.steering_outcome(emap, x), np.concatenate([[0.5], -x / 2]))


def test_steering_outcome_examples(rng):
    emap = qstate.epr_map(qstate.werner(0.5))
    assert_allclose(qstate.steering_outcome(emap, [0, 0, 1]), [0.5, 0, 0, -0.25], atol=1e-15)
    flat = qstate.epr_map(np.diag([1.0, 0, 0, 0]))
    assert_allclose(qstate.steering_outcome(flat, [0, 1, 0]), [0.5, 0, 0, 0])
    emap = qstate.epr_map(qstate.from_matrix(random_density(rng)))
    x = rng.normal(size=3)
    x /= np.linalg.norm(x)
    total = qstate.steering_outcome(emap, x) + qstate.steering_outcome(emap, -x)
    assert_allclose(total, np.concatenate([[1.0], emap.bob_bloch]), atol=1e-14)


def test_steering_outcome_rejects_non_unit():
    emap = qstate.epr_map(qstate.werner(0.5))
    with pytest.raises(NotUnitVector):
        qstate.steering_outcome(emap, [0, 0, 1.001])


def test_trace_covariance(rng):
    s = qstate.from_matrix(random_density(rng))
    emap = qstate.epr_map(s)
    for _ in range(100):
        h = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        a = h + h.conj().T
        x = np.array([np.trace(a @ p).real for p in BASIS])
        image = np.trace((s.rho @ np.kron(a, np.eye(2))).reshape(2, 2, 2, 2), axis1=0, axis2=2)
        assert_allclose(np.trace(image).real, (emap.phi @ x)[0], atol=1e-12)
        # full image, coordinate-wise
        assert_allclose([np.trace(image @ p).real for p in BASIS], emap.phi @ x, atol=1e-12)


def test_local_rotation_covariance(rng):
    s = qstate.from_matrix(random_density(rng))
    axis, angle = rng.normal(size=3), rng.uniform(0, np.pi)
    rot = qstate.rotation_matrix(axis, angle)
    moved = qstate.local_unitary(s, ub=qstate.su2_from_axis(axis, angle))
    assert_allclose(moved.bob_bloch, rot @ s.bob_bloch, atol=1e-12)
    assert_allclose(moved.correlation, s.correlation @ rot.T, atol=1e-12)
    assert_allclose(moved.alice_bloch, s.alice_bloch, atol=1e-12)


def test_canonical_identity_for_diagonal_werner():
    form = qstate.canonicalize_tstate(qstate.epr_map(np.diag([1.0, -0.4, -0.4, -0.4])))
    assert_allclose(form.t_diag, [-0.4, -0.4, -0.4])
    assert_allclose(form.alice_rotation, np.eye(3))
    assert_allclose(form.bob_rotation, np.eye(3))


def test_canonical_recovers_rotated_diagonal():
    c = qstate.rotation_matrix([0, 0, 1], 0.3) @ np.diag([0.9, 0.8, 0.7])
    theta = np.eye(4)
    theta[1:, 1:] = c
    form = qstate.canonicalize_tstate(qstate.epr_map(theta))
    assert_allclose(np.abs(form.t_diag), [0.9, 0.8, 0.7], atol=1e-12)
    assert_allclose(form.reconstruct(), c, atol=1e-10)
    for r in (form.alice_rotation, form.bob_rotation):
        assert_allclose(np.linalg.det(r), 1.0, atol=1e-10)


def test_canonical_negative_determinant():
    theta = np.diag([1.0, 0.9, 0.8, -0.7])
    form = qstate.canonicalize_tstate(qstate.epr_map(theta))
    assert np.sum(form.t_diag < 0) in (1, 3)
    assert_allclose(form.reconstruct(), theta[1:, 1:], atol=1e-10)


def test_canonical_random_tstates(rng):
    for _ in range(100):
        ra = qstate.rotation_matrix(rng.normal(size=3), rng.uniform(0, np.pi))
        rb = qstate.rotation_matrix(rng.normal(size=3), rng.uniform(0, np.pi))
        t = rng.uniform(0.05, 1, 3) * rng.choice([-1, 1], 3)
        theta = np.eye(4)
        theta[1:, 1:] = ra @ np.diag(t) @ rb
        form = qstate.canonicalize_tstate(qstate.epr_map(theta))
        assert np.linalg.norm(form.reconstruct() - theta[1:, 1:]) <= 1e-10
        assert np.all(np.diff(np.abs(form.t_diag)) <= 1e-15)
        assert np.prod(np.sign(form.t_diag)) == np.prod(np.sign(t))
        for r in (form.alice_rotation, form.bob_rotation):
            assert abs(np.linalg.det(r) - 1.0) <= 1e-10


def test_canonical_errors():
    theta = np.diag([1.0, -0.4, -0.4, -0.4])
    theta[1, 0] = 0.1
    with pytest.raises(NotTState):
        qstate.canonicalize_tstate(qstate.epr_map(theta))
    with pytest.raises(DegenerateT):
        qstate.canonicalize_tstate(qstate.epr_map(np.diag([1.0, 0.5, 0.5, 0.0])))


def test_bell_states_are_pure():
    for i in range(4):
        s = qstate.bell(i)
        assert_allclose(np.trace(s.rho @ s.rho).real, 1.0, atol=1e-12)
