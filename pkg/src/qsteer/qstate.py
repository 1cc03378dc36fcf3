"""Two-qubit states in Pauli coordinates and the EPR map they induce.

Coordinates follow ``X_i(A) = Tr(A sigma_i)`` with ``A = 1/2 sum_i X_i sigma_i``
and ``sigma_0 = I``. A two-qubit density operator is stored together with its
correlation matrix ``theta[i, j] = Tr[rho (sigma_i x sigma_j)]``, so that
``rho = 1/4 sum_ij theta[i, j] sigma_i x sigma_j``.
"""

from dataclasses import dataclass

import numpy as np

from .errors import (BadTrace, DegenerateT, NotHermitian, NotPositive,
                     NotTState, NotUnitVector)

PAULI = np.array([
    [[1, 0], [0, 1]],
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)

# PAULI2[i, j] = sigma_i (x) sigma_j
PAULI2 = np.einsum("iab,jcd->ijacbd", PAULI, PAULI).reshape(4, 4, 4, 4)

DEGENERACY_RATIO = 1e-9
UNIT_TOL = 1e-12


def check_unit(x, tol=UNIT_TOL):
    x = np.asarray(x, dtype=float)
    if x.shape != (3,):
        raise NotUnitVector(f"expected a 3-vector, got shape {x.shape}")
    norm = np.linalg.norm(x)
    if abs(norm - 1.0) > tol:
        raise NotUnitVector(f"|x| = {norm!r} deviates from 1 by {abs(norm - 1):.3e}")
    return x


def theta_from_rho(rho):
    """Return the 16 correlators ``Tr[rho sigma_i x sigma_j]`` as a real 4x4 array."""
    return np.einsum("ijab,ba->ij", PAULI2, rho).real


def rho_from_theta(theta):
    return 0.25 * np.einsum("ij,ijab->ab", np.asarray(theta, dtype=float), PAULI2)


@dataclass(frozen=True, eq=False)
class TwoQubitState:
    rho: np.ndarray
    theta: np.ndarray

    @property
    def alice_bloch(self):
        return self.theta[1:, 0].copy()

    @property
    def bob_bloch(self):
        return self.theta[0, 1:].copy()

    @property
    def correlation(self):
        return self.theta[1:, 1:].copy()


def from_matrix(rho, tol=1e-8):
    """Validate a density matrix and attach its Pauli correlation matrix.

    Raises NotHermitian, BadTrace or NotPositive naming the size of the
    violation. The input is symmetrized (``(rho + rho^H)/2``) after the
    Hermiticity check so downstream coordinates are exactly real.
    """
    rho = np.array(rho, dtype=complex)
    if rho.shape != (4, 4):
        raise NotHermitian(f"expected a 4x4 matrix, got shape {rho.shape}")
    herm = np.max(np.abs(rho - rho.conj().T))
    if herm > tol:
        raise NotHermitian(f"max |rho - rho^H| = {herm:.3e} exceeds {tol:.1e}")
    rho = 0.5 * (rho + rho.conj().T)
    tr = np.trace(rho).real
    if abs(tr - 1.0) > tol:
        raise BadTrace(f"trace {tr!r} deviates from 1 by {abs(tr - 1):.3e}")
    lowest = np.linalg.eigvalsh(rho)[0]
    if lowest < -tol:
        raise NotPositive(f"smallest eigenvalue {lowest:.3e} is below -{tol:.1e}")
    theta = theta_from_rho(rho)
    theta[0, 0] = 1.0
    rho = rho_from_theta(theta)
    theta.setflags(write=False)
    rho.setflags(write=False)
    return TwoQubitState(rho=rho, theta=theta)


def from_theta(theta, tol=1e-8):
    theta = np.asarray(theta, dtype=float)
    if theta.shape != (4, 4):
        raise BadTrace(f"theta must be 4x4, got shape {theta.shape}")
    return from_matrix(rho_from_theta(theta), tol=tol)


@dataclass(frozen=True, eq=False)
class EprMap:
    """Alice's EPR map ``phi = theta^T / 2`` acting on Pauli coordinates."""

    phi: np.ndarray
    alice_bloch: np.ndarray
    bob_bloch: np.ndarray
    correlation: np.ndarray
    degenerate: bool

    def inverse(self):
        return np.linalg.inv(self.phi)

    @property
    def is_tstate(self):
        return not (self.alice_bloch.any() or self.bob_bloch.any())


def epr_map(state):
    theta = np.asarray(state.theta if isinstance(state, TwoQubitState) else state, dtype=float)
    phi = 0.5 * theta.T
    sv = np.linalg.svd(phi, compute_uv=False)
    degenerate = bool(sv[-1] < DEGENERACY_RATIO * sv[0])
    return EprMap(
        phi=phi,
        alice_bloch=theta[1:, 0].copy(),
        bob_bloch=theta[0, 1:].copy(),
        correlation=theta[1:, 1:].copy(),
        degenerate=degenerate,
    )


def steering_outcome(emap, measurement_bloch):
    """Bob-side coordinates of the image of the projector ``(I + x.sigma)/2``."""
    x = check_unit(measurement_bloch)
    return emap.phi @ np.concatenate(([1.0], x))


@dataclass(frozen=True, eq=False)
class TStateForm:
    t_diag: np.ndarray
    alice_rotation: np.ndarray
    bob_rotation: np.ndarray

    def reconstruct(self):
        return self.alice_rotation.T @ np.diag(self.t_diag) @ self.bob_rotation


def canonicalize_tstate(emap, tol=1e-8):
    """Diagonalize the correlation matrix with local rotations.

    Returns ``TStateForm`` with ``C = Ra^T diag(t) Rb``, both rotations in SO(3)
    and ``|t1| >= |t2| >= |t3|``. Any reflection needed to reach SO(3) is
    absorbed into the sign of the smallest diagonal entry.
    """
    a, b = emap.alice_bloch, emap.bob_bloch
    if np.linalg.norm(a) > tol or np.linalg.norm(b) > tol:
        raise NotTState(
            f"marginals not maximally mixed: |a| = {np.linalg.norm(a):.3e}, "
            f"|b| = {np.linalg.norm(b):.3e}, tol = {tol:.1e}")
    u, s, vt = np.linalg.svd(emap.correlation)
    t = s.copy()
    if np.linalg.det(u) < 0:
        u[:, 2] *= -1
        t[2] *= -1
    if np.linalg.det(vt) < 0:
        vt[2] *= -1
        t[2] *= -1
    if abs(t[2]) < 1e-9:
        raise DegenerateT(f"smallest correlation {abs(t[2]):.3e} is below 1e-9")
    # already-diagonal input: keep the given signs, only reorder axes
    if np.allclose(emap.correlation, np.diag(np.diag(emap.correlation)), atol=1e-14):
        perm = np.argsort(-np.abs(np.diag(emap.correlation)), kind="stable")
        diag = np.diag(emap.correlation)[perm]
        p = np.eye(3)[perm]
        if np.linalg.det(p) < 0:
            # odd permutation: flip one axis on both sides to stay in SO(3)
            p[2] *= -1
        return TStateForm(t_diag=diag, alice_rotation=p, bob_rotation=p)
    return TStateForm(t_diag=t, alice_rotation=u.T.copy(), bob_rotation=vt.copy())


def werner(p):
    """Werner state ``p |psi-><psi-| + (1 - p) I/4``."""
    return from_theta(np.diag([1.0, -p, -p, -p]))


def tstate(t1, t2, t3):
    return from_theta(np.diag([1.0, t1, t2, t3]))


def bell(index):
    """One of the four Bell states; index 0..3 = phi+, phi-, psi+, psi-."""
    diags = {
        0: [1, 1, -1, 1],
        1: [1, -1, 1, 1],
        2: [1, 1, 1, -1],
        3: [1, -1, -1, -1],
    }
    if index not in diags:
        raise ValueError(f"bell index must be 0..3, got {index}")
    return from_theta(np.diag(np.asarray(diags[index], dtype=float)))


def rotation_matrix(axis, angle):
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    k = np.array([[0, -axis[2], axis[1]], [axis[2], 0, -axis[0]], [-axis[1], axis[0], 0]])
    return np.eye(3) + np.sin(angle) * k + (1 - np.cos(angle)) * (k @ k)


def su2_from_axis(axis, angle):
    """Unitary whose adjoint action rotates Bloch vectors by ``rotation_matrix(axis, angle)``."""
    axis = np.asarray(axis, dtype=float)
    axis = axis / np.linalg.norm(axis)
    gen = np.einsum("i,iab->ab", axis, PAULI[1:])
    return np.cos(angle / 2) * np.eye(2) - 1j * np.sin(angle / 2) * gen


def local_unitary(state, ua=None, ub=None):
    ua = np.eye(2) if ua is None else ua
    ub = np.eye(2) if ub is None else ub
    u = np.kron(ua, ub)
    return from_matrix(u @ state.rho @ u.conj().T)
