"""Pauli and Dirac matrices (Dirac basis), the approximate metric tensor
``gamma_0 + gamma_0 gamma^mu A_mu`` and the slash determinant.

Metric signature is (+, -, -, -).
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

MINKOWSKI = np.diag([1.0, -1.0, -1.0, -1.0])


@dataclass(frozen=True)
class SpinMatrixSet:
    sigma: np.ndarray   # (3, 2, 2)
    beta: np.ndarray    # (4, 4), equal to gamma^0
    alpha: np.ndarray   # (3, 4, 4)
    gamma: np.ndarray   # (4, 4, 4), upper index gamma^mu

    @property
    def gamma0(self) -> np.ndarray:
        return self.gamma[0]


def _build() -> SpinMatrixSet:
    sigma = np.array([
        [[0, 1], [1, 0]],
        [[0, -1j], [1j, 0]],
        [[1, 0], [0, -1]],
    ], dtype=complex)
    zero = np.zeros((2, 2), dtype=complex)
    eye = np.eye(2, dtype=complex)
    beta = np.block([[eye, zero], [zero, -eye]])
    alpha = np.array([np.block([[zero, s], [s, zero]]) for s in sigma])
    gamma = np.array([beta] + [np.block([[zero, s], [-s, zero]]) for s in sigma])
    for a in (sigma, beta, alpha, gamma):
        a.setflags(write=False)
    return SpinMatrixSet(sigma=sigma, beta=beta, alpha=alpha, gamma=gamma)


SPIN = _build()
SIGMA = SPIN.sigma
ALPHA = SPIN.alpha
GAMMA = SPIN.gamma
GAMMA0 = SPIN.gamma0


def spin_matrices() -> SpinMatrixSet:
    return SPIN


def perturbed_spin_matrices(delta: float = 1e-3) -> SpinMatrixSet:
    """Copy of the standard set with one gamma entry nudged (fault injection)."""
    gamma = np.array(SPIN.gamma)
    gamma[1, 0, 3] += delta
    return SpinMatrixSet(sigma=SPIN.sigma, beta=SPIN.beta, alpha=SPIN.alpha, gamma=gamma)


def slash(A_mu, spin: SpinMatrixSet = SPIN) -> np.ndarray:
    """gamma^mu A_mu for a covariant four-vector A_mu."""
    A_mu = np.asarray(A_mu, dtype=float)
    if A_mu.shape != (4,):
        raise ValueError("A_mu must be a four-vector")
    return np.tensordot(A_mu, spin.gamma, axes=1)


def metric_tensor(A_mu, spin: SpinMatrixSet = SPIN) -> np.ndarray:
    """Approximate metric ``gamma_0 + gamma_0 gamma^mu A_mu`` (4x4)."""
    g0 = spin.gamma0
    return g0 + g0 @ slash(A_mu, spin)


def det_slash(A_mu, spin: SpinMatrixSet = SPIN) -> complex:
    """det(gamma^mu A_mu); analytically (A.A)^2 with the Minkowski product."""
    return complex(np.linalg.det(slash(A_mu, spin)))


def minkowski_square(A_mu) -> float:
    A_mu = np.asarray(A_mu, dtype=float)
    return float(A_mu @ MINKOWSKI @ A_mu)


def pauli_algebra_error(spin: SpinMatrixSet = SPIN) -> float:
    """Max entrywise deviation from sigma_j sigma_k = delta_jk + i eps_jkl sigma_l."""
    s = spin.sigma
    eps = np.zeros((3, 3, 3))
    eps[0, 1, 2] = eps[1, 2, 0] = eps[2, 0, 1] = 1
    eps[0, 2, 1] = eps[2, 1, 0] = eps[1, 0, 2] = -1
    err = 0.0
    for j in range(3):
        for k in range(3):
            target = (j == k) * np.eye(2) + 1j * np.tensordot(eps[j, k], s, axes=1)
            err = max(err, np.abs(s[j] @ s[k] - target).max())
    return float(err)


def clifford_error(spin: SpinMatrixSet = SPIN) -> float:
    """Max entrywise deviation from {gamma^mu, gamma^nu} = 2 g^{mu nu} I."""
    g = spin.gamma
    err = 0.0
    for mu in range(4):
        for nu in range(4):
            anti = g[mu] @ g[nu] + g[nu] @ g[mu]
            err = max(err, np.abs(anti - 2 * MINKOWSKI[mu, nu] * np.eye(4)).max())
    return float(err)


def dirac_basis_error(spin: SpinMatrixSet = SPIN) -> float:
    """Consistency of gamma^0 = beta, gamma^k = beta alpha_k and gamma_0^2 = I."""
    g = spin.gamma
    err = np.abs(g[0] - spin.beta).max()
    err = max(err, np.abs(g[0] @ g[0] - np.eye(4)).max())
    for k in range(3):
        err = max(err, np.abs(g[k + 1] - spin.beta @ spin.alpha[k]).max())
    return float(err)
