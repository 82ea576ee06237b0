"""Probability currents: Schrodinger, normalized (phase-gradient), n-field,
Pauli (convective + spin), spin curl current and the Dirac current, plus the
Dirac -> Pauli reduction check.

Charge e = q = 1 throughout.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from slitlab.fields import (
    ComplexField2D,
    DiracField2D,
    GridSpec,
    PauliField2D,
    VectorField2D,
    curl,
    grad,
    require_same_grid,
)
from slitlab.spin import ALPHA, SIGMA

EPS0_RELATIVE = 1e-12

_LEVI = np.zeros((3, 3, 3))
_LEVI[0, 1, 2] = _LEVI[1, 2, 0] = _LEVI[2, 0, 1] = 1
_LEVI[0, 2, 1] = _LEVI[2, 1, 0] = _LEVI[1, 0, 2] = -1


@dataclass(frozen=True)
class DensityField:
    grid: GridSpec
    values: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=float)
        if values.shape != self.grid.shape:
            raise ValueError("density shape does not match grid")
        if np.any(values < 0):
            raise ValueError("density must be non-negative")
        object.__setattr__(self, "values", values)

    def integral(self) -> float:
        return float(self.values.sum() * self.grid.cell_area)


@dataclass(frozen=True)
class UnitPairField:
    """Unit 2-vector field (n1, n2); ``mask`` is False where |phi| ~ 0."""

    grid: GridSpec
    values: np.ndarray
    mask: np.ndarray


def _check_mass(m: float) -> None:
    if not m > 0:
        raise ValueError(f"mass must be positive, got {m}")


def default_eps0(rho: np.ndarray) -> float:
    return EPS0_RELATIVE * float(np.max(rho)) if rho.size else 0.0


def density(phi: ComplexField2D) -> DensityField:
    return DensityField(phi.grid, np.abs(phi.values) ** 2)


def schrodinger_current(phi: ComplexField2D, m: float = 1.0, scheme: str = "spectral") -> VectorField2D:
    """J = -(i/2m) [phi* grad phi - (grad phi*) phi] = Im(phi* grad phi) / m."""
    _check_mass(m)
    g = grad(phi.values, phi.grid, scheme)
    J = np.imag(np.conj(phi.values) * g) / m
    return VectorField2D(phi.grid, J)


def _defined(rho: np.ndarray, eps0: float | None) -> np.ndarray:
    if eps0 is None:
        eps0 = default_eps0(rho)
    return rho > eps0


def normalized_current(phi: ComplexField2D, eps0: float | None = None, scheme: str = "spectral",
                       form: str = "components") -> VectorField2D:
    """Phase-gradient current tilde-J, masked where rho <= eps0.

    ``form="components"`` uses (phi1 d phi2 - phi2 d phi1) / (phi1^2 + phi2^2)
    on the real and imaginary parts; ``form="raw"`` evaluates the lower-index
    expression -(phi* d_mu phi - phi d_mu phi*) / (2 i phi* phi), with d phi*
    differentiated separately, then raises the spatial index (metric -1).
    Both agree wherever the field is defined.
    """
    v = phi.values
    rho = np.abs(v) ** 2
    mask = _defined(rho, eps0)
    safe = np.where(mask, rho, 1.0)
    if form == "components":
        p1, p2 = v.real, v.imag
        g1 = grad(p1, phi.grid, scheme)
        g2 = grad(p2, phi.grid, scheme)
        Jt = (p1 * g2 - p2 * g1) / safe
    elif form == "raw":
        g = grad(v, phi.grid, scheme)
        gc = grad(np.conj(v), phi.grid, scheme)
        lower = np.real(-(np.conj(v) * g - v * gc) / (2j * safe))
        Jt = -lower
    else:
        raise ValueError(f"unknown form {form!r}")
    return VectorField2D(phi.grid, np.where(mask, Jt, 0.0), mask)


def n_field(phi: ComplexField2D, eps0: float | None = None) -> UnitPairField:
    """phi / |phi| at every nonzero node; ``mask`` flags rho <= eps0.

    Values below the threshold are kept rather than zeroed so that spectral
    derivatives of n do not see an artificial jump at the mask edge.
    """
    v = phi.values
    rho = np.abs(v) ** 2
    mask = _defined(rho, eps0)
    amp = np.sqrt(rho)
    nz = amp > 0
    safe = np.where(nz, amp, 1.0)
    n = np.where(nz, np.stack([v.real / safe, v.imag / safe]), 0.0)
    return UnitPairField(phi.grid, n, mask)


def n_field_current(n: UnitPairField, scheme: str = "spectral") -> VectorField2D:
    """eps_ab n^a grad n^b = n1 grad n2 - n2 grad n1.

    Spectral derivatives of n assume n is smooth and periodic, which fails
    near field nodes; use ``central2`` for fields with vortices.
    """
    n1, n2 = n.values
    J = n1 * grad(n2, n.grid, scheme) - n2 * grad(n1, n.grid, scheme)
    return VectorField2D(n.grid, np.where(n.mask, J, 0.0), n.mask)


def small_component(psi_a: PauliField2D, m: float = 1.0, A_ext: VectorField2D | None = None,
                    scheme: str = "spectral") -> PauliField2D:
    """psi_b = sigma . (-i grad - A_ext) psi_a / (2m)."""
    _check_mass(m)
    gpsi = grad(psi_a.values, psi_a.grid, scheme)       # (2 dirs, 2 spin, nx, ny)
    P = -1j * gpsi
    if A_ext is not None:
        require_same_grid(psi_a.grid, A_ext.grid)
        P = P - A_ext.values[:2, np.newaxis] * psi_a.values[np.newaxis]
    psi_b = np.einsum("kab,kb...->a...", SIGMA[:2], P)
    if A_ext is not None and A_ext.ncomp == 3:
        psi_b = psi_b - np.einsum("ab,b...->a...", SIGMA[2], A_ext.values[2] * psi_a.values)
    return PauliField2D(psi_a.grid, psi_b / (2 * m))


def dirac_current(psi: DiracField2D) -> tuple[DensityField, VectorField2D]:
    """rho = psi^dagger psi and J^k = psi^dagger alpha_k psi."""
    v = psi.values
    rho = np.sum(np.abs(v) ** 2, axis=0)
    J = np.einsum("a...,kab,b...->k...", np.conj(v), ALPHA, v).real
    return DensityField(psi.grid, rho), VectorField2D(psi.grid, J)


def magnetization(psi_a: PauliField2D) -> np.ndarray:
    """M_l = psi_a^dagger sigma_l psi_a, shape (3, nx, ny)."""
    v = psi_a.values
    return np.einsum("a...,lab,b...->l...", np.conj(v), SIGMA, v).real


def spin_current(psi_a: PauliField2D, m: float = 1.0, scheme: str = "spectral") -> VectorField2D:
    """(1/2m) curl(psi_a^dagger sigma psi_a)."""
    _check_mass(m)
    return VectorField2D(psi_a.grid, curl(magnetization(psi_a), psi_a.grid, scheme) / (2 * m))


def spin_current_direct(psi_a: PauliField2D, m: float = 1.0, scheme: str = "spectral") -> VectorField2D:
    """(1/2m) [(grad psi^dagger) x sigma psi - psi^dagger sigma x (grad psi)].

    The antisymmetrized-gradient form; equals ``spin_current`` in the
    continuum, differs by the product-rule truncation error on a grid.
    """
    _check_mass(m)
    v = psi_a.values
    g = np.zeros((3, *v.shape), dtype=complex)
    g[:2] = grad(v, psi_a.grid, scheme)
    sig_psi = np.einsum("kab,b...->ka...", SIGMA, v)
    sig_gpsi = np.einsum("kab,jb...->jka...", SIGMA, g)   # sigma_k d_j psi
    # (grad psi^dag x sigma psi)_l = eps_ljk (d_j psi)^dag sigma_k psi
    t1 = np.einsum("ljk,ja...,ka...->l...", _LEVI, np.conj(g), sig_psi)
    # (psi^dag sigma x grad psi)_l = eps_ljk psi^dag sigma_j d_k psi
    t2 = np.einsum("ljk,a...,kja...->l...", _LEVI, np.conj(v), sig_gpsi)
    return VectorField2D(psi_a.grid, np.real(t1 - t2) / (2 * m))


def convective_current(psi_a: PauliField2D, m: float = 1.0, scheme: str = "spectral") -> VectorField2D:
    """-(i/2m)[psi^dag grad psi - (grad psi^dag) psi], summed over spin; 3 components."""
    _check_mass(m)
    g = grad(psi_a.values, psi_a.grid, scheme)
    J = np.zeros((3, *psi_a.grid.shape))
    J[:2] = np.sum(np.imag(np.conj(psi_a.values)[np.newaxis] * g), axis=1) / m
    return VectorField2D(psi_a.grid, J)


def pauli_current_parts(psi_a: PauliField2D, m: float = 1.0,
                        scheme: str = "spectral") -> tuple[VectorField2D, VectorField2D]:
    """(convective part, spin part) of the reduced Dirac current."""
    return convective_current(psi_a, m, scheme), spin_current(psi_a, m, scheme)


def pauli_current(psi_a: PauliField2D, m: float = 1.0, scheme: str = "spectral") -> VectorField2D:
    conv, spin = pauli_current_parts(psi_a, m, scheme)
    return conv + spin


def external_field_term(psi_a: PauliField2D, A_ext: VectorField2D, m: float = 1.0) -> VectorField2D:
    """The A_ext contribution to the reduced current,
    -(1/2m) [psi^dag (A.sigma) sigma_k psi + psi^dag sigma_k (A.sigma) psi].

    Evaluated from the matrices directly. The Pauli anticommutator makes it
    -A_k rho / m rather than zero; ``pauli_current`` omits it.
    """
    _check_mass(m)
    require_same_grid(psi_a.grid, A_ext.grid)
    v = psi_a.values
    A = np.zeros((3, *psi_a.grid.shape))
    A[: A_ext.ncomp] = A_ext.values
    Asig = np.einsum("j...,jab->ab...", A, SIGMA)
    left = np.einsum("ab...,kbc->kac...", Asig, SIGMA)
    right = np.einsum("kab,bc...->kac...", SIGMA, Asig)
    J = np.einsum("a...,kab...,b...->k...", np.conj(v), left + right, v).real
    return VectorField2D(psi_a.grid, -J / (2 * m))


def reduction_residual(psi_a: PauliField2D, m: float = 1.0, scheme: str = "spectral") -> float:
    """Max-norm of dirac_current(psi_a, small_component(psi_a)) - pauli_current(psi_a)."""
    psi_b = small_component(psi_a, m, None, scheme)
    _, J_dirac = dirac_current(DiracField2D.from_blocks(psi_a, psi_b))
    return (J_dirac - pauli_current(psi_a, m, scheme)).max_norm()
