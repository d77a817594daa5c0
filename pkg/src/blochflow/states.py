"""Qubit state algebra: density matrices, Bloch vectors, projective bases,
Helstrom matrices, trace norms, and l1 coherence.

Conventions used throughout the package:

    rho = (1 + r . sigma) / 2,        r in R^3, ||r|| <= 1,
    sigma = (sigma_x, sigma_y, sigma_z).

A projective measurement basis is the eigenbasis {P_n, P_-n} of n . sigma
for a unit vector n, parameterized by polar/azimuthal angles (chi, xi):

    n = (sin chi cos xi, sin chi sin xi, cos chi),
    |n>  = (cos(chi/2), e^{i xi} sin(chi/2)),
    |-n> = (-e^{-i xi} sin(chi/2), cos(chi/2)).

General 2x2 matrices are handled through their (complex) Pauli coordinates
X = (x0 * 1 + c . sigma) / 2 with x0 = Tr X and c_i = Tr(sigma_i X).
"""
from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

SIGMA_X = np.array([[0.0, 1.0], [1.0, 0.0]], dtype=complex)
SIGMA_Y = np.array([[0.0, -1.0j], [1.0j, 0.0]], dtype=complex)
SIGMA_Z = np.array([[1.0, 0.0], [0.0, -1.0]], dtype=complex)
IDENTITY2 = np.eye(2, dtype=complex)
PAULI = (SIGMA_X, SIGMA_Y, SIGMA_Z)

_DEFAULT_TOL = 1e-12


class InvalidStateError(ValueError):
    """A matrix or vector failed the density-matrix / Bloch-ball checks."""


def eigh2(h: np.ndarray) -> tuple[float, float]:
    """Closed-form eigenvalues (ascending) of a 2x2 Hermitian matrix."""
    a = h[0, 0].real
    c = h[1, 1].real
    half_gap = np.hypot(0.5 * (a - c), abs(h[0, 1]))
    mean = 0.5 * (a + c)
    return mean - half_gap, mean + half_gap


def _check_hermitian(h: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    h = np.asarray(h, dtype=complex)
    if h.shape != (2, 2):
        raise InvalidStateError(f"expected a 2x2 matrix, got shape {h.shape}")
    if np.abs(h - h.conj().T).max() > tol:
        raise InvalidStateError("matrix is not Hermitian within tolerance")
    return h


def validate_density(rho: np.ndarray, tol: float = 1e-10) -> np.ndarray:
    """Check Hermiticity, unit trace, and positivity; return rho as complex array."""
    rho = _check_hermitian(rho, tol)
    if abs(np.trace(rho).real - 1.0) > max(tol, _DEFAULT_TOL):
        raise InvalidStateError("trace differs from 1")
    lo, _ = eigh2(rho)
    if lo < -max(tol, _DEFAULT_TOL):
        raise InvalidStateError(f"negative eigenvalue {lo:.2e}")
    return rho


def bloch_to_density(r, tol: float = _DEFAULT_TOL) -> np.ndarray:
    """Density matrix (1 + r . sigma)/2 for a Bloch vector inside the ball."""
    r = np.asarray(r, dtype=float)
    if r.shape != (3,):
        raise InvalidStateError("Bloch vector must have 3 components")
    if np.linalg.norm(r) > 1.0 + tol:
        raise InvalidStateError(f"Bloch vector has norm {np.linalg.norm(r):.6f} > 1")
    return 0.5 * (IDENTITY2 + r[0] * SIGMA_X + r[1] * SIGMA_Y + r[2] * SIGMA_Z)


def density_to_bloch(rho: np.ndarray) -> np.ndarray:
    """Bloch vector r_i = Tr(sigma_i rho) of a density matrix."""
    rho = validate_density(rho)
    return np.array([np.trace(s @ rho).real for s in PAULI])


def pauli_coefficients(x: np.ndarray) -> tuple[complex, np.ndarray]:
    """(x0, c) with X = (x0 * 1 + c . sigma)/2; complex for general X."""
    x = np.asarray(x, dtype=complex)
    x0 = x[0, 0] + x[1, 1]
    c = np.array([x[0, 1] + x[1, 0],
                  1j * (x[0, 1] - x[1, 0]),
                  x[0, 0] - x[1, 1]])
    return x0, c


def from_pauli_coefficients(x0: complex, c: np.ndarray) -> np.ndarray:
    """Inverse of pauli_coefficients."""
    c = np.asarray(c, dtype=complex)
    return 0.5 * (x0 * IDENTITY2 + c[0] * SIGMA_X + c[1] * SIGMA_Y + c[2] * SIGMA_Z)


def trace_norm(h: np.ndarray) -> float:
    """Trace norm ||h||_1 of a Hermitian 2x2 matrix (sum of |eigenvalues|).

    Raises a domain error for non-Hermitian input; uses the closed-form
    2x2 eigenvalues, never an iterative solver.
    """
    h = _check_hermitian(h)
    lo, hi = eigh2(h)
    return abs(lo) + abs(hi)


@dataclass(frozen=True)
class ProjectorBasis:
    """Projective basis {P_n, P_-n} fixed by Bloch-sphere angles (chi, xi)."""

    chi: float
    xi: float = 0.0

    @classmethod
    def from_vector(cls, n) -> "ProjectorBasis":
        n = np.asarray(n, dtype=float)
        norm = np.linalg.norm(n)
        if abs(norm - 1.0) > 1e-9:
            raise InvalidStateError("basis vector must be unit length")
        n = n / norm
        return cls(chi=float(np.arccos(np.clip(n[2], -1.0, 1.0))),
                   xi=float(np.arctan2(n[1], n[0])))

    @property
    def n(self) -> np.ndarray:
        s, c = np.sin(self.chi), np.cos(self.chi)
        return np.array([s * np.cos(self.xi), s * np.sin(self.xi), c])

    @property
    def frame(self) -> np.ndarray:
        """Unitary whose columns are |n>, |-n> in the gauge fixed by (chi, xi)."""
        ch, sh = np.cos(self.chi / 2), np.sin(self.chi / 2)
        e = np.exp(1j * self.xi)
        return np.array([[ch, -sh / e], [sh * e, ch]])

    @property
    def projectors(self) -> tuple[np.ndarray, np.ndarray]:
        u = self.frame
        return (np.outer(u[:, 0], u[:, 0].conj()),
                np.outer(u[:, 1], u[:, 1].conj()))

    def coherence_pairing(self) -> np.ndarray:
        """Complex 3-vector tau with <n|rho|-n> = (w . tau)/2 for rho with
        Bloch vector w; used to evaluate coherences without matrix products."""
        u = self.frame
        return np.array([u[:, 0].conj() @ s @ u[:, 1] for s in PAULI])


@dataclass(frozen=True)
class Helstrom:
    """Biased two-state discrimination matrix mu*rho - (1-mu)*sigma."""

    matrix: np.ndarray
    mu: float = field(default=0.5)

    def __post_init__(self):
        object.__setattr__(self, "matrix", _check_hermitian(self.matrix))
        expected = 2.0 * self.mu - 1.0
        if abs(np.trace(self.matrix).real - expected) > 1e-10:
            raise InvalidStateError("Helstrom trace inconsistent with prior mu")


def helstrom(rho: np.ndarray, sigma: np.ndarray, mu: float = 0.5) -> Helstrom:
    """Helstrom matrix mu*rho - (1-mu)*sigma with prior mu in [0, 1]."""
    if not 0.0 <= mu <= 1.0:
        raise ValueError(f"prior mu = {mu} outside [0, 1]")
    rho = validate_density(rho)
    sigma = validate_density(sigma)
    return Helstrom(mu * rho - (1.0 - mu) * sigma, mu)


def l1_coherence(rho: np.ndarray, basis: ProjectorBasis) -> float:
    """Sum of absolute off-diagonal entries of rho in the basis eigenframe."""
    rho = validate_density(rho)
    u = basis.frame
    return 2.0 * abs(u[:, 0].conj() @ rho @ u[:, 1])


def decohere(rho: np.ndarray, basis: ProjectorBasis) -> np.ndarray:
    """Projector-sandwich map P_n rho P_n + P_-n rho P_-n (deletes coherences)."""
    p_plus, p_minus = basis.projectors
    return p_plus @ rho @ p_plus + p_minus @ rho @ p_minus


def outcome_probabilities(rho: np.ndarray, basis: ProjectorBasis) -> np.ndarray:
    """(Tr P_n rho, Tr P_-n rho)."""
    p_plus, p_minus = basis.projectors
    return np.array([np.trace(p_plus @ rho).real, np.trace(p_minus @ rho).real])
