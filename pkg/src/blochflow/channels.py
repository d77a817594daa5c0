"""Static qubit linear maps in the Pauli affine representation.

A trace-preserving, Hermiticity-preserving linear map Phi on 2x2 matrices is
stored as a real 3x3 Bloch matrix B plus a translation vector v:

    Bloch action        r  ->  B r + v,
    4x4 representation  [[1, 0], [v, B]]   acting on (1, r).

Positivity is *not* an invariant: non-positive maps (and intertwiners of
non-CP-divisible dynamics) are first-class citizens here, and positivity is a
queried property with a margin.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from ._sphere import max_affine_norm
from .states import (ProjectorBasis, from_pauli_coefficients,
                     pauli_coefficients)


class PositivityResult(NamedTuple):
    verdict: bool
    margin: float


class ReductionResult(NamedTuple):
    matrix: np.ndarray
    stochastic: bool


@dataclass(frozen=True)
class QubitChannel:
    """Trace-preserving qubit map: 3x3 Bloch matrix + translation vector."""

    bloch: np.ndarray
    translation: np.ndarray

    def __post_init__(self):
        b = np.array(self.bloch, dtype=float)
        v = np.array(self.translation, dtype=float)
        if b.shape != (3, 3) or v.shape != (3,):
            raise ValueError("need a 3x3 Bloch matrix and a 3-vector translation")
        b.setflags(write=False)
        v.setflags(write=False)
        object.__setattr__(self, "bloch", b)
        object.__setattr__(self, "translation", v)

    # ------------------------------------------------------------------
    # constructors
    # ------------------------------------------------------------------
    @classmethod
    def identity(cls) -> "QubitChannel":
        return cls(np.eye(3), np.zeros(3))

    @classmethod
    def unital(cls, bloch) -> "QubitChannel":
        return cls(np.asarray(bloch, dtype=float), np.zeros(3))

    @classmethod
    def rotation(cls, axis, angle: float) -> "QubitChannel":
        axis = np.asarray(axis, dtype=float)
        axis = axis / np.linalg.norm(axis)
        k = cross_matrix(axis)
        return cls.unital(np.eye(3) + np.sin(angle) * k
                          + (1.0 - np.cos(angle)) * (k @ k))

    @classmethod
    def transposition(cls) -> "QubitChannel":
        return cls.unital(np.diag([1.0, -1.0, 1.0]))

    @classmethod
    def rotation_scaling(cls, angle: float, planar: float,
                         axial: float) -> "QubitChannel":
        """Planar rotation by `angle` scaled by `planar`, direct sum with an
        axial factor: Bloch matrix with singular values (planar, planar, axial).
        Not positive whenever planar > 1 or axial > 1, yet its classical
        reductions can still be stochastic for every basis."""
        c, s = planar * np.cos(angle), planar * np.sin(angle)
        return cls.unital(np.array([[c, -s, 0.0], [s, c, 0.0], [0.0, 0.0, axial]]))

    # ------------------------------------------------------------------
    # views
    # ------------------------------------------------------------------
    @property
    def pauli4(self) -> np.ndarray:
        """4x4 affine representation with first row (1, 0, 0, 0)."""
        m = np.zeros((4, 4))
        m[0, 0] = 1.0
        m[1:, 0] = self.translation
        m[1:, 1:] = self.bloch
        return m

    @classmethod
    def from_pauli4(cls, m: np.ndarray, tol: float = 1e-10) -> "QubitChannel":
        m = np.asarray(m, dtype=float)
        if np.abs(m[0] - np.array([1.0, 0, 0, 0])).max() > tol:
            raise ValueError("first row must be (1, 0, 0, 0): not trace-preserving")
        return cls(m[1:, 1:], m[1:, 0])

    def apply(self, x: np.ndarray) -> np.ndarray:
        """Act on an arbitrary 2x2 matrix by complex-linear extension of the
        Bloch action (Hermitian in, Hermitian out; trace preserved)."""
        x0, c = pauli_coefficients(x)
        return from_pauli_coefficients(x0, self.bloch @ c + x0 * self.translation)

    def compose(self, inner: "QubitChannel") -> "QubitChannel":
        """self after inner: the 4x4 representations multiply."""
        return QubitChannel(self.bloch @ inner.bloch,
                            self.bloch @ inner.translation + self.translation)


def cross_matrix(w) -> np.ndarray:
    """Matrix of the linear map r -> w x r."""
    w = np.asarray(w, dtype=float)
    return np.array([[0.0, -w[2], w[1]],
                     [w[2], 0.0, -w[0]],
                     [-w[1], w[0], 0.0]])


def is_unital(phi: QubitChannel, tol: float = 1e-12) -> bool:
    return bool(np.abs(phi.translation).max() <= tol)


def choi(phi: QubitChannel) -> np.ndarray:
    """Choi matrix (Phi x id)[sum_ij E_ij x E_ij]; Hermitian, trace 2."""
    c = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            c += np.kron(phi.apply(e), e)
    return 0.5 * (c + c.conj().T)


def is_positive(phi: QubitChannel, tol: float = 1e-9) -> PositivityResult:
    """Positivity of the map on states: max over unit m of ||B m + v|| <= 1.

    The unital case is exact (largest singular value); otherwise the sphere
    maximum is located on a Fibonacci lattice and polished by projected
    gradient ascent.
    """
    if is_unital(phi):
        peak = float(np.linalg.svd(phi.bloch, compute_uv=False).max())
    else:
        peak, _ = max_affine_norm(phi.bloch, phi.translation)
    margin = 1.0 - peak
    return PositivityResult(margin >= -tol, margin)


def ell_functional(phi: QubitChannel) -> float:
    """sup_n |<n| B |n>| over unit vectors: the spectral radius of the
    symmetric part of the Bloch matrix. Controls stochasticity of every
    classical reduction of a unital map, and can sit strictly below ||B||."""
    if not is_unital(phi):
        raise ValueError("ell functional is defined for unital maps")
    s = 0.5 * (phi.bloch + phi.bloch.T)
    return float(np.abs(np.linalg.eigvalsh(s)).max())


def dual(phi: QubitChannel) -> QubitChannel:
    """Heisenberg-picture dual. Its 4x4 representation is the transpose, so a
    trace-preserving dual exists only for unital input (otherwise the dual is
    unital-but-not-trace-preserving and leaves this class)."""
    if not is_unital(phi):
        raise ValueError("dual of a non-unital trace-preserving map is not "
                         "trace-preserving; only unital duals are representable")
    return QubitChannel.unital(phi.bloch.T)


def is_self_dual(phi: QubitChannel, tol: float = 1e-10) -> bool:
    """Self-dual iff the Bloch matrix is symmetric and the translation vanishes."""
    return (np.abs(phi.bloch - phi.bloch.T).max() <= tol
            and np.abs(phi.translation).max() <= tol)


def classical_reduction_matrix(phi: QubitChannel, basis: ProjectorBasis,
                               tol: float = 1e-9) -> ReductionResult:
    """T_ij = Tr(P_i Phi[P_j]) for the basis pair (P_n, P_-n).

    Columns always sum to 1 (trace preservation alone); entries are
    nonnegative -- and the matrix stochastic -- whenever the map is positive.
    The flag reports entrywise nonnegativity within tol.
    """
    n = basis.n
    b, v = phi.bloch, phi.translation
    quad = n @ b @ n
    shift = n @ v
    t00 = 0.5 * (1.0 + quad + shift)
    t01 = 0.5 * (1.0 - quad + shift)
    t = np.array([[t00, t01], [1.0 - t00, 1.0 - t01]])
    return ReductionResult(t, bool(t.min() >= -tol))
