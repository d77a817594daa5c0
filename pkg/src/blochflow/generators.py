"""Time-dependent qubit generators, divisibility certificates, and propagation.

A generator is specified in canonical form

    L_t[rho] = -i[H(t), rho]
               + (1/2) sum_ij K_ij(t) (sigma_i rho sigma_j
                                       - (1/2){sigma_j sigma_i, rho}),

with H(t) = omega(t) . sigma / 2 and K(t) the 3x3 Hermitian dissipation
(Kossakowski) matrix. Its Bloch representation is the affine pair

    linear  = Re K - Tr(K) 1 + cross(omega),
    affine  = (-2 Im K_23, -2 Im K_31, -2 Im K_12),

and both directions of this dictionary are exact (see kossakowski_from_bloch).

Divisibility certificates:

* instantaneous CP: K(t) >= 0, equivalently the sandwiched Choi form Y_t >= 0;
* instantaneous P: Tr(P_-n L_t[P_n]) = -(n.(linear n + affine))/2 >= 0 for
  every unit n, minimized exactly through the spherically constrained
  quadratic program.

Propagation integrates the 4x4 affine representation, either by fixed-step
RK4 or by an exponential midpoint time-splitting product.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np
from scipy.linalg import expm

from ._sphere import min_half_quadratic
from .channels import QubitChannel, cross_matrix

_MAGIC_FRAME = None


class SingularMapError(ValueError):
    """An intertwiner was requested at a time where the map is not invertible."""


class DivisibilityCheck(NamedTuple):
    verdict: bool
    margin: float


@dataclass(frozen=True)
class GeneratorSpec:
    """Canonical generator data: t -> omega(t) and t -> K(t).

    Both callables must be pure functions of t (re-entrant); K(t) is
    symmetrized Hermitian on evaluation so small numerical asymmetries in
    user input cannot leak into certificates.
    """

    hamiltonian_coeffs: Callable[[float], np.ndarray]
    kossakowski: Callable[[float], np.ndarray]

    def omega(self, t: float) -> np.ndarray:
        return np.asarray(self.hamiltonian_coeffs(t), dtype=float)

    def kmatrix(self, t: float) -> np.ndarray:
        k = np.asarray(self.kossakowski(t), dtype=complex)
        return 0.5 * (k + k.conj().T)

    # ---------------------------------------------------------------
    @classmethod
    def pauli(cls, gamma1, gamma2, gamma3) -> "GeneratorSpec":
        """Pauli dissipator with (possibly time-dependent) rates gamma_k."""
        rates = [_as_time_function(g) for g in (gamma1, gamma2, gamma3)]

        def kossakowski(t):
            return np.diag([r(t) for r in rates]).astype(complex)

        return cls(lambda t: np.zeros(3), kossakowski)

    @classmethod
    def hamiltonian_only(cls, omega) -> "GeneratorSpec":
        """Purely unitary generator, H(t) = omega(t) . sigma / 2."""
        w = _as_vector_function(omega)
        return cls(w, lambda t: np.zeros((3, 3), dtype=complex))

    @classmethod
    def from_bloch(cls, linear: Callable[[float], np.ndarray],
                   affine: Callable[[float], np.ndarray] | None = None
                   ) -> "GeneratorSpec":
        """Build from the Bloch view; omega and K are recovered exactly."""

        def hamiltonian(t):
            w, _ = kossakowski_from_bloch(np.asarray(linear(t), dtype=float),
                                          _affine_at(affine, t))
            return w

        def kossakowski(t):
            _, k = kossakowski_from_bloch(np.asarray(linear(t), dtype=float),
                                          _affine_at(affine, t))
            return k

        return cls(hamiltonian, kossakowski)


def _affine_at(affine, t):
    if affine is None:
        return np.zeros(3)
    return np.asarray(affine(t), dtype=float)


def _as_time_function(value):
    if callable(value):
        return value
    return lambda t, _v=float(value): _v


def _as_vector_function(value):
    if callable(value):
        return lambda t: np.asarray(value(t), dtype=float)
    fixed = np.asarray(value, dtype=float)
    if fixed.ndim == 0:          # scalar frequency: precession about e3
        fixed = np.array([0.0, 0.0, float(fixed)])
    return lambda t: fixed


def bloch_generator(gen: GeneratorSpec, t: float) -> tuple[np.ndarray, np.ndarray]:
    """Bloch view (linear 3x3, affine 3-vector) of the generator at time t."""
    k = gen.kmatrix(t)
    omega = gen.omega(t)
    linear = k.real - np.trace(k).real * np.eye(3) + cross_matrix(omega)
    affine = -2.0 * np.array([k[1, 2].imag, k[2, 0].imag, k[0, 1].imag])
    return linear, affine


def kossakowski_from_bloch(linear: np.ndarray,
                           affine: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Invert the Bloch dictionary: (linear, affine) -> (omega, K), exactly."""
    anti = 0.5 * (linear - linear.T)
    omega = np.array([anti[2, 1], anti[0, 2], anti[1, 0]])
    dis = linear - cross_matrix(omega)
    trace_k = -np.trace(dis) / 2.0
    k_real = dis + trace_k * np.eye(3)
    k_imag = np.zeros((3, 3))
    k_imag[1, 2], k_imag[2, 0], k_imag[0, 1] = (-affine[0] / 2.0,
                                                -affine[1] / 2.0,
                                                -affine[2] / 2.0)
    k_imag = k_imag - k_imag.T
    return omega, k_real + 1j * k_imag


def _magic_frame() -> np.ndarray:
    """Columns (sigma_i x 1)|psi+> spanning the complement of the maximally
    entangled vector; the frame in which Y_t literally equals K(t)."""
    global _MAGIC_FRAME
    if _MAGIC_FRAME is None:
        from .states import IDENTITY2, PAULI
        psi = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
        _MAGIC_FRAME = np.stack([np.kron(s, IDENTITY2) @ psi for s in PAULI],
                                axis=1)
    return _MAGIC_FRAME


def y_matrix(gen: GeneratorSpec, t: float) -> np.ndarray:
    """Sandwiched Choi form of the generator,

        Y_t = (1 - P)(L_t x id)[sum_ij E_ij x E_ij](1 - P),

    with P the maximally entangled projector. Hamiltonian and anticommutator
    parts are annihilated by the sandwich, so eig(Y_t) = eig(K(t)) + {0}; the
    construction below goes through the Bloch action and is therefore an
    independent cross-check of the Kossakowski dictionary.
    """
    linear, affine = bloch_generator(gen, t)

    def act(x):
        from .states import from_pauli_coefficients, pauli_coefficients
        x0, c = pauli_coefficients(x)
        return from_pauli_coefficients(0.0, linear @ c + x0 * affine)

    choi = np.zeros((4, 4), dtype=complex)
    for i in range(2):
        for j in range(2):
            e = np.zeros((2, 2), dtype=complex)
            e[i, j] = 1.0
            choi += np.kron(act(e), e)
    psi = np.array([1.0, 0.0, 0.0, 1.0], dtype=complex) / np.sqrt(2.0)
    q = np.eye(4) - np.outer(psi, psi.conj())
    y = q @ choi @ q
    return 0.5 * (y + y.conj().T)


def kossakowski_from_y(y: np.ndarray) -> np.ndarray:
    """Read K back off Y_t: K_ij = <v_i| Y |v_j> in the magic frame."""
    v = _magic_frame()
    return v.conj().T @ y @ v


def instantaneous_p_div(gen: GeneratorSpec, t: float,
                        tol: float = 1e-9) -> DivisibilityCheck:
    """Worst-case instantaneous probability outflow across all projector pairs.

    margin = min over unit n of Tr(P_-n L_t[P_n]); nonnegative margin (within
    tol) certifies P-divisibility of the step at t. Unital generators reduce
    to an exact eigenvalue computation; the general case is solved exactly as
    a spherical quadratic program.
    """
    linear, affine = bloch_generator(gen, t)
    if np.abs(affine).max() <= 1e-14:
        sym = 0.5 * (linear + linear.T)
        margin = -0.5 * float(np.linalg.eigvalsh(sym).max())
    else:
        margin, _ = min_half_quadratic(linear, affine)
    return DivisibilityCheck(margin >= -tol, float(margin))


def instantaneous_cp_div(gen: GeneratorSpec, t: float,
                         tol: float = 1e-9) -> DivisibilityCheck:
    """CP certificate: margin = min eigenvalue of K(t) (the nonzero sector of
    Y_t); verdict true iff it is >= -tol."""
    margin = float(np.linalg.eigvalsh(gen.kmatrix(t)).min())
    return DivisibilityCheck(margin >= -tol, margin)


# ---------------------------------------------------------------------------
# propagation
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class Propagator:
    """Dynamics on a time grid: 4x4 affine maps with Lambda_0 = identity."""

    grid: np.ndarray
    mats: np.ndarray

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        mats = np.asarray(self.mats, dtype=float)
        if grid.ndim != 1 or mats.shape != (grid.size, 4, 4):
            raise ValueError("need grid (N,) and mats (N, 4, 4)")
        if abs(grid[0]) > 1e-15 or np.any(np.diff(grid) <= 0):
            raise ValueError("grid must start at 0 and strictly increase")
        if not np.isfinite(mats).all():
            raise ValueError("propagation produced non-finite maps")
        first_rows = mats[:, 0, :]
        if (np.abs(first_rows - np.array([1.0, 0.0, 0.0, 0.0])).max() > 1e-9
                or np.abs(mats[0] - np.eye(4)).max() > 1e-9):
            raise ValueError("maps must be trace-preserving with an identity "
                             "initial point")
        grid.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "mats", mats)

    @property
    def bloch(self) -> np.ndarray:
        """(N, 3, 3) linear parts."""
        return self.mats[:, 1:, 1:]

    @property
    def translations(self) -> np.ndarray:
        return self.mats[:, 1:, 0]

    @property
    def determinants(self) -> np.ndarray:
        return np.linalg.det(self.bloch)

    def invertible(self, tol: float = 1e-12) -> np.ndarray:
        return np.abs(self.determinants) > tol

    def index_of(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not on the propagation grid")
        return i

    def channel(self, t: float) -> QubitChannel:
        i = self.index_of(t)
        return QubitChannel(self.mats[i, 1:, 1:], self.mats[i, 1:, 0])

    @property
    def maps(self) -> list[QubitChannel]:
        """Per-grid-point channels (materialized on demand)."""
        return [QubitChannel(m[1:, 1:], m[1:, 0]) for m in self.mats]

    def intertwiner(self, t: float, s: float,
                    tol: float = 1e-12) -> QubitChannel:
        """Two-time map Lambda_t Lambda_s^{-1} (requires invertibility at s)."""
        if t < s:
            raise ValueError("intertwiner needs t >= s")
        i, j = self.index_of(t), self.index_of(s)
        b_s = self.mats[j, 1:, 1:]
        if abs(np.linalg.det(b_s)) <= tol:
            raise SingularMapError(f"map not invertible at t = {self.grid[j]}")
        inv = np.eye(4)
        binv = np.linalg.inv(b_s)
        inv[1:, 1:] = binv
        inv[1:, 0] = -binv @ self.mats[j, 1:, 0]
        return QubitChannel.from_pauli4(self.mats[i] @ inv)


def intertwiner(prop: Propagator, t: float, s: float,
                tol: float = 1e-12) -> QubitChannel:
    return prop.intertwiner(t, s, tol)


def _generator_pauli4(gen: GeneratorSpec, t: float) -> np.ndarray:
    linear, affine = bloch_generator(gen, t)
    g = np.zeros((4, 4))
    g[1:, 0] = affine
    g[1:, 1:] = linear
    return g


def propagate_ode(gen: GeneratorSpec, grid) -> Propagator:
    """Fixed-step classical RK4 on M'(t) = G(t) M(t), M(0) = 1 (4x4 affine)."""
    grid = np.asarray(grid, dtype=float)
    mats = np.empty((grid.size, 4, 4))
    m = np.eye(4)
    mats[0] = m
    for k in range(grid.size - 1):
        t, h = grid[k], grid[k + 1] - grid[k]
        g1 = _generator_pauli4(gen, t)
        gm = _generator_pauli4(gen, t + 0.5 * h)
        g2 = _generator_pauli4(gen, t + h)
        k1 = g1 @ m
        k2 = gm @ (m + 0.5 * h * k1)
        k3 = gm @ (m + 0.5 * h * k2)
        k4 = g2 @ (m + h * k3)
        m = m + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        mats[k + 1] = m
    return Propagator(grid, mats)


def propagate_timesplitting(gen: GeneratorSpec, grid) -> Propagator:
    """Exponential midpoint product Prod_k exp(dt_k G(t_k + dt_k/2)).

    Each factor is a legitimate (invertible) map, so the product never
    becomes singular; for commuting families the only error is the midpoint
    quadrature of the exponent, which is O(dt^2).
    """
    grid = np.asarray(grid, dtype=float)
    mats = np.empty((grid.size, 4, 4))
    m = np.eye(4)
    mats[0] = m
    for k in range(grid.size - 1):
        h = grid[k + 1] - grid[k]
        m = expm(h * _generator_pauli4(gen, grid[k] + 0.5 * h)) @ m
        mats[k + 1] = m
    return Propagator(grid, mats)


def uniform_grid(t_max: float, steps: int) -> np.ndarray:
    """Uniform grid 0 .. t_max with the given number of steps (steps+1 nodes)."""
    if t_max <= 0 or steps < 1:
        raise ValueError("need t_max > 0 and steps >= 1")
    return np.linspace(0.0, float(t_max), int(steps) + 1)
