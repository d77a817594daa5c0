"""Classical stochastic reductions of qubit dynamics.

Fixing an orthogonal projector pair (P_n, P_-n) turns a dynamical map into a
2x2 stochastic matrix T_ij(t) = Tr(P_i Lambda_t[P_j]) and a generator into a
rate matrix L_ij(t) = Tr(P_i L_t[P_j]). This module houses both reductions,
the classical master equation, the logarithmic-derivative recovery of L from
T, the Kolmogorov (classical P-divisibility) conditions, and the scalar
criterion

    f_t = dT_00/dt / (2 T_00 - 1)  <= 0

which decides divisibility of the bistochastic 2x2 case. Time derivatives use
5-point stencils (central in the interior, one-sided at the edges).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, NamedTuple

import numpy as np

from .generators import GeneratorSpec, Propagator, bloch_generator
from .states import ProjectorBasis

DEFAULT_GRID_TMAX = 10.0
DEFAULT_GRID_STEP = 1e-3


class SingularProcessError(ValueError):
    """T(t) failed to be invertible where inversion was required."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = float(time)


def _default_grid() -> np.ndarray:
    steps = int(round(DEFAULT_GRID_TMAX / DEFAULT_GRID_STEP))
    return np.linspace(0.0, DEFAULT_GRID_TMAX, steps + 1)


def _check_grid(grid: np.ndarray) -> np.ndarray:
    grid = np.asarray(grid, dtype=float)
    if grid.ndim != 1 or grid.size < 2 or np.any(np.diff(grid) <= 0):
        raise ValueError("grid must be 1-d, strictly increasing, len >= 2")
    return grid


def _uniform_step(grid: np.ndarray) -> float:
    steps = np.diff(grid)
    h = steps.mean()
    if np.abs(steps - h).max() > 1e-9 * max(1.0, abs(h)):
        raise ValueError("derivative stencils need a uniform grid")
    return float(h)


@dataclass(frozen=True)
class StochasticProcess:
    """Time-indexed family of column-stochastic matrices, T(0) = identity."""

    grid: np.ndarray
    matrices: np.ndarray
    basis: ProjectorBasis | None = None

    def __post_init__(self):
        grid = _check_grid(self.grid)
        mats = np.asarray(self.matrices, dtype=float)
        n = mats.shape[-1]
        if mats.shape != (grid.size, n, n):
            raise ValueError("matrices must have shape (len(grid), n, n)")
        if np.abs(mats.sum(axis=1) - 1.0).max() > 1e-9:
            raise ValueError("columns of T(t) must sum to one")
        if np.abs(mats[0] - np.eye(n)).max() > 1e-9:
            raise ValueError("T(0) must be the identity")
        grid.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self) -> int:
        return self.matrices.shape[-1]

    @property
    def t00(self) -> np.ndarray:
        return self.matrices[:, 0, 0]

    @property
    def determinants(self) -> np.ndarray:
        return np.linalg.det(self.matrices)

    def invertible(self, tol: float = 1e-12) -> np.ndarray:
        return np.abs(self.determinants) > tol

    def is_bistochastic(self, tol: float = 1e-9) -> bool:
        return bool(np.abs(self.matrices.sum(axis=2) - 1.0).max() <= tol)

    def index_of(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not on the process grid")
        return i

    def matrix_at(self, t: float) -> np.ndarray:
        return self.matrices[self.index_of(t)]


@dataclass(frozen=True)
class ClassicalGenerator:
    """Rate matrices L(t) on a grid; columns sum to zero.

    `func`, when present, evaluates L at arbitrary t (used by the master
    equation integrator for midpoint values); otherwise midpoints are
    interpolated linearly from the samples.
    """

    grid: np.ndarray
    matrices: np.ndarray
    func: Callable[[float], np.ndarray] | None = field(default=None,
                                                       compare=False)

    def __post_init__(self):
        grid = _check_grid(self.grid)
        mats = np.asarray(self.matrices, dtype=float)
        n = mats.shape[-1]
        if mats.shape != (grid.size, n, n):
            raise ValueError("matrices must have shape (len(grid), n, n)")
        if np.abs(mats.sum(axis=1)).max() > 1e-10:
            raise ValueError("columns of L(t) must sum to zero")
        grid.setflags(write=False)
        mats.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "matrices", mats)

    @property
    def dim(self) -> int:
        return self.matrices.shape[-1]

    def matrix(self, t: float) -> np.ndarray:
        if self.func is not None:
            return np.asarray(self.func(t), dtype=float)
        if t <= self.grid[0]:
            return self.matrices[0]
        if t >= self.grid[-1]:
            return self.matrices[-1]
        j = int(np.searchsorted(self.grid, t))
        t0, t1 = self.grid[j - 1], self.grid[j]
        w = (t - t0) / (t1 - t0)
        return (1.0 - w) * self.matrices[j - 1] + w * self.matrices[j]


# ---------------------------------------------------------------------------
# reductions
# ---------------------------------------------------------------------------
def reduce_map(prop: Propagator, basis: ProjectorBasis) -> StochasticProcess:
    """T_ij(t) = Tr(P_i Lambda_t[P_j]) for the projector pair of `basis`.

    Column sums are exactly one (trace preservation); entries are
    nonnegative whenever every Lambda_t is positive. Fully vectorized over
    the grid.
    """
    n = basis.n
    quad = np.einsum("i,kij,j->k", n, prop.bloch, n)
    shift = prop.translations @ n
    t00 = 0.5 * (1.0 + quad + shift)
    t01 = 0.5 * (1.0 - quad + shift)
    mats = np.empty((prop.grid.size, 2, 2))
    mats[:, 0, 0] = t00
    mats[:, 0, 1] = t01
    mats[:, 1, 0] = 1.0 - t00
    mats[:, 1, 1] = 1.0 - t01
    return StochasticProcess(prop.grid, mats, basis)


def reduce_generator(gen: GeneratorSpec, basis: ProjectorBasis,
                     grid=None) -> ClassicalGenerator:
    """L_ij(t) = Tr(P_i L_t[P_j]); sampled on `grid` (default dt=1e-3 on
    [0, 10]) and also carried as an exact time-function."""
    grid = _default_grid() if grid is None else _check_grid(grid)
    n = basis.n

    def rate_matrix(t: float) -> np.ndarray:
        linear, affine = bloch_generator(gen, t)
        forward = 0.5 * float(n @ (linear @ n + affine))
        backward = 0.5 * float(n @ (-(linear @ n) + affine))
        return np.array([[forward, backward], [-forward, -backward]])

    mats = np.stack([rate_matrix(t) for t in grid])
    return ClassicalGenerator(grid, mats, rate_matrix)


def solve_classical_master(lgen: ClassicalGenerator) -> StochasticProcess:
    """Integrate dD/dt = L(t) D(t), D(0) = identity, on the generator's grid
    (fixed-step RK4; midpoints from `func` when available)."""
    grid = lgen.grid
    n = lgen.dim
    mats = np.empty((grid.size, n, n))
    d = np.eye(n)
    mats[0] = d
    for k in range(grid.size - 1):
        t, h = grid[k], grid[k + 1] - grid[k]
        l1 = lgen.matrices[k]
        lm = lgen.matrix(t + 0.5 * h)
        l2 = lgen.matrices[k + 1]
        k1 = l1 @ d
        k2 = lm @ (d + 0.5 * h * k1)
        k3 = lm @ (d + 0.5 * h * k2)
        k4 = l2 @ (d + h * k3)
        d = d + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        mats[k + 1] = d
    return StochasticProcess(grid, mats, None)


# ---------------------------------------------------------------------------
# derivatives and the f criterion
# ---------------------------------------------------------------------------
def _derivative_5pt(values: np.ndarray, h: float) -> np.ndarray:
    """Fourth-order derivative along axis 0: central 5-point stencil inside,
    one-sided 5-point stencils on the two points at each edge."""
    v = np.asarray(values, dtype=float)
    if v.shape[0] < 5:
        raise ValueError("5-point stencils need at least 5 samples")
    out = np.empty_like(v)
    out[2:-2] = (v[:-4] - 8.0 * v[1:-3] + 8.0 * v[3:-1] - v[4:]) / (12.0 * h)
    out[0] = (-25.0 * v[0] + 48.0 * v[1] - 36.0 * v[2]
              + 16.0 * v[3] - 3.0 * v[4]) / (12.0 * h)
    out[1] = (-3.0 * v[0] - 10.0 * v[1] + 18.0 * v[2]
              - 6.0 * v[3] + v[4]) / (12.0 * h)
    out[-2] = (3.0 * v[-1] + 10.0 * v[-2] - 18.0 * v[-3]
               + 6.0 * v[-4] - v[-5]) / (12.0 * h)
    out[-1] = (25.0 * v[-1] - 48.0 * v[-2] + 36.0 * v[-3]
               - 16.0 * v[-4] + 3.0 * v[-5]) / (12.0 * h)
    return out


def classical_generator_from_T(proc: StochasticProcess,
                               tol: float = 1e-10) -> ClassicalGenerator:
    """Recover L(t) = dT/dt T(t)^{-1} by stencil differentiation.

    Raises SingularProcessError (carrying the offending time) as soon as
    |det T(t)| drops below tol anywhere on the grid.
    """
    h = _uniform_step(proc.grid)
    dets = proc.determinants
    bad = np.abs(dets) < tol
    if bad.any():
        t_bad = float(proc.grid[int(np.argmax(bad))])
        raise SingularProcessError(
            f"T(t) is numerically singular at t = {t_bad:.6g}", t_bad)
    dT = _derivative_5pt(proc.matrices, h)
    if proc.dim == 2:
        m = proc.matrices
        inv = np.empty_like(m)
        inv[:, 0, 0] = m[:, 1, 1]
        inv[:, 1, 1] = m[:, 0, 0]
        inv[:, 0, 1] = -m[:, 0, 1]
        inv[:, 1, 0] = -m[:, 1, 0]
        inv /= dets[:, None, None]
    else:
        inv = np.linalg.inv(proc.matrices)
    rates = np.einsum("kij,kjl->kil", dT, inv)
    # stencil noise can push column sums a hair off zero; re-center exactly
    rates -= rates.sum(axis=1, keepdims=True) / proc.dim
    return ClassicalGenerator(proc.grid, rates, None)


class FCriterionResult(NamedTuple):
    f: np.ndarray
    flagged: np.ndarray
    singular_times: np.ndarray
    max_f: float
    divisible: bool


def f_criterion(proc: StochasticProcess, tol: float = 1e-9,
                denominator_tol: float = 1e-8) -> FCriterionResult:
    """Evaluate f_t = dT_00/dt / (2 T_00 - 1) on the grid.

    Requires the bistochastic symmetric 2x2 form (both matrix indices
    determined by T_00). Grid points where |2 T_00 - 1| < denominator_tol
    are flagged (f set to NaN, times reported) and excluded from the
    verdict; divisible means max f over clean points <= tol.
    """
    if proc.dim != 2 or not proc.is_bistochastic():
        raise ValueError("f criterion needs a 2x2 bistochastic process")
    h = _uniform_step(proc.grid)
    den = 2.0 * proc.t00 - 1.0
    num = _derivative_5pt(proc.t00, h)
    flagged = np.abs(den) < denominator_tol
    f = np.full(proc.grid.size, np.nan)
    np.divide(num, den, out=f, where=~flagged)
    if flagged.all():
        max_f = np.nan
        divisible = False
    else:
        max_f = float(np.nanmax(f))
        divisible = max_f <= tol
    return FCriterionResult(f, flagged, proc.grid[flagged], max_f, divisible)


def kolmogorov_check(lgen: ClassicalGenerator, tol: float = 1e-9) -> bool:
    """Classical P-divisibility: off-diagonal rates >= -tol and column sums
    zero (within tol) at every grid point."""
    mats = lgen.matrices
    off_min = (mats * (1.0 - np.eye(lgen.dim))).min()
    col = np.abs(mats.sum(axis=1)).max()
    return bool(off_min >= -tol and col <= tol)


def kolmogorov_distance(delta) -> float:
    """l1 norm of a probability difference vector."""
    return float(np.abs(np.asarray(delta, dtype=float)).sum())
