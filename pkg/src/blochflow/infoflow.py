"""Information-flow diagnostics over a fixed projective measurement basis.

For a biased state pair Delta = mu rho_p - (1-mu) rho_q prepared diagonally
in the basis, three trajectory-level quantities are tracked:

    i_quantum   = ||Lambda_t[Delta]||_1          (full distinguishability)
    i_classical = l1 norm of T(t) delta          (after dephasing)
    coherent    = i_quantum - i_classical >= 0   (stored in coherences)

Any revival of i_quantum flags quantum information backflow; the coherent
part obeys a two-sided chain against the l1 coherences of the evolved pair,
and under P-divisible dynamics the sum i_classical + coherent can only
decrease.  detect_backflow and witness_search locate revival intervals and
scan measurement bases for loss of classical divisibility.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .classical import f_criterion, reduce_map
from .generators import Propagator
from .states import Helstrom, ProjectorBasis


def _check_prob_vector(p) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    if p.shape != (2,) or p.min() < -1e-12 or abs(p.sum() - 1.0) > 1e-9:
        raise ValueError("need a length-2 probability vector")
    return p


@dataclass(frozen=True)
class InfoTrajectory:
    """Per-grid-point information content of an evolving biased state pair."""

    grid: np.ndarray
    i_quantum: np.ndarray
    i_classical: np.ndarray
    coherent: np.ndarray
    coherences: np.ndarray
    mu: float = 0.5
    basis: ProjectorBasis | None = None

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        names = ("i_quantum", "i_classical", "coherent")
        arrays = {k: np.asarray(getattr(self, k), dtype=float) for k in names}
        coh = np.asarray(self.coherences, dtype=float)
        for k, arr in arrays.items():
            if arr.shape != grid.shape:
                raise ValueError(f"{k} must match the grid shape")
        if coh.shape != (grid.size, 2):
            raise ValueError("coherences must have shape (len(grid), 2)")
        if arrays["coherent"].min() < -1e-12:
            raise ValueError("coherent information cannot be negative")
        gap = np.abs(arrays["i_quantum"] - arrays["i_classical"]
                     - arrays["coherent"]).max()
        if gap > 1e-10:
            raise ValueError("decomposition i_quantum = i_classical + "
                             f"coherent violated by {gap:.3g}")
        for k, arr in arrays.items():
            arr.setflags(write=False)
            object.__setattr__(self, k, arr)
        grid.setflags(write=False)
        coh.setflags(write=False)
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "coherences", coh)

    def index_of(self, t: float) -> int:
        i = int(np.argmin(np.abs(self.grid - t)))
        if abs(self.grid[i] - t) > 1e-9 * max(1.0, abs(t)):
            raise ValueError(f"t = {t} is not on the trajectory grid")
        return i


def quantum_info(prop: Propagator, delta: Helstrom, t: float) -> float:
    """||Lambda_t[Delta]||_1 = max(|Tr Delta|, |Bloch part|)."""
    from .states import pauli_coefficients

    i = prop.index_of(t)
    x0, c = pauli_coefficients(delta.matrix)
    w = prop.bloch[i] @ c.real + x0.real * prop.translations[i]
    return float(max(abs(x0.real), np.linalg.norm(w)))


def info_trajectory(prop: Propagator, basis: ProjectorBasis, pvec, qvec,
                    mu: float = 0.5) -> InfoTrajectory:
    """All four information series for the pair (rho_p, rho_q) prepared
    diagonally in `basis` and evolved by `prop` (vectorized on the grid)."""
    pvec, qvec = _check_prob_vector(pvec), _check_prob_vector(qvec)
    if not 0.0 <= mu <= 1.0:
        raise ValueError("mu must lie in [0, 1]")
    n = basis.n
    x0 = 2.0 * mu - 1.0
    delta_vec = mu * pvec - (1.0 - mu) * qvec
    bloch_delta = (delta_vec[0] - delta_vec[1]) * n

    w = np.einsum("kij,j->ki", prop.bloch, bloch_delta) \
        + x0 * prop.translations
    i_quantum = np.maximum(abs(x0), np.linalg.norm(w, axis=1))
    i_classical = np.maximum(abs(x0), np.abs(w @ n))
    coherent = np.maximum(i_quantum - i_classical, 0.0)

    tau = basis.coherence_pairing()
    coherences = np.empty((prop.grid.size, 2))
    for col, vec in enumerate((pvec, qvec)):
        r = (vec[0] - vec[1]) * n
        wr = np.einsum("kij,j->ki", prop.bloch, r) + prop.translations
        coherences[:, col] = np.abs(wr.astype(complex) @ tau)
    return InfoTrajectory(prop.grid, i_quantum, i_classical, coherent,
                          coherences, float(mu), basis)


class CoherenceBound(NamedTuple):
    lhs: float
    mid: float
    rhs: float
    holds: bool
    balance_ok: bool


def coherence_bound_check(traj: InfoTrajectory, s: float, t: float,
                          tol: float = 1e-10) -> CoherenceBound:
    """Evaluate the chain

        i_classical(t) - i_classical(s)  <=  coherent(s)
                                         <=  mu C_p(s) + (1-mu) C_q(s)

    at a time pair s <= t.  The chain's derivation uses the decrease of
    i_classical + coherent between s and t; that precondition is checked on
    the same pair and reported as balance_ok.
    """
    if t < s:
        raise ValueError("need s <= t")
    i, j = traj.index_of(s), traj.index_of(t)
    lhs = float(traj.i_classical[j] - traj.i_classical[i])
    mid = float(traj.coherent[i])
    rhs = float(traj.mu * traj.coherences[i, 0]
                + (1.0 - traj.mu) * traj.coherences[i, 1])
    holds = (lhs <= mid + tol) and (mid <= rhs + tol)
    balance_ok = (traj.i_classical[j] + traj.coherent[j]
                  <= traj.i_classical[i] + traj.coherent[i] + tol)
    return CoherenceBound(lhs, mid, rhs, holds, balance_ok)


def detect_backflow(series, tol: float = 1e-6, grid=None,
                    min_steps: int = 2) -> list:
    """Maximal intervals where the series' finite-difference derivative
    exceeds tol; runs shorter than min_steps grid steps are discarded as
    stencil noise.  Returns (start, end) pairs in time units when a grid is
    given, else in sample indices.  Empty result == no revival."""
    series = np.asarray(series, dtype=float)
    if grid is None:
        axis = np.arange(series.size, dtype=float)
    else:
        axis = np.asarray(grid, dtype=float)
    rising = np.gradient(series, axis) > tol
    intervals = []
    k = 0
    while k < rising.size:
        if rising[k]:
            start = k
            while k + 1 < rising.size and rising[k + 1]:
                k += 1
            if k - start + 1 >= min_steps:
                intervals.append((float(axis[start]), float(axis[k])))
        k += 1
    return intervals


class WitnessEntry(NamedTuple):
    chi: float
    xi: float
    max_f: float
    invertible: bool
    min_abs_det: float
    revivals: list


def default_chi_grid() -> np.ndarray:
    return np.arange(0.0, np.pi / 2 + 1e-12, np.pi / 16)


def default_xi_grid() -> np.ndarray:
    return np.arange(0.0, np.pi + 1e-12, np.pi / 16)


def witness_search(prop: Propagator, chi_grid=None, xi_grid=None,
                   tol: float = 1e-9) -> list:
    """Scan measurement bases for classical-divisibility breaking.

    For each (chi, xi) the classical reduction is formed and summarized:
    worst f_t over clean grid points, invertibility of T(t) with the
    smallest |det T|, and revival intervals of the classical information of
    the flat unbiased pair.  Bases with max_f > 0 witness broken classical
    P-divisibility.
    """
    chi_grid = default_chi_grid() if chi_grid is None else np.asarray(chi_grid)
    xi_grid = default_xi_grid() if xi_grid is None else np.asarray(xi_grid)
    out = []
    for chi in chi_grid:
        for xi in xi_grid:
            basis = ProjectorBasis(float(chi), float(xi))
            proc = reduce_map(prop, basis)
            try:
                max_f = f_criterion(proc, tol=tol).max_f
            except ValueError:  # non-bistochastic reduction: no scalar f
                max_f = float("nan")
            dets = proc.determinants
            icl = 0.5 * np.abs(proc.matrices[:, 0, 0] - proc.matrices[:, 0, 1]) \
                + 0.5 * np.abs(proc.matrices[:, 1, 0] - proc.matrices[:, 1, 1])
            revivals = detect_backflow(icl, grid=prop.grid)
            out.append(WitnessEntry(float(chi), float(xi), max_f,
                                    bool(np.all(np.abs(dets) > 1e-12)),
                                    float(np.abs(dets).min()), revivals))
    return out
