"""Optimization of quadratic objectives over the unit sphere in R^3.

Two tools live here:

* a Fibonacci lattice + projected-gradient refinement for generic smooth
  objectives (used by the map-positivity oracle), and
* an exact minimizer for q(n) = -(n.Sn + a.n)/2 via the secular equation of
  the spherically constrained quadratic program (used by the instantaneous
  P-divisibility certificate, where 1e-8 margin agreement with closed forms
  is required and a lattice would not reach it).
"""
from __future__ import annotations

import numpy as np

_GOLDEN_ANGLE = np.pi * (3.0 - np.sqrt(5.0))


def fibonacci_sphere(count: int = 2048) -> np.ndarray:
    """Deterministic quasi-uniform lattice of unit vectors, shape (count, 3)."""
    i = np.arange(count)
    z = 1.0 - 2.0 * (i + 0.5) / count
    rho = np.sqrt(1.0 - z * z)
    theta = _GOLDEN_ANGLE * i
    return np.stack([rho * np.cos(theta), rho * np.sin(theta), z], axis=1)


def max_affine_norm(b: np.ndarray, v: np.ndarray, lattice: int = 2048,
                    refine_steps: int = 20) -> tuple[float, np.ndarray]:
    """max over unit m of ||b m + v||, by lattice seeding + projected gradient.

    Returns (maximum, argmax). The objective is ||b m + v||^2 / 2 whose
    sphere-gradient is b^T(b m + v); ascent uses a fixed 1/L step with
    L = ||b||_2^2 and re-projection, which is monotone for this objective.
    """
    pts = fibonacci_sphere(lattice)
    vals = np.linalg.norm(pts @ b.T + v, axis=1)
    m = pts[int(np.argmax(vals))]
    lead = np.linalg.norm(b, 2) ** 2
    step = 1.0 / lead if lead > 0 else 1.0
    for _ in range(refine_steps):
        g = b.T @ (b @ m + v)
        cand = m + step * g
        norm = np.linalg.norm(cand)
        if norm < 1e-15:
            break
        m = cand / norm
    return float(np.linalg.norm(b @ m + v)), m


def min_half_quadratic(s: np.ndarray, a: np.ndarray) -> tuple[float, np.ndarray]:
    """Exact min over ||n|| = 1 of q(n) = -(n . s n + a . n)/2.

    Writes q(n) = n.Hn/2 + g.n with H = -(s + s^T)/2, g = -a/2 and solves the
    trust-region subproblem on the sphere through its secular equation,
    including the hard case (g orthogonal to the ground eigenspace).
    """
    h = -0.5 * (s + s.T)
    g = -0.5 * np.asarray(a, dtype=float)
    lam, q = np.linalg.eigh(h)
    gh = q.T @ g
    gnorm = np.linalg.norm(g)
    scale = max(1.0, np.abs(lam).max())

    def value(n):
        return 0.5 * n @ h @ n + g @ n

    if gnorm < 1e-15 * scale:
        n = q[:, 0]
        return 0.5 * lam[0], n

    ground = np.abs(lam - lam[0]) < 1e-12 * scale
    lo = -lam[0]
    if np.linalg.norm(gh[ground]) < 1e-13 * gnorm:
        rest = ~ground
        phi_lo = float(np.sum((gh[rest] / (lam[rest] + lo)) ** 2)) if rest.any() else 0.0
        if phi_lo <= 1.0:
            w = np.zeros(3)
            w[rest] = -gh[rest] / (lam[rest] + lo)
            w[int(np.argmax(ground))] = np.sqrt(max(0.0, 1.0 - phi_lo))
            n = q @ w
            return value(n), n

    def phi(nu):
        return float(np.sum((gh / (lam + nu)) ** 2))

    hi = lo + gnorm + scale
    while phi(hi) > 1.0:
        hi = lo + 2.0 * (hi - lo)
    a_, b_ = lo, hi
    for _ in range(200):
        mid = 0.5 * (a_ + b_)
        if mid in (a_, b_):
            break
        if phi(mid) > 1.0:
            a_ = mid
        else:
            b_ = mid
    w = -gh / (lam + 0.5 * (a_ + b_))
    w /= np.linalg.norm(w)
    n = q @ w
    return value(n), n
