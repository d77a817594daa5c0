"""Orthogonally covariant qubit maps and their divisibility theory.

The map class is parametrized by a triple (A, lambda, mu): a real 2x2
column-stochastic-form matrix A = [[a, 1-b], [1-a, b]] acting on diagonals,
and complex coefficients acting on coherences as

    out_01 = lambda rho_01 + mu rho_10,
    out_10 = conj(mu) rho_01 + conj(lambda) rho_10.

These maps commute with every rotation about the z axis combined with sign
flips, compose inside the class, and admit closed-form positivity / complete
positivity conditions.  A differentiable one-parameter family t -> triple has
a generator of the same shape, parametrized by rates (gamma_plus,
gamma_minus) and complex coefficients (l, m); the derived quantities

    Gamma_T = -Re l,  omega = -Im l,  Gamma_L = gamma_plus + gamma_minus,
    kappa = -Re m,    eta = -Im m,    delta = (gamma_plus - gamma_minus)/2

feed the closed-form divisibility certificates:

* P-divisibility:  gamma_+- >= 0 and
  Gamma_T - Gamma_L/2 + sqrt(gamma_+ gamma_-) >= |m|;
* CP-divisibility: gamma_+ gamma_- >= |m|^2 and Gamma_T >= Gamma_L/2.

Margins are normalized so they agree with the generic certificates in
`generators`: the P margin is min over unit n of Tr(P_-n L_t[P_n]) and the
CP margin is the smallest Kossakowski eigenvalue.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable, NamedTuple

import numpy as np

from .channels import PositivityResult, QubitChannel
from .generators import GeneratorSpec


class SingularGeneratorError(ValueError):
    """Family is degenerate (|lambda| = |mu| or a + b = 1) at some time."""

    def __init__(self, message: str, time: float):
        super().__init__(message)
        self.time = float(time)


@dataclass(frozen=True)
class CovariantTriple:
    """One member of the class: diagonals mix through A = [[a, 1-b],
    [1-a, b]], coherences through (lambda, mu)."""

    a: float
    b: float
    lam: complex
    mu: complex

    def __post_init__(self):
        object.__setattr__(self, "a", float(self.a))
        object.__setattr__(self, "b", float(self.b))
        object.__setattr__(self, "lam", complex(self.lam))
        object.__setattr__(self, "mu", complex(self.mu))

    @classmethod
    def identity(cls) -> "CovariantTriple":
        return cls(1.0, 1.0, 1.0, 0.0)

    @property
    def matrix_A(self) -> np.ndarray:
        return np.array([[self.a, 1.0 - self.b], [1.0 - self.a, self.b]])

    def apply(self, x: np.ndarray) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        out = np.empty((2, 2), dtype=complex)
        out[0, 0] = self.a * x[0, 0] + (1.0 - self.b) * x[1, 1]
        out[1, 1] = (1.0 - self.a) * x[0, 0] + self.b * x[1, 1]
        out[0, 1] = self.lam * x[0, 1] + self.mu * x[1, 0]
        out[1, 0] = np.conj(self.mu) * x[0, 1] + np.conj(self.lam) * x[1, 0]
        return out

    def to_channel(self) -> QubitChannel:
        s, d = self.lam + self.mu, self.lam - self.mu
        bloch = np.array([[s.real, d.imag, 0.0],
                          [-s.imag, d.real, 0.0],
                          [0.0, 0.0, self.a + self.b - 1.0]])
        return QubitChannel(bloch, np.array([0.0, 0.0, self.a - self.b]))

    def choi(self) -> np.ndarray:
        a, b, lam, mu = self.a, self.b, self.lam, self.mu
        return np.array(
            [[a, 0, 0, lam],
             [0, 1.0 - b, mu, 0],
             [0, np.conj(mu), 1.0 - a, 0],
             [np.conj(lam), 0, 0, b]], dtype=complex)


def apply_triple(triple: CovariantTriple, x: np.ndarray) -> np.ndarray:
    return triple.apply(x)


def from_channel(phi: QubitChannel, tol: float = 1e-9) -> CovariantTriple:
    """Extract (A, lambda, mu) from a channel of the covariant block shape."""
    m, v = phi.bloch, phi.translation
    stray = max(abs(m[0, 2]), abs(m[1, 2]), abs(m[2, 0]), abs(m[2, 1]),
                abs(v[0]), abs(v[1]))
    if stray > tol:
        raise ValueError("channel is not orthogonally covariant "
                         f"(off-block magnitude {stray:.3g})")
    lam = complex(0.5 * (m[0, 0] + m[1, 1]), 0.5 * (m[0, 1] - m[1, 0]))
    mu = complex(0.5 * (m[0, 0] - m[1, 1]), -0.5 * (m[0, 1] + m[1, 0]))
    a = 0.5 * (1.0 + m[2, 2] + v[2])
    b = 0.5 * (1.0 + m[2, 2] - v[2])
    return CovariantTriple(a, b, lam, mu)


def compose_triples(first: CovariantTriple,
                    second: CovariantTriple) -> CovariantTriple:
    """Composition first after second, computed on the 4x4 representation
    and re-extracted (the class is closed under composition)."""
    return from_channel(first.to_channel().compose(second.to_channel()))


def positivity_triple(triple: CovariantTriple,
                      tol: float = 1e-9) -> PositivityResult:
    """Positivity of the map: all entries of A in [0, 1] and

        |lambda| + |mu| <= sqrt(ab) + sqrt((1-a)(1-b)).

    Margin is the smallest slack among those inequalities.
    """
    a, b = triple.a, triple.b
    entries = min(a, b, 1.0 - a, 1.0 - b)
    roots = (np.sqrt(max(a, 0.0) * max(b, 0.0))
             + np.sqrt(max(1.0 - a, 0.0) * max(1.0 - b, 0.0)))
    slack = roots - abs(triple.lam) - abs(triple.mu)
    margin = min(entries, slack)
    return PositivityResult(margin >= -tol, float(margin))


def cp_triple(triple: CovariantTriple, tol: float = 1e-9) -> PositivityResult:
    """Complete positivity: |lambda|^2 <= ab and |mu|^2 <= (1-a)(1-b).

    The margin is the smallest Choi eigenvalue, available in closed form
    from the two 2x2 blocks.
    """
    a, b = triple.a, triple.b
    lo1 = 0.5 * (a + b) - np.hypot(0.5 * (a - b), abs(triple.lam))
    lo2 = 0.5 * (2.0 - a - b) - np.hypot(0.5 * (a - b), abs(triple.mu))
    margin = min(lo1, lo2)
    return PositivityResult(margin >= -tol, float(margin))


def dual_triple(triple: CovariantTriple) -> CovariantTriple:
    """Heisenberg-picture dual, (A, lambda, mu) -> (A^T, conj(lambda), mu).

    A^T only has the [[a, 1-b], [1-a, b]] shape when a = b, so the dual
    stays inside the class exactly for the unital members; other inputs
    raise.  Self-duality itself is decidable for every triple through
    is_self_dual_triple.
    """
    if abs(triple.a - triple.b) > 1e-12:
        raise ValueError("dual of a non-unital triple leaves the class "
                         "(A^T breaks the column-sum form); only a = b "
                         "members have an in-class dual")
    return CovariantTriple(triple.a, triple.b, np.conj(triple.lam), triple.mu)


def is_self_dual_triple(triple: CovariantTriple, tol: float = 1e-12) -> bool:
    """True iff A is symmetric (a = b) and lambda is real."""
    return (abs(triple.a - triple.b) <= tol
            and abs(triple.lam.imag) <= tol)


# ---------------------------------------------------------------------------
# families and generators
# ---------------------------------------------------------------------------
class CovariantFamily(NamedTuple):
    """A time-parametrized triple with optional analytic derivative
    (t -> (da, db, dlambda, dmu)); plain callables work everywhere a family
    is accepted, falling back to central differences."""

    triple: Callable[[float], CovariantTriple]
    derivative: Callable[[float], tuple] | None = None

    def __call__(self, t: float) -> CovariantTriple:
        return self.triple(t)


@dataclass(frozen=True)
class CovariantGenerator:
    """Instantaneous generator data (B(t), l, m) of a covariant family."""

    gamma_plus: float
    gamma_minus: float
    l: complex
    m: complex

    @property
    def Gamma_T(self) -> float:
        return -self.l.real

    @property
    def omega(self) -> float:
        return -self.l.imag

    @property
    def Gamma_L(self) -> float:
        return self.gamma_plus + self.gamma_minus

    @property
    def kappa(self) -> float:
        return -self.m.real

    @property
    def eta(self) -> float:
        return -self.m.imag

    @property
    def delta(self) -> float:
        return 0.5 * (self.gamma_plus - self.gamma_minus)

    def is_self_dual(self, tol: float = 1e-9) -> bool:
        return (abs(self.l.imag) <= tol
                and abs(self.gamma_plus - self.gamma_minus) <= tol)


def _family_parts(family):
    if isinstance(family, CovariantFamily):
        return family.triple, family.derivative
    return family, None


def _triple_derivative(func, t: float, h: float):
    lo, hi = func(t - h), func(t + h)
    inv = 0.5 / h
    return ((hi.a - lo.a) * inv, (hi.b - lo.b) * inv,
            (hi.lam - lo.lam) * inv, (hi.mu - lo.mu) * inv)


def generator_triple(family, t: float, h: float = 1e-5) -> CovariantGenerator:
    """Instantaneous generator of a family at t.

    Uses the family's analytic derivative when present, otherwise central
    differences with step h.  Raises SingularGeneratorError when
    |lambda|^2 = |mu|^2 or a + b = 1 (relative test, so uniformly decaying
    families stay well-posed at long times).
    """
    func, deriv = _family_parts(family)
    tr = func(t)
    da, db, dlam, dmu = (deriv(t) if deriv is not None
                         else _triple_derivative(func, t, h))
    mod2 = abs(tr.lam) ** 2 - abs(tr.mu) ** 2
    scale = abs(tr.lam) ** 2 + abs(tr.mu) ** 2
    if abs(mod2) <= 1e-14 * max(scale, 1e-300):
        raise SingularGeneratorError(
            f"|lambda| = |mu| at t = {t:.6g}: coherence generator undefined",
            t)
    diag = tr.a + tr.b - 1.0
    if abs(diag) <= 1e-14 * (abs(tr.a) + abs(tr.b) + 1.0):
        raise SingularGeneratorError(
            f"a + b = 1 at t = {t:.6g}: diagonal generator undefined", t)
    l = (dlam * np.conj(tr.lam) - dmu * np.conj(tr.mu)) / mod2
    m = (dmu * tr.lam - dlam * tr.mu) / mod2
    gamma_minus = -(da * (1.0 - tr.b) + db * tr.a) / diag
    gamma_plus = -(da * tr.b + db * (1.0 - tr.a)) / diag
    return CovariantGenerator(float(gamma_plus), float(gamma_minus),
                              complex(l), complex(m))


def kossakowski_of(gen: CovariantGenerator) -> np.ndarray:
    """Kossakowski matrix of the covariant generator (z-axis frame)."""
    half = 0.5 * gen.Gamma_L
    return np.array(
        [[half - gen.kappa, gen.eta - 1j * gen.delta, 0.0],
         [gen.eta + 1j * gen.delta, half + gen.kappa, 0.0],
         [0.0, 0.0, gen.Gamma_T - half]], dtype=complex)


def hamiltonian_of(gen: CovariantGenerator) -> float:
    """Coefficient of sigma_3 in H(t), i.e. omega(t)/2."""
    return 0.5 * gen.omega


def generator_spec_of(family, h: float = 1e-5) -> GeneratorSpec:
    """Package a family's instantaneous generators as a GeneratorSpec."""

    def hamiltonian_coeffs(t):
        gen = generator_triple(family, t, h)
        return np.array([0.0, 0.0, gen.omega])

    def kossakowski(t):
        return kossakowski_of(generator_triple(family, t, h))

    return GeneratorSpec(hamiltonian_coeffs, kossakowski)


# ---------------------------------------------------------------------------
# closed-form divisibility certificates
# ---------------------------------------------------------------------------
class Prop4Result(NamedTuple):
    verdict: bool
    margin: float
    components: dict


def _p_margin(gen: CovariantGenerator) -> float:
    # min over projector pairs of Tr(P_-n L[P_n]); with x = |<0|n>|^2 the
    # outflow is q(x) = g- x^2 + g+ (1-x)^2 + (2 Gamma_T - Gamma_L - 2|m|)
    # x(1-x), minimized over [0, 1] at an endpoint or the stationary point.
    gp, gm = gen.gamma_plus, gen.gamma_minus
    c = 2.0 * gen.Gamma_T - gen.Gamma_L - 2.0 * abs(gen.m)

    def q(x):
        return gm * x * x + gp * (1.0 - x) ** 2 + c * x * (1.0 - x)

    candidates = [q(0.0), q(1.0)]
    curv = gp + gm - c
    if abs(curv) > 1e-15:
        x_star = (2.0 * gp - c) / (2.0 * curv)
        if 0.0 < x_star < 1.0:
            candidates.append(q(x_star))
    return float(min(candidates))


def prop4_p_div(gen: CovariantGenerator, tol: float = 1e-9) -> Prop4Result:
    """Closed-form P-divisibility certificate.

    components carries the three inequality slacks (gamma_plus, gamma_minus
    and the combined-rate condition); the margin is the worst projector-pair
    outflow, on the same scale as the generic sphere certificate.
    """
    root = np.sqrt(max(gen.gamma_plus, 0.0) * max(gen.gamma_minus, 0.0))
    combo = gen.Gamma_T - 0.5 * gen.Gamma_L + root - abs(gen.m)
    margin = _p_margin(gen)
    components = {"gamma_plus": gen.gamma_plus,
                  "gamma_minus": gen.gamma_minus,
                  "rate_combination": float(combo)}
    return Prop4Result(margin >= -tol, margin, components)


def prop4_cp_div(gen: CovariantGenerator, tol: float = 1e-9) -> Prop4Result:
    """Closed-form CP certificate; margin = smallest Kossakowski eigenvalue

        min(Gamma_L/2 - sqrt(|m|^2 + delta^2), Gamma_T - Gamma_L/2).
    """
    half = 0.5 * gen.Gamma_L
    transverse = half - np.hypot(abs(gen.m), gen.delta)
    longitudinal = gen.Gamma_T - half
    margin = float(min(transverse, longitudinal))
    components = {
        "rate_contrast": gen.gamma_plus * gen.gamma_minus - abs(gen.m) ** 2,
        "rate_ordering": float(longitudinal)}
    return Prop4Result(margin >= -tol, margin, components)


def projector_outflow_form(gen: CovariantGenerator, w1: float,
                           omega_angle: float) -> float:
    """Closed-form Tr(Q L[P]) for P = |psi><psi|,
    psi = (w1, sqrt(1-w1^2) e^{-i Omega/2}), Q = 1 - P."""
    x = float(w1) ** 2
    y = 1.0 - x
    chi = np.angle(gen.m) if gen.m != 0 else 0.0
    return float(gen.gamma_minus * x * x + gen.gamma_plus * y * y
                 + 2.0 * (gen.Gamma_T - 0.5 * gen.Gamma_L) * x * y
                 - 2.0 * abs(gen.m) * x * y * np.cos(chi - omega_angle))


# ---------------------------------------------------------------------------
# self-dual construction
# ---------------------------------------------------------------------------
@dataclass(frozen=True)
class SelfDualFamily:
    """Inputs of the self-dual-generator construction.

    g = |lambda| + |mu| and h = |lambda| - |mu| (both time functions with
    g(0) = h(0) = 1, 0 < h <= g), theta is the phase of mu, and a = b fixes
    the diagonal part.  The phase of lambda is not free: purely dissipative
    self-dual generators force dphi |lambda|^2 = dtheta |mu|^2, so phi is
    obtained by quadrature in selfdual_build.
    """

    g: Callable[[float], float]
    h: Callable[[float], float]
    theta: Callable[[float], float]
    a: Callable[[float], float]
    dtheta: Callable[[float], float] | None = None


def _theta_rate(fam: SelfDualFamily, t: float, h_step: float = 1e-5) -> float:
    if fam.dtheta is not None:
        return float(fam.dtheta(t))
    return (fam.theta(t + h_step) - fam.theta(t - h_step)) / (2.0 * h_step)


def selfdual_build(fam: SelfDualFamily, grid=None):
    """Build the family t -> CovariantTriple with a self-dual generator.

    |lambda| = (g+h)/2 and |mu| = (g-h)/2; the lambda phase solves
    dphi = dtheta |mu|^2 / |lambda|^2 with phi(0) = 0 (the integrand
    vanishes at t = 0, where mu does).  The quadrature is a cumulative
    Simpson rule over `grid` (default step 1e-3 on [0, 10]); between nodes
    the same rule is applied locally, which keeps finite-difference
    derivatives of the returned family consistent with the integrand to
    well below 1e-8.
    """
    if grid is None:
        grid = np.linspace(0.0, 10.0, 10001)
    grid = np.asarray(grid, dtype=float)

    sample = [(fam.g(t), fam.h(t)) for t in (grid[0], 0.5 * grid[-1],
                                             grid[-1])]
    for gv, hv in sample:
        if hv <= 0 or hv > gv + 1e-12:
            raise ValueError("need 0 < h(t) <= g(t) on the time range")
    if abs(fam.g(0.0) - 1.0) > 1e-9 or abs(fam.h(0.0) - 1.0) > 1e-9:
        raise ValueError("need g(0) = h(0) = 1")

    def phase_rate(t: float) -> float:
        lam_mod = 0.5 * (fam.g(t) + fam.h(t))
        mu_mod = 0.5 * (fam.g(t) - fam.h(t))
        return _theta_rate(fam, t) * (mu_mod / lam_mod) ** 2

    # cumulative Simpson node table for phi
    nodes = np.empty(grid.size)
    nodes[0] = 0.0
    for k in range(grid.size - 1):
        t0, t1 = grid[k], grid[k + 1]
        mid = 0.5 * (t0 + t1)
        step = (t1 - t0) / 6.0 * (phase_rate(t0) + 4.0 * phase_rate(mid)
                                  + phase_rate(t1))
        nodes[k + 1] = nodes[k] + step

    def phi_at(t: float) -> float:
        j = int(np.clip(np.searchsorted(grid, t) - 1, 0, grid.size - 1))
        t0 = grid[j]
        s = t - t0
        if s == 0.0:
            return float(nodes[j])
        mid = t0 + 0.5 * s
        return float(nodes[j] + s / 6.0 * (phase_rate(t0)
                                           + 4.0 * phase_rate(mid)
                                           + phase_rate(t)))

    def triple(t: float) -> CovariantTriple:
        gv, hv = fam.g(t), fam.h(t)
        lam = 0.5 * (gv + hv) * np.exp(1j * phi_at(t))
        mu = 0.5 * (gv - hv) * np.exp(1j * fam.theta(t))
        av = fam.a(t)
        return CovariantTriple(av, av, lam, mu)

    # Derivative closure built from the scalar inputs.  Differentiating the
    # complex pair (lambda, mu) directly would subtract two nearly equal
    # noisy products in l's numerator and amplify the noise by
    # (|lambda|/|mu|-contrast)^2; here the phase relation enters exactly, so
    # Im(l) of the built family cancels at machine precision.
    def derivative(t: float, h_step: float = 1e-5):
        gv, hv = fam.g(t), fam.h(t)
        dg = (fam.g(t + h_step) - fam.g(t - h_step)) / (2.0 * h_step)
        dh = (fam.h(t + h_step) - fam.h(t - h_step)) / (2.0 * h_step)
        big = 0.5 * (gv + hv)
        small = 0.5 * (gv - hv)
        dth = _theta_rate(fam, t)
        dphi = dth * (small / big) ** 2
        dlam = ((0.5 * (dg + dh) + 1j * big * dphi)
                * np.exp(1j * phi_at(t)))
        dmu = ((0.5 * (dg - dh) + 1j * small * dth)
               * np.exp(1j * fam.theta(t)))
        da = (fam.a(t + h_step) - fam.a(t - h_step)) / (2.0 * h_step)
        return da, da, dlam, dmu

    return CovariantFamily(triple, derivative)


def t00_closed_form(family, t: float, chi: float, xi: float) -> float:
    """Survival probability T_00(t) of the classical reduction onto the
    projector at Bloch angles (chi, xi), for unital (a = b) families:

        (1/2)(1 + (2a-1) cos^2 chi
              + sin^2 chi (Re lambda + |mu| cos(theta + 2 xi))).
    """
    func, _ = _family_parts(family)
    tr = func(t)
    coherence = tr.lam.real + (tr.mu * np.exp(2j * xi)).real
    return float(0.5 * (1.0 + (2.0 * tr.a - 1.0) * np.cos(chi) ** 2
                        + np.sin(chi) ** 2 * coherence))


def tanh_modulated_family(c: float) -> CovariantFamily:
    """The worked one-parameter family: g = e^{-t}, h = e^{-3t},
    theta = 3C tanh t, a = b = e^{-t} cosh t, with analytic derivatives
    (phi integrates in closed form to C tanh^3 t).

    Its generator has l = -2, gamma_+- = 1 and |m| = sqrt(1 + r^2) with
    r = 3C (1 - tanh^2 t) tanh t, so P-divisibility holds iff C <= 3/2 and
    complete positivity of the intertwiners iff C = 0.
    """
    c = float(c)

    def triple(t: float) -> CovariantTriple:
        th = np.tanh(t)
        a = np.exp(-t) * np.cosh(t)
        lam = np.exp(-2.0 * t) * np.cosh(t) * np.exp(1j * c * th ** 3)
        mu = np.exp(-2.0 * t) * np.sinh(t) * np.exp(3j * c * th)
        return CovariantTriple(a, a, lam, mu)

    def derivative(t: float):
        th = np.tanh(t)
        sech2 = 1.0 - th * th
        e2 = np.exp(-2.0 * t)
        da = -e2
        dlam_mod = e2 * (np.sinh(t) - 2.0 * np.cosh(t))
        dphi = 3.0 * c * th * th * sech2
        lam_mod = e2 * np.cosh(t)
        dlam = (dlam_mod + 1j * lam_mod * dphi) * np.exp(1j * c * th ** 3)
        dmu_mod = e2 * (np.cosh(t) - 2.0 * np.sinh(t))
        dtheta = 3.0 * c * sech2
        mu_mod = e2 * np.sinh(t)
        dmu = (dmu_mod + 1j * mu_mod * dtheta) * np.exp(3j * c * th)
        return da, da, dlam, dmu

    return CovariantFamily(triple, derivative)


def propagator_from_family(family, grid) -> "Propagator":
    """Exact dynamics of a family on a grid, as a Propagator (4x4 affine
    representations built from each triple; no integration error)."""
    from .generators import Propagator

    func, _ = _family_parts(family)
    grid = np.asarray(grid, dtype=float)
    mats = np.empty((grid.size, 4, 4))
    for k, t in enumerate(grid):
        ch = func(t).to_channel()
        mats[k, 0, 0] = 1.0
        mats[k, 0, 1:] = 0.0
        mats[k, 1:, 0] = ch.translation
        mats[k, 1:, 1:] = ch.bloch
    return Propagator(grid, mats)
