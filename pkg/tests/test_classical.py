import numpy as np
import pytest
from numpy.testing import assert_allclose

import blochflow as bf


def _pauli_prop(g1=0.4, g2=0.9, g3=0.3, t_max=2.0, steps=2000):
    gen = bf.GeneratorSpec.pauli(g1, g2, g3)
    return gen, bf.propagate_ode(gen, bf.uniform_grid(t_max, steps))


def test_reduce_map_matches_per_point_channel_reduction():
    rng = np.random.default_rng(50)
    _, prop = _pauli_prop()
    for _ in range(10):
        basis = bf.ProjectorBasis(np.arccos(rng.uniform(-1, 1)),
                                  rng.uniform(0, 2 * np.pi))
        proc = bf.reduce_map(prop, basis)
        assert proc.dim == 2
        for idx in (0, 321, 1500, 2000):
            direct = bf.classical_reduction_matrix(
                prop.channel(prop.grid[idx]), basis).matrix
            assert np.abs(proc.matrices[idx] - direct).max() < 1e-12


def test_reduce_map_initial_point_is_identity():
    _, prop = _pauli_prop()
    proc = bf.reduce_map(prop, bf.ProjectorBasis(1.0, 2.0))
    assert_allclose(proc.matrices[0], np.eye(2), atol=1e-12)
    assert_allclose(proc.t00, proc.matrices[:, 0, 0], atol=1e-15)


def test_stochastic_process_validation():
    grid = np.array([0.0, 1.0])
    good = np.stack([np.eye(2), np.array([[0.7, 0.2], [0.3, 0.8]])])
    bf.StochasticProcess(grid, good)
    bad_columns = np.stack([np.eye(2), np.array([[0.7, 0.2], [0.2, 0.8]])])
    with pytest.raises(ValueError):
        bf.StochasticProcess(grid, bad_columns)
    not_identity = np.stack([np.array([[0.9, 0.1], [0.1, 0.9]]), good[1]])
    with pytest.raises(ValueError):
        bf.StochasticProcess(grid, not_identity)


def test_bistochastic_detection():
    _, prop = _pauli_prop()                       # unital dynamics
    proc = bf.reduce_map(prop, bf.ProjectorBasis(0.6, 0.1))
    assert proc.is_bistochastic()
    # amplitude-damping-style translation breaks row sums
    g = 0.3
    mats = []
    grid = bf.uniform_grid(1.0, 50)
    for t in grid:
        e = np.exp(-g * t)
        mats.append(np.array([[1.0, 1.0 - e], [0.0, e]]))
    proc2 = bf.StochasticProcess(grid, np.stack(mats))
    assert not proc2.is_bistochastic()


def test_reduce_generator_entries_and_kolmogorov():
    gen, _ = _pauli_prop()
    grid = bf.uniform_grid(2.0, 200)
    # z basis: rates are (gamma1 + gamma2)/2 each way
    lgen = bf.reduce_generator(gen, bf.ProjectorBasis(0.0, 0.0), grid=grid)
    assert_allclose(lgen.matrices.sum(axis=1), 0.0, atol=1e-12)
    assert_allclose(lgen.matrices[:, 0, 1], 0.65, atol=1e-12)
    assert_allclose(lgen.matrices[:, 1, 0], 0.65, atol=1e-12)
    assert bf.kolmogorov_check(lgen)


def test_kolmogorov_check_flags_negative_offdiagonals():
    grid = bf.uniform_grid(1.0, 10)
    mats = np.zeros((11, 2, 2))
    mats[:, 0, 1] = -0.1
    mats[:, 1, 1] = 0.1
    lgen = bf.ClassicalGenerator(grid, mats)
    assert not bf.kolmogorov_check(lgen)
    assert bf.kolmogorov_check(lgen, tol=0.2)


def test_solve_classical_master_constant_rates():
    """Two-state chain with constant rates a (1->0 ... column convention:
    L = [[-a, b], [a, -b]]) has the standard exponential solution."""
    a, b = 0.7, 0.2
    grid = bf.uniform_grid(3.0, 3000)
    lmat = np.array([[-a, b], [a, -b]])
    lgen = bf.ClassicalGenerator(grid, np.stack([lmat] * grid.size),
                                 lambda t: lmat)
    proc = bf.solve_classical_master(lgen)
    s = a + b
    for idx in (500, 1700, 3000):
        t = grid[idx]
        e = np.exp(-s * t)
        exact = np.array([[b + a * e, b * (1 - e)],
                          [a * (1 - e), a + b * e]]) / s
        assert np.abs(proc.matrices[idx] - exact).max() < 1e-12


def test_solve_then_extract_round_trip():
    gen, prop = _pauli_prop()
    basis = bf.ProjectorBasis(np.pi / 3, 0.4)
    lgen = bf.reduce_generator(gen, basis, grid=prop.grid)
    proc = bf.solve_classical_master(lgen)
    back = bf.classical_generator_from_T(proc)
    # derivative extraction is 5-point, so interior agreement is tight
    assert np.abs(back.matrices[3:-3] - lgen.matrices[3:-3]).max() < 1e-8


def test_classical_generator_from_T_reports_singular_time():
    # T becomes singular when both columns coincide
    grid = bf.uniform_grid(2.0, 200)
    lam = np.exp(-3.0 * grid)
    mats = np.empty((grid.size, 2, 2))
    mats[:, 0, 0] = 0.5 * (1 + lam)
    mats[:, 0, 1] = 0.5 * (1 - lam)
    mats[:, 1, 0] = 0.5 * (1 - lam)
    mats[:, 1, 1] = 0.5 * (1 + lam)
    proc = bf.StochasticProcess(grid, mats)
    back = bf.classical_generator_from_T(proc)
    assert_allclose(back.matrices[50], [[-1.5, 1.5], [1.5, -1.5]], atol=1e-5)
    # a loose tolerance trips on the decaying determinant e^{-3t} instead
    with pytest.raises(bf.SingularProcessError) as shallow:
        bf.classical_generator_from_T(proc, tol=1e-2)
    assert shallow.value.time == pytest.approx(np.log(100.0) / 3.0, abs=0.01)

    hard = mats.copy()
    hard[150:] = 0.5                      # exactly singular from t = 1.5 on
    proc2 = bf.StochasticProcess(grid, hard)
    with pytest.raises(bf.SingularProcessError) as err:
        bf.classical_generator_from_T(proc2)
    assert err.value.time == pytest.approx(1.5)


def test_f_criterion_on_markov_semigroup_is_nonpositive():
    _, prop = _pauli_prop()
    proc = bf.reduce_map(prop, bf.ProjectorBasis(np.pi / 3, 0.0))
    crit = bf.f_criterion(proc)
    assert crit.divisible
    clean = crit.f[~crit.flagged & ~np.isnan(crit.f)]
    assert clean.max() <= 1e-9
    assert crit.max_f == pytest.approx(clean.max())
    assert len(crit.singular_times) == 0


def test_f_criterion_unitary_closed_form():
    omega, theta = 2.0, np.pi / 6
    gen = bf.GeneratorSpec.hamiltonian_only(omega)
    grid = bf.uniform_grid(2 * np.pi / omega, 4000)
    prop = bf.propagate_ode(gen, grid)
    proc = bf.reduce_map(prop, bf.ProjectorBasis(theta, 0.0))
    crit = bf.f_criterion(proc)
    t = grid
    den = np.cos(theta) ** 2 + np.cos(omega * t) * np.sin(theta) ** 2
    exact = -(omega / 2) * np.sin(omega * t) * np.sin(theta) ** 2 / den
    ok = ~crit.flagged
    assert np.abs(crit.f[ok] - exact[ok]).max() < 1e-9
    # oscillating dynamics is not divisible: f goes positive
    assert not crit.divisible
    assert crit.max_f > 0.1


def test_f_criterion_flags_are_nan_and_reported():
    # theta = pi/3 forces det T through zero for a precessing qubit
    omega, theta = 2.0, np.pi / 3
    gen = bf.GeneratorSpec.hamiltonian_only(omega)
    grid = bf.uniform_grid(2 * np.pi / omega, 2000)
    prop = bf.propagate_ode(gen, grid)
    proc = bf.reduce_map(prop, bf.ProjectorBasis(theta, 0.0))
    # widen the guard band so the nodes closest to the det-T zero crossing
    # (2 T00 - 1 = 1/4 + 3/4 cos 2t) are actually excluded
    crit = bf.f_criterion(proc, denominator_tol=1e-2)
    assert crit.flagged.any()
    assert np.isnan(crit.f[crit.flagged]).all()
    assert len(crit.singular_times) == crit.flagged.sum()
    expected_zero = 0.5 * np.arccos(-1.0 / 3.0)
    assert abs(crit.singular_times[0] - expected_zero) < 0.01
    # the verdict ignores the flagged points but still sees the revival
    assert not crit.divisible


def test_f_criterion_requires_bistochastic_2x2():
    grid = bf.uniform_grid(1.0, 10)
    mats = np.empty((11, 2, 2))
    for i, t in enumerate(grid):
        e = np.exp(-0.5 * t)
        mats[i] = [[1.0, 1.0 - e], [0.0, e]]
    proc = bf.StochasticProcess(grid, mats)
    with pytest.raises(ValueError):
        bf.f_criterion(proc)


def test_kolmogorov_distance_is_l1():
    assert bf.kolmogorov_distance([0.3, -0.3]) == pytest.approx(0.6)
    assert bf.kolmogorov_distance([0.0, 0.0]) == 0.0
    rng = np.random.default_rng(51)
    for _ in range(20):
        p = rng.dirichlet([1, 1, 1])
        q = rng.dirichlet([1, 1, 1])
        assert bf.kolmogorov_distance(p - q) == pytest.approx(
            np.abs(p - q).sum())


def test_classical_generator_interpolation_vs_func():
    grid = bf.uniform_grid(1.0, 100)
    mats = np.stack([np.array([[-t, t], [t, -t]]) for t in grid])
    with_func = bf.ClassicalGenerator(grid, mats,
                                      lambda t: np.array([[-t, t], [t, -t]]))
    without = bf.ClassicalGenerator(grid, mats)
    for t in (0.005, 0.333, 0.9995):
        assert np.abs(with_func.matrix(t) - without.matrix(t)).max() < 1e-12


def test_process_lookup_and_determinants():
    _, prop = _pauli_prop()
    proc = bf.reduce_map(prop, bf.ProjectorBasis(0.3, 0.0))
    assert proc.index_of(1.0) == 1000
    assert_allclose(proc.matrix_at(1.0), proc.matrices[1000], atol=1e-15)
    dets = proc.determinants
    assert dets[0] == pytest.approx(1.0)
    assert (dets > 0).all()
    assert proc.invertible().all()
