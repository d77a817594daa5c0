import numpy as np
import pytest
from numpy.testing import assert_allclose
from scipy.linalg import expm

import blochflow as bf


def _random_spec(rng, with_affine=True):
    """Random time-independent generator with a Hermitian (possibly
    indefinite) Kossakowski matrix."""
    k = rng.normal(size=(3, 3)) + 1j * rng.normal(size=(3, 3))
    k = 0.5 * (k + k.conj().T)
    h = rng.normal(size=3) if with_affine else np.zeros(3)
    return bf.GeneratorSpec(lambda t: h.copy(), lambda t: k.copy())


def test_pauli_builder_structure():
    gen = bf.GeneratorSpec.pauli(0.4, 0.9, 0.3)
    assert_allclose(gen.kmatrix(0.0), np.diag([0.4, 0.9, 0.3]), atol=1e-15)
    lin, aff = bf.bloch_generator(gen, 0.0)
    assert_allclose(lin, np.diag([-1.2, -0.7, -1.3]), atol=1e-13)
    assert np.abs(aff).max() < 1e-13


def test_pauli_builder_accepts_callables():
    gen = bf.GeneratorSpec.pauli(lambda t: 0.5 * t, 0.2, 0.1)
    assert abs(gen.kmatrix(2.0)[0, 0] - 1.0) < 1e-14


def test_hamiltonian_only_precession():
    gen = bf.GeneratorSpec.hamiltonian_only(1.3)
    lin, aff = bf.bloch_generator(gen, 0.0)
    # d r/dt = omega e3 x r
    assert_allclose(lin, bf.cross_matrix([0.0, 0.0, 1.3]), atol=1e-13)
    assert np.abs(aff).max() < 1e-14
    assert np.abs(gen.kmatrix(0.0)).max() < 1e-14


def test_bloch_kossakowski_round_trip():
    rng = np.random.default_rng(20)
    for _ in range(300):
        gen = _random_spec(rng)
        lin, aff = bf.bloch_generator(gen, 0.0)
        omega, k = bf.kossakowski_from_bloch(lin, aff)
        assert np.abs(k - k.conj().T).max() < 1e-13
        assert_allclose(k, gen.kmatrix(0.0), atol=1e-12)
        assert_allclose(omega, 2.0 * gen.omega(0.0) if np.isscalar(
            gen.omega(0.0)) else gen.omega(0.0), atol=1e-12)


def test_bloch_generator_matches_state_action():
    """The affine pair must reproduce d/dt of the master equation applied to
    states: commutator with the Hamiltonian plus the dissipator."""
    rng = np.random.default_rng(21)
    for _ in range(50):
        gen = _random_spec(rng)
        lin, aff = bf.bloch_generator(gen, 0.0)
        r = rng.normal(size=3)
        r *= rng.uniform(0, 1) / np.linalg.norm(r)
        rho = bf.bloch_to_density(r)
        h_coeff = gen.omega(0.0)
        ham = 0.5 * sum(h_coeff[i] * bf.PAULI[i] for i in range(3))
        k = gen.kmatrix(0.0)
        out = -1j * (ham @ rho - rho @ ham)
        for i in range(3):
            for j in range(3):
                si, sj = bf.PAULI[i], bf.PAULI[j]
                out = out + 0.5 * k[i, j] * (
                    si @ rho @ sj - 0.5 * (sj @ si @ rho + rho @ sj @ si))
        r_dot = np.array([np.trace(s @ out).real for s in bf.PAULI])
        assert_allclose(r_dot, lin @ r + aff, atol=1e-11)


def test_y_matrix_spectrum_and_block():
    rng = np.random.default_rng(22)
    for _ in range(100):
        gen = _random_spec(rng)
        y = bf.y_matrix(gen, 0.0)
        assert np.abs(y - y.conj().T).max() < 1e-12
        k = gen.kmatrix(0.0)
        ey = np.sort(np.linalg.eigvalsh(y))
        ek = np.sort(np.append(np.linalg.eigvalsh(k), 0.0))
        assert_allclose(ey, ek, atol=1e-10)
        assert_allclose(bf.kossakowski_from_y(y), k, atol=1e-10)


def test_instantaneous_cp_div_margin_is_min_kossakowski_eig():
    rng = np.random.default_rng(23)
    for _ in range(100):
        gen = _random_spec(rng)
        res = bf.instantaneous_cp_div(gen, 0.0)
        emin = np.linalg.eigvalsh(gen.kmatrix(0.0)).min()
        assert abs(res.margin - emin) < 1e-12
        assert res.verdict == (emin >= -1e-9)


def test_instantaneous_p_div_unital_margin():
    gen = bf.GeneratorSpec.pauli(0.4, 0.9, 0.3)
    res = bf.instantaneous_p_div(gen, 0.0)
    # margin = half the smallest total decay rate (here gamma1 + gamma3)
    assert abs(res.margin - 0.35) < 1e-12
    assert res.verdict


def test_instantaneous_p_div_detects_negative_rate():
    gen = bf.GeneratorSpec.pauli(-0.2, 0.9, 0.3)
    # Gamma = (1.2, 0.1, 0.7): all positive, so P holds although CP fails
    assert bf.instantaneous_p_div(gen, 0.0).verdict
    assert not bf.instantaneous_cp_div(gen, 0.0).verdict
    worse = bf.GeneratorSpec.pauli(-0.6, 0.5, 0.05)
    assert not bf.instantaneous_p_div(worse, 0.0).verdict


def test_instantaneous_p_div_affine_case_brute_force():
    from scipy.optimize import minimize

    rng = np.random.default_rng(24)
    for _ in range(30):
        gen = _random_spec(rng)
        res = bf.instantaneous_p_div(gen, 0.0)
        lin, aff = bf.bloch_generator(gen, 0.0)

        def q(angles):
            chi, xi = angles
            n = np.array([np.sin(chi) * np.cos(xi),
                          np.sin(chi) * np.sin(xi), np.cos(chi)])
            return -0.5 * (n @ lin @ n + n @ aff)

        # coarse lattice, then polish the best few starts
        starts = rng.normal(size=(500, 3))
        starts /= np.linalg.norm(starts, axis=1)[:, None]
        vals = -0.5 * (np.einsum("ki,ij,kj->k", starts, lin, starts)
                       + starts @ aff)
        best = np.inf
        for i in np.argsort(vals)[:5]:
            n = starts[i]
            x0 = [np.arccos(np.clip(n[2], -1, 1)), np.arctan2(n[1], n[0])]
            out = minimize(q, x0, method="Nelder-Mead",
                           options={"xatol": 1e-10, "fatol": 1e-12})
            best = min(best, out.fun)
        assert res.margin <= best + 1e-9
        assert res.margin >= best - 1e-7


def test_propagate_ode_pauli_closed_form():
    g1, g2, g3 = 0.4, 0.9, 0.3
    gen = bf.GeneratorSpec.pauli(g1, g2, g3)
    grid = bf.uniform_grid(2.0, 2000)
    prop = bf.propagate_ode(gen, grid)
    G = np.array([g2 + g3, g1 + g3, g1 + g2])
    for idx in (100, 777, 2000):
        t = grid[idx]
        assert_allclose(prop.bloch[idx], np.diag(np.exp(-G * t)), atol=1e-11)
        assert np.abs(prop.translations[idx]).max() < 1e-12


def test_propagate_ode_unitary_closed_form():
    omega = 1.7
    gen = bf.GeneratorSpec.hamiltonian_only(omega)
    grid = bf.uniform_grid(2 * np.pi / omega, 1000)
    prop = bf.propagate_ode(gen, grid)
    for idx in (250, 500, 1000):
        t = grid[idx]
        c, s = np.cos(omega * t), np.sin(omega * t)
        rot = np.array([[c, -s, 0], [s, c, 0], [0, 0, 1.0]])
        assert np.abs(prop.bloch[idx] - rot).max() < 1e-10
    # full revolution returns to the identity
    assert np.abs(prop.bloch[-1] - np.eye(3)).max() < 1e-9


def test_propagate_timesplitting_matches_ode():
    rng = np.random.default_rng(25)
    gen = _random_spec(rng)
    grid = bf.uniform_grid(1.5, 3000)
    a = bf.propagate_ode(gen, grid)
    b = bf.propagate_timesplitting(gen, grid)
    assert np.abs(a.mats - b.mats).max() < 1e-6


def test_timesplitting_constant_generator_is_exact():
    # for a time-independent generator the midpoint product telescopes to expm
    gen = bf.GeneratorSpec.pauli(0.5, 0.2, 0.8)
    grid = bf.uniform_grid(1.0, 64)
    prop = bf.propagate_timesplitting(gen, grid)
    lin, _ = bf.bloch_generator(gen, 0.0)
    assert np.abs(prop.bloch[-1] - expm(lin)).max() < 1e-12


def test_propagator_validation():
    grid = np.array([0.0, 0.5, 1.0])
    mats = np.stack([np.eye(4)] * 3)
    bf.Propagator(grid, mats)
    with pytest.raises(ValueError):
        bf.Propagator(np.array([0.1, 0.5, 1.0]), mats)     # must start at 0
    with pytest.raises(ValueError):
        bf.Propagator(np.array([0.0, 0.5, 0.5]), mats)     # not increasing
    bad = mats.copy()
    bad[0] = 2 * np.eye(4)
    with pytest.raises(ValueError):
        bf.Propagator(grid, bad)                           # t=0 not identity


def test_propagator_views_and_lookup():
    gen = bf.GeneratorSpec.pauli(0.4, 0.9, 0.3)
    grid = bf.uniform_grid(1.0, 100)
    prop = bf.propagate_ode(gen, grid)
    assert prop.bloch.shape == (101, 3, 3)
    assert prop.translations.shape == (101, 3)
    assert prop.determinants.shape == (101,)
    assert prop.index_of(0.5) == 50
    maps = prop.maps
    assert len(maps) == 101
    assert_allclose(maps[50].bloch, prop.bloch[50], atol=1e-15)
    ch = prop.channel(0.5)
    assert_allclose(ch.bloch, prop.bloch[50], atol=1e-15)
    flags = prop.invertible()
    assert flags.shape == (101,) and flags.all()


def test_intertwiner_composition_law():
    """Lambda_t = Lambda_{t,s} Lambda_s whenever Lambda_s is invertible."""
    rng = np.random.default_rng(26)
    gen = _random_spec(rng)
    grid = bf.uniform_grid(1.0, 1000)
    prop = bf.propagate_ode(gen, grid)
    for s_idx, t_idx in [(100, 300), (250, 900), (0, 500)]:
        s, t = grid[s_idx], grid[t_idx]
        mid = bf.intertwiner(prop, t, s)
        recomposed = mid.compose(prop.channel(s))
        assert np.abs(recomposed.pauli4 - prop.mats[t_idx]).max() < 1e-9


def test_intertwiner_identity_at_equal_times():
    gen = bf.GeneratorSpec.pauli(0.1, 0.2, 0.3)
    prop = bf.propagate_ode(gen, bf.uniform_grid(1.0, 100))
    ch = bf.intertwiner(prop, 0.37, 0.37)
    assert np.abs(ch.pauli4 - np.eye(4)).max() < 1e-12


def test_intertwiner_raises_on_singular_base():
    # a map that annihilates the Bloch ball at t >= 1 cannot be inverted
    grid = np.array([0.0, 0.5, 1.0])
    mats = np.stack([np.eye(4), np.diag([1.0, 0.5, 0.5, 0.5]),
                     np.diag([1.0, 0.0, 0.0, 0.0])])
    prop = bf.Propagator(grid, mats)
    assert not prop.invertible().all()
    with pytest.raises(bf.SingularMapError):
        bf.intertwiner(prop, 1.0, 1.0)
    # inverting the healthy middle point still works
    bf.intertwiner(prop, 1.0, 0.5)


def test_uniform_grid():
    g = bf.uniform_grid(2.0, 4)
    assert_allclose(g, [0.0, 0.5, 1.0, 1.5, 2.0], atol=1e-15)
    with pytest.raises(ValueError):
        bf.uniform_grid(-1.0, 4)


def test_rotating_dephasing_nonmonotone_margins():
    """Time-dependent dephasing rate going negative: CP certificate flips
    sign exactly with the rate while P tracks the rate pair sums."""
    gen = bf.GeneratorSpec.pauli(lambda t: np.cos(t), 0.0, 0.0)
    assert bf.instantaneous_cp_div(gen, 0.1).verdict
    assert not bf.instantaneous_cp_div(gen, 2.0).verdict
    assert abs(bf.instantaneous_cp_div(gen, 2.0).margin - np.cos(2.0)) < 1e-12
